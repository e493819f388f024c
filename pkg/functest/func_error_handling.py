# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:light
#     text_representation:
#       extension: .py
#       format_name: light
#       format_version: '1.4'
#       jupytext_version: 1.2.4
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# ## Error handling
#
# This test covers typical error outputs from ssclab.

import traceback
import numpy as np
import ssclab as ssc

# %load_ext ssclab_jupyter

# ### No outputs before initialization
#
# Log messages are dropped until the logger is initialized.

ssc.info()

from ssclab_jupyter import jupyter_init_config
ssc.init(jupyter_init_config())
ssc.info()

# ### Malformed files
#
# Decoding errors carry the byte offset or the line of the problem.

try:
    ssc.io.decode_voxel_grid(b'SSCVOXL1' + bytes(13))
except ssc.FormatError:
    traceback.print_exc()

try:
    ssc.io.decode_poses('1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0 0 0 1 0 0 0 0 1\n')
except ssc.FormatError:
    traceback.print_exc()

# ### Alignment failure
#
# A student and a teacher without a common voxel index cannot be aligned.

s = ssc.voxel.SparseVoxelTensor(np.array([[0, 0, 0]]), np.ones((1, 2)), (2, 2, 2))
t = ssc.voxel.SparseVoxelTensor(np.array([[1, 1, 1]]), np.ones((1, 2)), (2, 2, 2))
try:
    ssc.distill.align(s, t)
except ssc.AlignmentError:
    traceback.print_exc()

# ### Undefined metrics
#
# Every class is absent from an evaluation where all voxels are ignored.

cm = ssc.metrics.ConfusionMatrix.zeros(3)
try:
    ssc.metrics.miou(cm)
except ssc.UndefinedMetricError:
    traceback.print_exc()

ssc.shutdown()
