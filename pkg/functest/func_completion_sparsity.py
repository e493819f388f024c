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

# ## Sparsity of the completion network
#
# The completion network runs on a dense volume, and its output support must stay within the dilation of the input support by the receptive radius. This test checks the bound and the consistency of the two convolution backends on a synthetic scene.

import numpy as np
import pandas as pd
# %matplotlib inline
import matplotlib.pyplot as plt
import ssclab as ssc
from ssclab.cli import occupancy_features

# %load_ext ssclab_jupyter

from ssclab_jupyter import jupyter_init_config
ssc.init(dict(jupyter_init_config(), parallel={'parallel::default': {'num_threads': -1}}))
ssc.info()

spec = ssc.synthgen.demo_spec()
scene = ssc.synthgen.generate(ssc.synthgen.default_script(), spec)
grid = ssc.labels.aggregate_completion_labels(
    [(pc, lab.semantic) for pc, lab in scene.frames], scene.transforms(), spec)
volume = occupancy_features(grid, 4)
params = ssc.net.init_completion_params(4, seed=0)
radius = ssc.net.receptive_radius(params)
radius

out_dense = ssc.net.completion_forward(volume, params, 'dense')
out_sparse = ssc.net.completion_forward(volume, params, 'sparse')
np.max(np.abs(out_dense - out_sparse))

assert np.allclose(out_dense, out_sparse, atol=1e-9)

# Occupied voxels before and after the forward pass for a range of sparsity thresholds

support = ssc.voxel.dilate_support(np.any(volume != 0, axis=-1), radius)
df = pd.DataFrame(columns=['before', 'after', 'dilated support'])
for epsilon in [0, 1e-6, 1e-3, 1e-1]:
    after = ssc.voxel.sparsify(out_dense, epsilon)
    mask = np.zeros(spec.dims, dtype=bool)
    mask[tuple(after.indices.T)] = True
    assert not np.any(mask & ~support)
    df.loc[epsilon] = [len(ssc.voxel.sparsify(volume, epsilon)), len(after), int(np.count_nonzero(support))]
df

df.plot(logx=True, marker='o')
plt.xlabel('epsilon')
plt.ylabel('occupied voxels')
plt.show()

ssc.shutdown()
