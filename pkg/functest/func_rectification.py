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

# ## Rectification of completion labels
#
# This test aggregates a synthetic sequence with a moving car into completion labels, and visualizes the trace left by the car before and after rectification.

import os
import numpy as np
import pandas as pd
# %matplotlib inline
import matplotlib.pyplot as plt
import sscfunctest as ft
import ssclab as ssc

# %load_ext ssclab_jupyter

from ssclab_jupyter import jupyter_init_config, plot_grid_slice
ssc.init(jupyter_init_config())
ssc.info()

spec = ssc.synthgen.demo_spec()
cfg = ssc.labels.RectifyConfig()

# Aggregate an increasing number of frames. The trace of the car grows with the number of frames, while rectification keeps only the voxels inside the car's cube in the current frame.

stats = pd.DataFrame(columns=['occupied', 'moving', 'moving (rectified)', 'removed'], dtype=np.int64)
grids = {}
for frames in [1, 2, 3, 5]:
    scene = ssc.synthgen.generate(ssc.synthgen.default_script(frame_count=frames), spec)
    grid = ssc.labels.aggregate_completion_labels(
        [(pc, lab.semantic) for pc, lab in scene.frames], scene.transforms(), spec)
    pc0, lab0 = scene.frames[0]
    rectified = ssc.labels.rectify(grid, pc0, lab0, cfg, spec)
    grids[frames] = (grid, rectified)
    stats.loc[frames] = [
        grid.occupied_count(),
        ssc.labels.moving_voxel_count(grid, cfg),
        ssc.labels.moving_voxel_count(rectified, cfg),
        ft.changed_voxels(grid, rectified)]

stats

# The rectified moving voxel count must not depend on the number of aggregated frames

assert stats['moving (rectified)'].nunique() == 1

# Slices through the car. Traces appear to the right of the car before rectification and become ignored (black) after it.

z = 2
fig, axes = plt.subplots(len(grids), 2, figsize=(8, 4 * len(grids)))
for row, (frames, (grid, rectified)) in zip(axes, grids.items()):
    plot_grid_slice(row[0], grid, z, 'aggregated ({} frames)'.format(frames))
    plot_grid_slice(row[1], rectified, z, 'rectified')
plt.show()

grid, rectified = grids[5]
ft.save(os.path.join(ft.output_dir, 'rectification.png'),
        np.concatenate([ft.label_image(grid, z), ft.label_image(rectified, z)], axis=1))

ssc.shutdown()
