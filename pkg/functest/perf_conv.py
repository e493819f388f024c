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

# ## Performance of the convolution backends
#
# This test compares the dense tap loop (`conv::dense`) against the scatter over occupied voxels (`conv::sparse`) for increasing occupancy and thread counts.

import timeit
import numpy as np
import pandas as pd
# %matplotlib inline
import matplotlib.pyplot as plt
import ssclab as ssc

# %load_ext ssclab_jupyter

from ssclab_jupyter import jupyter_init_config
ssc.init(jupyter_init_config())
ssc.info()

rng = np.random.default_rng(0)
dims = (64, 64, 16)
channels = 8
kernel = ssc.net.init_kernel(rng, 5, channels, channels)

occupancies = [0.001, 0.01, 0.05, 0.2]
df = pd.DataFrame(columns=['dense', 'sparse'], index=occupancies, dtype=np.float64)
for occupancy in occupancies:
    volume = np.zeros(dims + (channels,))
    mask = rng.random(dims) < occupancy
    volume[mask] = rng.normal(size=(int(np.count_nonzero(mask)), channels))
    for method in df.columns:
        df.loc[occupancy, method] = timeit.timeit(lambda: ssc.net.conv3d(volume, kernel, method), number=1)
df

df.plot(logx=True, marker='o')
plt.xlabel('occupancy')
plt.ylabel('time (s)')
plt.show()

# Scaling of the dense backend with the number of threads

volume = rng.normal(size=dims + (channels,))
threads = [1, 2, 4]
scaling = pd.Series(index=threads, dtype=np.float64)
for n in threads:
    ssc.parallel.init('parallel::default', {'num_threads': n})
    scaling[n] = timeit.timeit(lambda: ssc.net.conv3d(volume, kernel, 'dense'), number=1)
scaling

ssc.shutdown()
