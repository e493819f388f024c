"""IPython extension for ssclab"""
import os
import sys
import time
import numpy as np
import matplotlib.pyplot as plt
from tqdm import tqdm_notebook
import ssclab as ssc


def jupyter_init_config():
    """init() configuration for jupyter notebooks"""
    return {
        'logger': 'logger::jupyter',
        'progress': 'progress::jupyter',
    }


def widen(arg):
    from IPython.core.display import display, HTML
    display(HTML("<style>.container { width:100% !important; }</style>"))


def plot_grid_slice(ax, grid, z, title=None):
    """Draw the z-th horizontal slice of a voxel label grid.

    Empty voxels are white, ignored voxels black, classes use the tab20 colormap.
    """
    labels = grid.labels[:, :, z].astype(np.float64)
    img = np.ma.masked_where(labels == grid.spec.empty_label, labels)
    cmap = plt.get_cmap('tab20').copy()
    cmap.set_bad('white')
    cmap.set_over('black')
    ax.imshow(img.T, origin='lower', cmap=cmap, vmin=0, vmax=grid.spec.num_classes - 1, interpolation='nearest')
    ax.set_xticks([])
    ax.set_yticks([])
    if title is not None:
        ax.set_title(title)


def load_ipython_extension(ip):
    """Register as IPython extension"""
    ip.register_magic_function(widen)

    @ssc.ssc_component('logger::jupyter')
    class JupyterLogger(ssc.log.LoggerContext):
        """Logger for jupyter notebook"""
        def construct(self, prop):
            self.severity = 0
            self.n = 0
            self.start = time.time()
            return True

        def log(self, level, severity, filename, line, message):
            if self.severity > severity:
                return
            out = sys.stderr if level >= ssc.log.LogLevel.Warn else sys.stdout
            name = {ssc.log.LogLevel.Debug: 'D', ssc.log.LogLevel.Warn: 'W', ssc.log.LogLevel.Err: 'E'}.get(level, 'I')
            elapsed = time.time() - self.start
            file_no_ext = os.path.splitext(os.path.basename(filename))[0]
            line_and_file = '{}@{}'.format(line, file_no_ext)[:10]
            header = '[{}|{:.3f}|{:<10}] '.format(name, elapsed, line_and_file)
            spaces = ('.' * (self.n * 2)) + (' ' if self.n > 0 else '')
            print(header + spaces + message, file=out)

        def update_indentation(self, n):
            self.n += n

        def set_severity(self, severity):
            self.severity = severity

    @ssc.ssc_component('progress::jupyter')
    class JupyterProgress(ssc.progress.ProgressContext):
        """Progress reporter for jupyter notebook"""
        def start(self, mode, total, total_time):
            self.pbar = tqdm_notebook(total=total if mode == ssc.progress.ProgressMode.Samples else total_time)

        def update(self, processed):
            self.pbar.update(max(0, processed - self.pbar.n))

        def update_time(self, elapsed):
            self.pbar.update(max(0, elapsed - self.pbar.n))

        def end(self):
            self.pbar.update(max(0, self.pbar.total - self.pbar.n))
            self.pbar.close()
