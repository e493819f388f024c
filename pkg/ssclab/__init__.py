"""Entry point of ssclab, a toolkit for LiDAR semantic scene completion:
completion-label generation and rectification, the sparsity-preserving completion
network, dense-to-sparse distillation, training losses and evaluation metrics.
"""
import numpy as np
from . import comp
from . import log
from . import progress
from . import parallel
from .comp import ssc_component
from .exception import *
from . import io
from . import voxel
from . import labels
from . import net
from . import distill
from . import losses
from . import metrics
from . import synthgen
from . import gradcheck
from . import dataset
from . import config

__version__ = '0.1.0'


def _init_subsystem(subsystem, value, default):
    if isinstance(value, dict):
        (name, prop), = value.items()
    else:
        name, prop = (value or default), {}
    subsystem.init(name, prop)


def init(prop=None):
    """Initialize the subsystems.

    ``prop`` may hold ``logger``, ``progress`` and ``parallel`` entries, each either an
    implementation name or a single-item dict ``{name: properties}``.
    """
    prop = prop or {}
    _init_subsystem(log, prop.get('logger'), 'logger::default')
    _init_subsystem(progress, prop.get('progress'), 'progress::null')
    _init_subsystem(parallel, prop.get('parallel'), 'parallel::default')


def shutdown():
    parallel.shutdown()
    progress.shutdown()
    log.shutdown()


def info():
    """Print information about the framework"""
    log.info('ssclab {} [threads={}]'.format(__version__, parallel.num_threads()))


def array(*args, **kwargs):
    """Numpy array with the default floating point type of ssclab"""
    kwargs.setdefault('dtype', np.float64)
    return np.array(*args, **kwargs)
