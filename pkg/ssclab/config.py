"""Run configuration.

Configuration files are flat ``key = value`` text; ``#`` starts a comment. Values are
kept as strings in the property dict and converted when the :class:`RunConfig` is
constructed, so command line flags can override any key before conversion.
"""
import os
from dataclasses import dataclass, field
from . import dataset as _dataset
from . import parallel
from .exception import ArgumentError, FormatError, InputNotFoundError
from .labels import RectifyConfig
from .losses import LossWeights
from .voxel import GridSpec

KEYS = {
    'dataset', 'seed', 'threads', 'epsilon', 'class_names',
    'grid.origin', 'grid.extent', 'grid.dims', 'grid.num_classes', 'grid.empty_label', 'grid.ignore_label',
    'rectify.moving_classes', 'loss.alpha', 'loss.beta',
    'eval.absent_as_zero', 'eval.include_empty', 'distill.max_voxels',
}


def parse_config(text):
    """Parse key = value lines into a property dict"""
    prop = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise FormatError('Expected key = value', line=lineno)
        key, value = (s.strip() for s in line.split('=', 1))
        if key not in KEYS and not key.startswith('paths.'):
            raise FormatError('Unknown configuration key \'{}\''.format(key), line=lineno)
        prop[key] = value
    return prop


def load_config(path):
    if not os.path.isfile(path):
        raise InputNotFoundError(path)
    with open(path) as f:
        return parse_config(f.read())


def _floats(value, n, key):
    try:
        v = tuple(float(x) for x in str(value).split(','))
    except ValueError:
        raise ArgumentError('{} must be {} comma-separated numbers'.format(key, n))
    if len(v) != n:
        raise ArgumentError('{} must have {} components'.format(key, n))
    return v


def _int(value, key):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ArgumentError('{} must be an integer [value=\'{}\']'.format(key, value))


def _float(value, key):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ArgumentError('{} must be a number [value=\'{}\']'.format(key, value))


def _bool(value, key):
    s = str(value).lower()
    if s in ('1', 'true', 'yes', 'on'):
        return True
    if s in ('0', 'false', 'no', 'off'):
        return False
    raise ArgumentError('{} must be a boolean [value=\'{}\']'.format(key, value))


@dataclass
class RunConfig:
    dataset: str = 'semantickitti'
    grid: GridSpec = field(default_factory=GridSpec)
    rectify: RectifyConfig = field(default_factory=RectifyConfig)
    weights: LossWeights = field(default_factory=LossWeights)
    class_names: tuple = _dataset.SEMANTICKITTI.class_names
    paths: dict = field(default_factory=dict)
    seed: int = 42
    threads: int = 1
    epsilon: float = 0.0
    absent_as_zero: bool = False
    include_empty: bool = False
    max_voxels: int = None

    @staticmethod
    def from_prop(prop):
        """Build a configuration from a property dict (values as strings or native types)"""
        name = prop.get('dataset', 'semantickitti')
        if name == 'custom':
            if 'grid.num_classes' not in prop:
                raise ArgumentError('The custom dataset requires grid.num_classes')
            num_classes = _int(prop['grid.num_classes'], 'grid.num_classes')
            names = _dataset.generic_class_names(num_classes)
            moving = frozenset()
        else:
            p = _dataset.preset(name)
            num_classes = _int(prop.get('grid.num_classes', p.num_classes), 'grid.num_classes')
            if num_classes != p.num_classes:
                raise ArgumentError('Dataset {} has {} classes'.format(name, p.num_classes))
            names, moving = p.class_names, p.moving_classes
        if 'class_names' in prop:
            names = tuple(s.strip() for s in str(prop['class_names']).split(','))
        if len(names) != num_classes - 1:
            raise ArgumentError('Expected {} class names, got {}'.format(num_classes - 1, len(names)))
        default = GridSpec()
        grid = GridSpec(
            origin=_floats(prop.get('grid.origin', ','.join(map(str, default.origin))), 3, 'grid.origin'),
            extent=_floats(prop.get('grid.extent', ','.join(map(str, default.extent))), 3, 'grid.extent'),
            dims=tuple(_int(v, 'grid.dims') for v in str(prop.get('grid.dims', '256,256,32')).split(',')),
            num_classes=num_classes,
            empty_label=_int(prop.get('grid.empty_label', 0), 'grid.empty_label'),
            ignore_label=_int(prop.get('grid.ignore_label', 255), 'grid.ignore_label'))
        if 'rectify.moving_classes' in prop:
            value = str(prop['rectify.moving_classes']).strip()
            moving = frozenset(_int(v, 'rectify.moving_classes') for v in value.split(',')) if value else frozenset()
        rectify = RectifyConfig(moving, grid.ignore_label)
        rectify.validate(grid)
        weights = LossWeights(_float(prop.get('loss.alpha', 1.0), 'loss.alpha'),
                              _float(prop.get('loss.beta', 3000.0), 'loss.beta'))
        threads = _int(prop['threads'], 'threads') if 'threads' in prop else parallel.default_num_threads()
        if threads < 1:
            raise ArgumentError('threads must be >= 1')
        epsilon = _float(prop.get('epsilon', 0.0), 'epsilon')
        if epsilon < 0:
            raise ArgumentError('epsilon must be >= 0')
        max_voxels = prop.get('distill.max_voxels')
        if max_voxels is not None:
            max_voxels = _int(max_voxels, 'distill.max_voxels')
            if max_voxels < 1:
                raise ArgumentError('distill.max_voxels must be >= 1')
        seed = _int(prop.get('seed', 42), 'seed')
        if seed < 0:
            raise ArgumentError('seed must be >= 0')
        return RunConfig(
            dataset=name, grid=grid, rectify=rectify, weights=weights,
            class_names=names,
            paths={k[len('paths.'):]: v for k, v in prop.items() if k.startswith('paths.')},
            seed=seed, threads=threads, epsilon=epsilon,
            absent_as_zero=_bool(prop.get('eval.absent_as_zero', False), 'eval.absent_as_zero'),
            include_empty=_bool(prop.get('eval.include_empty', False), 'eval.include_empty'),
            max_voxels=max_voxels)
