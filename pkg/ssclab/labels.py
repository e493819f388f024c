"""Completion-label generation by multi-frame concatenation and rectification of the
traces that moving objects leave in the concatenated labels.
"""
from dataclasses import dataclass, field
import numpy as np
from . import log
from . import parallel
from . import progress
from .exception import ArgumentError
from .io import PointCloud
from .voxel import voxelize_points, voxelize_labels


@dataclass(frozen=True)
class InstanceCube:
    """Axis-aligned voxel bound of one instance. Both corners are inclusive."""
    min: tuple
    max: tuple
    instance: int = 0

    def slices(self):
        return tuple(slice(lo, hi + 1) for lo, hi in zip(self.min, self.max))

    def contains(self, index):
        return all(lo <= v <= hi for v, lo, hi in zip(index, self.min, self.max))


@dataclass(frozen=True)
class RectifyConfig:
    """Classes whose traces are removed, and the label written in their place"""
    moving_classes: frozenset = field(default_factory=lambda: frozenset(range(1, 9)))
    unlabeled_class: int = 255

    def __post_init__(self):
        object.__setattr__(self, 'moving_classes', frozenset(int(c) for c in self.moving_classes))

    def validate(self, spec):
        if any(c < 1 or c >= spec.num_classes for c in self.moving_classes):
            raise ArgumentError('Moving classes must lie in [1, {})'.format(spec.num_classes))
        if self.unlabeled_class != spec.ignore_label:
            raise ArgumentError('Unlabeled class must equal the ignore label {}'.format(spec.ignore_label))


def aggregate_completion_labels(frames, transforms, spec):
    """Concatenate the labeled points of frames t..t+T-1 in the coordinates of frame t
    and voxelize them by majority vote.

    ``frames`` holds ``(PointCloud, semantic ids)`` pairs and ``transforms[k]`` maps
    frame t+k into frame t.
    """
    if len(frames) != len(transforms):
        raise ArgumentError('Got {} frames but {} transforms'.format(len(frames), len(transforms)))
    if len(frames) == 0:
        raise ArgumentError('At least one frame is required')

    def process(k):
        pc, sem = frames[k]
        sem = np.asarray(sem, dtype=np.int64).reshape(-1)
        if len(sem) != len(pc):
            raise ArgumentError('Frame {}: label count {} does not match point count {}'.format(k, len(sem), len(pc)))
        progress.update(k)
        return transforms[k].apply(pc.points), sem

    progress.start(progress.ProgressMode.Samples, len(frames))
    results = parallel.foreach(range(len(frames)), process)
    progress.end()
    points = np.concatenate([r[0] for r in results], axis=0)
    sem = np.concatenate([r[1] for r in results], axis=0)
    grid = voxelize_labels(PointCloud(points), sem, spec)
    log.info('Aggregated {} frames ({} points) into {} occupied voxels'.format(
        len(frames), len(points), grid.occupied_count()))
    return grid


def instance_cubes(pc, labels, class_id, spec):
    """Inclusive voxel bound of every instance of ``class_id``, ordered by instance id"""
    sel = labels.semantic == class_id
    if not np.any(sel):
        return []
    idx, mask = voxelize_points(pc.points[sel], spec)
    idx, inst = idx[mask], labels.instance[sel][mask]
    cubes = []
    for d in np.unique(inst):
        m = idx[inst == d]
        cubes.append(InstanceCube(tuple(int(v) for v in m.min(axis=0)),
                                  tuple(int(v) for v in m.max(axis=0)), int(d)))
    return cubes


def cube_mask(cubes, spec):
    """Boolean grid marking the union of cubes"""
    mask = np.zeros(spec.dims, dtype=bool)
    for cube in cubes:
        mask[cube.slices()] = True
    return mask


def removal_masks(grid, pc, labels, cfg, spec):
    """Per moving class, the voxels that rectification sets to the unlabeled class"""
    if grid.spec.dims != spec.dims:
        raise ArgumentError('Grid dims {} do not match grid spec {}'.format(grid.spec.dims, spec.dims))
    cfg.validate(spec)
    labels.validate(pc, spec)
    classes = sorted(cfg.moving_classes)

    def process(c):
        voxels = grid.labels == c
        if not np.any(voxels):
            return voxels
        if not np.any(labels.semantic == c):
            # the frame has no points of this class, so every voxel of it is a trace
            return voxels
        return voxels & ~cube_mask(instance_cubes(pc, labels, c, spec), spec)

    return dict(zip(classes, parallel.foreach(classes, process)))


def apply_removal(grid, masks, cfg):
    """Set the voxels of precomputed removal masks to ``cfg.unlabeled_class``"""
    out = grid.labels.copy()
    with log.LogIndenter():
        for c, mask in masks.items():
            n = int(np.count_nonzero(mask))
            if n > 0:
                log.debug('Class {}: {} trace voxels removed'.format(c, n))
            out[mask] = cfg.unlabeled_class
    log.info('Rectified completion labels [removed={}]'.format(sum(int(np.count_nonzero(m)) for m in masks.values())))
    return type(grid)(grid.spec, out)


def rectify(grid, pc, labels, cfg, spec):
    """Remove traces of moving objects from a completion label grid.

    For every moving class, voxels of that class outside the union of the class's
    instance cubes in the current frame become ``cfg.unlabeled_class``. When the frame
    holds no point of the class, all of its voxels are removed.
    """
    return apply_removal(grid, removal_masks(grid, pc, labels, cfg, spec), cfg)


def moving_voxel_count(grid, cfg):
    """Number of voxels labeled with a moving class"""
    return int(np.count_nonzero(np.isin(grid.labels, sorted(cfg.moving_classes))))
