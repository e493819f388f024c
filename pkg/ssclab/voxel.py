"""Voxel-space geometry, point quantization, label voting and sparse voxel tensors"""
from dataclasses import dataclass, field
import numpy as np
from . import log
from .exception import ArgumentError, DataError


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the voxel space.

    ``origin`` is the lower corner in meters, ``extent`` the size of the covered box,
    ``dims`` the voxel counts (L, W, H). Labels are ``0..num_classes-1`` where
    ``empty_label`` marks free space, and ``ignore_label`` (>= num_classes) marks voxels
    excluded from losses and metrics.
    """
    origin: tuple = (0.0, -25.6, -2.0)
    extent: tuple = (51.2, 51.2, 6.4)
    dims: tuple = (256, 256, 32)
    num_classes: int = 20
    empty_label: int = 0
    ignore_label: int = 255

    def __post_init__(self):
        object.__setattr__(self, 'origin', tuple(float(v) for v in self.origin))
        object.__setattr__(self, 'extent', tuple(float(v) for v in self.extent))
        object.__setattr__(self, 'dims', tuple(int(v) for v in self.dims))
        if len(self.origin) != 3 or len(self.extent) != 3 or len(self.dims) != 3:
            raise ArgumentError('origin, extent and dims must have 3 components')
        if not all(np.isfinite(self.origin)) or not all(np.isfinite(self.extent)):
            raise ArgumentError('origin and extent must be finite')
        if min(self.extent) <= 0:
            raise ArgumentError('extent must be positive [extent={}]'.format(self.extent))
        if min(self.dims) < 1:
            raise ArgumentError('dims must be >= 1 [dims={}]'.format(self.dims))
        if not 0 <= self.empty_label < self.num_classes:
            raise ArgumentError('empty_label must be in [0, num_classes)')
        if self.ignore_label < self.num_classes or self.ignore_label > 0xFFFF:
            raise ArgumentError('ignore_label must be in [num_classes, 65535]')

    @property
    def voxel_size(self):
        return np.asarray(self.extent) / np.asarray(self.dims)

    @property
    def num_voxels(self):
        return int(np.prod(self.dims))

    def with_dims(self, dims):
        """Same origin and voxel size, different voxel counts"""
        dims = tuple(int(v) for v in dims)
        extent = tuple(self.voxel_size * np.asarray(dims))
        return GridSpec(self.origin, extent, dims, self.num_classes,
                        self.empty_label, self.ignore_label)


def default_grid_spec():
    """Completion-label range of SemanticKITTI: 256x256x32 voxels of 0.2 m, C = 20"""
    return GridSpec()


def semanticposs_grid_spec():
    """Same voxel space as SemanticKITTI with 11 semantic classes plus empty"""
    return GridSpec(num_classes=12)


class VoxelLabelGrid:
    """Dense L x W x H grid of class labels"""

    def __init__(self, spec, labels=None):
        self.spec = spec
        if labels is None:
            labels = np.full(spec.dims, spec.empty_label, dtype=np.uint16)
        labels = np.asarray(labels)
        if labels.shape != spec.dims:
            raise ArgumentError('Label array shape {} does not match dims {}'.format(
                labels.shape, spec.dims))
        bad = (labels >= spec.num_classes) & (labels != spec.ignore_label)
        if np.any(bad) or np.any(labels < 0):
            raise DataError('Voxel label out of range', index=_first_index(bad | (labels < 0)))
        self.labels = labels.astype(np.uint16, copy=False)

    def __eq__(self, other):
        if not isinstance(other, VoxelLabelGrid):
            return NotImplemented
        return self.spec.dims == other.spec.dims and np.array_equal(self.labels, other.labels)

    def __repr__(self):
        return 'VoxelLabelGrid(dims={}, occupied={})'.format(self.spec.dims, self.occupied_count())

    def copy(self):
        return VoxelLabelGrid(self.spec, self.labels.copy())

    def occupied_mask(self):
        """Voxels that are neither empty nor ignored"""
        return (self.labels != self.spec.empty_label) & (self.labels != self.spec.ignore_label)

    def occupied_count(self):
        return int(np.count_nonzero(self.occupied_mask()))

    def voxels_of(self, class_id):
        """Sorted (x,y,z) indices of voxels labeled ``class_id``"""
        return np.argwhere(self.labels == class_id)


def _first_index(mask):
    hits = np.argwhere(mask)
    return tuple(int(v) for v in hits[0]) if len(hits) > 0 else None


def _linear(indices, dims):
    indices = np.asarray(indices, dtype=np.int64)
    return (indices[:, 0] * dims[1] + indices[:, 1]) * dims[2] + indices[:, 2]


@dataclass
class SparseVoxelTensor:
    """Non-empty voxels of a feature volume.

    ``indices`` (N x 3) are strictly increasing in lexicographic (x,y,z) order and lie
    inside ``dims``; ``features`` holds one row of C_f values per index.
    """
    indices: np.ndarray
    features: np.ndarray
    dims: tuple = field(default=(256, 256, 32))

    def __post_init__(self):
        self.dims = tuple(int(v) for v in self.dims)
        self.indices = np.asarray(self.indices, dtype=np.int64).reshape(-1, 3)
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 2 or len(features) != len(self.indices):
            raise ArgumentError('Features must be an N x C_f array with one row per index')
        self.features = features
        if len(self.indices) == 0:
            return
        if np.any(self.indices < 0) or np.any(self.indices >= np.asarray(self.dims)):
            raise DataError('Voxel index outside dims {}'.format(self.dims),
                            index=int(np.argmax(np.any((self.indices < 0) | (self.indices >= np.asarray(self.dims)), axis=1))))
        keys = _linear(self.indices, self.dims)
        steps = np.diff(keys)
        if np.any(steps <= 0):
            raise DataError('Voxel indices must be strictly increasing', index=int(np.argmax(steps <= 0)) + 1)

    def __len__(self):
        return len(self.indices)

    @property
    def channels(self):
        return self.features.shape[1]

    def keys(self):
        """Linear voxel keys, increasing"""
        return _linear(self.indices, self.dims)


def voxelize_points(points, spec):
    """Quantize an N x 3 point array.

    Returns ``(indices, mask)`` where ``indices`` is N x 3 and ``mask`` marks points
    inside the half-open voxel range. Indices of filtered points are undefined.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    origin = np.asarray(spec.origin)
    size = spec.voxel_size
    idx = np.floor((points - origin) / size).astype(np.int64)
    # floor of the quotient can be off by one ulp at voxel boundaries
    lower = origin + idx * size
    idx[lower > points] -= 1
    upper = origin + (idx + 1) * size
    idx[upper <= points] += 1
    mask = np.all((idx >= 0) & (idx < np.asarray(spec.dims)), axis=1)
    return idx, mask


def voxelize_point(p, spec):
    """Voxel index of ``p`` or None when the point lies outside the grid"""
    idx, mask = voxelize_points(np.asarray(p, dtype=np.float64).reshape(1, 3), spec)
    return tuple(int(v) for v in idx[0]) if mask[0] else None


def voxelize_labels(pc, sem, spec):
    """Majority vote of point labels per voxel.

    Points outside the grid and ignore-labeled points cast no vote; voxels without
    votes are empty. Ties go to the lowest class id.
    """
    points = np.asarray(pc.points, dtype=np.float64).reshape(-1, 3)
    sem = np.asarray(sem, dtype=np.int64).reshape(-1)
    if len(sem) != len(points):
        raise ArgumentError('Label count {} does not match point count {}'.format(len(sem), len(points)))
    bad = (sem < 0) | ((sem >= spec.num_classes) & (sem != spec.ignore_label))
    if np.any(bad):
        raise DataError('Semantic label out of range', index=int(np.argmax(bad)))
    labels = np.full(spec.dims, spec.empty_label, dtype=np.uint16)
    idx, mask = voxelize_points(points, spec)
    mask &= sem != spec.ignore_label
    if not np.any(mask):
        return VoxelLabelGrid(spec, labels)
    C = spec.num_classes
    keys = _linear(idx[mask], spec.dims) * C + sem[mask]
    uniq, counts = np.unique(keys, return_counts=True)
    vox = uniq // C
    cls = uniq % C
    order = np.lexsort((cls, -counts, vox))
    vox, cls = vox[order], cls[order]
    first = np.ones(len(vox), dtype=bool)
    first[1:] = vox[1:] != vox[:-1]
    labels.reshape(-1)[vox[first]] = cls[first]
    log.debug('Voxelized {} labeled points into {} voxels'.format(int(np.count_nonzero(mask)), int(np.count_nonzero(first))))
    return VoxelLabelGrid(spec, labels)


def sparsify(volume, epsilon=0.0):
    """Extract voxels whose feature max-norm exceeds ``epsilon``"""
    if epsilon < 0:
        raise ArgumentError('epsilon must be >= 0 [epsilon={}]'.format(epsilon))
    volume = np.asarray(volume)
    if volume.ndim != 4:
        raise ArgumentError('Feature volume must be L x W x H x C_f')
    mask = np.max(np.abs(volume), axis=-1) > epsilon
    return SparseVoxelTensor(np.argwhere(mask), volume[mask], volume.shape[:3])


def densify(tensor):
    """Scatter a sparse tensor back into a dense L x W x H x C_f volume"""
    volume = np.zeros(tensor.dims + (tensor.channels,), dtype=np.float64)
    if len(tensor) > 0:
        volume[tuple(tensor.indices.T)] = tensor.features
    return volume


def remap_labels(raw, learning_map, ignore_label=255):
    """Map raw dataset label ids to training ids. Unmapped ids become ``ignore_label``."""
    raw = np.asarray(raw, dtype=np.int64)
    size = max(max(learning_map) + 1, int(raw.max()) + 1 if raw.size > 0 else 0)
    lut = np.full(size, ignore_label, dtype=np.int64)
    for k, v in learning_map.items():
        lut[k] = v
    return lut[raw]


def dilate_support(mask, radius):
    """Chebyshev dilation of a boolean grid (separable box maximum along each axis)"""
    out = np.asarray(mask, dtype=bool)
    for axis in range(out.ndim):
        n = out.shape[axis]
        acc = out.copy()
        for s in range(1, min(radius, n - 1) + 1):
            lo = [slice(None)] * out.ndim
            hi = [slice(None)] * out.ndim
            lo[axis], hi[axis] = slice(0, n - s), slice(s, n)
            acc[tuple(lo)] |= out[tuple(hi)]
            acc[tuple(hi)] |= out[tuple(lo)]
        out = acc
    return out
