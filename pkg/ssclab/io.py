"""Readers and writers for point clouds, labels, poses, voxel grids, sparse tensors and
network weights. All multi-byte values are little-endian.
"""
import os
import struct
from dataclasses import dataclass, field
import numpy as np
from . import log
from .exception import ArgumentError, FormatError, DataError, InputNotFoundError
from .voxel import GridSpec, VoxelLabelGrid, SparseVoxelTensor

VOXEL_MAGIC = b'SSCVOXL1'
SPARSE_MAGIC = b'SSCSPRS1'
WEIGHT_MAGIC = b'SSCWGT1'
_MAX_DIM = 1 << 16


# ------------------------------------------------------------------------------------------------
# Domain types

@dataclass
class PointCloud:
    """N points (meters) with optional per-point intensity"""
    points: np.ndarray
    intensity: np.ndarray = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        bad = ~np.all(np.isfinite(self.points), axis=1)
        if np.any(bad):
            raise DataError('Non-finite point coordinate', index=int(np.argmax(bad)))
        if self.intensity is not None:
            self.intensity = np.asarray(self.intensity, dtype=np.float64).reshape(-1)
            if len(self.intensity) != len(self.points):
                raise ArgumentError('Intensity length {} does not match point count {}'.format(
                    len(self.intensity), len(self.points)))

    def __len__(self):
        return len(self.points)

    def transformed(self, pose):
        return PointCloud(pose.apply(self.points), self.intensity)


@dataclass
class FrameLabels:
    """Per-point semantic class ids and panoptic instance ids"""
    semantic: np.ndarray
    instance: np.ndarray = None

    def __post_init__(self):
        self.semantic = np.asarray(self.semantic, dtype=np.int64).reshape(-1)
        if self.instance is None:
            self.instance = np.zeros_like(self.semantic)
        self.instance = np.asarray(self.instance, dtype=np.int64).reshape(-1)
        if len(self.instance) != len(self.semantic):
            raise ArgumentError('Semantic and instance label counts differ')

    def __len__(self):
        return len(self.semantic)

    def validate(self, pc, spec):
        if len(self) != len(pc):
            raise ArgumentError('Label count {} does not match point count {}'.format(len(self), len(pc)))
        bad = (self.semantic < 0) | ((self.semantic >= spec.num_classes) & (self.semantic != spec.ignore_label))
        if np.any(bad):
            raise DataError('Semantic label out of range', index=int(np.argmax(bad)))


@dataclass
class PoseSE3:
    """Rigid transform ``x -> rotation @ x + translation``"""
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    tolerance: float = 1e-6

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(self.rotation)) or not np.all(np.isfinite(self.translation)):
            raise DataError('Non-finite pose entry')
        if np.max(np.abs(self.rotation @ self.rotation.T - np.eye(3))) > self.tolerance:
            raise DataError('Rotation is not orthonormal')
        if abs(np.linalg.det(self.rotation) - 1.0) > self.tolerance:
            raise DataError('Rotation determinant is not +1')

    @staticmethod
    def identity():
        return PoseSE3()

    @staticmethod
    def from_matrix(m, tolerance=1e-6):
        m = np.asarray(m, dtype=np.float64)
        return PoseSE3(m[:3, :3], m[:3, 3], tolerance)

    @staticmethod
    def from_translation(t):
        return PoseSE3(np.eye(3), t)

    def matrix(self):
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def apply(self, points):
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return points @ self.rotation.T + self.translation

    def compose(self, other):
        """``self ∘ other``: apply ``other`` first"""
        return PoseSE3(self.rotation @ other.rotation,
                       self.rotation @ other.translation + self.translation,
                       max(self.tolerance, other.tolerance))

    def inverse(self):
        rt = self.rotation.T
        return PoseSE3(rt, -rt @ self.translation, self.tolerance)


# ------------------------------------------------------------------------------------------------
# Helpers

def _read_bytes(path):
    if not os.path.isfile(path):
        raise InputNotFoundError(path)
    with open(path, 'rb') as f:
        return f.read()


def _write_bytes(path, data):
    with open(path, 'wb') as f:
        f.write(data)


# ------------------------------------------------------------------------------------------------
# Point clouds (float32 x, y, z, intensity per point)

def decode_point_cloud(data):
    if len(data) % 16 != 0:
        raise FormatError('Point cloud size is not a multiple of 16 bytes', offset=len(data) - len(data) % 16)
    scan = np.frombuffer(data, dtype='<f4').reshape(-1, 4).astype(np.float64)
    return PointCloud(scan[:, :3], scan[:, 3])


def read_point_cloud(path):
    """Read a KITTI-style velodyne scan"""
    pc = decode_point_cloud(_read_bytes(path))
    log.debug('Loaded point cloud [path=\'{}\', points={}]'.format(path, len(pc)))
    return pc


def encode_point_cloud(pc):
    intensity = pc.intensity if pc.intensity is not None else np.zeros(len(pc))
    scan = np.concatenate([pc.points, intensity[:, None]], axis=1)
    return scan.astype('<f4').tobytes()


def write_point_cloud(pc, path):
    _write_bytes(path, encode_point_cloud(pc))


# ------------------------------------------------------------------------------------------------
# Labels (u32 per point: semantic = low 16 bits, instance = high 16 bits)

def decode_labels(data):
    if len(data) % 4 != 0:
        raise FormatError('Label file size is not a multiple of 4 bytes', offset=len(data) - len(data) % 4)
    words = np.frombuffer(data, dtype='<u4').astype(np.int64)
    return FrameLabels(words & 0xFFFF, words >> 16)


def read_labels(path):
    return decode_labels(_read_bytes(path))


def encode_labels(labels):
    if np.any(labels.semantic < 0) or np.any(labels.semantic > 0xFFFF) \
            or np.any(labels.instance < 0) or np.any(labels.instance > 0xFFFF):
        raise ArgumentError('Semantic and instance ids must fit in 16 bits')
    words = (labels.instance << 16) | labels.semantic
    return words.astype('<u4').tobytes()


def write_labels(labels, path):
    _write_bytes(path, encode_labels(labels))


# ------------------------------------------------------------------------------------------------
# Poses (12 numbers per line, row-major 3x4 of frame k relative to frame 0)

def decode_poses(text, tolerance=1e-3):
    poses = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if len(fields) == 0:
            continue
        if len(fields) != 12:
            raise FormatError('Expected 12 numbers, found {}'.format(len(fields)), line=lineno)
        try:
            values = np.array([float(v) for v in fields])
        except ValueError:
            raise FormatError('Pose entry is not a decimal number', line=lineno)
        m = values.reshape(3, 4)
        try:
            poses.append(PoseSE3(m[:, :3], m[:, 3], tolerance))
        except DataError as e:
            raise DataError(e.message, line=lineno)
    return poses


def read_poses(path):
    data = _read_bytes(path)
    try:
        text = data.decode('ascii')
    except UnicodeDecodeError as e:
        raise FormatError('Pose file is not ASCII text', offset=e.start)
    return decode_poses(text)


def encode_poses(poses):
    lines = []
    for pose in poses:
        m = np.concatenate([pose.rotation, pose.translation[:, None]], axis=1)
        lines.append(' '.join(repr(float(v)) for v in m.reshape(-1)))
    return '\n'.join(lines) + ('\n' if lines else '')


def write_poses(poses, path):
    with open(path, 'w') as f:
        f.write(encode_poses(poses))


def relative_transforms(poses, t, count):
    """Transforms ``T_{t+k -> t} = pose_t^-1 ∘ pose_{t+k}`` for ``k = 0..count-1``"""
    if t < 0 or count < 1 or t + count > len(poses):
        raise ArgumentError('Frame range [{}, {}) outside the {} available poses'.format(t, t + count, len(poses)))
    inv = poses[t].inverse()
    return [inv.compose(poses[t + k]) for k in range(count)]


# ------------------------------------------------------------------------------------------------
# Voxel label grids: magic, u32 L, W, H, then L*W*H u16 labels in x-major order

def encode_voxel_grid(grid):
    header = VOXEL_MAGIC + struct.pack('<3I', *grid.spec.dims)
    return header + grid.labels.astype('<u2').tobytes(order='C')


def decode_voxel_grid(data, spec=None):
    if len(data) < 20:
        raise FormatError('Voxel grid header is truncated', offset=len(data))
    if data[:8] != VOXEL_MAGIC:
        raise FormatError('Bad voxel grid magic', offset=0)
    dims = struct.unpack('<3I', data[8:20])
    if min(dims) < 1 or max(dims) > _MAX_DIM:
        raise FormatError('Voxel grid dims out of range {}'.format(dims), offset=8)
    expected = 20 + 2 * dims[0] * dims[1] * dims[2]
    if len(data) != expected:
        raise FormatError('Voxel grid payload size mismatch (expected {} bytes, found {})'.format(
            expected, len(data)), offset=min(len(data), expected))
    if spec is None:
        spec = GridSpec().with_dims(dims)
    elif spec.dims != dims:
        raise FormatError('Voxel grid dims {} do not match grid spec {}'.format(dims, spec.dims), offset=8)
    labels = np.frombuffer(data, dtype='<u2', offset=20).reshape(dims).astype(np.uint16)
    return VoxelLabelGrid(spec, labels)


def write_voxel_grid(grid, path):
    _write_bytes(path, encode_voxel_grid(grid))


def read_voxel_grid(path, spec=None):
    """Read a voxel label grid. Without ``spec`` the default voxel geometry is assumed."""
    return decode_voxel_grid(_read_bytes(path), spec)


# ------------------------------------------------------------------------------------------------
# Sparse tensors: magic, u32 L, W, H, u32 N, u32 C_f, N x 3 u32 indices, N x C_f f32 features

def encode_sparse_tensor(tensor):
    header = SPARSE_MAGIC + struct.pack('<5I', *tensor.dims, len(tensor), tensor.channels)
    return header + tensor.indices.astype('<u4').tobytes() + tensor.features.astype('<f4').tobytes()


def decode_sparse_tensor(data):
    if len(data) < 28:
        raise FormatError('Sparse tensor header is truncated', offset=len(data))
    if data[:8] != SPARSE_MAGIC:
        raise FormatError('Bad sparse tensor magic', offset=0)
    L, W, H, n, c = struct.unpack('<5I', data[8:28])
    if min(L, W, H) < 1 or max(L, W, H) > _MAX_DIM:
        raise FormatError('Sparse tensor dims out of range', offset=8)
    expected = 28 + 12 * n + 4 * n * c
    if len(data) != expected:
        raise FormatError('Sparse tensor payload size mismatch (expected {} bytes, found {})'.format(
            expected, len(data)), offset=min(len(data), expected))
    indices = np.frombuffer(data, dtype='<u4', count=3 * n, offset=28).reshape(n, 3).astype(np.int64)
    features = np.frombuffer(data, dtype='<f4', count=n * c, offset=28 + 12 * n).reshape(n, c).astype(np.float64)
    if not np.all(np.isfinite(features)):
        raise DataError('Non-finite feature value', index=int(np.argmax(~np.all(np.isfinite(features), axis=1))))
    return SparseVoxelTensor(indices, features, (L, W, H))


def write_sparse_tensor(tensor, path):
    _write_bytes(path, encode_sparse_tensor(tensor))


def read_sparse_tensor(path):
    return decode_sparse_tensor(_read_bytes(path))


# ------------------------------------------------------------------------------------------------
# Network weights: magic, then per kernel u32 k, C_in, C_out and f32 weights in
# (kx, ky, kz, cin, cout) order

def encode_weights(kernels):
    chunks = [WEIGHT_MAGIC]
    for w in kernels:
        w = np.asarray(w)
        k, cin, cout = w.shape[0], w.shape[3], w.shape[4]
        chunks.append(struct.pack('<3I', k, cin, cout))
        chunks.append(w.astype('<f4').tobytes(order='C'))
    return b''.join(chunks)


def decode_weights(data):
    if data[:len(WEIGHT_MAGIC)] != WEIGHT_MAGIC:
        raise FormatError('Bad weight file magic', offset=0)
    kernels = []
    offset = len(WEIGHT_MAGIC)
    while offset < len(data):
        if offset + 12 > len(data):
            raise FormatError('Kernel header is truncated', offset=offset)
        k, cin, cout = struct.unpack('<3I', data[offset:offset + 12])
        if k % 2 == 0 or k > 63 or cin < 1 or cout < 1 or cin > 4096 or cout > 4096:
            raise FormatError('Invalid kernel dims (k={}, C_in={}, C_out={})'.format(k, cin, cout), offset=offset)
        offset += 12
        count = k * k * k * cin * cout
        if offset + 4 * count > len(data):
            raise FormatError('Kernel weights are truncated', offset=offset)
        w = np.frombuffer(data, dtype='<f4', count=count, offset=offset).reshape(k, k, k, cin, cout)
        if not np.all(np.isfinite(w)):
            raise DataError('Non-finite weight', index=len(kernels))
        kernels.append(w.astype(np.float64))
        offset += 4 * count
    return kernels


def write_weights(kernels, path):
    _write_bytes(path, encode_weights(kernels))


def read_weights(path):
    return decode_weights(_read_bytes(path))
