"""Dense-to-sparse knowledge distillation.

The single-frame student and the multi-frame teacher both produce sparse voxel
features. Teacher rows are aligned to the student's voxel indices, then the student is
trained to reproduce the teacher's pairwise cosine-similarity structure.
"""
from dataclasses import dataclass
import numpy as np
from . import log
from .exception import ArgumentError, AlignmentError
from .voxel import SparseVoxelTensor

EPS_NORM = 1e-12


@dataclass
class AlignedPair:
    """Student rows and the teacher rows at the same voxel indices"""
    student: SparseVoxelTensor
    teacher: SparseVoxelTensor
    matched_fraction: float


def align(student, teacher):
    """Restrict the teacher to the student's indices.

    Student voxels missing from the teacher are dropped from the pair and reflected
    in ``matched_fraction``.
    """
    if student.dims != teacher.dims:
        raise ArgumentError('Student dims {} differ from teacher dims {}'.format(student.dims, teacher.dims))
    if student.channels != teacher.channels:
        raise ArgumentError('Student has {} channels, teacher has {}'.format(student.channels, teacher.channels))
    n_s = len(student)
    if n_s == 0:
        return AlignedPair(student, SparseVoxelTensor(teacher.indices[:0], teacher.features[:0], teacher.dims), 1.0)
    # both key arrays are strictly increasing
    s_keys, t_keys = student.keys(), teacher.keys()
    pos = np.searchsorted(t_keys, s_keys)
    pos_clipped = np.minimum(pos, max(len(t_keys) - 1, 0))
    matched = (pos < len(t_keys)) & (t_keys[pos_clipped] == s_keys) if len(t_keys) > 0 else np.zeros(n_s, dtype=bool)
    count = int(np.count_nonzero(matched))
    if count == 0:
        raise AlignmentError('Student and teacher share no voxel index (N_s={})'.format(n_s))
    fraction = count / n_s
    if count < n_s:
        log.warn('Dropped {} student voxels absent from the teacher'.format(n_s - count))
    s = SparseVoxelTensor(student.indices[matched], student.features[matched], student.dims)
    t = SparseVoxelTensor(teacher.indices[pos[matched]], teacher.features[pos[matched]], teacher.dims)
    return AlignedPair(s, t, fraction)


def _unit_rows(F):
    F = np.asarray(F, dtype=np.float64)
    norms = np.linalg.norm(F, axis=1)
    valid = norms > EPS_NORM
    U = np.zeros_like(F)
    U[valid] = F[valid] / norms[valid, None]
    return U, norms, valid


def pairwise_similarity(F):
    """Cosine similarity of every pair of rows. Entries of zero-norm rows are 0, the
    self-similarity of every other row is exactly 1."""
    F = np.asarray(F, dtype=np.float64)
    if F.ndim != 2 or len(F) < 1:
        raise ArgumentError('Features must be an N x C_f array with N >= 1')
    U, _, valid = _unit_rows(F)
    P = np.clip(U @ U.T, -1.0, 1.0)
    i = np.flatnonzero(valid)
    P[i, i] = 1.0
    return P


def dskd_loss(P_S, P_T):
    """Mean squared difference of two similarity matrices"""
    P_S = np.asarray(P_S, dtype=np.float64)
    P_T = np.asarray(P_T, dtype=np.float64)
    if P_S.shape != P_T.shape or P_S.ndim != 2 or P_S.shape[0] != P_S.shape[1]:
        raise ArgumentError('Similarity matrices must be N x N with equal dims, got {} and {}'.format(P_S.shape, P_T.shape))
    return float(np.mean((P_S - P_T) ** 2))


def dskd_grad(F_S, F_T):
    """Gradient of the distillation loss with respect to the student rows.

    The teacher is a constant. Rows with zero norm receive a zero gradient.
    """
    F_S = np.asarray(F_S, dtype=np.float64)
    F_T = np.asarray(F_T, dtype=np.float64)
    if F_S.shape != F_T.shape:
        raise ArgumentError('Student and teacher rows must have equal shape')
    n = len(F_S)
    U, norms, valid = _unit_rows(F_S)
    D = U @ U.T - pairwise_similarity(F_T)
    G = (4.0 / (n * n)) * (D @ U)
    # project out the radial component, scale by 1/|f_i|
    G -= np.sum(G * U, axis=1, keepdims=True) * U
    grad = np.zeros_like(F_S)
    grad[valid] = G[valid] / norms[valid, None]
    return grad


def subsample(pair, max_voxels, seed=42):
    """Seeded uniform subset of at most ``max_voxels`` aligned rows, index order kept"""
    n = len(pair.student)
    if max_voxels is None or n <= max_voxels:
        return pair
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(n, size=max_voxels, replace=False))
    s, t = pair.student, pair.teacher
    return AlignedPair(SparseVoxelTensor(s.indices[keep], s.features[keep], s.dims),
                       SparseVoxelTensor(t.indices[keep], t.features[keep], t.dims),
                       pair.matched_fraction)


@dataclass
class DistillResult:
    loss: float
    num_student: int
    num_matched: int
    matched_fraction: float


def dskd(student, teacher, max_voxels=None, seed=42):
    """Align, compute both similarity matrices and the distillation loss"""
    pair = subsample(align(student, teacher), max_voxels, seed)
    if len(pair.student) == 0:
        return DistillResult(0.0, 0, 0, 1.0)
    loss = dskd_loss(pairwise_similarity(pair.student.features), pairwise_similarity(pair.teacher.features))
    log.info('DSKD loss {:.6g} [N_s={}, matched_fraction={:.4f}]'.format(loss, len(student), pair.matched_fraction))
    return DistillResult(loss, len(student), len(pair.student), pair.matched_fraction)
