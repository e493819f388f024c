"""Training-objective components: voxelwise cross entropy, Lovász-softmax and the
weighted total. Losses take per-voxel class probabilities (softmax is applied by the
caller) and return the scalar loss with its gradient with respect to the probabilities.
"""
from dataclasses import dataclass
import numpy as np
from .exception import ArgumentError, UndefinedLossError

EPS_LOG = 1e-12


@dataclass(frozen=True)
class LossWeights:
    """``total = ce + alpha * lovasz + beta * dskd``"""
    alpha: float = 1.0
    beta: float = 3000.0

    def __post_init__(self):
        for name in ('alpha', 'beta'):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ArgumentError('{} must be finite and >= 0 [value={}]'.format(name, v))


@dataclass
class ProbVolume:
    """M x C class probabilities of the voxels under consideration, and their labels"""
    probs: np.ndarray
    labels: np.ndarray
    ignore_label: int = 255

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if self.probs.ndim != 2 or len(self.probs) != len(self.labels):
            raise ArgumentError('Probabilities must be M x C with one label per row')
        if np.any(self.probs < 0) or np.any(self.probs > 1):
            raise ArgumentError('Probabilities must lie in [0, 1]')
        if np.any(np.abs(self.probs.sum(axis=1) - 1) > 1e-6):
            raise ArgumentError('Probability rows must sum to 1')
        bad = (self.labels < 0) | ((self.labels >= self.num_classes) & (self.labels != self.ignore_label))
        if np.any(bad):
            raise ArgumentError('Label out of range at voxel {}'.format(int(np.argmax(bad))))

    @property
    def num_classes(self):
        return self.probs.shape[1]

    def valid(self):
        return self.labels != self.ignore_label


def softmax(logits, axis=-1):
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def _check_nonempty(valid):
    if not np.any(valid):
        raise UndefinedLossError('Every voxel is ignored')


def cross_entropy_terms(probs, labels, valid):
    """Unvalidated cross entropy and its gradient; used by the gradient checks"""
    n = int(np.count_nonzero(valid))
    rows = np.flatnonzero(valid)
    p = probs[rows, labels[rows]] + EPS_LOG
    loss = float(np.mean(-np.log(p)))
    grad = np.zeros_like(probs)
    grad[rows, labels[rows]] = -1.0 / (n * p)
    return loss, grad


def cross_entropy(pv):
    """Mean negative log-likelihood over non-ignored voxels"""
    valid = pv.valid()
    _check_nonempty(valid)
    return cross_entropy_terms(pv.probs, pv.labels, valid)


def lovasz_grad(fg_sorted):
    """First differences of the Jaccard loss along the sorted order"""
    gts = fg_sorted.sum()
    intersection = gts - np.cumsum(fg_sorted)
    union = gts + np.cumsum(1.0 - fg_sorted)
    jaccard = 1.0 - intersection / union
    jaccard[1:] = jaccard[1:] - jaccard[:-1]
    return jaccard


def lovasz_softmax_terms(probs, labels, valid):
    """Unvalidated Lovász-softmax over the classes present in the labels"""
    rows = np.flatnonzero(valid)
    P, y = probs[rows], labels[rows]
    present = np.unique(y)
    loss = 0.0
    grad_rows = np.zeros_like(P)
    for c in present:
        fg = (y == c).astype(np.float64)
        diff = fg - P[:, c]
        errors = np.abs(diff)
        order = np.argsort(-errors, kind='stable')
        weights = lovasz_grad(fg[order])
        loss += float(np.dot(errors[order], weights))
        # d|fg - p|/dp = -sign(fg - p)
        g = np.empty_like(weights)
        g[order] = weights
        grad_rows[:, c] = -np.sign(diff) * g
    loss /= len(present)
    grad = np.zeros_like(probs)
    grad[rows] = grad_rows / len(present)
    return loss, grad


def lovasz_softmax(pv):
    """Lovász extension of the Jaccard loss, averaged over present classes"""
    valid = pv.valid()
    _check_nonempty(valid)
    return lovasz_softmax_terms(pv.probs, pv.labels, valid)


def total_loss(ce, lovasz, dskd, w=None):
    """Weighted sum of the three objective terms"""
    w = LossWeights() if w is None else w
    values = (ce, lovasz, dskd)
    if not all(np.isfinite(v) for v in values):
        raise ArgumentError('Loss terms must be finite')
    return ce + w.alpha * lovasz + w.beta * dskd
