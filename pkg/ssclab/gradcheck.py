"""Finite-difference verification of the analytic gradients of the distillation loss,
the cross entropy and the Lovász-softmax loss.
"""
from dataclasses import dataclass
import numpy as np
from . import log
from . import progress
from . import distill
from . import losses


def finite_difference(func, x0, eps=1e-5):
    """Central-difference gradient of a scalar function of an array"""
    x0 = np.asarray(x0, dtype=np.float64)
    grad = np.zeros_like(x0)
    x = x0.copy()
    for j in np.ndindex(x0.shape):
        x[j] = x0[j] + eps
        fplus = func(x)
        x[j] = x0[j] - eps
        fminus = func(x)
        x[j] = x0[j]
        grad[j] = (fplus - fminus) / (2 * eps)
    return grad


def relative_error(analytic, numeric):
    """max |analytic - numeric| relative to max |numeric|"""
    scale = max(float(np.max(np.abs(numeric))), 1e-12)
    return float(np.max(np.abs(analytic - numeric))) / scale


@dataclass
class SuiteResult:
    name: str
    instances: int
    worst_error: float
    tolerance: float

    @property
    def passed(self):
        return self.worst_error <= self.tolerance


# ------------------------------------------------------------------------------------------------
# Instance samplers

def sample_features(rng, max_rows=16, max_channels=8):
    n = int(rng.integers(2, max_rows + 1))
    c = int(rng.integers(2, max_channels + 1))
    return rng.normal(size=(n, c)), rng.normal(size=(n, c))


def sample_probs(rng, max_voxels=32, max_classes=6, ignore_label=255):
    m = int(rng.integers(1, max_voxels + 1))
    c = int(rng.integers(2, max_classes + 1))
    # mixing with the uniform distribution keeps every probability >= 0.1 / c
    probs = 0.9 * losses.softmax(2.0 * rng.normal(size=(m, c))) + 0.1 / c
    labels = rng.integers(0, c, size=m)
    labels[rng.random(m) < 0.1] = ignore_label
    labels[0] = rng.integers(0, c)
    return probs, labels, labels != ignore_label


def _well_separated(probs, labels, valid, gap):
    """True when no Lovász sort order can flip within +-gap of the sample"""
    if np.min(probs) < gap or np.max(probs) > 1 - gap:
        return False
    y, P = labels[valid], probs[valid]
    for c in np.unique(y):
        errors = np.sort(np.abs((y == c) - P[:, c]))
        if len(errors) > 1 and np.min(np.diff(errors)) < gap:
            return False
    return True


def sample_lovasz_probs(rng, gap=1e-4, attempts=1000, **kwargs):
    for _ in range(attempts):
        probs, labels, valid = sample_probs(rng, **kwargs)
        if _well_separated(probs, labels, valid, gap):
            return probs, labels, valid
    return probs, labels, valid


# ------------------------------------------------------------------------------------------------
# Suites

def check_dskd(rng, instances=100, eps=1e-5, tolerance=1e-4):
    worst = 0.0
    for i in range(instances):
        F_S, F_T = sample_features(rng)
        P_T = distill.pairwise_similarity(F_T)
        numeric = finite_difference(lambda F: distill.dskd_loss(distill.pairwise_similarity(F), P_T), F_S, eps)
        worst = max(worst, relative_error(distill.dskd_grad(F_S, F_T), numeric))
        progress.update(i + 1)
    return SuiteResult('dskd', instances, worst, tolerance)


def check_cross_entropy(rng, instances=100, eps=1e-5, tolerance=1e-4):
    worst = 0.0
    for i in range(instances):
        probs, labels, valid = sample_probs(rng)
        _, analytic = losses.cross_entropy_terms(probs, labels, valid)
        numeric = finite_difference(lambda p: losses.cross_entropy_terms(p, labels, valid)[0], probs, eps)
        worst = max(worst, relative_error(analytic, numeric))
        progress.update(i + 1)
    return SuiteResult('cross_entropy', instances, worst, tolerance)


def check_lovasz(rng, instances=100, eps=1e-5, tolerance=1e-4):
    worst = 0.0
    for i in range(instances):
        probs, labels, valid = sample_lovasz_probs(rng, gap=10 * eps)
        _, analytic = losses.lovasz_softmax_terms(probs, labels, valid)
        numeric = finite_difference(lambda p: losses.lovasz_softmax_terms(p, labels, valid)[0], probs, eps)
        worst = max(worst, relative_error(analytic, numeric))
        progress.update(i + 1)
    return SuiteResult('lovasz_softmax', instances, worst, tolerance)


SUITES = {
    'dskd': check_dskd,
    'cross_entropy': check_cross_entropy,
    'lovasz_softmax': check_lovasz,
}


def run_all(seed=42, instances=100, tolerance=1e-4):
    """Run every suite with its own seeded generator"""
    results = []
    seeds = np.random.SeedSequence(seed).spawn(len(SUITES))
    for (name, suite), s in zip(SUITES.items(), seeds):
        progress.start(progress.ProgressMode.Samples, instances)
        result = suite(np.random.default_rng(s), instances=instances, tolerance=tolerance)
        progress.end()
        log.info('Gradient check [suite={}, worst_error={:.3e}, passed={}]'.format(
            name, result.worst_error, result.passed))
        results.append(result)
    return results
