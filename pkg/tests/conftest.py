import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def leibniz_det(a):
    """Determinant by the permutation expansion; independent of LU."""
    a = np.asarray(a)
    n = a.shape[0]
    total = 0.0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = 1.0
        for i in range(n):
            term *= a[i, perm[i]]
        total += -term if inv % 2 else term
    return total


def brute_minor_compound(a):
    """2x2 minors by explicit enumeration of lexically ordered row and column pairs."""
    a = np.asarray(a)
    n = a.shape[0]
    pairs = [(i, k) for i in range(n) for k in range(i + 1, n)]
    out = np.zeros((len(pairs), len(pairs)), dtype=a.dtype)
    for r, (i, k) in enumerate(pairs):
        for c, (j, l) in enumerate(pairs):
            sub = a[np.ix_([i, k], [j, l])]
            out[r, c] = sub[0, 0] * sub[1, 1] - sub[0, 1] * sub[1, 0]
    return out


def power_iteration_norm(m, iters=2000):
    """Largest singular value via power iteration on M^T M."""
    m = np.asarray(m, dtype=float)
    x = np.ones(m.shape[1]) / np.sqrt(m.shape[1])
    x = x + 1e-3 * np.arange(m.shape[1])
    lam = 0.0
    for _ in range(iters):
        y = m.T @ (m @ x)
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return 0.0
        x = y / nrm
        lam = np.sqrt(nrm)
    return float(np.sqrt(x @ (m.T @ (m @ x))))


def random_spd(rng, n, lo=0.5, hi=5.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (q * rng.uniform(lo, hi, n)) @ q.T


def random_skew(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) * scale
    return 0.5 * (a - a.T)
