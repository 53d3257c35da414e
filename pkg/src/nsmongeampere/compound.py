"""Second compound matrices and checks of their algebraic identities."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DimensionTooSmall

# condition number above which the inverse identity is skipped
SINGULAR_COND = 1e12


def lexical_pairs(n: int) -> list[tuple[int, int]]:
    return list(combinations(range(n), 2))


@dataclass(frozen=True)
class Compound2:
    """The C(n,2) x C(n,2) matrix of 2x2 minors, rows/columns indexed by ``index_map``."""

    entries: np.ndarray
    index_map: list[tuple[int, int]]

    @property
    def m(self) -> int:
        return len(self.index_map)

    def entry(self, rows: tuple[int, int], cols: tuple[int, int]):
        return self.entries[self.index_map.index(tuple(rows)), self.index_map.index(tuple(cols))]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def compound2(m) -> Compound2:
    """Second compound of a real or complex square matrix.

    Entry ``((i,k),(j,l))`` is ``M[i,j]*M[k,l] - M[i,l]*M[k,j]``.
    """
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("compound2 needs a square matrix")
    n = a.shape[0]
    if n < 2:
        raise DimensionTooSmall(f"compound2 needs n >= 2, got {n}")
    pairs = lexical_pairs(n)
    first = np.array([p[0] for p in pairs])
    second = np.array([p[1] for p in pairs])
    ent = (
        a[np.ix_(first, first)] * a[np.ix_(second, second)]
        - a[np.ix_(first, second)] * a[np.ix_(second, first)]
    )
    return Compound2(entries=ent, index_map=pairs)


def c2(m) -> np.ndarray:
    """Shorthand returning the bare compound array."""
    return compound2(m).entries


def residual(value, reference) -> float:
    """Max-abs difference normalized by ``1 + max|reference|``."""
    value, reference = np.asarray(value), np.asarray(reference)
    return float(np.max(np.abs(value - reference)) / (1.0 + np.max(np.abs(reference))))


def relative_error(value, reference) -> float:
    """Max-abs difference over max-abs of the reference."""
    value, reference = np.asarray(value), np.asarray(reference)
    scale = np.max(np.abs(reference))
    diff = np.max(np.abs(value - reference))
    return float(diff / scale) if scale > 0 else float(diff)


@dataclass
class IdentityCheck:
    name: str
    status: str  # "pass", "fail", or "skipped: <reason>"
    residual: float | None

    @property
    def ok(self) -> bool:
        return self.status != "fail"


@dataclass
class IdentityReport:
    checks: dict[str, IdentityCheck] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks.values())

    def worst(self) -> float:
        vals = [c.residual for c in self.checks.values() if c.residual is not None]
        return max(vals) if vals else 0.0

    def to_dict(self) -> dict:
        return {k: {"status": c.status, "residual": c.residual} for k, c in self.checks.items()}


def check_compound_identities(M, N, k: complex = -1.7, tol: float = 1e-10) -> IdentityReport:
    """Evaluate the standard second-compound identities on ``M``, ``N``.

    Covered: Binet-Cauchy, transpose, conjugate and adjoint (on ``M + iN``),
    inverse (skipped for numerically singular ``M``), symmetry for symmetric and
    skew inputs, scalar homogeneity, the diagonal rule and the sym/skew split
    ``M2 + (M^T)2 = 1/2 (M+M^T)2 + 1/2 (M-M^T)2``.
    """
    M = np.asarray(M, dtype=float)
    N = np.asarray(N, dtype=float)
    if M.shape != N.shape:
        raise ValueError("M and N must have the same shape")
    report = IdentityReport()

    def add(name, value, reference):
        r = residual(value, reference)
        report.checks[name] = IdentityCheck(name, "pass" if r <= tol else "fail", r)

    m2, n2 = c2(M), c2(N)
    add("binet_cauchy", c2(M @ N), m2 @ n2)
    add("transpose", m2.T, c2(M.T))

    z = M + 1j * N
    z2 = c2(z)
    add("conjugate", np.conj(z2), c2(np.conj(z)))
    add("adjoint", z2.conj().T, c2(z.conj().T))

    if np.linalg.cond(M) > SINGULAR_COND:
        report.checks["inverse"] = IdentityCheck("inverse", "skipped: singular", None)
    else:
        add("inverse", np.linalg.inv(m2), c2(np.linalg.inv(M)))

    p2 = c2(0.5 * (M + M.T))
    q2 = c2(0.5 * (M - M.T))
    add("symmetric_of_sym", p2.T, p2)
    add("symmetric_of_skew", q2.T, q2)
    add("scalar", c2(k * M), k**2 * m2)

    d = np.diag(M)
    i, j = np.array(lexical_pairs(M.shape[0])).T
    add("diagonal", c2(np.diag(d)), np.diag(d[i] * d[j]))
    add("sym_skew_split", m2 + c2(M.T), 0.5 * c2(M + M.T) + 0.5 * c2(M - M.T))
    return report
