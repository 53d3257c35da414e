"""Second-differential quadratic forms of F(R) = log det R and their bounds.

Notation follows the code, not the math: ``f_form(R, M)`` is the Hessian of F
contracted twice with M, ``g_form`` is ``Tr(R^-1 M)``, ``h_form`` is
``2 Tr[(R^-1)^(2) M^(2)]`` and ``l_form`` is the cross term between a symmetric
P and a skew Q. ``tilde`` quantities are ``omega^-1/2 M omega^-1/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .compound import c2
from .cone import (
    INEQ_SLACK,
    Check,
    ConeParams,
    DecomposedR,
    grad_F,
    hess_F,
    inv_parts,
    leq,
    log_det_F,
    membership,
)
from .errors import BadEta, Inconsistent, NotMember
from .matrix_core import TAU, fro_norm, lambda_max, lambda_min, op_norm, skew_part, sym_part

REPR_TOL = 1e-8


def agree(a: float, b: float, tol: float = REPR_TOL) -> bool:
    return abs(a - b) <= tol * (1.0 + max(abs(a), abs(b)))


@dataclass(frozen=True)
class TildePair:
    tilde: np.ndarray
    tilde2: np.ndarray


def tilde_transform(M, R: DecomposedR, tol: float = TAU) -> TildePair:
    """``M~ = W M W`` (``W = omega^-1/2``) and ``M~~ = C1* M~ C1``.

    Raises Inconsistent if the unitary change of basis alters either norm or the
    Frobenius norm of ``M~`` leaves the ``lambda_max^-2 |M|^2 .. lambda_min^-2 |M|^2``
    window.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != R.omega.shape:
        raise ValueError("dimension mismatch")
    t = R.inv_sqrt @ M @ R.inv_sqrt
    c = R.spectrum.unitary
    t2 = c.conj().T @ t @ c
    f1, f2 = fro_norm(t), fro_norm(t2)
    o1, o2 = op_norm(t), op_norm(t2)
    if abs(f1 - f2) > tol * (1 + f1) or abs(o1 - o2) > tol * (1 + o1):
        raise Inconsistent("unitary change of basis changed a norm")
    m2 = fro_norm(M) ** 2
    lo = m2 / lambda_max(R.omega) ** 2
    hi = m2 / lambda_min(R.omega) ** 2
    if not (lo - tol * (1 + lo) <= f1**2 <= hi + tol * (1 + hi)):
        raise Inconsistent("Frobenius sandwich for the tilde transform violated")
    return TildePair(t, t2)


def quad_form_direct(R: DecomposedR, M) -> float:
    """``-sum R^li R^jk M_ij M_kl`` with ``R^ab`` the entries of R^-1."""
    inv = np.linalg.inv(R.R)
    M = np.asarray(M, dtype=float)
    return float(-np.einsum("li,jk,ij,kl->", inv, inv, M, M))


def hess_contraction(R: DecomposedR, M, N=None) -> float:
    M = np.asarray(M, dtype=float)
    N = M if N is None else np.asarray(N, dtype=float)
    return float(np.einsum("ijkl,ij,kl->", hess_F(R), M, N))


def cross_form_direct(R: DecomposedR, P, Q) -> float:
    """``-sum R^li R^jk P_ij Q_kl``."""
    inv = np.linalg.inv(R.R)
    return float(-np.einsum("li,jk,ij,kl->", inv, inv, np.asarray(P), np.asarray(Q)))


def g_form(R: DecomposedR, M) -> float:
    return float(np.trace(np.linalg.inv(R.R) @ M))


def h_form(R: DecomposedR, M) -> float:
    if R.n < 2:
        return 0.0
    return float(2.0 * np.trace(c2(np.linalg.inv(R.R)) @ c2(M)))


def gh_forms(R: DecomposedR, P, Q, tol: float = REPR_TOL) -> tuple[float, float, float, float, float, float]:
    """Return ``(g_P, h_P, f_P, g_Q, h_Q, f_Q)`` with ``f = -g**2 + h``.

    Each ``f`` is checked against the direct contraction.
    """
    out = []
    for M in (P, Q):
        g, h = g_form(R, M), h_form(R, M)
        f = -g * g + h
        direct = quad_form_direct(R, M)
        if not agree(f, direct, tol):
            raise Inconsistent(f"-G^2 + H = {f!r} but direct contraction = {direct!r}")
        out += [g, h, f]
    return tuple(out)


def l_form(R: DecomposedR, P, Q, tol: float = REPR_TOL) -> float:
    """Cross term via ``-1/2 Tr[(R^-1 - R^-T) P (R^-1 + R^-T) Q]``, checked against the sum."""
    inv = np.linalg.inv(R.R)
    val = float(-0.5 * np.trace((inv - inv.T) @ P @ (inv + inv.T) @ Q))
    direct = cross_form_direct(R, P, Q)
    if not agree(val, direct, tol):
        raise Inconsistent(f"trace form {val!r} vs direct {direct!r}")
    return val


def spectral_weights(R: DecomposedR) -> np.ndarray:
    s = R.spectrum.sigmas
    d = 1.0 + s**2
    return (1.0 - np.outer(s, s)) / np.outer(d, d)


def spectral_forms(R: DecomposedR, P, Q, tol: float = REPR_TOL) -> tuple[float, float]:
    """``f_P`` and ``f_Q`` as weighted sums over ``|M~~_jk|^2`` in the sigma eigenbasis."""
    wts = spectral_weights(R)
    c = R.spectrum.unitary
    ch = c.conj().T
    fp = float(-np.sum(wts * np.abs(ch @ (R.inv_sqrt @ P @ R.inv_sqrt) @ c) ** 2))
    fq = float(np.sum(wts * np.abs(ch @ (R.inv_sqrt @ Q @ R.inv_sqrt) @ c) ** 2))
    for name, val, M in (("P", fp, P), ("Q", fq, Q)):
        ref = quad_form_direct(R, M)
        if not agree(val, ref, tol):
            raise Inconsistent(f"spectral form for {name} = {val!r}, direct = {ref!r}")
    return fp, fq


@dataclass
class FormReport:
    f_M: float | None = None
    f_P: float | None = None
    f_Q: float | None = None
    g_P: float | None = None
    h_P: float | None = None
    g_Q: float | None = None
    h_Q: float | None = None
    l_PQ: float | None = None
    eta: float | None = None
    bounds: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(b.passed for b in self.bounds)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in ("f_M", "f_P", "f_Q", "g_P", "h_P", "g_Q", "h_Q", "l_PQ", "eta")}
        out["bounds"] = {b.name: b.to_dict() for b in self.bounds}
        return out


def split_form(R: DecomposedR, M, tol: float = REPR_TOL) -> FormReport:
    """Split M into symmetric P and skew Q and check ``f(M) = f(P) + f(Q) + 2 L(P, Q)``."""
    M = np.asarray(M, dtype=float)
    P, Q = sym_part(M), skew_part(M)
    f_m = quad_form_direct(R, M)
    f_p = quad_form_direct(R, P)
    f_q = quad_form_direct(R, Q)
    l_pq = cross_form_direct(R, P, Q)
    if not agree(f_m, f_p + f_q + 2 * l_pq, tol):
        raise Inconsistent("f(M) != f(P) + f(Q) + 2 L(P, Q)")
    return FormReport(f_M=f_m, f_P=f_p, f_Q=f_q, l_PQ=l_pq)


def master_coefficients(n: int, delta: float, eta: float) -> tuple[float, float]:
    """Coefficients ``(c_P, c_Q)`` of ``f(R, P+Q) <= -c_P |P~|^2 + c_Q |Q~|^2``."""
    c_p = (1 - eta) * (1 - delta**2) / (1 + delta**2) ** 2
    c_q = 1 + 4 * n**2 * delta**2 / (eta * (1 - delta**2))
    return c_p, c_q


def bounds_report(
    R: DecomposedR,
    P,
    Q,
    eta: float,
    params: ConeParams,
    tol: float = INEQ_SLACK,
) -> FormReport:
    """All upper bounds on the quadratic forms for a member R and symmetric P, skew Q."""
    if not (0 < eta <= 1):
        raise BadEta(f"eta must lie in (0, 1], got {eta}")
    if not membership(R, params):
        raise NotMember("R is not in D_{delta,mu}")
    P = sym_part(np.asarray(P, dtype=float))
    Q = skew_part(np.asarray(Q, dtype=float))
    n, delta = R.n, params.delta
    g_p, h_p, f_p, g_q, h_q, f_q = gh_forms(R, P, Q)
    l_pq = l_form(R, P, Q)
    f_m = quad_form_direct(R, P + Q)
    pt = fro_norm(tilde_transform(P, R).tilde)
    qt = fro_norm(tilde_transform(Q, R).tilde)

    k = (1 - delta**2) / (1 + delta**2) ** 2
    c_p, c_q = master_coefficients(n, delta, eta)
    bounds = [
        leq("sym_form_tilde", f_p, -k * pt**2, tol),
        leq("sym_form_chain", -k * pt**2, -k * fro_norm(P) ** 2 / lambda_max(R.omega) ** 2, tol),
        leq("skew_form", f_q, qt**2, tol),
        leq("cross_term", abs(l_pq), 2 * n * delta / (1 + delta**2) * pt * qt, tol),
        leq("master", f_m, -c_p * pt**2 + c_q * qt**2, tol),
    ]
    return FormReport(f_m, f_p, f_q, g_p, h_p, g_q, h_q, l_pq, eta, bounds)


def d_bound(n: int, delta: float) -> float:
    """Concavity defect ``2 n delta^2 (1 + 4 n^2 delta^2 / (1 - delta^2))``."""
    return 2 * n * delta**2 * (1 + 4 * n**2 * delta**2 / (1 - delta**2))


def second_order_coefficient(n: int, delta: float) -> float:
    """``1 + 4 n^2 delta^2 / (1 - delta^2)``: the skew coefficient at eta = 1."""
    return 1 + 4 * n**2 * delta**2 / (1 - delta**2)


@dataclass
class ConcavityResult:
    gap: float
    d_bound: float
    mean_value_bound: float
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "gap": self.gap,
            "d_bound": self.d_bound,
            "mean_value_bound": self.mean_value_bound,
            "checks": {c.name: c.to_dict() for c in self.checks},
        }


def concavity_gap(R0: DecomposedR, R1: DecomposedR, params: ConeParams, tol: float = INEQ_SLACK) -> ConcavityResult:
    """First-order Taylor overshoot ``F(R1) - F(R0) - <grad F(R0), R1 - R0>`` and its bounds.

    The mean-value bound is evaluated with ``min(lambda_min(omega0), lambda_min(omega1))``,
    which bounds ``lambda_min`` of every convex combination from below.
    """
    for R in (R0, R1):
        if not membership(R, params):
            raise NotMember("both matrices must be in D_{delta,mu}")
    n, delta = R0.n, params.delta
    gap = log_det_F(R1) - log_det_F(R0) - float(np.sum(grad_F(R0) * (R1.R - R0.R)))
    d = d_bound(n, delta)
    lam = min(lambda_min(R0.omega), lambda_min(R1.omega))
    mv_bound = 0.5 * second_order_coefficient(n, delta) * fro_norm(R1.beta - R0.beta) ** 2 / lam**2
    checks = [
        Check("d_concavity", gap, d, "<=", d - gap, gap <= d + 1e-9),
        leq("mean_value_bound", gap, mv_bound, tol),
    ]
    return ConcavityResult(gap, d, mv_bound, checks)
