"""Grid verification of the comparison principle for det[D2u - A - B] = f.

Given a scenario (fields u, v, A, B, f on a domain) the checks evaluate the five
structural hypotheses, the three claims about the linearized operator
``L = a^ij D_ij + b^k D_k + c`` over an explicit lattice of mean-value points
``(s, tau)``, and finally whether ``u > v`` or ``u == v`` on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonElliptic
from .matrix_core import EIG_FLOOR
from .scenario import Grid, Scenario

SLACK = 1e-9


def _ok(margin: float, rhs: float = 0.0) -> bool:
    return margin >= -SLACK * (1.0 + abs(rhs))


def _batch(x):
    x = np.asarray(x, dtype=float)
    return np.atleast_2d(x), x.ndim == 1


def _out(arr, single):
    return arr[0] if single else arr


@dataclass(frozen=True)
class State:
    """Values needed at ``(x, w(x), Dw(x))`` for one of the compared functions."""

    x: np.ndarray
    w: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    omega: np.ndarray
    B: np.ndarray

    @property
    def R(self) -> np.ndarray:
        return self.omega - self.B


def state(sc: Scenario, which: str, x) -> State:
    x, _ = _batch(x)
    fld = sc.field_for(which)
    w, g, h = fld.value(x), fld.grad(x), fld.hess(x)
    omega = h - sc.A.value(x, w, g)
    return State(x, w, g, h, 0.5 * (omega + np.swapaxes(omega, 1, 2)), sc.B.value(x, w, g))


@dataclass(frozen=True)
class OmegaEval:
    omega: np.ndarray
    lambda_min: np.ndarray
    positive_definite: np.ndarray


def omega_field(sc: Scenario, which: str, x) -> OmegaEval:
    """``D2w - A(x, w, Dw)``; failure of positive definiteness is flagged, not raised."""
    xb, single = _batch(x)
    om = state(sc, which, xb).omega
    lmin = np.linalg.eigvalsh(om)[:, 0]
    return OmegaEval(_out(om, single), _out(lmin, single), _out(lmin > EIG_FLOOR, single))


def operator_G(sc: Scenario, which: str, x):
    """``log det[D2w - A - B] - log f`` at each point."""
    xb, single = _batch(x)
    st = state(sc, which, xb)
    lmin = np.linalg.eigvalsh(st.omega)[:, 0]
    if np.any(lmin <= EIG_FLOOR):
        raise NonElliptic(f"omega({which}) is not positive definite at some point")
    sign, logdet = np.linalg.slogdet(st.R)
    if np.any(sign <= 0):
        raise NonElliptic("det R is not positive")
    g = logdet - np.log(sc.f.value(st.x, st.w, st.grad))
    return _out(g, single)


@dataclass
class MuBounds:
    mu_B: float
    mu_DzB: float
    mu_B_exact: bool
    mu_DzB_exact: bool

    def to_dict(self) -> dict:
        return {
            "mu_B": self.mu_B,
            "mu_B_status": "exact" if self.mu_B_exact else "estimated",
            "mu_DzB": self.mu_DzB,
            "mu_DzB_status": "exact" if self.mu_DzB_exact else "estimated",
        }


def _x_subset(sc: Scenario, grid: Grid):
    pts = grid.all_points
    k = min(len(pts), sc.sampling.x_points)
    idx = np.unique(np.linspace(0, len(pts) - 1, k).round().astype(int))
    return idx, pts[idx]


def _lattice(sc: Scenario, xs):
    """All combinations of sample points ``xs`` with the (z, p) lattice."""
    z, p = sc.zp_lattice()
    X = np.repeat(xs, len(z), axis=0)
    Z = np.tile(z, len(xs))
    P = np.tile(p, (len(xs), 1))
    return X, Z, P, len(z)


def _op_norms(batch):
    return np.linalg.norm(batch, ord=2, axis=(1, 2))


def mu_bounds(sc: Scenario, grid: Grid | None = None) -> MuBounds:
    """``sup ||B||`` and ``sup ||D_z B||``: closed form when available, lattice max otherwise."""
    exact_b = sc.B.exact_sup_norm()
    exact_dz = sc.B.exact_sup_norm_dz()
    if exact_b is not None and exact_dz is not None:
        return MuBounds(exact_b, exact_dz, True, True)
    grid = sc.build_grid() if grid is None else grid
    _, xs = _x_subset(sc, grid)
    X, Z, P, _ = _lattice(sc, xs)
    mu_b = exact_b if exact_b is not None else float(np.max(_op_norms(sc.B.value(X, Z, P))))
    mu_dz = exact_dz if exact_dz is not None else float(np.max(_op_norms(sc.B.dz(X, Z, P))))
    return MuBounds(mu_b, mu_dz, exact_b is not None, exact_dz is not None)


@dataclass
class Condition:
    passed: bool
    margin: float
    exact: bool = True
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "passed": bool(self.passed),
            "margin": float(self.margin),
            "status": "exact" if self.exact else "estimated",
            "detail": self.detail,
        }


@dataclass
class HypothesesReport:
    conditions: dict[str, Condition]
    min_lambda: float
    mu: MuBounds

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def to_dict(self) -> dict:
        return {
            "conditions": {k: c.to_dict() for k, c in self.conditions.items()},
            "min_lambda": self.min_lambda,
            "mu": self.mu.to_dict(),
        }


def _pointwise_min_lambda(sc: Scenario, pts) -> np.ndarray:
    lu = np.linalg.eigvalsh(state(sc, "u", pts).omega)[:, 0]
    lv = np.linalg.eigvalsh(state(sc, "v", pts).omega)[:, 0]
    return np.minimum(lu, lv)


def hypotheses_check(sc: Scenario, grid: Grid) -> HypothesesReport:
    """Conditions (i)-(v) over the closed grid (interior and boundary nodes)."""
    pts = grid.all_points
    m = _pointwise_min_lambda(sc, pts)
    m_min = float(np.min(m))
    mu = mu_bounds(sc, grid)
    n, d, a1, b1 = sc.n, sc.delta, sc.alpha1, sc.beta1
    conds = {}

    conds["i"] = Condition(m_min > EIG_FLOOR, m_min, detail="min lambda_min(omega) over u and v")

    rhs = mu.mu_B
    conds["ii"] = Condition(_ok(d * m_min - rhs, rhs), d * m_min - rhs, mu.mu_B_exact, "delta*min lambda - mu(B)")

    if sc.A.dz_is_constant:
        lam_dza = float(np.linalg.eigvalsh(sc.A.z)[0])
        margin = float(np.min(lam_dza + a1 * m))
        exact = True
    else:
        idx, xs = _x_subset(sc, grid)
        X, Z, P, k = _lattice(sc, xs)
        lam = np.linalg.eigvalsh(sc.A.dz(X, Z, P))[:, 0].reshape(len(xs), k).min(axis=1)
        margin = float(np.min(lam + a1 * m[idx]))
        exact = False
    conds["iii"] = Condition(_ok(margin), margin, exact, "lambda_min(D_z A) + alpha1*min lambda")

    margin = b1 * m_min - mu.mu_DzB
    conds["iv"] = Condition(_ok(margin, mu.mu_DzB), margin, mu.mu_DzB_exact, "beta1*min lambda - mu(D_z B)")

    rhs = n * (a1 + d * b1 / (1 + d**2))
    inf_ratio = sc.f.exact_inf_log_dz()
    exact = inf_ratio is not None
    if not exact:
        _, xs = _x_subset(sc, grid)
        X, Z, P, _ = _lattice(sc, xs)
        inf_ratio = float(np.min(sc.f.dz(X, Z, P) / sc.f.value(X, Z, P)))
    conds["v"] = Condition(_ok(inf_ratio - rhs, rhs), inf_ratio - rhs, exact, "inf D_z f/f - n(alpha1 + delta beta1/(1+delta^2))")
    return HypothesesReport(conds, m_min, mu)


@dataclass(frozen=True)
class LinearizationPoint:
    s: float
    tau: float

    def __post_init__(self):
        if not (0 <= self.s <= 1 and 0 <= self.tau <= 1):
            raise ValueError("s and tau must lie in [0, 1]")


@dataclass
class CoeffField:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    c_A: np.ndarray  # -sum R^ji D_z A_ij
    c_B: np.ndarray  # -sum R^ji D_z B_ij
    c_f: np.ndarray  # -D_z f / f
    lambda0: np.ndarray
    Lambda0: np.ndarray
    lam: np.ndarray
    Lam: np.ndarray


def _interp_state(sc: Scenario, x, tau: float):
    """``u_tau = (1-tau) u + tau v`` and its gradient."""
    w = (1 - tau) * sc.u.value(x) + tau * sc.v.value(x)
    g = (1 - tau) * sc.u.grad(x) + tau * sc.v.grad(x)
    return w, g


def linearized_coeffs(sc: Scenario, x, pt: LinearizationPoint) -> CoeffField:
    """Coefficients of the linear operator at ``R_s = (1-s) R0 + s R1`` and ``u_tau``.

    ``lambda0``/``Lambda0`` here are pointwise (extreme eigenvalues of both omega
    fields at x); ``claims_check`` takes them over the whole grid.
    """
    xb, single = _batch(x)
    su, sv = state(sc, "u", xb), state(sc, "v", xb)
    rs = (1 - pt.s) * su.R + pt.s * sv.R
    inv = np.linalg.inv(rs)
    a = 0.5 * (inv + np.swapaxes(inv, 1, 2))
    w, g = _interp_state(sc, xb, pt.tau)
    fval = sc.f.value(xb, w, g)
    dpa = sc.A.dp(xb, w, g) + sc.B.dp(xb, w, g)
    # sum_ij inv[j,i] * D[i,j] == sum_ij inv^T[i,j] * D[i,j]
    b = -np.einsum("nji,nijk->nk", inv, dpa) - sc.f.dp(xb, w, g) / fval[:, None]
    c_a = -np.einsum("nji,nij->n", inv, sc.A.dz(xb, w, g))
    c_b = -np.einsum("nji,nij->n", inv, sc.B.dz(xb, w, g))
    c_f = -sc.f.dz(xb, w, g) / fval
    eu, ev = np.linalg.eigvalsh(su.omega), np.linalg.eigvalsh(sv.omega)
    l0 = np.minimum(eu[:, 0], ev[:, 0])
    L0 = np.maximum(eu[:, -1], ev[:, -1])
    res = CoeffField(a, b, c_a + c_b + c_f, c_a, c_b, c_f, l0, L0, 1 / ((1 + sc.delta**2) * L0), 1 / l0)
    if single:
        res = CoeffField(*(getattr(res, k)[0] for k in res.__dataclass_fields__))
    return res


def linearization_residual(sc: Scenario, x, pt: LinearizationPoint):
    """``G[v] - G[u] - (a : D2w + b . Dw + c w)`` with ``w = v - u``."""
    xb, single = _batch(x)
    co = linearized_coeffs(sc, xb, pt)
    w = sc.v.value(xb) - sc.u.value(xb)
    dw = sc.v.grad(xb) - sc.u.grad(xb)
    d2w = sc.v.hess(xb) - sc.u.hess(xb)
    lw = np.einsum("nij,nij->n", co.a, d2w) + np.einsum("nk,nk->n", co.b, dw) + co.c * w
    res = operator_G(sc, "v", xb) - operator_G(sc, "u", xb) - lw
    return _out(res, single)


def stau_lattice(k: int) -> list[LinearizationPoint]:
    ts = np.linspace(0.0, 1.0, k)
    return [LinearizationPoint(float(s), float(t)) for s in ts for t in ts]


def mean_value_residual(sc: Scenario, x, k: int = 5):
    """Minimum over a k x k lattice of ``|linearization_residual|`` at each point."""
    xb, single = _batch(x)
    res = np.min(np.abs([linearization_residual(sc, xb, pt) for pt in stau_lattice(k)]), axis=0)
    return _out(res, single)


@dataclass
class ClaimsReport:
    applicable: bool
    lambda0: float
    Lambda0: float
    lam: float
    Lam: float
    claims: dict[str, Condition]
    sup_b: float
    sup_c: float
    max_c: float
    max_c_A: float
    max_c_B: float
    worst_mean_value_residual: float
    lattice_size: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims.values())

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "claims"}
        out["claims"] = {k: c.to_dict() for k, c in self.claims.items()}
        return out


def claims_check(
    sc: Scenario,
    grid: Grid,
    stau_points: int | None = None,
    xi_samples: int | None = None,
    hypotheses: HypothesesReport | None = None,
) -> ClaimsReport:
    """Ellipticity, bounded coefficients and the sign of c over every (x, s, tau) lattice node."""
    k = sc.grid.stau_points if stau_points is None else stau_points
    n_xi = sc.grid.xi_samples if xi_samples is None else xi_samples
    hyp = hypotheses_check(sc, grid) if hypotheses is None else hypotheses
    applicable = hyp.conditions["i"].passed and hyp.conditions["ii"].passed

    pts = grid.all_points
    eu = np.linalg.eigvalsh(state(sc, "u", pts).omega)
    ev = np.linalg.eigvalsh(state(sc, "v", pts).omega)
    l0 = float(min(eu[:, 0].min(), ev[:, 0].min()))
    L0 = float(max(eu[:, -1].max(), ev[:, -1].max()))
    lam = 1.0 / ((1 + sc.delta**2) * L0) if L0 > 0 else np.nan
    Lam = 1.0 / l0 if l0 > 0 else np.inf

    rng = np.random.default_rng(sc.grid.seed)
    xi = rng.standard_normal((n_xi, sc.n))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)

    lattice = stau_lattice(k)
    low = high = np.inf
    sup_b = sup_c = 0.0
    max_c = max_cA = max_cB = -np.inf
    mv_res = np.full(len(pts), np.inf)
    for s in sorted({pt.s for pt in lattice}):
        for pt in (p for p in lattice if p.s == s):
            co = linearized_coeffs(sc, pts, pt)
            sup_b = max(sup_b, float(np.max(np.abs(co.b))) if co.b.size else 0.0)
            sup_c = max(sup_c, float(np.max(np.abs(co.c))))
            max_c = max(max_c, float(np.max(co.c)))
            max_cA = max(max_cA, float(np.max(co.c_A)))
            max_cB = max(max_cB, float(np.max(co.c_B)))
            mv_res = np.minimum(mv_res, np.abs(linearization_residual(sc, pts, pt)))
        # a depends on s only
        eig = np.linalg.eigvalsh(co.a)
        quad = np.einsum("nij,ki,kj->nk", co.a, xi, xi)
        low = min(low, float(eig[:, 0].min() - lam), float(quad.min() - lam))
        high = min(high, float(Lam - eig[:, -1].max()), float(Lam - quad.max()))

    n, d = sc.n, sc.delta
    rhs_cA = n * sc.alpha1
    rhs_cB = n * d * sc.beta1 / (1 + d**2)
    finite = bool(np.isfinite(sup_b) and np.isfinite(sup_c))
    claims = {
        "ellipticity_lower": Condition(_ok(low, lam), low, detail="min a-form - lambda"),
        "ellipticity_upper": Condition(_ok(high, Lam), high, detail="Lambda - max a-form"),
        "bounded_coefficients": Condition(finite, 0.0 if finite else -np.inf, detail="sup|b|, sup|c| finite"),
        "c_nonpositive": Condition(_ok(-max_c), -max_c, detail="-max c"),
        "c_A_bound": Condition(_ok(rhs_cA - max_cA, rhs_cA), rhs_cA - max_cA, detail="n alpha1 - max(-R^ji D_z A_ij)"),
        "c_B_bound": Condition(_ok(rhs_cB - max_cB, rhs_cB), rhs_cB - max_cB, detail="n delta beta1/(1+delta^2) - max(-R^ji D_z B_ij)"),
    }
    return ClaimsReport(
        applicable, l0, L0, lam, Lam, claims, sup_b, sup_c, max_c, max_cA, max_cB, float(mv_res.max()), len(lattice)
    )


@dataclass
class Verdict:
    hypotheses: HypothesesReport
    claims: ClaimsReport
    preconditions: dict
    conclusion: str  # "u_gt_v", "u_identical_v" or "violated"
    min_interior_margin: float
    max_abs_difference: float
    boundary_normal_margin: float | None
    corollary_applies: bool

    @property
    def hypotheses_pass(self) -> dict[str, bool]:
        return {k: c.passed for k, c in self.hypotheses.conditions.items()}

    @property
    def claims_pass(self) -> dict[str, bool]:
        return {k: c.passed for k, c in self.claims.claims.items()}

    @property
    def conforming(self) -> bool:
        return self.hypotheses.passed and self.preconditions["passed"]

    def to_dict(self) -> dict:
        return {
            "conclusion": self.conclusion,
            "conforming": self.conforming,
            "min_interior_margin": self.min_interior_margin,
            "max_abs_difference": self.max_abs_difference,
            "boundary_normal_margin": self.boundary_normal_margin,
            "corollary_applies": self.corollary_applies,
            "preconditions": self.preconditions,
            "hypotheses": self.hypotheses.to_dict(),
            "claims": self.claims.to_dict(),
        }


def comparison_verdict(sc: Scenario, grid: Grid | None = None) -> Verdict:
    """Evaluate hypotheses, claims and the grid-level conclusion ``u > v`` or ``u == v``."""
    grid = sc.build_grid() if grid is None else grid
    tol = sc.grid.tol_conclude
    hyp = hypotheses_check(sc, grid)
    claims = claims_check(sc, grid, hypotheses=hyp)

    interior, bnd = grid.points, grid.boundary_points
    if hyp.conditions["i"].passed:
        g_gap = operator_G(sc, "v", interior) - operator_G(sc, "u", interior)
        order_margin = float(np.min(g_gap))
    else:
        order_margin = float("nan")
    diff_in = sc.u.value(interior) - sc.v.value(interior)
    diff_bd = sc.u.value(bnd) - sc.v.value(bnd)
    bd_margin = float(np.min(diff_bd))
    pre = {
        "G_order_margin": order_margin,
        "boundary_margin": bd_margin,
        "G_order": bool(order_margin >= -tol),
        "boundary_order": bool(bd_margin >= -tol),
    }
    pre["passed"] = pre["G_order"] and pre["boundary_order"]

    min_in = float(np.min(diff_in))
    max_abs = float(max(np.max(np.abs(diff_in)), np.max(np.abs(diff_bd))))
    if max_abs < tol:
        conclusion = "u_identical_v"
    elif min_in > tol:
        conclusion = "u_gt_v"
    else:
        conclusion = "violated"

    corollary = bool(order_margin > tol and np.max(np.abs(diff_bd)) <= tol)
    normal_margin = None
    if corollary:
        dnu = np.einsum("nk,nk->n", sc.u.grad(bnd) - sc.v.grad(bnd), grid.normals)
        normal_margin = float(np.min(dnu))
    return Verdict(hyp, claims, pre, conclusion, min_in, max_abs, normal_margin, corollary)
