"""The admissible set D_{delta,mu}, decomposed matrices R = omega + beta, and log det derivatives.

A member ``R = omega + beta`` has ``omega`` symmetric positive definite, ``beta``
skew, ``delta * lambda_min(omega) >= mu`` and ``||beta|| <= mu``. Everything about
``R`` is governed by ``sigma = omega^-1/2 beta omega^-1/2``, whose eigenvalues
``i sigma_j`` satisfy ``|sigma_j| <= delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .compound import residual
from .errors import BadParams, Inconsistent, NotMember
from .matrix_core import (
    TAU,
    SkewSpectrum,
    as_matrix,
    as_skew,
    lambda_max,
    lambda_min,
    matrix_to_json,
    op_norm,
    skew_from_upper,
    skew_part,
    skew_spectrum,
    spd_roots,
    sym_part,
)

DEFAULT_SPREAD = 4.0
INEQ_SLACK = 1e-9


def slack(rhs: float, tol: float = INEQ_SLACK) -> float:
    return tol * (1.0 + abs(rhs))


@dataclass(frozen=True)
class ConeParams:
    delta: float
    mu: float

    def __post_init__(self):
        if not (0.0 <= self.delta < 1.0):
            raise BadParams(f"delta must be < 1 and >= 0, got {self.delta}")
        if self.mu < 0:
            raise BadParams(f"mu must be >= 0, got {self.mu}")
        if self.delta == 0 and self.mu != 0:
            raise BadParams("delta = 0 requires mu = 0")

    @property
    def lambda_floor(self) -> float:
        """Smallest admissible lambda_min(omega) implied by delta and mu."""
        return self.mu / self.delta if self.delta > 0 else 0.0


@dataclass(frozen=True, eq=False)
class DecomposedR:
    omega: np.ndarray
    beta: np.ndarray
    sqrt: np.ndarray
    inv_sqrt: np.ndarray
    sigma: np.ndarray
    spectrum: SkewSpectrum

    @property
    def n(self) -> int:
        return self.omega.shape[0]

    @property
    def R(self) -> np.ndarray:
        return self.omega + self.beta

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.R)

    @property
    def omega_eigs(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.omega)

    def to_json(self) -> dict:
        return {"omega": matrix_to_json(self.omega), "beta": matrix_to_json(self.beta)}

    @classmethod
    def from_json(cls, data: dict) -> "DecomposedR":
        return make_R(data["omega"], data["beta"])


def make_R(omega, beta) -> DecomposedR:
    sqrt, inv_sqrt = spd_roots(omega)
    omega = sym_part(as_matrix(omega))
    beta = as_skew(beta)
    if omega.shape != beta.shape:
        raise ValueError("omega and beta dimensions differ")
    # the triple product is skew only up to rounding
    sigma = skew_part(inv_sqrt @ beta @ inv_sqrt)
    return DecomposedR(omega, beta, sqrt, inv_sqrt, sigma, skew_spectrum(sigma))


def decompose(R) -> DecomposedR:
    """Split a square matrix into its symmetric and skew parts."""
    R = np.asarray(R, dtype=float)
    return make_R(sym_part(R), skew_part(R))


@dataclass
class MembershipReport:
    member: bool
    lambda_min: float
    positivity_margin: float  # lambda_min(omega)
    ellipticity_margin: float  # delta * lambda_min(omega) - mu
    skew_margin: float  # mu - ||beta||

    def __bool__(self) -> bool:
        return self.member


def membership(R: DecomposedR, params: ConeParams, tol: float = 1e-12) -> MembershipReport:
    """Membership of ``R`` in D_{delta,mu}; ``tol`` is a relative rounding allowance."""
    lmin = lambda_min(R.omega)
    beta_norm = op_norm(R.beta)
    ell = params.delta * lmin - params.mu
    skew = params.mu - beta_norm
    allow = tol * (1.0 + params.mu)
    member = lmin > 0 and ell >= -allow and skew >= -allow
    return MembershipReport(member, lmin, lmin, ell, skew)


def _random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def sample_cone(
    n: int,
    params: ConeParams,
    seed: int | np.random.SeedSequence | np.random.Generator,
    spread: float = DEFAULT_SPREAD,
) -> DecomposedR:
    """Random member of D_{delta,mu} by construction (no rejection).

    Eigenvalues of omega are uniform on ``[mu/delta, mu/delta + spread]`` (on
    ``[1, 1 + spread]`` when ``mu = 0``), rotated by a Haar orthogonal matrix;
    beta is a Gaussian skew matrix rescaled to operator norm ``u * mu`` with
    ``u ~ U[0, 1]``.
    """
    if not isinstance(params, ConeParams):
        raise BadParams("params must be a ConeParams")
    if n < 1 or (n < 2 and params.mu > 0):
        raise BadParams(f"dimension {n} too small for mu = {params.mu}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    low = params.lambda_floor if params.mu > 0 else 1.0
    lam = rng.uniform(low, low + spread, size=n)
    q = _random_orthogonal(n, rng)
    omega = (q.T * lam) @ q
    u = rng.uniform()
    beta = np.zeros((n, n))
    if params.mu > 0:
        raw = skew_part(rng.standard_normal((n, n)))
        norm = op_norm(raw)
        if norm > 0:
            beta = raw * (u * params.mu / norm)
    return make_R(sym_part(omega), beta)


def det_product_form(R: DecomposedR) -> float:
    """det omega * prod over pairs of (1 + sigma_j^2)."""
    return float(np.linalg.det(R.omega) * np.prod(1.0 + R.spectrum.paired**2))


def log_det_F(R: DecomposedR, tol: float = TAU) -> float:
    """F(R) = log det R via LU, cross-checked against the sigma product form."""
    sign, logdet = np.linalg.slogdet(R.R)
    det_r = sign * math.exp(logdet)
    det_prod = det_product_form(R)
    if sign <= 0 or abs(det_r - det_prod) > tol * abs(det_prod):
        raise Inconsistent(f"det R = {det_r!r} but product form gives {det_prod!r}")
    det_w = float(np.linalg.det(R.omega))
    det_b = float(np.linalg.det(R.beta))
    if det_r < det_w + det_b - slack(det_r, tol) or det_w <= 0:
        raise Inconsistent("det R >= det omega + det beta > 0 violated")
    return float(logdet)


@dataclass
class Check:
    """One inequality or identity with a signed margin (>= 0 means it holds).

    ``margin`` is normalized as ``(rhs - lhs) / (1 + |rhs|)`` for ``lhs <= rhs``
    checks and as a relative residual (negated) for identities.
    """

    name: str
    lhs: float
    rhs: float
    relation: str  # "<=", "==", ">="
    margin: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relation": self.relation,
            "margin": self.margin,
            "passed": self.passed,
        }


def leq(name: str, lhs: float, rhs: float, tol: float = INEQ_SLACK) -> Check:
    lhs, rhs = float(lhs), float(rhs)
    margin = (rhs - lhs) / (1.0 + abs(rhs))
    return Check(name, lhs, rhs, "<=", margin, margin >= -tol)


def close(name: str, lhs: float, rhs: float, tol: float) -> Check:
    lhs, rhs = float(lhs), float(rhs)
    err = abs(lhs - rhs) / abs(rhs) if rhs != 0 else abs(lhs)
    return Check(name, lhs, rhs, "==", -err, err <= tol)


@dataclass
class ConeReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def by_name(self) -> dict[str, Check]:
        return {c.name: c for c in self.checks}

    def to_dict(self) -> dict:
        return {c.name: c.to_dict() for c in self.checks}


def cone_report(
    R: DecomposedR,
    params: ConeParams,
    tol: float = INEQ_SLACK,
    det_tol: float = 1e-10,
    n2_tol: float = 1e-12,
) -> ConeReport:
    """Determinant, spectral and trace bounds for a member of D_{delta,mu}."""
    if not membership(R, params):
        raise NotMember("R is not in D_{delta,mu}")
    n, delta = R.n, params.delta
    half = n // 2
    checks = []

    checks.append(leq("sigma_op_norm", op_norm(R.sigma), delta, tol))
    checks.append(leq("sigma_eigs", R.spectrum.max_abs(), delta, tol))

    sign, logdet = np.linalg.slogdet(R.R)
    det_r = sign * math.exp(logdet)
    det_w = float(np.linalg.det(R.omega))
    det_b = float(np.linalg.det(R.beta))
    checks.append(close("det_product_form", det_r, det_product_form(R), det_tol))
    checks.append(leq("det_beta_nonneg", -det_b, 0.0, tol))
    checks.append(leq("det_R_ge_sum", det_w + det_b, det_r, tol))
    checks.append(leq("det_sum_ge_omega", det_w, det_w + det_b, tol))
    if n == 2:
        checks.append(close("n2_det_identity", det_r, det_w + det_b, n2_tol))

    coef = 2**half - 1
    # 0/0 = 0 when delta = 0 (then beta = 0)
    beta_term = op_norm(R.beta) ** n / delta**n if delta > 0 else 0.0
    checks.append(leq("det_lower_outer", beta_term + coef * det_b, det_w + coef * det_b, tol))
    checks.append(leq("det_lower_inner", det_w + coef * det_b, det_r, tol))
    checks.append(leq("det_upper", det_r, (1 + delta**2) ** half * det_w, tol))

    tr_r = float(np.trace(np.linalg.inv(R.R)))
    tr_w = float(np.trace(np.linalg.inv(R.omega)))
    checks.append(leq("trace_lower", tr_w / (1 + delta**2), tr_r, tol))
    checks.append(leq("trace_upper", tr_r, tr_w, tol))
    return ConeReport(checks)


@dataclass(frozen=True)
class InvParts:
    sym: np.ndarray
    skew: np.ndarray
    d2_diag: np.ndarray
    d3_diag: np.ndarray


def inv_parts(R: DecomposedR, tol: float = TAU) -> InvParts:
    """Symmetric and skew parts of R^-1 from the closed forms in sigma.

    ``sym = W (E - sigma^2)^-1 W`` and ``skew = W (-sigma) (E - sigma^2)^-1 W`` with
    ``W = omega^-1/2``; both are cross-checked against a direct LU inverse.
    """
    n = R.n
    w, sigma = R.inv_sqrt, R.sigma
    core = np.linalg.inv(np.eye(n) - sigma @ sigma)
    sym = sym_part(w @ core @ w)
    skew = skew_part(w @ (-sigma) @ core @ w)
    direct = np.linalg.inv(R.R)
    if residual(sym + skew, direct) > tol:
        raise Inconsistent("closed-form inverse parts disagree with direct inversion")
    s = R.spectrum.sigmas
    return InvParts(sym, skew, 1.0 / (1.0 + s**2), -1j * s / (1.0 + s**2))


def grad_F(R: DecomposedR) -> np.ndarray:
    """dF/dR_ij = (R^-1)_ji."""
    return np.linalg.inv(R.R).T


def hess_F(R: DecomposedR) -> np.ndarray:
    """d2F/dR_ij dR_kl = -(R^-1)_li (R^-1)_jk, as an array indexed [i, j, k, l]."""
    inv = np.linalg.inv(R.R)
    return -np.einsum("li,jk->ijkl", inv, inv)


def fd_step(R: DecomposedR) -> float:
    return 1e-5 * (1.0 + op_norm(R.R))


def batched_logdet(stack) -> np.ndarray:
    """``log|det|`` of a stack of matrices by partial-pivot LU in extended precision.

    Uses ``np.longdouble`` (80-bit on x86 Linux) so the finite-difference oracle's
    rounding floor sits well below the tolerance at the prescribed step.
    """
    a = np.array(stack, dtype=np.longdouble)
    b, n, _ = a.shape
    rows = np.arange(b)
    out = np.zeros(b, dtype=np.longdouble)
    for k in range(n):
        piv = k + np.argmax(np.abs(a[:, k:, k]), axis=1)
        top = a[rows, k].copy()
        a[rows, k] = a[rows, piv]
        a[rows, piv] = top
        d = a[:, k, k]
        out += np.log(np.abs(d))
        if k + 1 < n:
            factors = a[:, k + 1 :, k] / d[:, None]
            a[:, k + 1 :, k:] -= factors[:, :, None] * a[:, None, k, k:]
    return out


def fd_grad(R: DecomposedR, h: float | None = None) -> np.ndarray:
    """Central-difference gradient of log det, entry by entry."""
    h = fd_step(R) if h is None else h
    n = R.n
    units = np.eye(n * n).reshape(n * n, n, n) * h
    base = R.R.astype(np.longdouble)
    plus = batched_logdet(base + units)
    minus = batched_logdet(base - units)
    return ((plus - minus) / (2 * h)).astype(float).reshape(n, n)


def fd_hess(R: DecomposedR, h: float | None = None) -> np.ndarray:
    """Central-difference Hessian of log det over all (ij, kl) entry pairs."""
    h = fd_step(R) if h is None else h
    n = R.n
    m = n * n
    units = np.eye(m).reshape(m, n, n) * h
    a, b = np.triu_indices(m)
    ea, eb = units[a], units[b]
    base = R.R.astype(np.longdouble)
    val = (
        batched_logdet(base + ea + eb)
        - batched_logdet(base + ea - eb)
        - batched_logdet(base - ea + eb)
        + batched_logdet(base - ea - eb)
    ) / (4 * h * h)
    out = np.empty((m, m))
    out[a, b] = val.astype(float)
    out[b, a] = out[a, b]
    return out.reshape(n, n, n, n)


def omega_extremes(R: DecomposedR) -> tuple[float, float]:
    return lambda_min(R.omega), lambda_max(R.omega)
