"""Scenario catalog for comparison-principle checks: fields, domains and grids.

Every field is evaluated on batches. Points ``x`` have shape ``(N, n)``, values
``z`` shape ``(N,)`` and gradients ``p`` shape ``(N, n)``; matrix outputs are
``(N, n, n)`` and ``p``-derivatives are ``(N, n, n, n)`` with the derivative
index last.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .matrix_core import op_norm


class ScenarioError(ValueError):
    """Malformed or inadmissible scenario description."""


def _mat(data, n, what):
    a = np.array(data, dtype=float)
    if a.shape != (n, n):
        raise ScenarioError(f"{what}: expected a {n}x{n} matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ScenarioError(f"{what}: non-finite entries")
    return a


def _vec(data, n, what):
    a = np.array(data, dtype=float)
    if a.shape != (n,):
        raise ScenarioError(f"{what}: expected a vector of length {n}")
    return a


# ---------------------------------------------------------------- scalar fields


@dataclass(frozen=True)
class Bump:
    """``amplitude * (radius^2 - |x - center|^2)``."""

    amplitude: float
    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class ScalarField:
    """Quadratic ``1/2 x^T H x + g.x + c`` plus radial bump corrections."""

    hessian: np.ndarray
    linear: np.ndarray
    constant: float = 0.0
    bumps: tuple[Bump, ...] = ()

    @property
    def n(self) -> int:
        return self.hessian.shape[0]

    def value(self, x):
        x = np.atleast_2d(x)
        out = 0.5 * np.einsum("ni,ij,nj->n", x, self.hessian, x) + x @ self.linear + self.constant
        for b in self.bumps:
            out = out + b.amplitude * (b.radius**2 - np.sum((x - b.center) ** 2, axis=1))
        return out

    def grad(self, x):
        x = np.atleast_2d(x)
        out = x @ self.hessian.T + self.linear
        for b in self.bumps:
            out = out - 2 * b.amplitude * (x - b.center)
        return out

    def hess(self, x):
        x = np.atleast_2d(x)
        h = self.hessian - 2 * sum(b.amplitude for b in self.bumps) * np.eye(self.n)
        return np.broadcast_to(h, (len(x), self.n, self.n)).copy()

    @classmethod
    def from_dict(cls, data: dict, n: int, what: str) -> "ScalarField":
        kind = data.get("type", "quadratic")
        if kind != "quadratic":
            raise ScenarioError(f"{what}: unknown scalar field type {kind!r}")
        hess = _mat(data.get("hessian", np.zeros((n, n))), n, f"{what}.hessian")
        if np.max(np.abs(hess - hess.T)) > 0:
            raise ScenarioError(f"{what}.hessian must be symmetric")
        bumps = tuple(
            Bump(
                float(b["amplitude"]),
                _vec(b.get("center", np.zeros(n)), n, f"{what}.bumps.center"),
                float(b.get("radius", 1.0)),
            )
            for b in data.get("bumps", [])
        )
        return cls(hess, _vec(data.get("linear", np.zeros(n)), n, f"{what}.linear"), float(data.get("constant", 0.0)), bumps)


# ---------------------------------------------------------------- matrix fields


@dataclass(frozen=True)
class MatrixField:
    """``M0 + z Mz + sum_k p_k Mp[k] + sum_k x_k Mx[k] + sin(z) Ms``.

    Family names in scenario files: ``zero``, ``constant`` (value only),
    ``affine`` (value, z, p, x) and ``sin_z`` (value, sin).
    """

    value0: np.ndarray
    z: np.ndarray
    p: np.ndarray  # (n, n, n), p[k] multiplies p_k
    x: np.ndarray  # (n, n, n)
    sin: np.ndarray

    @property
    def n(self) -> int:
        return self.value0.shape[0]

    @property
    def is_constant(self) -> bool:
        return not (self.z.any() or self.p.any() or self.x.any() or self.sin.any())

    @property
    def dz_is_constant(self) -> bool:
        return not self.sin.any()

    def parts(self):
        return [self.value0, self.z, self.sin, *self.p, *self.x]

    def value(self, x, z, p):
        x, p = np.atleast_2d(x), np.atleast_2d(p)
        z = np.atleast_1d(z)
        out = (
            self.value0
            + z[:, None, None] * self.z
            + np.einsum("nk,kij->nij", p, self.p)
            + np.einsum("nk,kij->nij", x, self.x)
            + np.sin(z)[:, None, None] * self.sin
        )
        return np.broadcast_to(out, (len(x), self.n, self.n))

    def dz(self, x, z, p):
        z = np.atleast_1d(z)
        out = self.z + np.cos(z)[:, None, None] * self.sin
        return np.broadcast_to(out, (max(len(np.atleast_2d(x)), len(z)), self.n, self.n))

    def dp(self, x, z, p):
        x = np.atleast_2d(x)
        return np.broadcast_to(np.moveaxis(self.p, 0, -1), (len(x), self.n, self.n, self.n))

    @classmethod
    def from_dict(cls, data: dict, n: int, what: str, structure: str) -> "MatrixField":
        kind = data.get("type", "constant")
        zero = np.zeros((n, n))
        allowed = {
            "zero": set(),
            "constant": {"value"},
            "affine": {"value", "z", "p", "x"},
            "sin_z": {"value", "sin"},
        }
        if kind not in allowed:
            raise ScenarioError(f"{what}: unknown matrix field type {kind!r}")
        extra = set(data) - allowed[kind] - {"type"}
        if extra:
            raise ScenarioError(f"{what}: keys {sorted(extra)} not valid for type {kind!r}")

        def stack(key):
            items = data.get(key)
            if items is None:
                return np.zeros((n, n, n))
            if len(items) != n:
                raise ScenarioError(f"{what}.{key}: expected {n} matrices")
            return np.stack([_mat(m, n, f"{what}.{key}") for m in items])

        field_ = cls(
            _mat(data.get("value", zero), n, f"{what}.value"),
            _mat(data.get("z", zero), n, f"{what}.z"),
            stack("p"),
            stack("x"),
            _mat(data.get("sin", zero), n, f"{what}.sin"),
        )
        for part in field_.parts():
            if structure == "symmetric" and np.max(np.abs(part - part.T)) > 0:
                raise ScenarioError(f"{what} must be symmetric")
            if structure == "skew" and np.max(np.abs(part + part.T)) > 0:
                raise ScenarioError(f"{what} must be skew-symmetric")
        return field_

    def exact_sup_norm(self) -> float | None:
        """``sup ||M||`` when it is known in closed form, else None."""
        if self.is_constant:
            return op_norm(self.value0)
        return None

    def exact_sup_norm_dz(self) -> float | None:
        if self.dz_is_constant:
            return op_norm(self.z)
        return None


# ---------------------------------------------------------------- forcing


@dataclass(frozen=True)
class Forcing:
    """Right-hand side ``f(x, z, p)``.

    ``exp_z``: ``scale * exp(rate * z + p_rate . p)``;
    ``affine_z``: ``value + slope * z`` (positivity then depends on the sampled z).
    """

    kind: str
    scale: float
    rate: float
    p_rate: np.ndarray

    def value(self, x, z, p):
        z, p = np.atleast_1d(z), np.atleast_2d(p)
        if self.kind == "exp_z":
            return self.scale * np.exp(self.rate * z + p @ self.p_rate)
        return self.scale + self.rate * z + 0.0 * (p @ self.p_rate)

    def dz(self, x, z, p):
        if self.kind == "exp_z":
            return self.rate * self.value(x, z, p)
        return np.full(len(np.atleast_1d(z)), self.rate)

    def dp(self, x, z, p):
        if self.kind == "exp_z":
            return self.value(x, z, p)[:, None] * self.p_rate
        return np.zeros((len(np.atleast_1d(z)), len(self.p_rate)))

    def exact_inf_log_dz(self) -> float | None:
        """``inf D_z f / f`` when known in closed form."""
        return self.rate if self.kind == "exp_z" else None

    @classmethod
    def from_dict(cls, data: dict, n: int) -> "Forcing":
        kind = data.get("type", "exp_z")
        if kind == "constant":
            kind, scale, rate = "exp_z", float(data["value"]), 0.0
        elif kind == "exp_z":
            scale, rate = float(data.get("scale", 1.0)), float(data.get("rate", 1.0))
        elif kind == "affine_z":
            scale, rate = float(data["value"]), float(data.get("slope", 0.0))
        else:
            raise ScenarioError(f"f: unknown forcing type {kind!r}")
        if kind == "exp_z" and scale <= 0:
            raise ScenarioError("f must be positive")
        p_rate = _vec(data.get("p_rate", np.zeros(n)), n, "f.p_rate")
        return cls(kind, scale, rate, p_rate)


# ---------------------------------------------------------------- domains and grids


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    @property
    def n(self) -> int:
        return len(self.center)

    def bounds(self):
        return self.center - self.radius, self.center + self.radius

    def contains(self, x, rel: float = 1e-12):
        return np.linalg.norm(np.atleast_2d(x) - self.center, axis=1) < self.radius * (1 - rel)

    def boundary(self, resolution: int):
        if self.n == 2:
            t = 2 * np.pi * np.arange(resolution) / resolution
            dirs = np.column_stack([np.cos(t), np.sin(t)])
        else:
            # Fibonacci sphere
            k = np.arange(resolution) + 0.5
            polar = np.arccos(1 - 2 * k / resolution)
            azim = np.pi * (1 + 5**0.5) * k
            dirs = np.column_stack([np.cos(azim) * np.sin(polar), np.sin(azim) * np.sin(polar), np.cos(polar)])
        return self.center + self.radius * dirs, -dirs


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    @property
    def n(self) -> int:
        return len(self.lower)

    def bounds(self):
        return self.lower, self.upper

    def contains(self, x, rel: float = 1e-12):
        x = np.atleast_2d(x)
        pad = rel * (self.upper - self.lower)
        return np.all((x > self.lower + pad) & (x < self.upper - pad), axis=1)

    def boundary(self, resolution: int):
        # face-interior nodes only; edges and corners have no unique normal
        per_axis = max(2, resolution // 4 if self.n == 2 else int(round(resolution**0.5)))
        pts, normals = [], []
        for axis in range(self.n):
            others = [i for i in range(self.n) if i != axis]
            axes = [np.linspace(self.lower[i], self.upper[i], per_axis + 2)[1:-1] for i in others]
            mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.n - 1)
            for side, sign in ((self.lower[axis], 1.0), (self.upper[axis], -1.0)):
                face = np.empty((len(mesh), self.n))
                face[:, others] = mesh
                face[:, axis] = side
                nu = np.zeros((len(mesh), self.n))
                nu[:, axis] = sign
                pts.append(face)
                normals.append(nu)
        return np.vstack(pts), np.vstack(normals)


@dataclass(frozen=True)
class Grid:
    points: np.ndarray
    boundary_points: np.ndarray
    normals: np.ndarray  # unit inner normals at boundary_points
    spacing: float

    @property
    def all_points(self) -> np.ndarray:
        return np.vstack([self.points, self.boundary_points])


def build_grid(domain, resolution: int = 41, boundary_resolution: int = 256) -> Grid:
    lo, hi = domain.bounds()
    axes = [np.linspace(lo[i], hi[i], resolution) for i in range(domain.n)]
    lattice = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, domain.n)
    interior = lattice[domain.contains(lattice)]
    bpts, normals = domain.boundary(boundary_resolution)
    return Grid(interior, bpts, normals, float((hi[0] - lo[0]) / (resolution - 1)))


# ---------------------------------------------------------------- scenario


@dataclass(frozen=True)
class Sampling:
    """Bounded (z, p) box standing in for R x R^n when estimating sup/inf."""

    z_range: tuple[float, float] = (-2.0, 2.0)
    p_range: tuple[float, float] = (-2.0, 2.0)
    points: int = 7
    x_points: int = 200


@dataclass(frozen=True)
class GridSettings:
    resolution: int = 41
    boundary_resolution: int = 256
    stau_points: int = 5
    xi_samples: int = 1000
    tol_conclude: float = 1e-8
    seed: int = 0


@dataclass(frozen=True)
class Scenario:
    n: int
    domain: Ball | Box
    u: ScalarField
    v: ScalarField
    A: MatrixField
    B: MatrixField
    f: Forcing
    delta: float
    alpha1: float = 0.0
    beta1: float = 0.0
    sampling: Sampling = field(default_factory=Sampling)
    grid: GridSettings = field(default_factory=GridSettings)
    name: str = "scenario"

    def field_for(self, which: str) -> ScalarField:
        if which not in ("u", "v"):
            raise ValueError("which must be 'u' or 'v'")
        return self.u if which == "u" else self.v

    def build_grid(self) -> Grid:
        return build_grid(self.domain, self.grid.resolution, self.grid.boundary_resolution)

    def zp_lattice(self):
        """Cartesian (z, p) sample lattice, shapes ``(K,)`` and ``(K, n)``."""
        s = self.sampling
        zs = np.linspace(*s.z_range, s.points)
        ps = np.linspace(*s.p_range, s.points)
        mesh = np.stack(np.meshgrid(zs, *([ps] * self.n), indexing="ij"), axis=-1).reshape(-1, self.n + 1)
        return mesh[:, 0], mesh[:, 1:]


def scenario_from_dict(data: dict) -> Scenario:
    try:
        n = int(data["dimension"])
        if n not in (2, 3):
            raise ScenarioError("dimension must be 2 or 3")
        dom = data["domain"]
        if dom.get("type") == "ball":
            domain = Ball(_vec(dom.get("center", np.zeros(n)), n, "domain.center"), float(dom.get("radius", 1.0)))
            if domain.radius <= 0:
                raise ScenarioError("domain.radius must be positive")
        elif dom.get("type") == "box":
            domain = Box(_vec(dom["lower"], n, "domain.lower"), _vec(dom["upper"], n, "domain.upper"))
            if np.any(domain.upper <= domain.lower):
                raise ScenarioError("domain: upper must exceed lower")
        else:
            raise ScenarioError(f"unknown domain type {dom.get('type')!r}")
        consts = data.get("constants", {})
        delta = float(consts.get("delta", 0.0))
        alpha1 = float(consts.get("alpha1", 0.0))
        beta1 = float(consts.get("beta1", 0.0))
        if not 0 <= delta < 1:
            raise ScenarioError("delta must be < 1 and >= 0")
        if alpha1 < 0 or beta1 < 0:
            raise ScenarioError("alpha1 and beta1 must be nonnegative")
        samp = data.get("sampling", {})
        sampling = Sampling(
            tuple(samp.get("z", (-2.0, 2.0))),
            tuple(samp.get("p", (-2.0, 2.0))),
            int(samp.get("points", 7)),
            int(samp.get("x_points", 200)),
        )
        g = data.get("grid", {})
        settings = GridSettings(
            int(g.get("resolution", 41)),
            int(g.get("boundary_resolution", 256)),
            int(g.get("stau_points", 5)),
            int(g.get("xi_samples", 1000)),
            float(g.get("tol_conclude", 1e-8)),
            int(g.get("seed", 0)),
        )
        sc = Scenario(
            n=n,
            domain=domain,
            u=ScalarField.from_dict(data["u"], n, "u"),
            v=ScalarField.from_dict(data["v"], n, "v"),
            A=MatrixField.from_dict(data.get("A", {"type": "zero"}), n, "A", "symmetric"),
            B=MatrixField.from_dict(data.get("B", {"type": "zero"}), n, "B", "skew"),
            f=Forcing.from_dict(data["f"], n),
            delta=delta,
            alpha1=alpha1,
            beta1=beta1,
            sampling=sampling,
            grid=settings,
            name=str(data.get("name", "scenario")),
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc
    _check_positive_forcing(sc)
    return sc


def _check_positive_forcing(sc: Scenario) -> None:
    """f must be positive on every point the checks evaluate."""
    grid = sc.build_grid()
    pts = grid.all_points
    for w in (sc.u, sc.v):
        if np.any(sc.f.value(pts, w.value(pts), w.grad(pts)) <= 0):
            raise ScenarioError("f must be positive")
    z, p = sc.zp_lattice()
    if np.any(sc.f.value(np.zeros((len(z), sc.n)), z, p) <= 0):
        raise ScenarioError("f must be positive")


def load_scenario(path: str | Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    return scenario_from_dict(data)


def bundled_scenario_path(name: str = "disk") -> Path:
    return Path(__file__).with_name("data") / f"{name}_scenario.json"
