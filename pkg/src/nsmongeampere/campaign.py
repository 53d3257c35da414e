"""Seeded verification campaigns over random members of D_{delta,mu}.

Every trial draws its randomness from ``SeedSequence([seed, config_index, trial])``
so results do not depend on how trials are scheduled across workers.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import compound, cone, forms
from .errors import BadParams, NsmaError

SCHEMA = 1


class ConfigError(ValueError):
    pass


@dataclass
class Tolerances:
    ineq: float = 1e-9  # inequality slack, relative to 1 + |rhs|
    rec: float = 1e-9  # reconstruction / cross-check
    compound: float = 1e-10
    det: float = 1e-10  # LU determinant vs sigma product form
    n2: float = 1e-12  # n = 2 determinant identity
    fd: float = 1e-6  # finite differences vs exact derivatives
    repr: float = 1e-8  # agreement between quadratic-form representations
    gap: float = 1e-9  # absolute slack on the concavity defect


@dataclass
class CampaignConfig:
    n_list: list[int] = field(default_factory=lambda: [2, 3, 4, 5])
    delta_list: list[float] = field(default_factory=lambda: [0.0, 0.3, 0.9])
    mu_list: list[float] | None = None  # paired with delta_list; defaults to mu = delta
    trials: int = 20
    seed: int = 42
    eta_list: list[float] = field(default_factory=lambda: [0.1, 0.5, 1.0])
    scales: list[float] = field(default_factory=lambda: [0.1, 1.0, 10.0])
    spread: float = cone.DEFAULT_SPREAD
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.n_list or any(int(n) != n or n < 1 for n in self.n_list):
            raise ConfigError("n_list must contain positive integers")
        if self.mu_list is not None and len(self.mu_list) != len(self.delta_list):
            raise ConfigError("mu_list must pair one-to-one with delta_list")
        for eta in self.eta_list:
            if not 0 < eta <= 1:
                raise ConfigError(f"eta must lie in (0, 1], got {eta}")
        try:
            self.cone_params()
        except BadParams as exc:
            raise ConfigError(str(exc)) from exc

    def cone_params(self) -> list[cone.ConeParams]:
        mus = self.delta_list if self.mu_list is None else self.mu_list
        for d in self.delta_list:
            if d >= 1:
                raise BadParams("delta must be < 1")
        return [cone.ConeParams(float(d), float(m)) for d, m in zip(self.delta_list, mus)]

    def configurations(self) -> list[tuple[int, cone.ConeParams]]:
        return [(int(n), p) for n in self.n_list for p in self.cone_params() if n >= 2 or p.mu == 0]

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        tol = data.pop("tolerances", {}) or {}
        try:
            tolerances = Tolerances(**tol)
            return cls(tolerances=tolerances, **data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return asdict(self)


def trial_rng(seed: int, config_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, config_index, trial]))


def _sym(rng, n, scale):
    a = rng.standard_normal((n, n)) * scale
    return 0.5 * (a + a.T)


def _skew(rng, n, scale):
    a = rng.standard_normal((n, n)) * scale
    return 0.5 * (a - a.T)


class _Trial:
    """Collects per-check margins and pass flags for one random trial."""

    def __init__(self, meta: dict):
        self.meta = meta
        self.margins: dict[str, float] = {}
        self.ok: dict[str, bool] = {}
        self.failures: list[dict] = []
        self.stats: dict[str, float] = {}

    def record(self, name: str, margin: float, passed: bool | None = None, member=None, detail: str = ""):
        margin = float(margin)
        passed = margin >= 0 if passed is None else bool(passed)
        self.margins[name] = min(margin, self.margins.get(name, np.inf))
        self.ok[name] = self.ok.get(name, True) and passed
        if not passed:
            payload = dict(self.meta, check=name, margin=margin, detail=detail)
            if member is not None:
                payload["member"] = member.to_json()
            self.failures.append(payload)

    def result(self) -> dict:
        return {"margins": self.margins, "ok": self.ok, "failures": self.failures, "stats": self.stats}

    def guard(self, name: str, fn, member=None):
        try:
            fn()
        except (NsmaError, np.linalg.LinAlgError) as exc:
            self.record(name, -np.inf, False, member, f"{type(exc).__name__}: {exc}")


def run_trial(cfg: CampaignConfig, config_index: int, n: int, params: cone.ConeParams, trial: int, suites=("verify",)) -> dict:
    rng = trial_rng(cfg.seed, config_index, trial)
    tol = cfg.tolerances
    t = _Trial({"config_index": config_index, "trial": trial, "n": n, "delta": params.delta, "mu": params.mu})
    R0 = cone.sample_cone(n, params, rng, cfg.spread)
    R1 = cone.sample_cone(n, params, rng, cfg.spread)
    scale = cfg.scales[trial % len(cfg.scales)]
    P, Q = _sym(rng, n, scale), _skew(rng, n, scale)

    def conc():
        res = forms.concavity_gap(R0, R1, params, tol.ineq)
        t.stats["gap"] = res.gap
        t.stats["d_bound"] = res.d_bound
        t.record("d_concavity", res.d_bound - res.gap, res.gap <= res.d_bound + tol.gap, R0, "gap exceeds d_bound")
        mv = res.checks[1]
        t.record("mean_value_bound", mv.margin, mv.passed, R0, "mean-value bound")

    t.guard("d_concavity", conc, R0)
    if "verify" not in suites:
        return t.result()

    if n >= 2:
        M, N = rng.standard_normal((n, n)), rng.standard_normal((n, n))

        def comp():
            rep = compound.check_compound_identities(M, N, tol=tol.compound)
            r = rep.worst()
            t.record("compound_identities", tol.compound - r, rep.passed, None, f"worst residual {r:.3e}")

        t.guard("compound_identities", comp)

    def spectrum():
        sp = R0.spectrum
        c = sp.unitary
        r1 = compound.residual(c @ c.conj().T, np.eye(n))
        r2 = compound.residual(sp.reconstruct(), R0.sigma)
        pairs = np.max(np.abs(sp.sigmas[0 : 2 * (n // 2) : 2] + sp.sigmas[1 : 2 * (n // 2) : 2]), initial=0.0)
        r = max(r1, r2, pairs)
        t.record("skew_spectrum", tol.rec - r, r <= tol.rec, R0)

    def cone_checks():
        rep = cone.cone_report(R0, params, tol.ineq, tol.det, tol.n2)
        for c in rep.checks:
            t.record(f"cone_{c.name}", c.margin, c.passed, R0, f"{c.lhs!r} {c.relation} {c.rhs!r}")

    def inverse():
        cone.inv_parts(R0, tol.rec)
        t.record("inv_parts", 0.0, True)

    def derivatives():
        g, gf = cone.grad_F(R0), cone.fd_grad(R0)
        h, hf = cone.hess_F(R0), cone.fd_hess(R0)
        r = max(compound.relative_error(gf, g), compound.relative_error(hf, h))
        t.record("derivatives", tol.fd - r, r <= tol.fd, R0, f"residual {r:.3e}")

    def representations():
        vals_p = [
            forms.quad_form_direct(R0, P),
            forms.hess_contraction(R0, P),
            forms.gh_forms(R0, P, Q, tol.repr)[2],
            forms.spectral_forms(R0, P, Q, tol.repr)[0],
            forms.split_form(R0, P, tol.repr).f_M,
        ]
        vals_q = [
            forms.quad_form_direct(R0, Q),
            forms.hess_contraction(R0, Q),
            forms.gh_forms(R0, P, Q, tol.repr)[5],
            forms.spectral_forms(R0, P, Q, tol.repr)[1],
            forms.split_form(R0, Q, tol.repr).f_M,
        ]
        forms.split_form(R0, P + Q, tol.repr)
        worst = 0.0
        for vals in (vals_p, vals_q):
            for a in vals:
                for b in vals:
                    worst = max(worst, abs(a - b) / (1 + max(abs(a), abs(b))))
        t.record("representations", tol.repr - worst, worst <= tol.repr, R0, f"spread {worst:.3e}")

    def bounds():
        for eta in cfg.eta_list:
            rep = forms.bounds_report(R0, P, Q, eta, params, tol.ineq)
            for b in rep.bounds:
                t.record(f"bound_{b.name}", b.margin, b.passed, R0, f"eta={eta}")

    t.guard("skew_spectrum", spectrum, R0)
    t.guard("cone_report", cone_checks, R0)
    t.guard("inv_parts", inverse, R0)
    t.guard("derivatives", derivatives, R0)
    t.guard("representations", representations, R0)
    t.guard("bounds", bounds, R0)
    return t.result()


def _task(args):
    cfg, ci, n, params, trial, suites = args
    return (ci, trial), run_trial(cfg, ci, n, params, trial, suites)


def run_campaign(cfg: CampaignConfig, jobs: int = 1, suites=("verify",)) -> dict:
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    configs = cfg.configurations()
    tasks = [(cfg, ci, n, p, trial, suites) for ci, (n, p) in enumerate(configs) for trial in range(cfg.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_task(a) for a in tasks]
    results.sort(key=lambda r: r[0])

    checks: dict[str, dict] = {}
    failures = []
    rows = []
    for ci, (n, p) in enumerate(configs):
        gaps, d = [], forms.d_bound(n, p.delta) if p.delta < 1 else np.inf
        for (cj, _), res in results:
            if cj != ci:
                continue
            for name, margin in res["margins"].items():
                entry = checks.setdefault(name, {"passed": 0, "failed": 0, "worst_margin": np.inf})
                if res["ok"][name]:
                    entry["passed"] += 1
                else:
                    entry["failed"] += 1
                entry["worst_margin"] = min(entry["worst_margin"], margin)
            failures.extend(res["failures"])
            if "gap" in res["stats"]:
                gaps.append(res["stats"]["gap"])
        max_gap = max(gaps) if gaps else float("nan")
        rows.append(
            {
                "n": n,
                "delta": p.delta,
                "mu": p.mu,
                "trials": len(gaps),
                "max_gap": max_gap,
                "d_bound": d,
                "margin": d - max_gap,
                "passed": bool(max_gap <= d + cfg.tolerances.gap),
            }
        )
    total_failed = sum(c["failed"] for c in checks.values())
    return {
        "schema": SCHEMA,
        "command": "+".join(suites),
        "config": cfg.to_dict(),
        "summary": {"checks": len(checks), "failures": total_failed, "passed": total_failed == 0},
        "checks": {k: checks[k] for k in sorted(checks)},
        "configurations": rows,
        "failures": failures,
        "timing": {"started": started.isoformat(), "wall_clock_s": time.perf_counter() - t0},
    }


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


GAP_COLUMNS = ["n", "delta", "mu", "trials", "max_gap", "d_bound", "margin", "passed"]


def gap_table_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=GAP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r[k] for k in GAP_COLUMNS})
    return buf.getvalue()


def summary_text(report: dict) -> str:
    lines = []
    if report["checks"]:
        width = max(len(k) for k in report["checks"])
        lines.append(f"{'check':<{width}}  {'pass':>6}  {'fail':>6}  worst margin")
        for name, c in report["checks"].items():
            lines.append(f"{name:<{width}}  {c['passed']:>6}  {c['failed']:>6}  {c['worst_margin']:.3e}")
        lines.append("")
    lines.append(f"{'n':>3}  {'delta':>6}  {'mu':>6}  {'trials':>6}  {'max gap':>11}  {'d bound':>11}  ok")
    for r in report["configurations"]:
        lines.append(
            f"{r['n']:>3}  {r['delta']:>6.3f}  {r['mu']:>6.3f}  {r['trials']:>6}  {r['max_gap']:>11.4e}  {r['d_bound']:>11.4e}  {'yes' if r['passed'] else 'NO'}"
        )
    s = report["summary"]
    lines.append("")
    lines.append(f"failures: {s['failures']}  ({'PASS' if s['passed'] else 'FAIL'})")
    return "\n".join(lines)
