"""Acceptance suite: each criterion at its stated scale and tolerance.

Every test prints one ``ACCEPT <k> ... PASS|FAIL`` line (visible with or without
``-s``) and then asserts. Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import json
import time

import numpy as np
import pytest

from nsmongeampere import campaign
from nsmongeampere.cli import main
from nsmongeampere.compound import check_compound_identities, relative_error
from nsmongeampere.comparison import comparison_verdict
from nsmongeampere.cone import ConeParams, cone_report, fd_grad, fd_hess, grad_F, hess_F, sample_cone
from nsmongeampere.forms import (
    bounds_report,
    concavity_gap,
    d_bound,
    gh_forms,
    hess_contraction,
    quad_form_direct,
    spectral_forms,
    split_form,
)
from nsmongeampere.scenario import bundled_scenario_path, load_scenario

CONFIGS = [(n, d) for n in (2, 3, 5) for d in (0.0, 0.3, 0.9)]


@pytest.fixture
def report(capsys):
    def emit(k, title, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPT {k} {title}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok

    return emit


def _rng(*key):
    return np.random.default_rng(np.random.SeedSequence([2024, *key]))


def test_1_compound_identities(report):
    t0 = time.perf_counter()
    worst, fails, skipped = 0.0, [], 0
    for n in range(2, 9):
        rng = _rng(1, n)
        for trial in range(500):
            M, N = rng.standard_normal((n, n)), rng.standard_normal((n, n))
            rep = check_compound_identities(M, N, tol=1e-10)
            worst = max(worst, rep.worst())
            skipped += rep.checks["inverse"].residual is None
            if not rep.passed:
                fails.append((n, trial, rep.to_dict()))
    elapsed = time.perf_counter() - t0
    ok = not fails and worst <= 1e-10 and elapsed < 10
    report(1, "compound identities", ok, f"3500 pairs, worst residual {worst:.2e}, inverse skipped {skipped}, {elapsed:.1f}s")
    assert not fails, fails[:3]
    assert elapsed < 10


def test_2_determinant_structure(report):
    t0 = time.perf_counter()
    bad, worst_ineq, worst_prod, worst_n2 = [], np.inf, 0.0, 0.0
    for ci, (n, d) in enumerate(CONFIGS):
        p = ConeParams(d, d)
        rng = _rng(2, ci)
        for trial in range(10_000):
            R = sample_cone(n, p, rng)
            rep = cone_report(R, p, tol=1e-9, det_tol=1e-10, n2_tol=1e-12)
            for c in rep.checks:
                if c.relation == "<=":
                    worst_ineq = min(worst_ineq, c.margin)
                elif c.name == "det_product_form":
                    worst_prod = max(worst_prod, -c.margin)
                else:
                    worst_n2 = max(worst_n2, -c.margin)
            if not rep.passed:
                bad.append((n, d, trial, [c.name for c in rep.checks if not c.passed]))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60
    report(
        2,
        "determinant structure",
        ok,
        f"90000 members, product err {worst_prod:.1e}, n=2 identity err {worst_n2:.1e}, worst margin {worst_ineq:.1e}, {elapsed:.1f}s",
    )
    assert not bad, bad[:3]
    assert elapsed < 60


def test_3_derivative_exactness(report):
    worst = 0.0
    for n in range(2, 6):
        rng = _rng(3, n)
        for _ in range(100):
            d = rng.choice([0.0, 0.3, 0.9])
            R = sample_cone(n, ConeParams(d, d), rng)
            worst = max(worst, relative_error(fd_grad(R), grad_F(R)), relative_error(fd_hess(R), hess_F(R)))
    ok = worst <= 1e-6
    report(3, "derivative exactness", ok, f"400 members, worst FD relative error {worst:.2e} (max-abs over max|exact|)")
    assert ok


def _triples():
    for n in range(2, 6):
        rng = _rng(4, n)
        for trial in range(1000):
            d = (0.0, 0.3, 0.9)[trial % 3]
            p = ConeParams(d, d)
            scale = (0.1, 1.0, 10.0)[(trial // 3) % 3]
            R = sample_cone(n, p, rng)
            A, B = rng.standard_normal((n, n)) * scale, rng.standard_normal((n, n)) * scale
            yield n, p, R, 0.5 * (A + A.T), 0.5 * (B - B.T)


def _spread(vals):
    return max(abs(a - b) / (1 + max(abs(a), abs(b))) for a in vals for b in vals)


def test_4_representation_consistency(report):
    worst = 0.0
    for n, p, R, P, Q in _triples():
        g = gh_forms(R, P, Q, tol=1e-8)
        sp = spectral_forms(R, P, Q, tol=1e-8)
        for M, f_gh, f_sp in ((P, g[2], sp[0]), (Q, g[5], sp[1])):
            vals = [quad_form_direct(R, M), hess_contraction(R, M), f_gh, f_sp, split_form(R, M, tol=1e-8).f_M]
            worst = max(worst, _spread(vals))
        rep = split_form(R, P + Q, tol=1e-8)
        worst = max(worst, _spread([rep.f_M, rep.f_P + rep.f_Q + 2 * rep.l_PQ]))
    ok = worst <= 1e-8
    report(4, "representation consistency", ok, f"4000 triples, worst pairwise spread {worst:.2e}")
    assert ok


def test_5_bounds(report):
    worst, bad = {}, []
    for n, p, R, P, Q in _triples():
        for eta in (0.1, 0.5, 1.0):
            rep = bounds_report(R, P, Q, eta, p, tol=1e-9)
            for b in rep.bounds:
                worst[b.name] = min(worst.get(b.name, np.inf), b.margin)
            if not rep.passed:
                bad.append((n, p, eta))
    ok = not bad and min(worst.values()) >= -1e-9
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report(5, "quadratic-form bounds", ok, f"12000 evaluations, worst margins: {detail}")
    assert ok, bad[:3]


def test_6_d_concavity(report):
    rows, bad = [], []
    for ci, (n, d) in enumerate(CONFIGS):
        p = ConeParams(d, d)
        rng = _rng(6, ci)
        gmax, dval = -np.inf, d_bound(n, d)
        for trial in range(10_000):
            res = concavity_gap(sample_cone(n, p, rng), sample_cone(n, p, rng), p)
            gmax = max(gmax, res.gap)
            if not res.gap <= dval + 1e-9 or (d == 0 and res.gap > 1e-9) or not res.passed:
                bad.append((n, d, trial, res.to_dict()))
        rows.append(f"n={n} delta={d}: max gap {gmax:.3e} vs d {dval:.3e}")
    ok = not bad
    report(6, "d-concavity", ok, "; ".join(rows))
    assert ok, bad[:3]


def test_7_comparison_principle(report):
    t0 = time.perf_counter()
    sc = load_scenario(bundled_scenario_path("disk"))
    grid = sc.build_grid()
    v = comparison_verdict(sc, grid)
    elapsed = time.perf_counter() - t0
    ok = (
        sc.grid.resolution >= 41
        and sc.grid.stau_points == 5
        and v.hypotheses.passed
        and v.claims.passed
        and v.preconditions["passed"]
        and v.conclusion == "u_gt_v"
        and v.min_interior_margin > 0
        and v.boundary_normal_margin is not None
        and abs(v.boundary_normal_margin - 0.02) <= 1e-9
        and elapsed < 10
    )
    report(
        7,
        "comparison principle",
        ok,
        f"verdict {v.conclusion}, interior margin {v.min_interior_margin:.2e}, normal margin {v.boundary_normal_margin!r}, {len(grid.points)} interior nodes, {elapsed:.2f}s",
    )
    assert ok


def test_8_determinism(report, tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    codes = [main(["verify", "--seed", "42", "--out", str(p)]) for p in (a, b)]
    capsys.readouterr()
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    same = campaign.strip_timing(ra) == campaign.strip_timing(rb)
    ok = same and codes == [0, 0] and ra["summary"]["failures"] == 0
    report(8, "determinism", ok, f"exit codes {codes}, identical content {same}, failures {ra['summary']['failures']}")
    assert ok
