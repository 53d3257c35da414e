"""Command line entry point: ``nsma verify | dconcavity | compare | inspect``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import campaign, comparison, cone
from .errors import NsmaError
from .matrix_core import matrix_from_json
from .scenario import ScenarioError, bundled_scenario_path, load_scenario

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _usage(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_USAGE


def load_config(args) -> campaign.CampaignConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise campaign.ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(data, dict):
            raise campaign.ConfigError("config must be a JSON object")
    if args.seed is not None:
        data["seed"] = args.seed
    if args.trials is not None:
        data["trials"] = args.trials
    if args.tolerance is not None:
        tol = dict(data.get("tolerances") or {})
        tol["ineq"] = args.tolerance
        data["tolerances"] = tol
    return campaign.CampaignConfig.from_dict(data)


def _run_campaign(args, suites) -> tuple[int, dict | None]:
    try:
        cfg = load_config(args)
    except (campaign.ConfigError, NsmaError) as exc:
        return _usage(str(exc)), None
    if args.jobs < 1:
        return _usage("--jobs must be >= 1"), None
    report = campaign.run_campaign(cfg, jobs=args.jobs, suites=suites)
    _write(args.out, dumps(report))
    return (EXIT_OK if report["summary"]["passed"] else EXIT_FAIL), report


def cmd_verify(args) -> int:
    code, report = _run_campaign(args, ("verify",))
    if report is not None:
        print(campaign.summary_text(report))
    return code


def cmd_dconcavity(args) -> int:
    code, report = _run_campaign(args, ("dconcavity",))
    if report is None:
        return code
    table = campaign.gap_table_csv(report["configurations"])
    csv_path = args.csv or (str(Path(args.out).with_suffix(".csv")) if args.out else None)
    if csv_path:
        _write(csv_path, table)
    print(campaign.summary_text(report))
    if not all(r["passed"] for r in report["configurations"]):
        return EXIT_FAIL
    return code


def _condition_table(title: str, conds: dict) -> list[str]:
    lines = [title]
    for name, c in conds.items():
        status = "exact" if c.exact else "estimated"
        lines.append(f"  {name:<22} {'pass' if c.passed else 'FAIL':<5} margin {c.margin: .4e}  ({status})")
    return lines


def cmd_compare(args) -> int:
    path = bundled_scenario_path(args.bundled) if args.bundled else args.scenario
    if path is None:
        return _usage("give a scenario path or --bundled NAME")
    try:
        sc = load_scenario(path)
    except FileNotFoundError:
        return _usage(f"scenario file not found: {path}")
    except ScenarioError as exc:
        return _usage(str(exc))
    verdict = comparison.comparison_verdict(sc)
    lines = _condition_table("hypotheses", verdict.hypotheses.conditions)
    lines += _condition_table("claims", verdict.claims.claims)
    lines.append(f"preconditions: G order margin {verdict.preconditions['G_order_margin']:.4e}, boundary margin {verdict.preconditions['boundary_margin']:.4e}")
    lines.append(f"verdict: {verdict.conclusion}  (min interior u - v = {verdict.min_interior_margin:.4e})")
    if verdict.boundary_normal_margin is not None:
        lines.append(f"boundary normal margin: {verdict.boundary_normal_margin:.6g}")
    print("\n".join(lines))
    report = {"schema": campaign.SCHEMA, "command": "compare", "scenario": str(path), "verdict": verdict.to_dict()}
    _write(args.out, dumps(report))

    ok = verdict.conforming and verdict.conclusion != "violated" and verdict.claims.passed
    if verdict.boundary_normal_margin is not None and not verdict.boundary_normal_margin > 0:
        ok = False
    return EXIT_OK if ok else EXIT_FAIL


def cmd_inspect(args) -> int:
    try:
        if args.member:
            data = json.loads(Path(args.member).read_text())
            R = cone.DecomposedR.from_json(data.get("member", data))
        elif args.matrix:
            R = cone.decompose(matrix_from_json(args.matrix))
        elif args.omega and args.beta:
            R = cone.make_R(matrix_from_json(args.omega), matrix_from_json(args.beta))
        else:
            return _usage("give --matrix, --omega with --beta, or --member FILE")
        params = cone.ConeParams(args.delta, args.mu if args.mu is not None else args.delta)
    except (OSError, ValueError, KeyError) as exc:
        return _usage(str(exc))
    mem = cone.membership(R, params)
    out = {
        "schema": campaign.SCHEMA,
        "command": "inspect",
        "member": R.to_json(),
        "sigmas": R.spectrum.sigmas,
        "log_det": cone.log_det_F(R),
        "membership": vars(mem),
    }
    ok = bool(mem)
    if mem:
        rep = cone.cone_report(R, params)
        out["cone_report"] = rep.to_dict()
        ok = rep.passed
    text = dumps(out)
    _write(args.out, text)
    print(text, end="")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsma", description="Numerical checks for non-symmetric Monge-Ampere type functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def campaign_flags(p):
        p.add_argument("--config", help="JSON campaign config (defaults apply when omitted)")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--tolerance", type=float, help="override the inequality slack")

    p = sub.add_parser("verify", help="run the randomized property campaign")
    campaign_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dconcavity", help="empirical concavity defect per (n, delta)")
    campaign_flags(p)
    p.add_argument("--csv", help="gap table path (default: --out with .csv suffix)")
    p.set_defaults(func=cmd_dconcavity)

    p = sub.add_parser("compare", help="check a comparison-principle scenario")
    p.add_argument("scenario", nargs="?", help="scenario JSON file")
    p.add_argument("--bundled", metavar="NAME", help="use a bundled scenario (disk, identical)")
    p.add_argument("--out", help="write the JSON verdict here")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("inspect", help="decompose one matrix and report cone checks")
    p.add_argument("--matrix", help="JSON literal of R")
    p.add_argument("--omega", help="JSON literal of the symmetric part")
    p.add_argument("--beta", help="JSON literal of the skew part")
    p.add_argument("--member", help="JSON file with omega and beta (or a failure payload)")
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--mu", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NsmaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
