import csv
import io
import json

import pytest

from nsmongeampere import campaign
from nsmongeampere.cli import main
from nsmongeampere.scenario import bundled_scenario_path


def small_config(tmp_path, **over):
    cfg = {"n_list": [2, 3], "delta_list": [0.0, 0.5], "trials": 3, "seed": 5}
    cfg.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_verify_small_passes(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["verify", "--config", small_config(tmp_path), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["schema"] == 1
    assert report["summary"]["failures"] == 0 and report["failures"] == []
    assert "wall_clock_s" in report["timing"]
    assert "PASS" in capsys.readouterr().out


def test_verify_default_config_without_flag(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--trials", "1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["config"]["seed"] == 42


def test_verify_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cfg = small_config(tmp_path)
    main(["verify", "--config", cfg, "--out", str(a)])
    main(["verify", "--config", cfg, "--out", str(b)])
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert campaign.strip_timing(ra) == campaign.strip_timing(rb)


def test_seed_changes_content(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cfg = small_config(tmp_path)
    main(["verify", "--config", cfg, "--out", str(a), "--seed", "1"])
    main(["verify", "--config", cfg, "--out", str(b), "--seed", "2"])
    assert json.loads(a.read_text())["checks"] != json.loads(b.read_text())["checks"]


def test_parallel_matches_serial():
    cfg = campaign.CampaignConfig(n_list=[2, 4], delta_list=[0.3], trials=4, seed=9)
    serial = campaign.run_campaign(cfg, jobs=1)
    parallel = campaign.run_campaign(cfg, jobs=2)
    assert campaign.strip_timing(serial) == campaign.strip_timing(parallel)


@pytest.mark.parametrize(
    "cfg, message",
    [
        ({"delta_list": [1.0]}, "delta must be < 1"),
        ({"trials": 0}, "trials must be >= 1"),
        ({"eta_list": [0.0]}, "eta"),
        ({"bogus": 1}, "unknown config keys"),
        ({"delta_list": [0.5], "mu_list": [0.1, 0.2]}, "mu_list"),
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, cfg, message):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    assert main(["verify", "--config", str(path)]) == 2
    assert message in capsys.readouterr().err


def test_unreadable_config_exit_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["verify", "--config", str(path)]) == 2
    assert main(["verify", "--config", str(tmp_path / "missing.json")]) == 2


def test_check_failure_exit_1(tmp_path):
    # a negative slack makes every exactly-tight check fail
    cfg = small_config(tmp_path, tolerances={"compound": -1.0})
    out = tmp_path / "r.json"
    assert main(["verify", "--config", cfg, "--out", str(out)]) == 1
    report = json.loads(out.read_text())
    assert report["failures"] and report["failures"][0]["check"] == "compound_identities"


def test_failure_payload_replays(tmp_path):
    cfg = small_config(tmp_path, tolerances={"fd": -1.0})
    out = tmp_path / "r.json"
    assert main(["verify", "--config", cfg, "--out", str(out)]) == 1
    payload = next(f for f in json.loads(out.read_text())["failures"] if "member" in f)
    member = tmp_path / "m.json"
    member.write_text(json.dumps(payload))
    assert main(["inspect", "--member", str(member), "--delta", str(payload["delta"]), "--mu", str(payload["mu"])]) == 0


def test_dconcavity_table(tmp_path):
    cfg = small_config(tmp_path, n_list=[2], delta_list=[0.0, 0.5], trials=20)
    out = tmp_path / "g.json"
    assert main(["dconcavity", "--config", cfg, "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "g.csv").read_text())))
    assert [r["delta"] for r in rows] == ["0.0", "0.5"]
    assert float(rows[0]["d_bound"]) == 0.0 and float(rows[0]["max_gap"]) <= 1e-9
    assert float(rows[1]["d_bound"]) == pytest.approx(19 / 3)
    assert all(float(r["max_gap"]) <= float(r["d_bound"]) + 1e-9 for r in rows)


def test_dconcavity_config_error(tmp_path):
    assert main(["dconcavity", "--config", small_config(tmp_path, delta_list=[1.0])]) == 2


def test_compare_bundled(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["compare", str(bundled_scenario_path("disk")), "--out", str(out)]) == 0
    assert "verdict: u_gt_v" in capsys.readouterr().out
    assert json.loads(out.read_text())["verdict"]["conclusion"] == "u_gt_v"
    assert main(["compare", "--bundled", "identical"]) == 0
    assert "u_identical_v" in capsys.readouterr().out


def test_compare_errors(tmp_path, capsys):
    data = json.loads(bundled_scenario_path("disk").read_text())
    data["f"] = {"type": "constant", "value": 0.0}
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert main(["compare", str(bad)]) == 2
    assert "f must be positive" in capsys.readouterr().err
    (tmp_path / "junk.json").write_text("[")
    assert main(["compare", str(tmp_path / "junk.json")]) == 2
    assert main(["compare", str(tmp_path / "none.json")]) == 2


def test_compare_violated_exit_1(tmp_path):
    data = json.loads(bundled_scenario_path("disk").read_text())
    data["v"]["bumps"][0]["amplitude"] = 0.01
    path = tmp_path / "s.json"
    path.write_text(json.dumps(data))
    assert main(["compare", str(path)]) == 1


def test_inspect_literals(capsys):
    assert main(["inspect", "--matrix", "[[1, 0.2], [-0.2, 1]]", "--delta", "0.5"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["membership"]["member"] is True
    assert main(["inspect", "--omega", "[[0.5, 0], [0, 0.5]]", "--beta", "[[0, 0.4], [-0.4, 0]]", "--delta", "0.5"]) == 1
    assert main(["inspect", "--matrix", "[1, 2]"]) == 2


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--trials", "abc"])
    assert exc.value.code == 2
