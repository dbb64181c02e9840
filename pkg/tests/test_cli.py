from __future__ import annotations

import json
import math
import os
import stat

import pytest

from gmekit import fixture
from gmekit.cli import main
from gmekit.io import dumps_state, save_state


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    data = json.loads(out) if out.strip().startswith("{") else None
    return code, data, err


def test_measure_concurrence_across_cut(capsys):
    code, data, _ = run(capsys, "measure", "fixture:example4", "--family", "concurrence",
                        "--partition", "ABC|D")
    assert code == 0
    assert data["value"] == pytest.approx(math.sqrt(15) / 8, abs=1e-9)
    assert data["exact"] and data["partition"] == "ABC|D"
    assert data["manifest"]["command"] == "measure"


def test_measure_product_and_w(capsys):
    code, data, _ = run(capsys, "measure", "fixture:phi_plus_zero", "--family", "ef",
                        "--partition", "AB|C")
    assert code == 0 and data["value"] == pytest.approx(0.0, abs=1e-12)
    code, data, _ = run(capsys, "measure", "fixture:w3", "--family", "tau", "--genuine")
    assert code == 0 and data["value"] == pytest.approx(4 / 3, abs=1e-9)


def test_measure_mixed_marginal_reports_upper_bound(capsys):
    code, data, _ = run(capsys, "measure", "fixture:w3", "--family", "concurrence",
                        "--partition", "A|B", "--restarts", "2")
    assert code == 0
    assert data["upper_bound"] and data["method"] == "convex_roof"
    assert data["value"] == pytest.approx(2 / 3, abs=2e-3)
    assert data["manifest"]["roof_config"]["restarts"] == 2


def test_gmc_and_delta(capsys):
    code, data, _ = run(capsys, "gmc", "fixture:example4")
    assert code == 0 and data["cut"] == "ABC|D"
    assert data["value"] == pytest.approx(math.sqrt(15) / 8, abs=1e-9)
    code, data, _ = run(capsys, "delta", "fixture:phi_plus_zero")
    assert code == 0 and data["delta"] == 0 and data["witness"] == "AB|C"
    code, data, _ = run(capsys, "delta", "fixture:biseparable_mix")
    assert code == 0 and data["delta"] == 0 and data["verdict"] == "BiseparableFound"


def test_audit_tight_gmc_violation_exits_one(capsys):
    code, data, _ = run(capsys, "audit", "fixture:example4", "--mode", "tight", "--family", "gmc")
    assert code == 1
    assert data["verdict"] == "violated"
    worst = min(data["hierarchy"], key=lambda h: h["residual"])
    assert worst["residual"] == pytest.approx(math.sqrt(15) / 8 - math.sqrt(65) / 8, abs=1e-9)


def test_audit_complete_ghz_consistent(capsys):
    code, data, _ = run(capsys, "audit", "fixture:ghz3", "--mode", "complete", "--family", "c_g")
    assert code == 0 and data["verdict"] == "consistent"


@pytest.mark.parametrize("name", ["phi_plus_zero", "biseparable_mix"])
def test_audit_biseparable_is_vacuous(capsys, name):
    code, data, _ = run(capsys, "audit", f"fixture:{name}", "--mode", "complete", "--family", "c_g")
    assert code == 0 and data["vacuous"] is True


def test_audit_disentangling(capsys):
    code, data, _ = run(capsys, "audit", "fixture:phi_plus_zero", "--mode", "disentangling",
                        "--condition", "bipartite", "--family", "concurrence")
    assert code == 0 and data["verdict"] == "monogamy-consistent"


def test_audit_custom_grid(capsys):
    code, data, _ = run(capsys, "audit", "fixture:w3", "--mode", "complete", "--family", "c_g",
                        "--alpha-grid", "1,2,3")
    assert code == 0 and data["alpha_grid"] == [1.0, 2.0, 3.0]
    code, _, err = run(capsys, "audit", "fixture:w3", "--mode", "complete", "--family", "c_g",
                       "--alpha-grid", "geom:1:x:3")
    assert code == 2 and "alpha grid" in err


def test_partitions_queries(capsys):
    code, data, _ = run(capsys, "partitions", "xi", "A|B|CD|E", "A|B")
    assert code == 0 and data["count"] == 35
    assert {"C|E", "D|E", "B|CD"} <= set(data["xi"])
    code, data, _ = run(capsys, "partitions", "coarser", "A|B|C|DE", "A|B|C|D", "--mode", "discard")
    assert data["coarser"] is True
    code, data, _ = run(capsys, "partitions", "coarser", "AB|C", "A|C", "--no-inner-discard")
    assert data["coarser"] is False
    code, data, _ = run(capsys, "partitions", "bipartitions", "--parties", "4")
    assert data["count"] == 7
    code, _, _ = run(capsys, "partitions", "all")
    assert code == 2


def test_verify_command(capsys):
    code, data, _ = run(capsys, "verify-paper")
    assert code == 0 and data["all_pass"]
    assert len(data["checks"]) == 17


def test_verify_command_pretty(capsys):
    code = main(["verify-paper", "--pretty"])
    out = capsys.readouterr().out
    assert code == 0 and "17/17 checks passed" in out


def test_tampered_fixture_exits_three(capsys, tmp_path):
    text = dumps_state(fixture("example4")).replace("[0.25, 0.0]", "[0.6, 0.0]")
    path = tmp_path / "tampered.json"
    path.write_text(text)
    code = main(["verify-paper", "--fixture", str(path)])
    err = capsys.readouterr().err
    assert code == 3 and "norm" in err
    code = main(["measure", str(path), "--family", "tau"])
    assert code == 3


def test_malformed_state_reports_position(capsys, tmp_path):
    lines = dumps_state(fixture("ghz3")).splitlines()
    lines[5] = "  [0.0, oops],"
    path = tmp_path / "bad.json"
    path.write_text("\n".join(lines))
    code, _, err = run(capsys, "measure", str(path), "--family", "tau")
    assert code == 2
    assert f"{path}:6:" in err


def test_usage_errors(capsys, monkeypatch):
    assert run(capsys, "measure", "fixture:ghz3", "--family", "bogus")[0] == 2
    assert run(capsys, "measure", "fixture:nope", "--family", "tau")[0] == 2
    assert run(capsys, "measure", "fixture:ghz3", "--family", "tau", "--partition", "A|Q")[0] == 2
    monkeypatch.setenv("GMEKIT_SEED", "abc")
    assert run(capsys, "measure", "fixture:ghz3", "--family", "tau")[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["measure"])
    assert info.value.code == 2


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("GMEKIT_SEED", "17")
    _, data, _ = run(capsys, "measure", "fixture:ghz3", "--family", "tau")
    assert data["manifest"]["seed"] == 17
    _, data, _ = run(capsys, "measure", "fixture:ghz3", "--family", "tau", "--seed", "3")
    assert data["manifest"]["seed"] == 3


def test_campaign_outputs_are_reproducible(capsys, tmp_path):
    argv = ["campaign", "--qubits", "3", "--n", "5", "--family", "tau_g", "--seed", "2"]
    code, data, _ = run(capsys, *argv, "--out-dir", str(tmp_path / "a"))
    assert code == 0 and data["aggregate"]["violations"] == 0
    run(capsys, *argv, "--out-dir", str(tmp_path / "b"))
    a = (tmp_path / "a" / "aggregate.json").read_text()
    b = (tmp_path / "b" / "aggregate.json").read_text()
    assert a == b
    assert (tmp_path / "a" / "manifest.json").exists()
    worst = json.loads((tmp_path / "a" / "worst.json").read_text())
    assert worst["name"] == f"sample-{data['aggregate']['worst']['index']}"


def test_campaign_usage_errors(capsys, tmp_path):
    assert run(capsys, "campaign", "--n", "0", "--family", "tau_g")[0] == 2
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(stat.S_IRUSR | stat.S_IXUSR)
    if os.access(locked, os.W_OK):  # running as root ignores permission bits
        target = tmp_path / "file"
        target.write_text("")
        out_dir = target / "sub"
    else:
        out_dir = locked / "sub"
    code, _, err = run(capsys, "campaign", "--n", "1", "--family", "tau_g", "--out-dir", str(out_dir))
    assert code == 2 and "not writable" in err


def test_violation_fixture_replays(capsys, tmp_path):
    # a saved state file is accepted back by every command
    path = tmp_path / "w.json"
    save_state(fixture("w3"), path, "w3")
    code, data, _ = run(capsys, "audit", str(path), "--mode", "complete", "--family", "c_g")
    assert code == 0 and data["state_id"] == str(path)
