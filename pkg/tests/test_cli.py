import csv
import json

import numpy as np
import pytest

from probe_witness import cli, verification
from probe_witness.interference import fit_pattern
from probe_witness.verification import CheckResult, check_closed_form_unitary


def _write_config(tmp_path, body, name="experiment.yaml"):
    path = tmp_path / name
    path.write_text("schema_version: 1\n" + body, encoding="utf-8")
    return path


def _rows(path):
    with path.open(encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


@pytest.fixture
def singlet_config(tmp_path):
    return _write_config(tmp_path, "realization: {kind: spin-singlet}\ntarget: {kind: bell, state: psi-}\n")


def test_pattern_writes_fringe_and_report(tmp_path, singlet_config):
    out = tmp_path / "out"
    assert cli.main(["pattern", "--config", str(singlet_config), "--out", str(out)]) == 0
    rows = _rows(out / "fringe.csv")
    assert len(rows) == 73
    lowest = min(rows, key=lambda row: float(row["intensity"]))
    assert lowest["phi"] == "0.0"
    report = json.loads((out / "pattern.json").read_text(encoding="utf-8"))
    assert report["pattern"]["visibility"] == pytest.approx(0.5)
    assert report["witness"]["verdict"] is True
    refit = fit_pattern([(float(row["phi"]), float(row["intensity"])) for row in rows])
    assert refit.i0 == pytest.approx(report["pattern"]["i0"])
    assert refit.visibility == pytest.approx(report["pattern"]["visibility"])


def test_grid_override(tmp_path, singlet_config):
    assert cli.main(["pattern", "--config", str(singlet_config), "--out", str(tmp_path), "--grid", "11"]) == 0
    assert len(_rows(tmp_path / "fringe.csv")) == 11
    assert cli.main(["pattern", "--config", str(singlet_config), "--out", str(tmp_path), "--grid", "2"]) == 2


def test_pattern_is_deterministic(tmp_path, singlet_config):
    for name in ("a", "b"):
        assert cli.main(["pattern", "--config", str(singlet_config), "--out", str(tmp_path / name), "--seed", "5"]) == 0
    for name in ("fringe.csv", "pattern.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    report = json.loads((tmp_path / "a" / "pattern.json").read_text(encoding="utf-8"))
    assert report["metadata"]["seed"] == 5


def test_witness_prints_report(tmp_path, capsys):
    config = _write_config(tmp_path, "realization: {kind: spin-triplet-effective}\ntarget: {kind: bell, state: psi+}\n")
    assert cli.main(["witness", "--config", str(config), "--out", str(tmp_path)]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed == json.loads((tmp_path / "witness.json").read_text(encoding="utf-8"))
    witness = printed["witness"]
    assert witness["target_expectation"] == pytest.approx(-1.0)
    assert witness["separable_min"] == pytest.approx(-0.25, abs=1e-6)
    assert witness["verdict"] and witness["ppt_verdict"]


def test_cbs_singlet_channel(tmp_path, capsys):
    config = _write_config(tmp_path, "realization: {kind: cbs, channel: singlet}\ntarget: {kind: bell, state: psi-}\n")
    assert cli.main(["witness", "--config", str(config), "--out", str(tmp_path)]) == 0
    assert json.loads(capsys.readouterr().out)["witness"]["verdict"] is True


def test_maximally_mixed_matrix_target(tmp_path, capsys):
    entries = [[[0.25 if i == j else 0.0, 0.0] for j in range(4)] for i in range(4)]
    config = _write_config(
        tmp_path, f"realization: {{kind: spin-singlet}}\ntarget: {{kind: matrix, entries: {json.dumps(entries)}}}\n"
    )
    assert cli.main(["witness", "--config", str(config), "--out", str(tmp_path)]) == 0
    witness = json.loads(capsys.readouterr().out)["witness"]
    assert witness["verdict"] is False
    assert witness["margin"] == pytest.approx(-0.5, abs=1e-9)


def test_witness_reports_inconclusive_margin(tmp_path, capsys):
    config = _write_config(
        tmp_path, "realization: {kind: spin-singlet}\ntarget: {kind: product, angles: [[0, 0], [3.141592653589793, 0]]}\n"
    )
    assert cli.main(["witness", "--config", str(config), "--out", str(tmp_path)]) == 0
    witness = json.loads(capsys.readouterr().out)["witness"]
    assert witness["verdict"] is False
    assert witness["inconclusive"] is True
    assert witness["margin"] == pytest.approx(0.0, abs=1e-6)


def test_config_error_exit_code(tmp_path, capsys):
    config = _write_config(tmp_path, "realization:\n  kind: spin-singlet\n  gt: abc\ntarget: {kind: bell, state: psi-}\n")
    assert cli.main(["witness", "--config", str(config), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert '"field": "realization.gt"' in err
    assert '"line": 4' in err


def test_contract_error_exit_code(tmp_path, capsys):
    entries = np.zeros((4, 4, 2))
    entries[0, 0, 0], entries[1, 1, 0] = 1.5, -0.5
    config = _write_config(
        tmp_path,
        f"realization: {{kind: spin-singlet}}\ntarget: {{kind: matrix, entries: {json.dumps(entries.tolist())}}}\n",
    )
    assert cli.main(["witness", "--config", str(config), "--out", str(tmp_path)]) == 3
    assert '"kind": "ContractError"' in capsys.readouterr().err


def test_scan_writes_rows(tmp_path):
    config = _write_config(
        tmp_path,
        "realization: {kind: spin-singlet}\ntarget: {kind: werner, p: 0.5}\n"
        "sweep: {parameter: werner_p, start: 0.0, stop: 1.0, points: 101}\n",
    )
    assert cli.main(["scan", "--config", str(config), "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "scan.csv")
    assert len(rows) == 101
    flips = [row["parameter"] for row in rows if row["verdict"] == "true"]
    assert float(flips[0]) == pytest.approx(0.34)
    assert rows[33]["verdict"] == "false"


def test_scan_without_sweep_is_config_error(tmp_path, singlet_config):
    assert cli.main(["scan", "--config", str(singlet_config), "--out", str(tmp_path)]) == 2


def test_svg_plot(tmp_path, singlet_config):
    pytest.importorskip("matplotlib")
    assert cli.main(["pattern", "--config", str(singlet_config), "--out", str(tmp_path), "--svg"]) == 0
    assert (tmp_path / "fringe.svg").read_text(encoding="utf-8").lstrip().startswith("<?xml")


def test_verify_reports_each_check(monkeypatch, capsys):
    monkeypatch.setattr(verification, "CHECKS", [check_closed_form_unitary])
    assert cli.main(["verify", "--seed", "3"]) == 0
    lines = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert [line["name"] for line in lines] == ["closed-form-unitary"]
    assert lines[0]["passed"] is True


def test_verify_failure_exit_code(monkeypatch):
    def broken(rng):
        return [CheckResult(name="broken", residual=1.0, tolerance=0.0)]

    monkeypatch.setattr(verification, "CHECKS", [check_closed_form_unitary, broken])
    assert cli.main(["verify"]) == 4


def test_help_lists_realizations(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--help"])
    out = capsys.readouterr().out
    for name in ("spin-singlet", "young", "cbs"):
        assert name in out
