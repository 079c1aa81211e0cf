import json

import numpy as np
import pytest

from probe_witness.config import parse_config
from probe_witness.errors import ConfigError, ContractError, UsageError
from probe_witness.interference import FringeCoefficients
from probe_witness.reporting import SCAN_HEADER, check_payload, error_payload, pattern_payload, to_csv, to_json
from probe_witness.runner import (
    RunReport,
    build_target,
    fringe_summary,
    phase_grid,
    run_pattern,
    run_scan,
    run_witness,
)
from probe_witness.states import TWO_QUBITS

CONFIG = """\
schema_version: 1
realization: {{kind: {kind}}}
target: {target}
"""


def _config(kind="spin-singlet", target="{kind: bell, state: psi-}", extra=""):
    return parse_config(CONFIG.format(kind=kind, target=target) + extra)


def test_phase_grid_holds_zero():
    grid = phase_grid(73)
    assert grid[36] == 0.0
    assert grid[0] == -np.pi and grid[-1] == np.pi
    assert len(phase_grid(4)) == 4
    with pytest.raises(UsageError):
        phase_grid(2)


def test_build_targets():
    assert build_target(_config(target="{kind: werner, p: 1.0}").target).layout == TWO_QUBITS
    product = build_target(_config(target="{kind: product, angles: [[0, 0], [3.141592653589793, 0]]}").target)
    assert product.op[1, 1].real == pytest.approx(1.0)


def test_run_pattern_on_singlet():
    report = run_pattern(_config(extra="grid: 9\n"))
    assert len(report.fringe_table) == 9
    assert min(report.fringe_table, key=lambda row: row[1])[0] == 0.0
    assert report.pattern.visibility == pytest.approx(0.5)
    assert report.witness.verdict
    assert report.metadata["seed"] == 0
    assert report.metadata["config"]["realization"] == {"kind": "spin-singlet"}


def test_run_witness_signed_observable():
    report = run_witness(_config(kind="spin-triplet-effective", target="{kind: bell, state: psi+}"))
    assert report.pattern is None
    assert set(report.channels) == {"plus", "minus"}
    assert report.witness.target_expectation == pytest.approx(-1.0)
    assert report.witness.separable_min == pytest.approx(-0.25, abs=1e-6)
    assert report.fringe_table == []


def test_run_report_rejects_inconsistent_table():
    report = run_witness(_config())
    with pytest.raises(ContractError):
        RunReport(
            scenario=report.scenario,
            pattern=report.pattern,
            channels=report.channels,
            coefficients=report.coefficients,
            witness=report.witness,
            fringe_table=[(0.0, 99.0)],
        )


def test_fringe_summary_of_signed_signal():
    assert fringe_summary(FringeCoefficients(offset=-2.0, cross=1j)) == pytest.approx((0.5, -np.pi / 2))
    assert fringe_summary(FringeCoefficients(offset=1.0, cross=0.0)) == (0.0, 0.0)
    assert fringe_summary(FringeCoefficients(offset=0.0, cross=1.0))[0] is None


def test_werner_scan():
    config = _config(
        target="{kind: werner, p: 0.5}", extra="sweep: {parameter: werner_p, start: 0.0, stop: 1.0, points: 101}\n"
    )
    rows = run_scan(config)
    assert len(rows) == 101
    for row in rows:
        assert row.target_expectation == pytest.approx((1 - 3 * row.parameter) / 2, abs=1e-12)
        assert row.ppt == (row.parameter > 1 / 3)
    first = next(row.parameter for row in rows if row.verdict)
    assert first == pytest.approx(0.34)


def test_gt_scan():
    config = _config(extra="sweep: {parameter: gt, start: 0.0, stop: 3.141592653589793, points: 5}\n")
    rows = run_scan(config)
    assert rows[0].target_expectation == pytest.approx(2.0)
    assert rows[1].target_expectation == pytest.approx(-1.0)
    assert rows[1].verdict and not rows[0].verdict


def test_detection_cosine_scan():
    config = _config(kind="young", extra="sweep: {parameter: detection_cosine, start: 0.0, stop: 1.0, points: 5}\n")
    rows = run_scan(config)
    for row in rows:
        assert row.target_expectation == pytest.approx(2 * row.parameter**2 - 2, abs=1e-12)
    assert min(rows, key=lambda row: row.target_expectation).parameter == 0.0


def test_parallel_scan_keeps_order(monkeypatch):
    config = _config(
        target="{kind: werner, p: 0.5}", extra="sweep: {parameter: werner_p, start: 0.0, stop: 1.0, points: 11}\n"
    )
    serial = run_scan(config)
    monkeypatch.setenv("FEATURE_PARALLEL_SCAN", "true")
    assert run_scan(config) == serial


def test_scan_needs_sweep():
    with pytest.raises(UsageError):
        run_scan(_config())


def test_csv_cells():
    text = to_csv(SCAN_HEADER, [(0.1, -0.5, 0.25, 3.0, True, np.bool_(False))])
    assert text == "parameter,target_expectation,visibility,alpha,verdict,ppt\n0.1,-0.5,0.25,3.0,true,false\n"
    assert to_csv(("parameter", "visibility"), [(1.0, None)]) == "parameter,visibility\n1.0,\n"


def test_payloads_are_json():
    payload = pattern_payload(run_pattern(_config(extra="grid: 5\n")))
    document = json.loads(to_json(payload))
    assert document["pattern"]["i0"] == pytest.approx(2.0)
    assert document["fringe"]["cross"] == [pytest.approx(-1.0), pytest.approx(0.0, abs=1e-12)]
    assert len(document["witness"]["m"]) == 4
    error = error_payload(ConfigError("bad", field="grid", line=3))
    assert error == {"error": "bad", "kind": "ConfigError", "field": "grid", "line": 3}


def test_json_rejects_non_finite_values():
    with pytest.raises(ValueError):
        to_json({"visibility": float("inf")})
    payload = check_payload("broken", float("inf"), 0.0, False)
    assert json.loads(to_json(payload))["residual"] is None


def test_report_records_geometry_phase():
    assert run_witness(_config(kind="young")).metadata["geometry_phase"] == pytest.approx(8.0)
    assert run_witness(_config(kind="cbs")).metadata["geometry_phase"] == 0.0
    assert run_witness(_config()).metadata["geometry_phase"] is None
