import csv
import io
import json
from collections.abc import Iterable, Sequence
from typing import Any, Optional

import numpy as np

from .errors import ConfigError, ProbeWitnessError
from .interference import InterferencePattern, WitnessReport

FRINGE_HEADER = ("phi", "intensity")
SCAN_HEADER = ("parameter", "target_expectation", "visibility", "alpha", "verdict", "ppt")


## Payload methods ##


def pattern_payload(report) -> dict:
    """Gets a payload with the fringe parameters, the induced observable and the verdict."""
    return {
        "scenario": report.scenario,
        "pattern": None if report.pattern is None else pattern_fields(report.pattern),
        "channels": {name: pattern_fields(p) for name, p in report.channels.items()},
        "fringe": {"offset": report.coefficients.offset, "cross": complex_pair(report.coefficients.cross)},
        "witness": witness_fields(report.witness),
        "metadata": report.metadata,
    }


def witness_payload(report) -> dict:
    """Gets a payload with the witness report only."""
    return {
        "scenario": report.scenario,
        "witness": witness_fields(report.witness),
        "metadata": report.metadata,
    }


def error_payload(error: ProbeWitnessError, **kwargs) -> dict:
    """Gets a payload with the error message."""
    payload = {"error": str(error), "kind": type(error).__name__}
    if isinstance(error, ConfigError):
        payload["field"] = error.field
        payload["line"] = error.line
    return {**payload, **kwargs}


def check_payload(name: str, residual: float, tolerance: float, passed: bool) -> dict:
    """Gets a payload with one verification check. A non-finite residual is written as null."""
    return {
        "name": name,
        "residual": residual if np.isfinite(residual) else None,
        "tolerance": tolerance,
        "passed": passed,
    }


## Field methods ##


def pattern_fields(pattern: InterferencePattern) -> dict:
    return {"i0": pattern.i0, "visibility": pattern.visibility, "alpha": pattern.alpha}


def witness_fields(witness: WitnessReport) -> dict:
    return {
        "m": matrix_entries(witness.m),
        "separable_min": witness.separable_min,
        "target_expectation": witness.target_expectation,
        "verdict": witness.verdict,
        "ppt_verdict": witness.ppt_verdict,
        "margin": witness.margin,
        "inconclusive": witness.inconclusive,
        "min_pt_eigenvalue": witness.min_pt_eigenvalue,
    }


def matrix_entries(m: np.ndarray) -> list[list[list[float]]]:
    """Matrix as rows of [re, im] pairs."""
    return [[complex_pair(z) for z in row] for row in np.asarray(m)]


def complex_pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


## Serialization methods ##


def to_json(payload: dict, *, indent: Optional[int] = 2) -> str:
    """JSON text with the payload's insertion order kept."""
    return json.dumps(payload, indent=indent, sort_keys=False, allow_nan=False, ensure_ascii=False)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """UTF-8 CSV text with a header row and repr-exact floats; None is an empty cell."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)
