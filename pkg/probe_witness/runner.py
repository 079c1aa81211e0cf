"""Executes configured experiments: fringe tables, witness reports and parameter scans."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, NamedTuple, Optional

import numpy as np
from attrs import define, evolve, field

from . import __version__
from .config import ScenarioConfig, TargetSpec
from .errors import ContractError, UsageError
from .features import parallel_scan_enabled
from .interference import (
    FringeCoefficients,
    InterferencePattern,
    ProbeScenario,
    WitnessCalibration,
    WitnessReport,
    calibrate,
    channel_patterns,
    fringe_coefficients,
    intensity,
    witness_verdict,
)
from .registry import get_scenario
from .states import (
    BlochAngles,
    DensityMatrix,
    bell_state,
    density_from_entries,
    product_state,
    werner,
)

logger = logging.getLogger()

FRINGE_TOL = 1e-9
SCAN_WORKERS = 4


class ScanRow(NamedTuple):
    parameter: float
    target_expectation: float
    visibility: Optional[float]
    alpha: float
    verdict: bool
    ppt: bool


@define(frozen=True, kw_only=True, eq=False)
class RunReport:
    """
    Outcome of one configured run.

    Attributes:
        scenario: Name of the evaluated scenario.
        pattern: Fringe parameters; None for a signed observable, which reports channels instead.
        channels: Per-detector-channel fringe parameters.
        coefficients: Offset and cross term of the detection signal.
        witness: Witness verdict on the target.
        fringe_table: (phi, intensity) samples; empty for witness-only runs.
        metadata: Config echo, tool version, seed and the geometry phase (None for spin realizations).
    """

    scenario: str
    pattern: Optional[InterferencePattern]
    channels: dict[str, InterferencePattern]
    coefficients: FringeCoefficients
    witness: WitnessReport
    fringe_table: list[tuple[float, float]] = field(factory=list)
    metadata: dict[str, Any] = field(factory=dict)

    def __attrs_post_init__(self) -> None:
        offset, cross = self.coefficients
        scale = max(1.0, abs(offset) + abs(cross))
        for phi, value in self.fringe_table:
            expected = offset + (np.exp(1j * phi) * cross).real
            if abs(value - expected) > FRINGE_TOL * scale:
                raise ContractError(f"fringe table at phi={phi} disagrees with the fringe parameters")


def phase_grid(points: int) -> np.ndarray:
    """Uniform grid on [-pi, pi]; an odd grid holds phi = 0 exactly."""
    if points < 3:
        raise UsageError(f"phase grid needs at least 3 points, got {points}")
    grid = np.linspace(-np.pi, np.pi, points)
    if points % 2:
        grid[points // 2] = 0.0
    return grid


def build_target(target: TargetSpec) -> DensityMatrix:
    params = target.params
    if target.kind == "bell":
        return bell_state(params["state"]).density()
    if target.kind == "werner":
        return werner(params["p"])
    if target.kind == "product":
        (t1, p1), (t2, p2) = params["angles"]
        return product_state(BlochAngles.wrapped(t1, p1), BlochAngles.wrapped(t2, p2)).density()
    if target.kind == "matrix":
        return density_from_entries(params["entries"])
    raise UsageError(f"unknown target kind {target.kind!r}")


def build_scenario(config: ScenarioConfig) -> ProbeScenario:
    return get_scenario(config.realization, config.params)


def fringe_summary(coefficients: FringeCoefficients) -> tuple[Optional[float], float]:
    """
    Visibility |cross|/|offset| and phase shift -arg(cross), defined for signed observables too.
    The visibility is None when the offset vanishes under a non-zero cross term.
    """
    offset, cross = coefficients
    if abs(cross) <= 1e-12 * max(1.0, abs(offset)):
        return 0.0, 0.0
    visibility = abs(cross) / abs(offset) if abs(offset) > 1e-12 else None
    alpha = float(np.arctan2(-cross.imag, cross.real))
    return visibility, alpha + 2 * np.pi if alpha <= -np.pi else alpha


def run_pattern(config: ScenarioConfig, grid: Optional[int] = None) -> RunReport:
    scenario, rho = build_scenario(config), build_target(config.target)
    phis = phase_grid(grid or config.grid)
    table = [(float(phi), intensity(scenario, rho, phi)) for phi in phis]
    return _report(config, scenario, rho, table)


def run_witness(config: ScenarioConfig) -> RunReport:
    scenario, rho = build_scenario(config), build_target(config.target)
    return _report(config, scenario, rho, [])


def run_scan(config: ScenarioConfig) -> list[ScanRow]:
    """One row per sweep point, ordered by parameter value whatever the scheduling."""
    if config.sweep is None:
        raise UsageError("scan needs a config with a sweep section")
    sweep = config.sweep
    values = np.linspace(sweep.start, sweep.stop, sweep.points)
    shared: Optional[WitnessCalibration] = None
    if sweep.parameter == "werner_p":
        shared = calibrate(build_scenario(config))

    def row(value: float) -> ScanRow:
        scenario, rho = _swept(config, float(value))
        report = witness_verdict(scenario, rho, shared)
        visibility, alpha = fringe_summary(fringe_coefficients(scenario, rho))
        return ScanRow(float(value), report.target_expectation, visibility, alpha, report.verdict, report.ppt_verdict)

    logger.info(f"Scanning {sweep.parameter} over {sweep.points} points")
    if parallel_scan_enabled():
        with ThreadPoolExecutor(max_workers=SCAN_WORKERS) as pool:
            return list(pool.map(row, values))
    return [row(value) for value in values]


def _swept(config: ScenarioConfig, value: float) -> tuple[ProbeScenario, DensityMatrix]:
    parameter = config.sweep.parameter
    if parameter == "werner_p":
        return build_scenario(config), werner(value)
    if parameter == "gt":
        return build_scenario(evolve(config, params={**config.params, "gt": value})), build_target(config.target)
    if parameter == "detection_cosine":
        k_out = [float(np.sqrt(max(0.0, 1.0 - value**2))), 0.0, value]
        params = {**config.params, "k_in": [0.0, 0.0, 1.0], "k_out": k_out}
        return build_scenario(evolve(config, params=params)), build_target(config.target)
    raise UsageError(f"unknown sweep parameter {parameter!r}")


def _report(
    config: ScenarioConfig, scenario: ProbeScenario, rho: DensityMatrix, table: list[tuple[float, float]]
) -> RunReport:
    channels = channel_patterns(scenario, rho)
    witness = witness_verdict(scenario, rho)
    logger.info(f"{scenario.name}: <M> = {witness.target_expectation:.6f}, entangled = {witness.verdict}")
    return RunReport(
        scenario=scenario.name,
        pattern=channels.get("total"),
        channels=channels,
        coefficients=fringe_coefficients(scenario, rho),
        witness=witness,
        fringe_table=table,
        metadata={
            "config": config.to_dict(),
            "version": __version__,
            "seed": config.seed,
            "geometry_phase": scenario.geometry_phase,
        },
    )

