"""
Self-checks of every closed form and witness claim against brute-force evaluation.
Each check reports a residual and the tolerance it must stay within.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from typing import Any

import numpy as np
from attrs import define, field

from .interference import (
    ProbeScenario,
    affine_witness_fit,
    calibrate,
    extract_observable,
    fit_pattern,
    intensity,
    pattern_params,
    probe_layouts,
    witness_verdict,
)
from .photon_realization import (
    PolarizationBasis,
    ScatteringGeometry,
    background_visibility_formula,
    cbs_scenario,
    normalized,
    single_scattering_background,
    young_dyadic_observable,
    young_scenario,
)
from .qmath import kron
from .runner import phase_grid
from .spin_realization import (
    ABRingConfig,
    SpinCoupling,
    anisotropic_triplet_scenario,
    closed_form_unitary,
    cross_trace,
    cross_trace_closed_form,
    effective_triplet_observable,
    effective_triplet_scenario,
    rotated_phi_scenario,
    singlet_scenario,
    singlet_witness,
    spin_flip_unitary,
    triplet_witness,
)
from .states import (
    PROBE_QUBIT,
    TWO_QUBITS,
    BellKind,
    DensityMatrix,
    bell_projector,
    bell_witness,
    maximally_mixed,
    ppt_check,
    qubit_density,
    random_density,
    random_product_mixtures,
    werner,
)

logger = logging.getLogger()

EXACT_TOL = 1e-12
OPERATOR_TOL = 1e-10
OPTIMIZER_TOL = 1e-4
FRINGE_TOL = 1e-9
SOUNDNESS_SAMPLES = 1500
ENTANGLED_SAMPLES = 200


@define(frozen=True, kw_only=True)
class CheckResult:
    """
    Attributes:
        name: Check identifier.
        residual: Measured deviation; a count of violations for property checks.
        tolerance: Largest acceptable residual.
        detail: Extra values worth recording (fitted scales, margins).
    """

    name: str
    residual: float = field(converter=float)
    tolerance: float = field(converter=float)
    detail: dict[str, Any] = field(factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


def run_checks(seed: int = 0) -> list[CheckResult]:
    results: list[CheckResult] = []
    for check in CHECKS:
        start = time.perf_counter()
        produced = check(np.random.default_rng(seed))
        logger.debug(f"{check.__name__} took {time.perf_counter() - start:.2f}s")
        results.extend(produced)
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"{len(failed)} of {len(results)} checks failed: {', '.join(failed)}")
    else:
        logger.info(f"All {len(results)} checks passed")
    return results


def check_closed_form_unitary(rng: np.random.Generator) -> list[CheckResult]:
    residual = max(
        float(np.max(np.abs(spin_flip_unitary(SpinCoupling.isotropic(gt), j) - closed_form_unitary(gt, j))))
        for gt in rng.uniform(-np.pi, np.pi, 50)
        for j in (1, 2)
    )
    return [CheckResult(name="closed-form-unitary", residual=residual, tolerance=EXACT_TOL)]


def check_cross_trace(rng: np.random.Generator) -> list[CheckResult]:
    residual = 0.0
    for gt in rng.uniform(-np.pi, np.pi, 50):
        config = ABRingConfig(
            coupling_arm_a=SpinCoupling.isotropic(gt),
            coupling_arm_b=SpinCoupling.isotropic(gt),
            probe_prep=qubit_density([0.0, 0.0, 0.0]),
            probe_obs=np.eye(2),
        )
        residual = max(residual, float(np.max(np.abs(cross_trace(config) - cross_trace_closed_form(gt)))))
    return [CheckResult(name="cross-trace", residual=residual, tolerance=EXACT_TOL)]


def check_singlet_witness(rng: np.random.Generator) -> list[CheckResult]:
    m = extract_observable(singlet_scenario())
    value = float(np.trace(m @ bell_projector(BellKind.PSI_MINUS)).real)
    return [
        CheckResult(name="singlet-witness", residual=_max_abs(m - singlet_witness()), tolerance=OPERATOR_TOL),
        CheckResult(name="singlet-witness-bell-value", residual=abs(value + 1.0), tolerance=EXACT_TOL),
    ]


def check_anisotropic_triplet(rng: np.random.Generator) -> list[CheckResult]:
    return [
        CheckResult(
            name=f"anisotropic-triplet-{variant}",
            residual=_max_abs(extract_observable(anisotropic_triplet_scenario(variant)) - triplet_witness()),
            tolerance=OPERATOR_TOL,
        )
        for variant in ("plus3half", "minushalf")
    ]


def check_effective_triplet(rng: np.random.Generator) -> list[CheckResult]:
    calibration = calibrate(effective_triplet_scenario())
    value = float(np.trace(calibration.m @ bell_projector(BellKind.PSI_PLUS)).real)
    return [
        CheckResult(
            name="effective-triplet-observable",
            residual=_max_abs(calibration.m - effective_triplet_observable()),
            tolerance=OPERATOR_TOL,
        ),
        CheckResult(name="effective-triplet-bell-value", residual=abs(value + 1.0), tolerance=EXACT_TOL),
        CheckResult(
            name="effective-triplet-separable-min",
            residual=abs(calibration.separable_min + 0.25),
            tolerance=OPTIMIZER_TOL,
            detail={"separable_min": calibration.separable_min},
        ),
    ]


def check_rotated_phi(rng: np.random.Generator) -> list[CheckResult]:
    results = []
    for axis, kind in (("x", BellKind.PHI_MINUS), ("y", BellKind.PHI_PLUS)):
        calibration = calibrate(rotated_phi_scenario(axis))
        value = float(np.trace(calibration.m @ bell_projector(kind)).real)
        results.append(
            CheckResult(name=f"rotated-{axis}-{kind.value}-value", residual=abs(value + 1.0), tolerance=OPERATOR_TOL)
        )
        results.append(
            CheckResult(
                name=f"rotated-{axis}-separable-min",
                residual=abs(calibration.separable_min + 0.25),
                tolerance=OPTIMIZER_TOL,
                detail={"separable_min": calibration.separable_min},
            )
        )
    return results


def check_transverse_projector(rng: np.random.Generator) -> list[CheckResult]:
    residual = 0.0
    for _ in range(20):
        k = normalized(rng.normal(size=3))
        projector = PolarizationBasis.canonical(k).completeness()
        residual = max(residual, _max_abs(projector - (np.eye(3) - np.outer(k, k))))
    return [CheckResult(name="transverse-projector", residual=residual, tolerance=EXACT_TOL)]


def check_young_dyadic(rng: np.random.Generator) -> list[CheckResult]:
    incoming = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [1.0, 1.0, 1.0]]
    outgoing = [[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 0.0, -1.0]]
    residual = 0.0
    for k_in in incoming:
        for k_out in outgoing:
            geom = ScatteringGeometry(k_in=normalized(k_in), k_out=normalized(k_out))
            m = extract_observable(young_scenario(geom))
            residual = max(residual, _max_abs(m - young_dyadic_observable(geom.k_in, geom.k_out)))

    perpendicular = ScatteringGeometry(k_in=[1.0, 0.0, 0.0], k_out=[0.0, 1.0, 0.0])
    fit = affine_witness_fit(extract_observable(young_scenario(perpendicular)), bell_witness(BellKind.PSI_MINUS))
    return [
        CheckResult(name="young-dyadic", residual=residual, tolerance=EXACT_TOL),
        CheckResult(
            name="young-perpendicular-singlet",
            residual=fit.residual if fit.scale > 0 else np.inf,
            tolerance=OPERATOR_TOL,
            detail={"scale": fit.scale, "offset": fit.offset},
        ),
    ]


def check_cbs_channels(rng: np.random.Generator) -> list[CheckResult]:
    results = []
    for channel, kind in (("singlet", BellKind.PSI_MINUS), ("triplet", BellKind.PSI_PLUS)):
        scenario = cbs_scenario(channel)
        fit = affine_witness_fit(extract_observable(scenario), bell_witness(kind))
        report = witness_verdict(scenario, _bell(kind))
        results.append(
            CheckResult(
                name=f"cbs-{channel}-affine",
                residual=fit.residual if fit.scale > 0 else np.inf,
                tolerance=OPERATOR_TOL,
                detail={"scale": fit.scale, "offset": fit.offset},
            )
        )
        results.append(
            CheckResult(
                name=f"cbs-{channel}-detects-{kind.value}",
                residual=0.0 if report.verdict else 1.0,
                tolerance=0.0,
                detail={"margin": report.margin},
            )
        )
    return results


def check_single_scattering_background(rng: np.random.Generator) -> list[CheckResult]:
    mixed = single_scattering_background(maximally_mixed())
    results = [
        CheckResult(
            name="background-mixed",
            residual=abs(mixed.visibility - 0.5) + abs(mixed.alpha),
            tolerance=OPERATOR_TOL,
        )
    ]
    for kind in (BellKind.PSI_PLUS, BellKind.PSI_MINUS):
        pattern = single_scattering_background(_bell(kind))
        results.append(CheckResult(name=f"background-{kind.value}", residual=pattern.visibility, tolerance=OPERATOR_TOL))
    residual = max(
        abs(single_scattering_background(rho).visibility - background_visibility_formula(rho))
        for rho in (random_density(int(s)) for s in rng.integers(0, 2**31, 10))
    )
    results.append(CheckResult(name="background-visibility-formula", residual=residual, tolerance=OPERATOR_TOL))
    return results


def check_soundness(rng: np.random.Generator) -> list[CheckResult]:
    scenarios = [
        singlet_scenario(),
        anisotropic_triplet_scenario("plus3half"),
        effective_triplet_scenario(),
        rotated_phi_scenario("x"),
        rotated_phi_scenario("y"),
        young_scenario(ScatteringGeometry(k_in=[1.0, 0.0, 0.0], k_out=[0.0, 1.0, 0.0])),
        cbs_scenario("singlet"),
        cbs_scenario("triplet"),
    ]
    false_alarms = 0
    unsupported = 0
    entangled = [_bell(kind) for kind in BellKind] + [
        random_density(int(s)) for s in rng.integers(0, 2**31, ENTANGLED_SAMPLES)
    ]
    entangled_ppt = [ppt_check(rho).entangled for rho in entangled]
    for scenario in scenarios:
        calibration = calibrate(scenario)
        threshold = calibration.separable_min - 1e-6
        mixtures = random_product_mixtures(rng, SOUNDNESS_SAMPLES)
        values = np.einsum("nij,ji->n", mixtures, calibration.m).real
        false_alarms += int(np.sum(values < threshold))
        for rho, ppt in zip(entangled, entangled_ppt):
            if rho.expectation(calibration.m) < threshold and not ppt:
                unsupported += 1
    return [
        CheckResult(
            name="soundness-separable",
            residual=false_alarms,
            tolerance=0,
            detail={"states": SOUNDNESS_SAMPLES * len(scenarios)},
        ),
        CheckResult(name="soundness-verdict-implies-ppt", residual=unsupported, tolerance=0),
    ]


def check_werner_sweep(rng: np.random.Generator) -> list[CheckResult]:
    scenario = singlet_scenario()
    calibration = calibrate(scenario)
    ps = np.linspace(0.0, 1.0, 101)
    reports = [witness_verdict(scenario, werner(p), calibration) for p in ps]
    residual = max(abs(r.target_expectation - (1 - 3 * p) / 2) for p, r in zip(ps, reports))
    first_verdict = next(p for p, r in zip(ps, reports) if r.verdict)
    first_ppt = next(p for p, r in zip(ps, reports) if r.ppt_verdict)
    return [
        CheckResult(name="werner-expectation", residual=residual, tolerance=OPERATOR_TOL),
        CheckResult(
            name="werner-boundary",
            residual=abs(first_verdict - first_ppt),
            tolerance=ps[1] - ps[0] + 1e-12,
            detail={"verdict_from": float(first_verdict), "ppt_from": float(first_ppt)},
        ),
    ]


def check_fringe_engine(rng: np.random.Generator) -> list[CheckResult]:
    phis = np.linspace(-np.pi, np.pi, 25, endpoint=False)
    law, fit = 0.0, 0.0
    for _ in range(100):
        scenario, rho = _random_scenario(rng)
        pattern = pattern_params(scenario, rho)
        for phi in phis:
            law = max(law, abs(_direct_intensity(scenario, rho, phi) - pattern.intensity(phi)))
        refit = fit_pattern([(phi, pattern.intensity(phi)) for phi in phis])
        angle = abs(np.angle(np.exp(1j * (refit.alpha - pattern.alpha)))) * pattern.visibility
        fit = max(fit, abs(refit.i0 - pattern.i0) + abs(refit.visibility - pattern.visibility) + angle)
    return [
        CheckResult(name="fringe-law", residual=law, tolerance=FRINGE_TOL),
        CheckResult(name="fringe-fit-roundtrip", residual=fit, tolerance=FRINGE_TOL),
    ]


def check_origin_dip(rng: np.random.Generator) -> list[CheckResult]:
    scenario, rho = singlet_scenario(), _bell(BellKind.PSI_MINUS)
    phis = phase_grid(73)
    values = [intensity(scenario, rho, phi) for phi in phis]
    lowest = float(phis[int(np.argmin(values))])
    return [CheckResult(name="singlet-origin-dip", residual=abs(lowest), tolerance=phis[1] - phis[0])]


CHECKS: list[Callable[[np.random.Generator], list[CheckResult]]] = [
    check_closed_form_unitary,
    check_cross_trace,
    check_singlet_witness,
    check_anisotropic_triplet,
    check_effective_triplet,
    check_rotated_phi,
    check_transverse_projector,
    check_young_dyadic,
    check_cbs_channels,
    check_single_scattering_background,
    check_soundness,
    check_werner_sweep,
    check_fringe_engine,
    check_origin_dip,
]


def _bell(kind: BellKind) -> DensityMatrix:
    return DensityMatrix(op=bell_projector(kind), layout=TWO_QUBITS)


def _max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a)))


def _random_scenario(rng: np.random.Generator) -> tuple[ProbeScenario, DensityMatrix]:
    layout_in, layout_out = probe_layouts(2, 2)

    def gaussian(n: int, m: int) -> np.ndarray:
        return (rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))) / np.sqrt(2 * m)

    g = gaussian(2, 2)
    detector = g @ g.conj().T
    scenario = ProbeScenario(
        t_a=gaussian(8, 8),
        t_b=gaussian(8, 8),
        rho_p=random_density(rng, dim=2, layout=PROBE_QUBIT),
        p_obs=0.5 * (detector + detector.conj().T),
        layout_in=layout_in,
        layout_out=layout_out,
        name="random",
    )
    return scenario, random_density(rng)


def _direct_intensity(s: ProbeScenario, rho12: DensityMatrix, phi: float) -> float:
    """<T^+ P T> for the coherent sum T = e^{i phi} T_A + T_B."""
    t = np.exp(1j * phi) * s.t_a + s.t_b
    return float(np.trace(kron(rho12.op, s.rho_p.op) @ t.conj().T @ kron(np.eye(4), s.p_obs) @ t).real)
