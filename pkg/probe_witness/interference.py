"""
Single-probe two-way interference: detection intensity, fringe parameters, the induced target
observable, and entanglement verdicts calibrated against the separable minimum.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from typing import NamedTuple, Optional, Union

import numpy as np
import numpy.typing as npt
from attrs import define, evolve, field

from .errors import ContractError, DimensionError, FitError, UsageError
from .product_search import minimize_over_products
from .qmath import (
    PROBE_IN,
    PROBE_OUT,
    TARGET_LABELS,
    CMatrix,
    SpaceLayout,
    as_cmatrix,
    eig_hermitian,
    hermiticity_residual,
    kron,
    partial_trace,
)
from .states import PSD_TOL, BlochAngles, DensityMatrix, ppt_check

logger = logging.getLogger()

DECISION_TOLERANCE = 1e-6
OBSERVABLE_HERMITIAN_TOL = 1e-12
DEGENERATE_INTENSITY = 1e-12
IMAGINARY_TOL = 1e-10


def probe_layouts(probe_in_dim: int, probe_out_dim: int) -> tuple[SpaceLayout, SpaceLayout]:
    """Layouts of target (x) probe-in and target (x) probe-out."""
    return (
        SpaceLayout((2, 2, probe_in_dim), TARGET_LABELS + (PROBE_IN,)),
        SpaceLayout((2, 2, probe_out_dim), TARGET_LABELS + (PROBE_OUT,)),
    )


@define(frozen=True)
class ExternalPhase:
    """
    Controlled phase difference between the two path alternatives, phi = phi_A - phi_B with phi_B = 0.

    Attributes:
        phi: Radians.
    """

    phi: float = field(converter=float)


@define(frozen=True, kw_only=True, eq=False)
class ProbeScenario:
    """
    One interference experiment: path-conditioned operators, probe preparation and probe observable.

    Attributes:
        t_a: Path A operator, target (x) probe-in -> target (x) probe-out.
        t_b: Path B operator, same shape as t_a.
        rho_p: Probe state on probe-in.
        p_obs: Hermitian probe observable on probe-out.
        layout_in: Layout of target (x) probe-in.
        layout_out: Layout of target (x) probe-out.
        name: Label used in reports.
        witness_target: Bell state the scenario is tuned to detect, if any.
        geometry_phase: External phase fixed by the scattering geometry, if the realization has one.
    """

    t_a: CMatrix = field(converter=as_cmatrix)
    t_b: CMatrix = field(converter=as_cmatrix)
    rho_p: DensityMatrix = field()
    p_obs: CMatrix = field(converter=as_cmatrix)
    layout_in: SpaceLayout = field()
    layout_out: SpaceLayout = field()
    name: str = field(default="custom")
    witness_target: Optional[str] = field(default=None)
    geometry_phase: Optional[float] = field(default=None)

    def __attrs_post_init__(self) -> None:
        for layout, probe_label in ((self.layout_in, PROBE_IN), (self.layout_out, PROBE_OUT)):
            if layout.labels != TARGET_LABELS + (probe_label,) or layout.factors[:2] != (2, 2):
                raise UsageError(f"layout {layout} is not two target qubits followed by {probe_label}")
        shape = (self.layout_out.dim, self.layout_in.dim)
        if self.t_a.shape != shape or self.t_b.shape != shape:
            raise DimensionError(f"path operators {self.t_a.shape}, {self.t_b.shape} do not map {shape[1]} -> {shape[0]}")
        if self.rho_p.layout.dim != self.probe_in_dim:
            raise DimensionError(f"probe state of dimension {self.rho_p.layout.dim} does not fit probe-in {self.probe_in_dim}")
        if self.p_obs.shape != (self.probe_out_dim, self.probe_out_dim):
            raise DimensionError(f"probe observable {self.p_obs.shape} does not act on probe-out {self.probe_out_dim}")
        residual = hermiticity_residual(self.p_obs)
        if residual > OBSERVABLE_HERMITIAN_TOL:
            raise ContractError(f"probe observable is not Hermitian (residual {residual:.3e})")

    @property
    def probe_in_dim(self) -> int:
        return self.layout_in.factors[2]

    @property
    def probe_out_dim(self) -> int:
        return self.layout_out.factors[2]

    @property
    def is_positive(self) -> bool:
        """Whether p_obs is a positive (single detector) observable."""
        return bool(eig_hermitian(self.p_obs)[0][0] >= -PSD_TOL)

    def channels(self) -> list[tuple[float, ProbeScenario]]:
        """
        Signed PSD detector channels whose intensities combine linearly into this observable's signal.
        A positive observable is its own single channel.
        """
        if self.is_positive:
            return [(1.0, self)]
        plus, minus = decompose_observable(self.p_obs)
        return [(1.0, evolve(self, p_obs=plus)), (-1.0, evolve(self, p_obs=minus))]


@define(frozen=True, kw_only=True)
class InterferencePattern:
    """
    Fringe parameters of I(phi) = i0 [1 + visibility cos(phi - alpha)].

    Attributes:
        i0: Background intensity.
        visibility: Fringe contrast in [0, 1].
        alpha: Interaction-induced phase shift in (-pi, pi].
    """

    i0: float = field(converter=float)
    visibility: float = field(converter=float)
    alpha: float = field(converter=float)

    @i0.validator
    def _check_i0(self, _, value: float) -> None:
        if value < -1e-12:
            raise ContractError(f"background intensity must be non-negative, got {value}")

    @visibility.validator
    def _check_visibility(self, _, value: float) -> None:
        if not 0.0 <= value <= 1.0 + 1e-9:
            raise ContractError(f"visibility must lie in [0, 1], got {value}")

    def intensity(self, phi: float) -> float:
        return self.i0 * (1.0 + self.visibility * np.cos(phi - self.alpha))

    @property
    def origin_contribution(self) -> float:
        """i0 V cos(alpha): the interference term at zero external phase."""
        return self.i0 * self.visibility * np.cos(self.alpha)


class FringeCoefficients(NamedTuple):
    """I(phi) = offset + Re[e^{i phi} cross], valid for signed observables too."""

    offset: float
    cross: complex


@define(frozen=True, kw_only=True, eq=False)
class WitnessCalibration:
    """
    The induced observable of a scenario with its separable threshold.

    Attributes:
        m: Induced target observable.
        separable_min: Minimum of tr(m rho) over separable rho.
        argmin: Product state attaining it.
    """

    m: CMatrix = field(converter=as_cmatrix)
    separable_min: float = field(converter=float)
    argmin: tuple[BlochAngles, BlochAngles] = field()


@define(frozen=True, kw_only=True, eq=False)
class WitnessReport:
    """
    Verdict on one target state.

    Attributes:
        m: Induced target observable.
        separable_min: Threshold below which the state is certified entangled.
        target_expectation: tr(m rho12).
        verdict: Whether the expectation undercuts the threshold by more than the decision tolerance.
        ppt_verdict: Entanglement according to the partial-transpose oracle.
        margin: separable_min - target_expectation.
        min_pt_eigenvalue: Lowest eigenvalue of the partial transpose.
    """

    m: CMatrix = field(converter=as_cmatrix)
    separable_min: float = field(converter=float)
    target_expectation: float = field(converter=float)
    verdict: bool = field()
    ppt_verdict: bool = field()
    margin: float = field(converter=float)
    min_pt_eigenvalue: float = field(converter=float)

    def __attrs_post_init__(self) -> None:
        residual = hermiticity_residual(self.m)
        if residual > 1e-10:
            raise ContractError(f"witness observable is not Hermitian (residual {residual:.3e})")
        if self.verdict != (self.target_expectation < self.separable_min - DECISION_TOLERANCE):
            raise ContractError("verdict disagrees with the thresholded expectation")

    @property
    def inconclusive(self) -> bool:
        """Within the decision band: reported separable, margin near zero."""
        return not self.verdict and abs(self.margin) <= DECISION_TOLERANCE


class AffineFit(NamedTuple):
    scale: float
    offset: float
    residual: float


def decompose_observable(p: npt.ArrayLike) -> tuple[CMatrix, CMatrix]:
    """P = P_plus - P_minus with both parts PSD and supported on orthogonal eigenspaces."""
    w, v = eig_hermitian(p)
    plus = (v * np.clip(w, 0.0, None)) @ v.conj().T
    minus = (v * np.clip(-w, 0.0, None)) @ v.conj().T
    return plus, minus


def fringe_coefficients(s: ProbeScenario, rho12: DensityMatrix) -> FringeCoefficients:
    """Background and cross term of the detection signal, linear in the observable."""
    aa, bb, ba, ab = _path_expectations(s, rho12)
    return FringeCoefficients(offset=(aa + bb).real, cross=2 * ba)


def intensity(s: ProbeScenario, rho12: DensityMatrix, phi: Union[float, ExternalPhase]) -> float:
    """
    Probe detection signal <T_A^+ P T_A> + <T_B^+ P T_B> + 2 Re[e^{i phi} <T_B^+ P T_A>].

    A signed observable is evaluated as the signed sum of its PSD detector channels.
    """
    angle = phi.phi if isinstance(phi, ExternalPhase) else float(phi)
    total = 0.0 + 0.0j
    for sign, channel in s.channels():
        aa, bb, ba, ab = _path_expectations(channel, rho12)
        total += sign * (aa + bb + np.exp(1j * angle) * ba + np.exp(-1j * angle) * ab)
    if abs(total.imag) > IMAGINARY_TOL:
        raise ContractError(f"detection intensity has imaginary part {total.imag:.3e}")
    return float(total.real)


def fringe(s: ProbeScenario, rho12: DensityMatrix, phis: Iterable[float]) -> list[tuple[float, float]]:
    return [(float(phi), intensity(s, rho12, phi)) for phi in phis]


def pattern_params(s: ProbeScenario, rho12: DensityMatrix) -> InterferencePattern:
    """
    (i0, V, alpha) from 2 <T_B^+ P T_A> = i0 V e^{-i alpha}. Requires a positive observable;
    use channel_patterns for signed ones.
    """
    if not s.is_positive:
        raise ContractError(f"scenario {s.name!r} has a signed observable; use channel_patterns")
    return _pattern_from_coefficients(fringe_coefficients(s, rho12))


def channel_patterns(s: ProbeScenario, rho12: DensityMatrix) -> dict[str, InterferencePattern]:
    """One pattern per PSD detector channel: {"total"} or {"plus", "minus"}."""
    channels = s.channels()
    if len(channels) == 1:
        return {"total": pattern_params(s, rho12)}
    return {
        ("plus" if sign > 0 else "minus"): _pattern_from_coefficients(fringe_coefficients(channel, rho12))
        for sign, channel in channels
    }


def fit_fringe(samples: Sequence[tuple[float, float]]) -> FringeCoefficients:
    """Linear least squares of I(phi) on {1, cos phi, sin phi}."""
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 3:
        raise FitError(f"need at least 3 (phi, intensity) samples, got shape {data.shape}")
    phi, values = data[:, 0], data[:, 1]
    design = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    coeffs, _, rank, _ = np.linalg.lstsq(design, values, rcond=None)
    if rank < 3:
        raise FitError("fringe samples do not resolve offset, cosine and sine (phases not distinct modulo 2 pi)")
    offset, a, b = coeffs
    # a cos(phi) + b sin(phi) = Re[e^{i phi} (a - i b)]
    return FringeCoefficients(offset=float(offset), cross=complex(a, -b))


def fit_pattern(samples: Sequence[tuple[float, float]]) -> InterferencePattern:
    """
    Pattern of measured fringe samples. Noise can push the fitted visibility past 1; it is clamped.
    A non-positive offset under a resolved oscillation has no (i0, V, alpha) form and raises FitError.
    """
    coefficients = fit_fringe(samples)
    i0, cross = coefficients
    if i0 < DEGENERATE_INTENSITY and abs(cross) > DEGENERATE_INTENSITY:
        raise FitError(f"fitted offset {i0:.6g} is not positive under a fringe of amplitude {abs(cross):.6g}")
    return _pattern_from_coefficients(coefficients, clamp=True)


def extract_observable(s: ProbeScenario) -> CMatrix:
    """M = tr_p{rho_p (T_B^+ P T_A + T_A^+ P T_B)}, a Hermitian operator on the two target qubits."""
    detector = kron(np.eye(4), s.p_obs)
    cross = s.t_b.conj().T @ detector @ s.t_a
    weighted = kron(np.eye(4), s.rho_p.op) @ (cross + cross.conj().T)
    m = partial_trace(weighted, s.layout_in, keep=TARGET_LABELS)
    return 0.5 * (m + m.conj().T)


def separable_minimum(m: npt.ArrayLike) -> tuple[float, tuple[BlochAngles, BlochAngles]]:
    """Minimum of tr(m rho) over separable rho, attained on a pure product state."""
    op = as_cmatrix(m)
    if op.shape != (4, 4):
        raise DimensionError(f"separable_minimum needs a two-qubit observable, got shape {op.shape}")
    residual = hermiticity_residual(op)
    if residual > 1e-10:
        raise ContractError(f"observable is not Hermitian (residual {residual:.3e})")
    value, argmin = minimize_over_products(op)
    return value, argmin


def calibrate(s: ProbeScenario) -> WitnessCalibration:
    m = extract_observable(s)
    value, argmin = separable_minimum(m)
    logger.info(f"Calibrated {s.name}: separable minimum {value:.6f}")
    return WitnessCalibration(m=m, separable_min=value, argmin=argmin)


def witness_verdict(
    s: ProbeScenario, rho12: DensityMatrix, calibration: Optional[WitnessCalibration] = None
) -> WitnessReport:
    calibration = calibration or calibrate(s)
    expectation = rho12.expectation(calibration.m)
    ppt = ppt_check(rho12)
    return WitnessReport(
        m=calibration.m,
        separable_min=calibration.separable_min,
        target_expectation=expectation,
        verdict=expectation < calibration.separable_min - DECISION_TOLERANCE,
        ppt_verdict=ppt.entangled,
        margin=calibration.separable_min - expectation,
        min_pt_eigenvalue=ppt.min_pt_eigenvalue,
    )


def affine_witness_fit(m: npt.ArrayLike, w: npt.ArrayLike) -> AffineFit:
    """Least-squares (c, d) for m ~ c w + d I, with the max-entry residual."""
    target, witness = as_cmatrix(m), as_cmatrix(w)
    design = np.column_stack([witness.ravel(), np.eye(witness.shape[0]).ravel()])
    (c, d), *_ = np.linalg.lstsq(design, target.ravel(), rcond=None)
    c, d = float(c.real), float(d.real)
    residual = float(np.max(np.abs(target - c * witness - d * np.eye(witness.shape[0]))))
    return AffineFit(scale=c, offset=d, residual=residual)


def _path_expectations(s: ProbeScenario, rho12: DensityMatrix) -> tuple[complex, complex, complex, complex]:
    """<A^+PA>, <B^+PB>, <B^+PA>, <A^+PB> on rho12 (x) rho_p."""
    if rho12.layout.dim != 4:
        raise DimensionError(f"target state must live on two qubits, got dimension {rho12.layout.dim}")
    rho = kron(rho12.op, s.rho_p.op)
    detector = kron(np.eye(4), s.p_obs)
    pa, pb = detector @ s.t_a, detector @ s.t_b

    def expect(left: CMatrix, right: CMatrix) -> complex:
        return complex(np.einsum("ij,ji->", rho, left.conj().T @ right))

    return expect(s.t_a, pa), expect(s.t_b, pb), expect(s.t_b, pa), expect(s.t_a, pb)


def _pattern_from_coefficients(coefficients: FringeCoefficients, clamp: bool = False) -> InterferencePattern:
    i0, cross = coefficients
    if i0 < DEGENERATE_INTENSITY:
        return InterferencePattern(i0=max(i0, 0.0), visibility=0.0, alpha=0.0)
    magnitude = abs(cross)
    if magnitude <= DEGENERATE_INTENSITY * max(1.0, i0):
        return InterferencePattern(i0=i0, visibility=0.0, alpha=0.0)
    alpha = float(np.arctan2(-cross.imag, cross.real))
    if alpha <= -np.pi:
        alpha += 2 * np.pi
    visibility = magnitude / i0
    if clamp:
        visibility = min(visibility, 1.0)
    return InterferencePattern(i0=i0, visibility=visibility, alpha=alpha)
