"""
Aharonov-Bohm ring: an electron spin (the probe) passes one of two impurity spins (the target)
on either arm, and the spin-flip exchange on each arm makes the path-conditioned evolution.
"""

from __future__ import annotations

import logging
from typing import Literal, Optional

import numpy as np
import numpy.typing as npt
from attrs import define, field

from .errors import UsageError
from .interference import ProbeScenario, probe_layouts
from .qmath import (
    IDENTITY_2,
    PAULIS,
    PROBE_IN,
    TARGET_LABELS,
    CMatrix,
    SpaceLayout,
    as_cmatrix,
    embed,
    expm_generator,
    partial_trace,
    pauli,
)
from .states import BellKind, DensityMatrix, qubit_density, spin_correlator

logger = logging.getLogger()

# interaction phase with 2 g t = pi/2
QUARTER_TURN = np.pi / 4

SPIN_LAYOUT = SpaceLayout((2, 2, 2), TARGET_LABELS + (PROBE_IN,))

Impurity = Literal[1, 2]
AnisotropicVariant = Literal["plus3half", "minushalf"]

# transverse phase g't on the stronger (or reversed) impurity
_ANISOTROPIC_PHASES = {"plus3half": 3 * np.pi / 4, "minushalf": -np.pi / 4}
_ROTATED_TARGETS = {"x": BellKind.PHI_MINUS, "y": BellKind.PHI_PLUS}


def _finite(_, attribute, value: float) -> None:
    if not np.isfinite(value):
        raise UsageError(f"{attribute.name} must be finite, got {value}")


@define(frozen=True)
class SpinCoupling:
    """
    Interaction phases g_m t of the exchange coupling, one per spin component.

    Attributes:
        gx_t: Phase of the sigma^x tau^x term.
        gy_t: Phase of the sigma^y tau^y term.
        gz_t: Phase of the sigma^z tau^z term.
    """

    gx_t: float = field(converter=float, validator=_finite)
    gy_t: float = field(converter=float, validator=_finite)
    gz_t: float = field(converter=float, validator=_finite)

    @classmethod
    def isotropic(cls, gt: float) -> SpinCoupling:
        return cls(gt, gt, gt)

    @property
    def phases(self) -> tuple[float, float, float]:
        return (self.gx_t, self.gy_t, self.gz_t)


@define(frozen=True, kw_only=True, eq=False)
class ABRingConfig:
    """
    Both arms of the ring with probe preparation and detection.

    Attributes:
        coupling_arm_a: Probe coupling to impurity 1, met on arm A.
        coupling_arm_b: Probe coupling to impurity 2, met on arm B.
        probe_prep: Electron spin state entering the ring.
        probe_obs: Spin observable measured at the drain; may be signed.
    """

    coupling_arm_a: SpinCoupling = field()
    coupling_arm_b: SpinCoupling = field()
    probe_prep: DensityMatrix = field()
    probe_obs: CMatrix = field(converter=as_cmatrix)


def spin_flip_unitary(c: SpinCoupling, impurity: Impurity) -> CMatrix:
    """exp(-i sum_m g_m t sigma^m tau_j^m) on target-1 (x) target-2 (x) probe."""
    if impurity not in (1, 2):
        raise UsageError(f"impurity must be 1 or 2, got {impurity!r}")
    generator = sum(
        phase * embed({impurity - 1: p, 2: p}, SPIN_LAYOUT.factors) for phase, p in zip(c.phases, PAULIS)
    )
    return expm_generator(generator, 1.0)


def closed_form_unitary(gt: float, impurity: Impurity) -> CMatrix:
    """(e^{igt}/2)[(e^{-2igt} + cos 2gt) I - i sin(2gt) sigma . tau_j] for isotropic coupling."""
    if impurity not in (1, 2):
        raise UsageError(f"impurity must be 1 or 2, got {impurity!r}")
    exchange = sum(embed({impurity - 1: p, 2: p}, SPIN_LAYOUT.factors) for p in PAULIS)
    identity = np.eye(SPIN_LAYOUT.dim, dtype=np.complex128)
    return (np.exp(1j * gt) / 2) * (
        (np.exp(-2j * gt) + np.cos(2 * gt)) * identity - 1j * np.sin(2 * gt) * exchange
    )


def cross_trace_closed_form(gt: float) -> CMatrix:
    """
    1/2 (|e^{-2igt} + cos 2gt|^2 I + sin^2(2gt) tau_1 . tau_2).

    This is the probe trace of T_B^+ T_A with unit weight, so twice the contraction with an
    unpolarized probe.
    """
    weight = abs(np.exp(-2j * gt) + np.cos(2 * gt)) ** 2
    return 0.5 * (weight * np.eye(4) + np.sin(2 * gt) ** 2 * spin_correlator())


def cross_trace(config: ABRingConfig) -> CMatrix:
    """tr_p(T_B^+ T_A) by brute force."""
    t_a = spin_flip_unitary(config.coupling_arm_a, 1)
    t_b = spin_flip_unitary(config.coupling_arm_b, 2)
    return partial_trace(t_b.conj().T @ t_a, SPIN_LAYOUT, keep=TARGET_LABELS)


def ab_ring_scenario(
    config: ABRingConfig, *, name: str = "ab-ring", witness_target: Optional[str] = None
) -> ProbeScenario:
    layout_in, layout_out = probe_layouts(2, 2)
    prep = config.probe_prep
    if prep.layout != layout_in.restrict([PROBE_IN]):
        prep = DensityMatrix(op=prep.op, layout=layout_in.restrict([PROBE_IN]))
    logger.debug(f"Building {name} with arms {config.coupling_arm_a} / {config.coupling_arm_b}")
    return ProbeScenario(
        t_a=spin_flip_unitary(config.coupling_arm_a, 1),
        t_b=spin_flip_unitary(config.coupling_arm_b, 2),
        rho_p=prep,
        p_obs=config.probe_obs,
        layout_in=layout_in,
        layout_out=layout_out,
        name=name,
        witness_target=witness_target,
    )


def singlet_scenario(gt: float = QUARTER_TURN) -> ProbeScenario:
    """Unpolarized probe, detection without spin analysis: M = W_- at 2gt = pi/2."""
    config = ABRingConfig(
        coupling_arm_a=SpinCoupling.isotropic(gt),
        coupling_arm_b=SpinCoupling.isotropic(gt),
        probe_prep=qubit_density([0.0, 0.0, 0.0]),
        probe_obs=IDENTITY_2,
    )
    return ab_ring_scenario(config, name="spin-singlet", witness_target=BellKind.PSI_MINUS.value)


def anisotropic_triplet_scenario(variant: AnisotropicVariant = "plus3half") -> ProbeScenario:
    """Impurity 2 sees a stronger (or reversed) transverse coupling: M = W_+."""
    try:
        transverse = _ANISOTROPIC_PHASES[variant]
    except KeyError:
        raise UsageError(f"unknown anisotropic variant {variant!r}, expected one of {sorted(_ANISOTROPIC_PHASES)}") from None
    config = ABRingConfig(
        coupling_arm_a=SpinCoupling.isotropic(QUARTER_TURN),
        coupling_arm_b=SpinCoupling(transverse, transverse, QUARTER_TURN),
        probe_prep=qubit_density([0.0, 0.0, 0.0]),
        probe_obs=IDENTITY_2,
    )
    return ab_ring_scenario(
        config, name=f"spin-triplet-anisotropic-{variant}", witness_target=BellKind.PSI_PLUS.value
    )


def effective_triplet_scenario(gt: float = QUARTER_TURN) -> ProbeScenario:
    """Probe polarized along z and measured along z: M = W_+ + (tau_1^z + tau_2^z)/2."""
    return _polarized_scenario("z", gt, name="spin-triplet-effective", witness_target=BellKind.PSI_PLUS)


def rotated_phi_scenario(axis: Literal["x", "y"], gt: float = QUARTER_TURN) -> ProbeScenario:
    """
    The effective triplet witness with probe preparation and observable rotated onto x or y.
    Axis x detects Phi-, axis y detects Phi+.
    """
    if axis not in _ROTATED_TARGETS:
        raise UsageError(f"rotation axis must be 'x' or 'y', got {axis!r}")
    return _polarized_scenario(axis, gt, name=f"spin-phi-rotated-{axis}", witness_target=_ROTATED_TARGETS[axis])


def effective_triplet_observable() -> CMatrix:
    """W_+ + (tau_1^z + tau_2^z)/2."""
    z = pauli("z")
    return triplet_witness() + 0.5 * (embed({0: z}, (2, 2)) + embed({1: z}, (2, 2)))


def triplet_witness() -> CMatrix:
    """W_+ = (I - tau^x tau^x - tau^y tau^y + tau^z tau^z)/2."""
    x, y, z = PAULIS
    return 0.5 * (np.eye(4) - np.kron(x, x) - np.kron(y, y) + np.kron(z, z))


def singlet_witness() -> CMatrix:
    """W_- = (I + tau_1 . tau_2)/2."""
    return 0.5 * (np.eye(4) + spin_correlator())


def _polarized_scenario(axis: str, gt: float, *, name: str, witness_target: BellKind) -> ProbeScenario:
    bloch: npt.NDArray[np.float64] = np.zeros(3)
    bloch["xyz".index(axis)] = 1.0
    config = ABRingConfig(
        coupling_arm_a=SpinCoupling.isotropic(gt),
        coupling_arm_b=SpinCoupling.isotropic(gt),
        probe_prep=qubit_density(bloch),
        probe_obs=pauli(axis),
    )
    return ab_ring_scenario(config, name=name, witness_target=witness_target.value)
