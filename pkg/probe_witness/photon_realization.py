"""
Photon scattering off two spin-1/2 atoms.

The photon polarization is the probe. Single scattering by atom 1 or atom 2 gives the two
alternatives of a Young setup. Double scattering in the orders 1 -> 2 and 2 -> 1 gives the two
alternatives of coherent backscattering (CBS). All scattering prefactors are 1.
"""

from __future__ import annotations

import logging
from typing import Literal, Optional, Union

import numpy as np
import numpy.typing as npt
from attrs import define, field

from .errors import UsageError
from .interference import InterferencePattern, ProbeScenario, pattern_params, probe_layouts
from .qmath import IDENTITY_2, PAULIS, CMatrix, embed
from .states import PROBE_QUBIT, BellKind, DensityMatrix, qubit_density

logger = logging.getLogger()

UNIT_TOL = 1e-12
TRANSVERSE_TOL = 1e-10
PARALLEL_TOL = 1e-10

Vector = npt.NDArray[np.float64]
Atom = Literal[1, 2]
Order = Literal["A", "B"]

X_AXIS = np.array([1.0, 0.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])

# channel names accepted by cbs_scenario, mapped to the polarization they analyze
_CBS_CHANNELS = {
    "triplet": "along-n",
    "parallel": "along-n",
    "singlet": "across",
    "perpendicular": "across",
}


def _vector(value: npt.ArrayLike) -> Vector:
    v = np.asarray(value, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise UsageError(f"expected a finite 3-vector, got {value!r}")
    v = v.copy()
    v.flags.writeable = False
    return v


def _unit(_, attribute, value: Vector) -> None:
    if abs(np.linalg.norm(value) - 1.0) > UNIT_TOL:
        raise UsageError(f"{attribute.name} must be a unit vector, got {value.tolist()}")


def normalized(v: npt.ArrayLike) -> Vector:
    arr = np.asarray(v, dtype=float)
    norm = np.linalg.norm(arr)
    if norm == 0.0:
        raise UsageError("cannot normalize the zero vector")
    return arr / norm


@define(frozen=True, kw_only=True, eq=False)
class ScatteringGeometry:
    """
    Incoming and outgoing directions with the two atom positions.

    Attributes:
        k_in: Unit propagation direction of the incident photon.
        k_out: Unit propagation direction of the detected photon.
        n_axis: Unit vector from atom 1 to atom 2.
        r1: Position of atom 1 in units of 1/k.
        r2: Position of atom 2 in units of 1/k.
        wavenumber: Photon wavenumber.
    """

    k_in: Vector = field(converter=_vector, validator=_unit)
    k_out: Vector = field(converter=_vector, validator=_unit)
    n_axis: Vector = field(converter=_vector, validator=_unit, default=X_AXIS)
    r1: Vector = field(converter=_vector, default=np.zeros(3))
    r2: Vector = field(converter=_vector, default=8.0 * X_AXIS)
    wavenumber: float = field(converter=float, default=1.0)

    def __attrs_post_init__(self) -> None:
        separation = self.r2 - self.r1
        if np.linalg.norm(np.cross(separation, self.n_axis)) > PARALLEL_TOL:
            raise UsageError(f"r2 - r1 = {separation.tolist()} is not parallel to n_axis {self.n_axis.tolist()}")
        if not self.wavenumber > 0:
            raise UsageError(f"wavenumber must be positive, got {self.wavenumber}")


@define(frozen=True, kw_only=True, eq=False)
class PolarizationBasis:
    """
    Orthonormal transverse polarizations attached to a propagation direction.

    Attributes:
        k: Unit propagation direction.
        e1: First polarization vector.
        e2: Second polarization vector.
    """

    k: Vector = field(converter=_vector, validator=_unit)
    e1: npt.NDArray[np.complex128] = field(converter=lambda v: np.asarray(v, dtype=np.complex128))
    e2: npt.NDArray[np.complex128] = field(converter=lambda v: np.asarray(v, dtype=np.complex128))

    def __attrs_post_init__(self) -> None:
        vectors = self.vectors
        if vectors.shape != (2, 3):
            raise UsageError("polarization vectors must have 3 components")
        gram = vectors.conj() @ vectors.T
        if np.max(np.abs(gram - np.eye(2))) > UNIT_TOL:
            raise UsageError("polarization vectors are not orthonormal")
        if np.max(np.abs(vectors @ self.k)) > UNIT_TOL:
            raise UsageError(f"polarization vectors are not transverse to k = {self.k.tolist()}")

    @property
    def vectors(self) -> npt.NDArray[np.complex128]:
        return np.stack([self.e1, self.e2])

    @classmethod
    def canonical(cls, k: npt.ArrayLike) -> PolarizationBasis:
        """e1 along z x k (x if k is along z), e2 = k x e1."""
        k = normalized(k)
        e1 = np.cross(Z_AXIS, k)
        e1 = X_AXIS.copy() if np.linalg.norm(e1) < 1e-12 else e1 / np.linalg.norm(e1)
        return cls(k=k, e1=e1, e2=np.cross(k, e1))

    def mixed(self, u: npt.ArrayLike) -> PolarizationBasis:
        """The basis (e1, e2) u for a 2x2 unitary u."""
        rotated = self.vectors.T @ np.asarray(u, dtype=np.complex128)
        return PolarizationBasis(k=self.k, e1=rotated[:, 0], e2=rotated[:, 1])

    def components(self, polarization: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """Amplitudes conj(e_a) . polarization."""
        return self.vectors.conj() @ np.asarray(polarization, dtype=np.complex128)

    def completeness(self) -> npt.NDArray[np.complex128]:
        """sum_a conj(e_a) o e_a, the transverse projector 1 - k o k."""
        return sum(np.outer(e.conj(), e) for e in self.vectors)


@define(frozen=True, eq=False)
class DetectionChannel:
    """
    Polarization analysis at the detector.

    Attributes:
        kind: "unanalyzed" or "linear".
        direction: Unit analyzer direction for the linear kind.
    """

    kind: Literal["unanalyzed", "linear"] = field(default="unanalyzed")
    direction: Optional[Vector] = field(default=None, converter=lambda v: None if v is None else _vector(v))

    def __attrs_post_init__(self) -> None:
        if self.kind not in ("unanalyzed", "linear"):
            raise UsageError(f"unknown detection channel kind {self.kind!r}")
        if self.kind == "linear":
            if self.direction is None or abs(np.linalg.norm(self.direction) - 1.0) > UNIT_TOL:
                raise UsageError("a linear channel needs a unit direction")
        elif self.direction is not None:
            raise UsageError("an unanalyzed channel takes no direction")

    @classmethod
    def linear(cls, direction: npt.ArrayLike) -> DetectionChannel:
        return cls("linear", normalized(direction))

    def observable(self, basis_out: PolarizationBasis) -> CMatrix:
        """Detector projector in the outgoing polarization basis."""
        if self.kind == "unanalyzed":
            return np.array(IDENTITY_2)
        if abs(float(self.direction @ basis_out.k)) > TRANSVERSE_TOL:
            raise UsageError(f"analyzer {self.direction.tolist()} is not transverse to k_out {basis_out.k.tolist()}")
        v = basis_out.components(self.direction)
        return np.outer(v, v.conj())


def dot_pauli(vector: npt.ArrayLike) -> CMatrix:
    """v . tau for a complex 3-vector."""
    return sum(c * p for c, p in zip(np.asarray(vector, dtype=np.complex128), PAULIS))


def far_field_projector(n: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """1 - n o n."""
    n = normalized(n)
    return np.eye(3) - np.outer(n, n)


def single_scatter_op(
    atom: Atom, geom: ScatteringGeometry, basis_in: PolarizationBasis, basis_out: PolarizationBasis
) -> CMatrix:
    """<e'_a| T |e_b> = (conj(e'_a) . tau_atom)(tau_atom . e_b) on target (x) polarization."""
    _check_atom(atom)
    _check_bases(geom, basis_in, basis_out)

    def block(e_out: npt.NDArray[np.complex128], e_in: npt.NDArray[np.complex128]) -> CMatrix:
        return embed({atom - 1: dot_pauli(e_out.conj()) @ dot_pauli(e_in)}, (2, 2))

    return _assemble(block, basis_in, basis_out)


def double_scatter_op(
    order: Order, geom: ScatteringGeometry, basis_in: PolarizationBasis, basis_out: PolarizationBasis
) -> CMatrix:
    """
    Order A scatters on atom 1 then atom 2:
    <e'|T_A|e> = sum_mn (conj(e') . tau_2) tau_2^m (delta_mn - n_m n_n) tau_1^n (tau_1 . e).
    Order B exchanges the atoms.
    """
    if order not in ("A", "B"):
        raise UsageError(f"scattering order must be 'A' or 'B', got {order!r}")
    _check_bases(geom, basis_in, basis_out)
    first, last = (0, 1) if order == "A" else (1, 0)
    projector = far_field_projector(geom.n_axis)

    def block(e_out: npt.NDArray[np.complex128], e_in: npt.NDArray[np.complex128]) -> CMatrix:
        incoming = dot_pauli(e_in)
        outgoing = dot_pauli(e_out.conj())
        total = np.zeros((4, 4), dtype=np.complex128)
        for m, pm in enumerate(PAULIS):
            for n, pn in enumerate(PAULIS):
                if projector[m, n] != 0.0:
                    total += projector[m, n] * embed({last: outgoing @ pm, first: pn @ incoming}, (2, 2))
        return total

    return _assemble(block, basis_in, basis_out)


def young_phase(geom: ScatteringGeometry) -> float:
    """k (k_in - k_out) . (r1 - r2)."""
    return float(geom.wavenumber * (geom.k_in - geom.k_out) @ (geom.r1 - geom.r2))


def cbs_phase(geom: ScatteringGeometry) -> float:
    """k (k_in + k_out) . (r1 - r2), zero in the exact backward direction."""
    return float(geom.wavenumber * (geom.k_in + geom.k_out) @ (geom.r1 - geom.r2))


def probe_preparation(
    prep: Union[Literal["unpolarized"], npt.ArrayLike], basis_in: PolarizationBasis
) -> DensityMatrix:
    """Unpolarized light, or the pure polarization state of a given (complex) vector."""
    if isinstance(prep, str):
        if prep != "unpolarized":
            raise UsageError(f"unknown probe preparation {prep!r}")
        return qubit_density([0.0, 0.0, 0.0])
    vector = np.asarray(prep, dtype=np.complex128)
    if vector.shape != (3,) or np.linalg.norm(vector) == 0.0:
        raise UsageError(f"input polarization must be a non-zero 3-vector, got {prep!r}")
    amplitudes = basis_in.components(vector / np.linalg.norm(vector))
    if abs(np.linalg.norm(amplitudes) - 1.0) > TRANSVERSE_TOL:
        raise UsageError("input polarization must be transverse to k_in")
    return DensityMatrix(op=np.outer(amplitudes, amplitudes.conj()), layout=PROBE_QUBIT)


def young_scenario(
    geom: ScatteringGeometry,
    probe_prep: Union[Literal["unpolarized"], npt.ArrayLike] = "unpolarized",
    channel: Optional[DetectionChannel] = None,
    bases: Optional[tuple[PolarizationBasis, PolarizationBasis]] = None,
) -> ProbeScenario:
    """Single scattering by atom 1 (path A) or atom 2 (path B); external phase young_phase(geom)."""
    channel = channel or DetectionChannel()
    basis_in, basis_out = bases or (PolarizationBasis.canonical(geom.k_in), PolarizationBasis.canonical(geom.k_out))
    layout_in, layout_out = probe_layouts(2, 2)
    perpendicular = abs(float(geom.k_in @ geom.k_out)) < UNIT_TOL and channel.kind == "unanalyzed"
    return ProbeScenario(
        t_a=single_scatter_op(1, geom, basis_in, basis_out),
        t_b=single_scatter_op(2, geom, basis_in, basis_out),
        rho_p=probe_preparation(probe_prep, basis_in),
        p_obs=channel.observable(basis_out),
        layout_in=layout_in,
        layout_out=layout_out,
        name="young",
        witness_target=BellKind.PSI_MINUS.value if perpendicular else None,
        geometry_phase=young_phase(geom),
    )


def young_dyadic_observable(k_in: npt.ArrayLike, k_out: npt.ArrayLike) -> CMatrix:
    """
    (1 + (k . k')^2) I + tau_1 . D . tau_2 with D = k o k + k' o k' + (k x k') o (k x k'),
    the observable of unpolarized, unanalyzed single scattering.
    """
    k, kp = normalized(k_in), normalized(k_out)
    cross = np.cross(k, kp)
    dyadic = np.outer(k, k) + np.outer(kp, kp) + np.outer(cross, cross)
    correlator = sum(dyadic[m, n] * np.kron(PAULIS[m], PAULIS[n]) for m in range(3) for n in range(3))
    return (1.0 + float(k @ kp) ** 2) * np.eye(4, dtype=np.complex128) + correlator


def cbs_geometry(
    k_in: npt.ArrayLike = Z_AXIS,
    n_axis: npt.ArrayLike = X_AXIS,
    separation: float = 8.0,
    wavenumber: float = 1.0,
) -> ScatteringGeometry:
    """Exact backscattering off two atoms on an axis perpendicular to the incident beam."""
    k, n = normalized(k_in), normalized(n_axis)
    return ScatteringGeometry(k_in=k, k_out=-k, n_axis=n, r1=np.zeros(3), r2=separation * n, wavenumber=wavenumber)


def cbs_channel(name: str, geom: ScatteringGeometry) -> DetectionChannel:
    """
    Linear analyzer along n ("triplet", alias "parallel") or along n x k ("singlet", alias
    "perpendicular").
    """
    try:
        kind = _CBS_CHANNELS[name]
    except KeyError:
        raise UsageError(f"unknown CBS channel {name!r}, expected one of {sorted(_CBS_CHANNELS)}") from None
    if kind == "along-n":
        return DetectionChannel.linear(geom.n_axis)
    return DetectionChannel.linear(np.cross(geom.n_axis, geom.k_in))


def cbs_scenario(
    channel: Union[str, DetectionChannel], geom: Optional[ScatteringGeometry] = None
) -> ProbeScenario:
    """
    Double scattering of unpolarized light in the two reversed orders. The channel along n
    realizes W_+ and the channel along n x k realizes W_-.
    """
    geom = geom or cbs_geometry()
    _check_cbs_geometry(geom)
    if isinstance(channel, str):
        channel = cbs_channel(channel, geom)
    witness = _cbs_witness(channel, geom)
    basis_in, basis_out = PolarizationBasis.canonical(geom.k_in), PolarizationBasis.canonical(geom.k_out)
    layout_in, layout_out = probe_layouts(2, 2)
    logger.debug(f"Building CBS scenario for the {witness} channel")
    return ProbeScenario(
        t_a=double_scatter_op("A", geom, basis_in, basis_out),
        t_b=double_scatter_op("B", geom, basis_in, basis_out),
        rho_p=qubit_density([0.0, 0.0, 0.0]),
        p_obs=channel.observable(basis_out),
        layout_in=layout_in,
        layout_out=layout_out,
        name=f"cbs-{'singlet' if witness == BellKind.PSI_MINUS else 'triplet'}",
        witness_target=witness.value,
        geometry_phase=cbs_phase(geom),
    )


def single_scattering_axis(geom: ScatteringGeometry) -> Vector:
    """Quantization axis q of the single-scattering visibility (1 + <tau_1^q tau_2^q>)/2: the incident direction."""
    return geom.k_in


def single_scattering_background(
    rho12: DensityMatrix,
    geom: Optional[ScatteringGeometry] = None,
    channel: Union[str, DetectionChannel, None] = None,
) -> InterferencePattern:
    """Young fringe of unpolarized light in the CBS geometry, the flat background of double scattering."""
    geom = geom or cbs_geometry()
    _check_cbs_geometry(geom)
    if isinstance(channel, str):
        channel = cbs_channel(channel, geom)
    return pattern_params(young_scenario(geom, "unpolarized", channel), rho12)


def background_visibility_formula(rho12: DensityMatrix, geom: Optional[ScatteringGeometry] = None) -> float:
    """(1 + <tau_1^q tau_2^q>)/2 along single_scattering_axis."""
    tq = dot_pauli(single_scattering_axis(geom or cbs_geometry()))
    return 0.5 * (1.0 + rho12.expectation(np.kron(tq, tq)))


def _assemble(block, basis_in: PolarizationBasis, basis_out: PolarizationBasis) -> CMatrix:
    """T = sum_ab block(e'_a, e_b) (x) |a><b| with polarization as the fast index."""
    total = np.zeros((8, 8), dtype=np.complex128)
    for a, e_out in enumerate(basis_out.vectors):
        for b, e_in in enumerate(basis_in.vectors):
            unit = np.zeros((2, 2))
            unit[a, b] = 1.0
            total += np.kron(block(e_out, e_in), unit)
    return total


def _check_atom(atom: Atom) -> None:
    if atom not in (1, 2):
        raise UsageError(f"atom must be 1 or 2, got {atom!r}")


def _check_bases(geom: ScatteringGeometry, basis_in: PolarizationBasis, basis_out: PolarizationBasis) -> None:
    if not np.allclose(basis_in.k, geom.k_in, atol=UNIT_TOL) or not np.allclose(basis_out.k, geom.k_out, atol=UNIT_TOL):
        raise UsageError("polarization bases are not attached to the geometry's k_in and k_out")


def _check_cbs_geometry(geom: ScatteringGeometry) -> None:
    if abs(float(geom.k_in @ geom.n_axis)) > TRANSVERSE_TOL:
        raise UsageError("CBS needs the incident beam at right angles to the atom axis")
    if not np.allclose(geom.k_out, -geom.k_in, atol=UNIT_TOL):
        raise UsageError("CBS needs detection in the exact backward direction k_out = -k_in")


def _cbs_witness(channel: DetectionChannel, geom: ScatteringGeometry) -> BellKind:
    if channel.kind != "linear":
        raise UsageError("CBS witnesses need a linear polarization channel")
    if abs(abs(float(channel.direction @ geom.n_axis)) - 1.0) < TRANSVERSE_TOL:
        return BellKind.PSI_PLUS
    across = np.cross(geom.n_axis, geom.k_in)
    if abs(abs(float(channel.direction @ across)) - 1.0) < TRANSVERSE_TOL:
        return BellKind.PSI_MINUS
    raise UsageError(f"channel {channel.direction.tolist()} is neither along n nor along n x k")
