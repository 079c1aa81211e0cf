"""Target and probe states, and the partial-transpose entanglement oracle."""

from __future__ import annotations

from enum import Enum
from typing import NamedTuple, Optional, Union

import numpy as np
import numpy.typing as npt
from attrs import define, field
from scipy.stats import unitary_group

from .errors import ContractError, DimensionError, UsageError
from .qmath import (
    HERMITIAN_TOL,
    PAULIS,
    PROBE_IN,
    TARGET_LABELS,
    CMatrix,
    SpaceLayout,
    as_cmatrix,
    eig_hermitian,
    hermiticity_residual,
    kron,
    partial_trace,
)

TRACE_TOL = 1e-12
PSD_TOL = 1e-10
NORM_TOL = 1e-12
PPT_TOL = 1e-10
RANK_CUTOFF = 1e-8

TWO_QUBITS = SpaceLayout((2, 2), TARGET_LABELS)
PROBE_QUBIT = SpaceLayout((2,), (PROBE_IN,))

Seed = Union[int, np.random.Generator]


class BellKind(str, Enum):
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"


_BELL_AMPLITUDES = {
    BellKind.PSI_PLUS: (0, 1, 1, 0),
    BellKind.PSI_MINUS: (0, 1, -1, 0),
    BellKind.PHI_PLUS: (1, 0, 0, 1),
    BellKind.PHI_MINUS: (1, 0, 0, -1),
}


@define(frozen=True, kw_only=True, eq=False)
class DensityMatrix:
    """
    A Hermitian, unit-trace, positive semidefinite operator on a labeled space.

    Attributes:
        op: The matrix.
        layout: Subsystem layout of the matrix.
    """

    op: CMatrix = field(converter=as_cmatrix)
    layout: SpaceLayout = field()

    def __attrs_post_init__(self) -> None:
        n = self.op.shape[0]
        if self.op.shape != (n, n) or n != self.layout.dim:
            raise DimensionError(f"density matrix of shape {self.op.shape} does not fit layout {self.layout}")
        residual = hermiticity_residual(self.op)
        if residual > HERMITIAN_TOL:
            raise ContractError(f"density matrix is not Hermitian (residual {residual:.3e})")
        trace = np.trace(self.op)
        if abs(trace - 1.0) > TRACE_TOL:
            raise ContractError(f"density matrix trace is {trace.real:.12g}, expected 1")
        lowest = eig_hermitian(self.op)[0][0]
        if lowest < -PSD_TOL:
            raise ContractError(f"density matrix has negative eigenvalue {lowest:.3e}")

    @property
    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.op, self.op).real)

    def expectation(self, observable: npt.ArrayLike) -> float:
        """Re tr(rho observable)."""
        o = as_cmatrix(observable)
        if o.shape != self.op.shape:
            raise DimensionError(f"observable {o.shape} does not act on a state of shape {self.op.shape}")
        return float(np.einsum("ij,ji->", self.op, o).real)

    def conjugated(self, u: npt.ArrayLike) -> DensityMatrix:
        """u rho u^dagger."""
        unitary = as_cmatrix(u)
        return DensityMatrix(op=_hermitize(unitary @ self.op @ unitary.conj().T), layout=self.layout)


@define(frozen=True, kw_only=True, eq=False)
class PureState:
    """
    A normalized state vector.

    Attributes:
        amplitudes: Components in the layout's computational basis.
        layout: Subsystem layout of the vector.
    """

    amplitudes: npt.NDArray[np.complex128] = field(converter=lambda a: np.asarray(a, dtype=np.complex128))
    layout: SpaceLayout = field()

    def __attrs_post_init__(self) -> None:
        if self.amplitudes.shape != (self.layout.dim,):
            raise DimensionError(f"{self.amplitudes.shape} amplitudes do not fit layout {self.layout}")
        norm = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ContractError(f"state has squared norm {norm:.12g}, expected 1")

    def overlap(self, other: PureState) -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> CMatrix:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> DensityMatrix:
        return DensityMatrix(op=self.projector(), layout=self.layout)


@define(frozen=True)
class BlochAngles:
    """
    Polar and azimuthal angle of a pure qubit state (cos(theta/2), e^{i phi} sin(theta/2)).

    Attributes:
        theta: Polar angle in [0, pi].
        phi: Azimuth in [0, 2 pi).
    """

    theta: float = field(converter=float)
    phi: float = field(converter=float)

    @theta.validator
    def _check_theta(self, _, value: float) -> None:
        if not 0.0 <= value <= np.pi:
            raise UsageError(f"theta must lie in [0, pi], got {value}")

    @phi.validator
    def _check_phi(self, _, value: float) -> None:
        if not 0.0 <= value < 2 * np.pi:
            raise UsageError(f"phi must lie in [0, 2 pi), got {value}")

    @classmethod
    def wrapped(cls, theta: float, phi: float) -> BlochAngles:
        """Canonical angles of the same ray for arbitrary real theta, phi."""
        theta = float(np.mod(theta, 2 * np.pi))
        if theta > np.pi:
            theta, phi = 2 * np.pi - theta, phi + np.pi
        phi = float(np.mod(phi, 2 * np.pi))
        return cls(theta, 0.0 if phi >= 2 * np.pi else phi)

    def amplitudes(self) -> npt.NDArray[np.complex128]:
        return qubit_amplitudes(self.theta, self.phi)


class PptResult(NamedTuple):
    entangled: bool
    min_pt_eigenvalue: float


def qubit_amplitudes(theta: float, phi: float) -> npt.NDArray[np.complex128]:
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=np.complex128)


def bell_state(kind: Union[BellKind, str]) -> PureState:
    amplitudes = np.array(_BELL_AMPLITUDES[BellKind(kind)], dtype=np.complex128) / np.sqrt(2)
    return PureState(amplitudes=amplitudes, layout=TWO_QUBITS)


def bell_projector(kind: Union[BellKind, str]) -> CMatrix:
    return bell_state(kind).projector()


def bell_witness(kind: Union[BellKind, str]) -> CMatrix:
    """I - 2|B><B|: non-negative on separable states, -1 on its own Bell state."""
    return np.eye(4, dtype=np.complex128) - 2 * bell_projector(kind)


def spin_correlator() -> CMatrix:
    """tau_1 . tau_2 on two qubits."""
    return sum(kron(p, p) for p in PAULIS)


def maximally_mixed(layout: SpaceLayout = TWO_QUBITS) -> DensityMatrix:
    return DensityMatrix(op=np.eye(layout.dim) / layout.dim, layout=layout)


def qubit_density(bloch: npt.ArrayLike, layout: SpaceLayout = PROBE_QUBIT) -> DensityMatrix:
    """(I + r . sigma)/2 for a Bloch vector with |r| <= 1."""
    r = np.asarray(bloch, dtype=float)
    if r.shape != (3,):
        raise UsageError(f"Bloch vector needs 3 components, got shape {r.shape}")
    if np.linalg.norm(r) > 1.0 + 1e-12:
        raise ContractError(f"Bloch vector {r} lies outside the unit ball")
    op = 0.5 * (np.eye(2) + sum(c * p for c, p in zip(r, PAULIS)))
    return DensityMatrix(op=op, layout=layout)


def werner(p: float) -> DensityMatrix:
    if not 0.0 <= p <= 1.0:
        raise UsageError(f"Werner weight must lie in [0, 1], got {p}")
    op = p * bell_projector(BellKind.PSI_MINUS) + (1 - p) * np.eye(4) / 4
    return DensityMatrix(op=op, layout=TWO_QUBITS)


def product_state(a1: BlochAngles, a2: BlochAngles) -> PureState:
    return PureState(amplitudes=np.kron(a1.amplitudes(), a2.amplitudes()), layout=TWO_QUBITS)


def density_from_entries(entries: npt.ArrayLike) -> DensityMatrix:
    """Two-qubit density matrix from a 4x4 grid of [re, im] pairs."""
    pairs = np.asarray(entries, dtype=float)
    if pairs.shape != (4, 4, 2):
        raise DimensionError(f"expected 4x4 [re, im] entries, got shape {pairs.shape}")
    return DensityMatrix(op=pairs[..., 0] + 1j * pairs[..., 1], layout=TWO_QUBITS)


def random_density(
    seed: Seed, dim: int = 4, rank: int = 4, *, layout: Optional[SpaceLayout] = None
) -> DensityMatrix:
    """
    Reproducible random state of the requested rank.

    Draws a Gaussian pure state on dim x rank and traces out the rank-dimensional ancilla.
    """
    if not 1 <= rank <= dim:
        raise UsageError(f"rank must lie in [1, {dim}], got {rank}")
    layout = layout or _default_layout(dim)
    if layout.dim != dim:
        raise DimensionError(f"layout {layout} does not have dimension {dim}")
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=dim * rank) + 1j * rng.normal(size=dim * rank)
    psi /= np.linalg.norm(psi)
    enlarged = SpaceLayout((dim, rank), ("system", "ancilla"))
    op = partial_trace(np.outer(psi, psi.conj()), enlarged, keep=["system"])
    op /= np.trace(op).real
    return DensityMatrix(op=_hermitize(op), layout=layout)


def random_product_mixture(rng: np.random.Generator, max_terms: int = 8) -> DensityMatrix:
    """Convex mixture of between 1 and max_terms random pure product states."""
    op = random_product_mixtures(rng, 1, max_terms)[0]
    return DensityMatrix(op=_hermitize(op / np.trace(op).real), layout=TWO_QUBITS)


def random_product_mixtures(rng: np.random.Generator, count: int, max_terms: int = 8) -> npt.NDArray[np.complex128]:
    """
    A (count, 4, 4) stack of separable two-qubit density matrices, unvalidated.
    Each is a Dirichlet-weighted mixture of 1..max_terms pure product states uniform on both Bloch spheres.
    """
    if max_terms < 1:
        raise UsageError(f"max_terms must be positive, got {max_terms}")
    ops = np.empty((count, 4, 4), dtype=np.complex128)
    for i in range(count):
        terms = int(rng.integers(1, max_terms + 1))
        weights = rng.dirichlet(np.ones(terms))
        theta = np.arccos(rng.uniform(-1.0, 1.0, size=(terms, 2)))
        phi = rng.uniform(0.0, 2 * np.pi, size=(terms, 2))
        amps = np.stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)
        psi = np.einsum("ti,tj->tij", amps[:, 0], amps[:, 1]).reshape(terms, 4)
        ops[i] = np.einsum("t,ti,tj->ij", weights, psi, psi.conj())
    return ops


def random_local_unitary(rng: np.random.Generator) -> CMatrix:
    """U_1 (x) U_2 with Haar-random single-qubit factors."""
    return kron(unitary_group.rvs(2, random_state=rng), unitary_group.rvs(2, random_state=rng))


def partial_transpose(rho: DensityMatrix) -> CMatrix:
    """Transpose of the second qubit."""
    if rho.layout.factors != (2, 2):
        raise UsageError(f"partial transpose needs a two-qubit layout, got {rho.layout}")
    return rho.op.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def ppt_check(rho: DensityMatrix) -> PptResult:
    """Peres-Horodecki test, necessary and sufficient for two qubits."""
    lowest = float(eig_hermitian(_hermitize(partial_transpose(rho)))[0][0])
    return PptResult(entangled=lowest < -PPT_TOL, min_pt_eigenvalue=lowest)


def rank(rho: DensityMatrix, cutoff: float = RANK_CUTOFF) -> int:
    return int(np.sum(eig_hermitian(rho.op)[0] > cutoff))


def _default_layout(dim: int) -> SpaceLayout:
    if dim == 4:
        return TWO_QUBITS
    if dim == 2:
        return PROBE_QUBIT
    return SpaceLayout((dim,), ("system",))


def _hermitize(op: npt.ArrayLike) -> CMatrix:
    m = as_cmatrix(op)
    return 0.5 * (m + m.conj().T)
