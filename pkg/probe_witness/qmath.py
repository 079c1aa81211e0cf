"""
Dense complex linear algebra for the probe/target Hilbert spaces (dimension at most 16).

Kronecker ordering is fixed repo-wide: the first-listed factor is the slow (most significant) index,
so the basis of two qubits is |00>, |01>, |10>, |11> with the first label belonging to subsystem 1.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from functools import reduce
from math import prod

import numpy as np
import numpy.typing as npt
from attrs import define, field

from .errors import ContractError, ConvergenceError, DimensionError, UsageError

logger = logging.getLogger()

CMatrix = npt.NDArray[np.complex128]

MAX_DIM = 16
HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 64

TARGET_1 = "target-1"
TARGET_2 = "target-2"
PROBE_IN = "probe-in"
PROBE_OUT = "probe-out"
TARGET_LABELS = (TARGET_1, TARGET_2)


def _frozen(a: npt.ArrayLike) -> CMatrix:
    m = np.array(a, dtype=np.complex128)
    m.flags.writeable = False
    return m


IDENTITY_2 = _frozen(np.eye(2))
SIGMA_X = _frozen([[0, 1], [1, 0]])
SIGMA_Y = _frozen([[0, -1j], [1j, 0]])
SIGMA_Z = _frozen([[1, 0], [0, -1]])
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

_PAULI_BY_AXIS = {"i": IDENTITY_2, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@define(frozen=True)
class SpaceLayout:
    """
    Subsystem bookkeeping for a composite operator.

    Attributes:
        factors: Subsystem dimensions, slow index first.
        labels: Role tag of each factor (target-1, target-2, probe-in, probe-out).
    """

    factors: tuple[int, ...] = field(converter=tuple)
    labels: tuple[str, ...] = field(converter=tuple)

    @factors.validator
    def _check_factors(self, _, value: tuple[int, ...]) -> None:
        if not value or any(int(d) != d or d < 1 for d in value):
            raise UsageError(f"layout factors must be positive integers, got {value}")
        if prod(value) > MAX_DIM:
            raise DimensionError(f"layout dimension {prod(value)} exceeds the supported maximum {MAX_DIM}")

    @labels.validator
    def _check_labels(self, _, value: tuple[str, ...]) -> None:
        if len(value) != len(self.factors):
            raise UsageError(f"{len(value)} labels given for {len(self.factors)} factors")
        if len(set(value)) != len(value):
            raise UsageError(f"layout labels must be unique, got {value}")

    @property
    def dim(self) -> int:
        return prod(self.factors)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UsageError(f"label {label!r} not in layout {self.labels}") from None

    def restrict(self, keep: Iterable[str]) -> SpaceLayout:
        """The layout of the kept factors, in this layout's order."""
        kept = set(keep)
        positions = [i for i, label in enumerate(self.labels) if label in kept]
        return SpaceLayout([self.factors[i] for i in positions], [self.labels[i] for i in positions])


def as_cmatrix(a: npt.ArrayLike) -> CMatrix:
    """Coerce to a finite complex matrix within the dimension cap."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got an array of shape {m.shape}")
    if max(m.shape) > MAX_DIM:
        raise DimensionError(f"matrix shape {m.shape} exceeds the supported maximum {MAX_DIM}")
    if not np.all(np.isfinite(m)):
        raise ContractError("matrix entries must be finite")
    return m


def dagger(a: npt.ArrayLike) -> CMatrix:
    return as_cmatrix(a).conj().T


def hermiticity_residual(a: npt.ArrayLike) -> float:
    """Max entry of |a - a^dagger|."""
    m = as_cmatrix(a)
    _require_square(m)
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(a: npt.ArrayLike, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_residual(a) <= tol


def pauli(axis: str) -> CMatrix:
    try:
        return _PAULI_BY_AXIS[axis]
    except KeyError:
        raise UsageError(f"unknown Pauli axis {axis!r}, expected one of i, x, y, z") from None


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> CMatrix:
    """Kronecker product with a as the slow index."""
    left, right = as_cmatrix(a), as_cmatrix(b)
    rows = left.shape[0] * right.shape[0]
    cols = left.shape[1] * right.shape[1]
    if max(rows, cols) > MAX_DIM:
        raise DimensionError(f"kron result {rows}x{cols} exceeds the supported maximum {MAX_DIM}")
    return np.kron(left, right)


def kron_all(*ops: npt.ArrayLike) -> CMatrix:
    if not ops:
        raise UsageError("kron_all needs at least one operand")
    return reduce(kron, ops[1:], as_cmatrix(ops[0]))


def embed(ops: Mapping[int, npt.ArrayLike], factors: Sequence[int]) -> CMatrix:
    """Place operators at the given factor positions, identity elsewhere."""
    for position in ops:
        if not 0 <= position < len(factors):
            raise UsageError(f"position {position} outside a {len(factors)}-factor space")
    return kron_all(*(ops[i] if i in ops else np.eye(d) for i, d in enumerate(factors)))


def expectation(op: npt.ArrayLike, rho: npt.ArrayLike) -> complex:
    """tr(rho op)."""
    o, r = as_cmatrix(op), as_cmatrix(rho)
    if o.shape != r.shape:
        raise DimensionError(f"operator {o.shape} and state {r.shape} differ in shape")
    return complex(np.einsum("ij,ji->", r, o))


def partial_trace(a: npt.ArrayLike, layout: SpaceLayout, keep: Iterable[str]) -> CMatrix:
    """
    Trace out every factor of `layout` not named in `keep`.

    The result acts on the kept factors in layout order, whatever the order of `keep`.
    """
    m = as_cmatrix(a)
    _require_square(m)
    if m.shape[0] != layout.dim:
        raise DimensionError(f"operator dimension {m.shape[0]} does not match layout dimension {layout.dim}")
    kept = set(keep)
    if not kept:
        raise UsageError("partial_trace needs a non-empty keep-set")
    unknown = kept - set(layout.labels)
    if unknown:
        raise UsageError(f"labels {sorted(unknown)} are not in layout {layout.labels}")

    n = len(layout.factors)
    t = m.reshape(layout.factors + layout.factors)
    # trace from the highest position down so lower axis numbers stay valid
    for i in reversed(range(n)):
        if layout.labels[i] not in kept:
            t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    d = layout.restrict(kept).dim
    return t.reshape(d, d)


def eig_hermitian(h: npt.ArrayLike) -> tuple[npt.NDArray[np.float64], CMatrix]:
    """
    Cyclic Jacobi eigensolver for Hermitian matrices.

    Returns ascending eigenvalues and the unitary whose columns are the matching eigenvectors,
    so that h = V diag(w) V^dagger.
    """
    a = as_cmatrix(h)
    _require_square(a)
    residual = hermiticity_residual(a)
    if residual > HERMITIAN_TOL:
        raise ContractError(f"eig_hermitian needs a Hermitian matrix, max |h - h^dagger| = {residual:.3e}")

    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=np.complex128)
    scale = max(1.0, float(np.linalg.norm(a)))

    for sweep in range(JACOBI_MAX_SWEEPS):
        if _off_diagonal_norm(a) < JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotate(a, v, p, q)
    else:
        raise ConvergenceError(f"Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps")

    logger.debug(f"Jacobi eigensolve of a {n}x{n} matrix took {sweep} sweeps")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def expm_generator(h: npt.ArrayLike, angle: float) -> CMatrix:
    """exp(-i angle h) by spectral decomposition of the Hermitian generator h."""
    w, v = eig_hermitian(h)
    return (v * np.exp(-1j * angle * w)) @ v.conj().T


def _require_square(m: CMatrix) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")


def _off_diagonal_norm(a: CMatrix) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _jacobi_rotate(a: CMatrix, v: CMatrix, p: int, q: int) -> None:
    """Zero a[p, q] in place with a complex Givens rotation, accumulating it into v."""
    g = a[p, q]
    magnitude = abs(g)
    if magnitude == 0.0:
        return
    phase = g / magnitude
    theta = 0.5 * np.arctan2(2.0 * magnitude, (a[q, q] - a[p, p]).real)
    c, s = np.cos(theta), np.sin(theta)
    # diag(1, conj(phase)) makes the 2x2 block real, then a real rotation diagonalizes it
    rot = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])

    cols = a[:, [p, q]] @ rot
    a[:, p], a[:, q] = cols[:, 0], cols[:, 1]
    rows = rot.conj().T @ a[[p, q], :]
    a[p, :], a[q, :] = rows[0], rows[1]
    a[p, q] = a[q, p] = 0.0

    vcols = v[:, [p, q]] @ rot
    v[:, p], v[:, q] = vcols[:, 0], vcols[:, 1]
