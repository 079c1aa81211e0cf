"""Derivative-free minimization of a two-qubit observable over pure product states."""

from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
from scipy.optimize import minimize_scalar

from .qmath import CMatrix, as_cmatrix
from .states import BlochAngles

logger = logging.getLogger()

GRID_THETA = 12
GRID_PHI = 24
N_STARTS = 5
STEP_TOL = 1e-6
MAX_SWEEPS = 200


class ProductMinimum(NamedTuple):
    value: float
    argmin: tuple[BlochAngles, BlochAngles]


def product_expectation(m: CMatrix, x: npt.ArrayLike) -> float:
    """<psi1 psi2| m |psi1 psi2> for x = (theta1, phi1, theta2, phi2)."""
    t1, p1, t2, p2 = x
    psi = np.kron(_amplitudes(t1, p1), _amplitudes(t2, p2))
    return float(np.vdot(psi, m @ psi).real)


def minimize_over_products(m: npt.ArrayLike) -> ProductMinimum:
    """
    Grid search over 12 x 24 (theta, phi) points per qubit, then coordinate-wise bounded
    line searches from the best grid points until the search bracket falls below 1e-6.
    """
    op = as_cmatrix(m)
    thetas, phis, values = _grid_values(op)
    best = np.argsort(values, axis=None, kind="stable")[:N_STARTS]
    step0 = np.pi / (GRID_THETA - 1)

    results = []
    for flat in best:
        i, j = np.unravel_index(flat, values.shape)
        x0 = np.array([thetas[i], phis[i], thetas[j], phis[j]])
        results.append(_refine(op, x0, step0))

    x, value = min(results, key=lambda r: r[1])
    logger.debug(f"Product-state minimum {value:.9f} at {x}")
    return ProductMinimum(value, (BlochAngles.wrapped(x[0], x[1]), BlochAngles.wrapped(x[2], x[3])))


def _amplitudes(theta: float, phi: float) -> npt.NDArray[np.complex128]:
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def _grid_values(m: CMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    theta, phi = np.meshgrid(
        np.linspace(0.0, np.pi, GRID_THETA), np.arange(GRID_PHI) * 2 * np.pi / GRID_PHI, indexing="ij"
    )
    thetas, phis = theta.ravel(), phi.ravel()
    amps = np.stack([np.cos(thetas / 2), np.exp(1j * phis) * np.sin(thetas / 2)], axis=-1)
    m4 = m.reshape(2, 2, 2, 2)
    # contract qubit 1 first, then qubit 2
    half = np.einsum("ip,pqrs,ir->iqs", amps.conj(), m4, amps)
    values = np.einsum("jq,iqs,js->ij", amps.conj(), half, amps).real
    return thetas, phis, values


def _refine(m: CMatrix, x0: np.ndarray, step0: float) -> tuple[np.ndarray, float]:
    x = x0.copy()
    fx = product_expectation(m, x)
    step = step0
    for _ in range(MAX_SWEEPS):
        if step < STEP_TOL:
            break
        moved = 0.0
        for k in range(x.size):

            def along(t: float, k: int = k) -> float:
                trial = x.copy()
                trial[k] = t
                return product_expectation(m, trial)

            res = minimize_scalar(
                along, bounds=(x[k] - step, x[k] + step), method="bounded", options={"xatol": STEP_TOL / 10}
            )
            if res.fun < fx:
                moved = max(moved, abs(res.x - x[k]))
                x[k], fx = res.x, float(res.fun)
        # the bracket follows the largest move, so a sweep that barely moves ends the search
        step = min(step, 2.0 * moved)
    return x, fx
