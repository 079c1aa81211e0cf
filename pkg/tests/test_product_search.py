import numpy as np
import pytest

from probe_witness.product_search import minimize_over_products, product_expectation
from probe_witness.qmath import SIGMA_X, SIGMA_Z, kron
from probe_witness.states import BellKind, bell_witness, product_state, spin_correlator


@pytest.mark.parametrize("kind", list(BellKind), ids=lambda k: k.value)
def test_bell_witness_separable_minimum_is_zero(kind):
    result = minimize_over_products(bell_witness(kind))
    assert result.value == pytest.approx(0.0, abs=1e-9)


def test_spin_correlator_minimum_is_anti_aligned():
    result = minimize_over_products(spin_correlator())
    assert result.value == pytest.approx(-1.0, abs=1e-9)
    a1, a2 = result.argmin
    psi = product_state(a1, a2)
    assert psi.density().expectation(spin_correlator()) == pytest.approx(result.value, abs=1e-9)


def test_local_fields_reach_product_bound():
    m = kron(SIGMA_Z, np.eye(2)) + 0.5 * kron(np.eye(2), SIGMA_X)
    assert minimize_over_products(m).value == pytest.approx(-1.5, abs=1e-9)


def test_minimum_never_undercuts_any_product(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    m = a + a.conj().T
    value = minimize_over_products(m).value
    samples = rng.uniform([0, 0, 0, 0], [np.pi, 2 * np.pi, np.pi, 2 * np.pi], size=(500, 4))
    assert min(product_expectation(m, x) for x in samples) >= value - 1e-9
    assert value >= np.linalg.eigvalsh(m)[0] - 1e-12
