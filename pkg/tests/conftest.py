import numpy as np
import pytest

from probe_witness.interference import calibrate
from probe_witness.photon_realization import ScatteringGeometry, cbs_scenario, young_scenario
from probe_witness.spin_realization import (
    anisotropic_triplet_scenario,
    effective_triplet_scenario,
    rotated_phi_scenario,
    singlet_scenario,
)
from probe_witness.states import TWO_QUBITS, BellKind, DensityMatrix, bell_projector


def bell_density(kind) -> DensityMatrix:
    return DensityMatrix(op=bell_projector(kind), layout=TWO_QUBITS)


def max_abs(a) -> float:
    return float(np.max(np.abs(a)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(params=list(BellKind), ids=lambda k: k.value)
def bell_kind(request):
    return request.param


@pytest.fixture(scope="session")
def witness_scenarios():
    """Every scenario tuned to a Bell state, with its calibration."""
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
    return [(s, calibrate(s)) for s in scenarios]
