import numpy as np
import pytest
from scipy.spatial.transform import Rotation
from scipy.stats import unitary_group

from probe_witness.errors import UsageError
from probe_witness.interference import affine_witness_fit, extract_observable, pattern_params
from probe_witness.photon_realization import (
    DetectionChannel,
    PolarizationBasis,
    ScatteringGeometry,
    background_visibility_formula,
    cbs_channel,
    cbs_geometry,
    cbs_phase,
    cbs_scenario,
    dot_pauli,
    double_scatter_op,
    normalized,
    probe_preparation,
    single_scatter_op,
    single_scattering_background,
    young_dyadic_observable,
    young_phase,
    young_scenario,
)
from probe_witness.qmath import SIGMA_Z, expm_generator
from probe_witness.spin_realization import singlet_witness, triplet_witness
from probe_witness.states import BellKind, maximally_mixed, random_density

from .conftest import bell_density, max_abs

FORWARD = ScatteringGeometry(k_in=[0, 0, 1], k_out=[0, 0, 1])
PERPENDICULAR = ScatteringGeometry(k_in=[0, 0, 1], k_out=[1, 0, 0])


def _block(t, a, b):
    """Target operator <a| T |b> for outgoing index a and incoming index b."""
    return t.reshape(4, 2, 4, 2)[:, a, :, b]


def _bases(geom):
    return PolarizationBasis.canonical(geom.k_in), PolarizationBasis.canonical(geom.k_out)


def test_canonical_basis_is_transverse(rng):
    for _ in range(10):
        k = normalized(rng.normal(size=3))
        basis = PolarizationBasis.canonical(k)
        assert max_abs(basis.completeness() - (np.eye(3) - np.outer(k, k))) < 1e-12
    along_z = PolarizationBasis.canonical([0, 0, 1])
    assert max_abs(along_z.e1 - [1, 0, 0]) == 0
    assert max_abs(along_z.e2 - [0, 1, 0]) == 0


def test_basis_rejects_non_transverse_vectors():
    with pytest.raises(UsageError):
        PolarizationBasis(k=[0, 0, 1], e1=[1, 0, 0], e2=[0, 0, 1])


def test_single_scatter_blocks():
    t = single_scatter_op(1, FORWARD, *_bases(FORWARD))
    assert max_abs(_block(t, 0, 0) - np.eye(4)) < 1e-15
    assert max_abs(_block(t, 1, 0) - np.kron(-1j * SIGMA_Z, np.eye(2))) < 1e-15
    t2 = single_scatter_op(2, FORWARD, *_bases(FORWARD))
    assert max_abs(_block(t2, 1, 0) - np.kron(np.eye(2), -1j * SIGMA_Z)) < 1e-15


def test_double_scatter_orders_are_atom_swapped():
    geom = cbs_geometry()
    t_a = double_scatter_op("A", geom, *_bases(geom))
    t_b = double_scatter_op("B", geom, *_bases(geom))
    swap = np.eye(4)[[0, 2, 1, 3]]
    s = np.kron(swap, np.eye(2))
    assert max_abs(s @ t_a @ s - t_b) < 1e-14
    with pytest.raises(UsageError):
        double_scatter_op("C", geom, *_bases(geom))


def test_phases():
    assert young_phase(PERPENDICULAR) == pytest.approx(8.0)
    assert cbs_phase(cbs_geometry()) == 0.0
    assert young_scenario(PERPENDICULAR).geometry_phase == pytest.approx(8.0)
    assert cbs_scenario("singlet").geometry_phase == 0.0


@pytest.mark.parametrize(
    "k_in, k_out",
    [([0, 0, 1], [1, 0, 0]), ([0, 0, 1], [0, 0, 1]), ([0, 0, 1], [0, 0.6, 0.8]), ([1, 1, 0], [0, 1, -1])],
)
def test_young_observable_matches_dyadic_form(k_in, k_out):
    geom = ScatteringGeometry(k_in=normalized(k_in), k_out=normalized(k_out))
    m = extract_observable(young_scenario(geom))
    assert max_abs(m - young_dyadic_observable(k_in, k_out)) < 1e-12


def test_perpendicular_young_setup_is_singlet_witness():
    s = young_scenario(PERPENDICULAR)
    assert s.witness_target == BellKind.PSI_MINUS.value
    fit = affine_witness_fit(extract_observable(s), singlet_witness())
    assert fit.scale == pytest.approx(2.0)
    assert fit.offset == pytest.approx(0.0, abs=1e-12)
    assert bell_density("psi-").expectation(extract_observable(s)) == pytest.approx(-2.0)


def test_young_observable_is_gauge_invariant(rng):
    basis_in, basis_out = _bases(PERPENDICULAR)
    u_in = unitary_group.rvs(2, random_state=rng)
    u_out = unitary_group.rvs(2, random_state=rng)
    mixed = (basis_in.mixed(u_in), basis_out.mixed(u_out))
    reference = extract_observable(young_scenario(PERPENDICULAR))
    assert max_abs(extract_observable(young_scenario(PERPENDICULAR, bases=mixed)) - reference) < 1e-12


def test_linear_channel_observable():
    basis_out = PolarizationBasis.canonical([0, 0, 1])
    assert max_abs(DetectionChannel.linear([0, 1, 0]).observable(basis_out) - np.diag([0, 1])) < 1e-15
    with pytest.raises(UsageError):
        DetectionChannel.linear([0, 0, 1]).observable(basis_out)
    with pytest.raises(UsageError):
        DetectionChannel("linear")
    with pytest.raises(UsageError):
        DetectionChannel("circular")


def test_probe_preparation():
    basis = PolarizationBasis.canonical([0, 0, 1])
    assert max_abs(probe_preparation([2, 0, 0], basis).op - np.diag([1, 0])) < 1e-15
    assert max_abs(probe_preparation("unpolarized", basis).op - np.eye(2) / 2) < 1e-15
    with pytest.raises(UsageError):
        probe_preparation([0, 0, 1], basis)
    with pytest.raises(UsageError):
        probe_preparation("circular", basis)


@pytest.mark.parametrize(
    "name, witness, kind",
    [("triplet", triplet_witness(), BellKind.PSI_PLUS), ("singlet", singlet_witness(), BellKind.PSI_MINUS)],
)
def test_cbs_channels_are_rescaled_bell_witnesses(name, witness, kind):
    s = cbs_scenario(name)
    assert s.witness_target == kind.value
    fit = affine_witness_fit(extract_observable(s), witness)
    assert fit.scale == pytest.approx(4.0)
    assert fit.offset == pytest.approx(0.0, abs=1e-12)
    assert fit.residual < 1e-12


@pytest.mark.parametrize("name", ["singlet", "triplet"])
def test_cbs_observable_rotates_with_the_geometry(rng, name):
    rotvec = rng.normal(size=3)
    angle = float(np.linalg.norm(rotvec))
    rotation = Rotation.from_rotvec(rotvec).as_matrix()
    u = expm_generator(dot_pauli(rotvec / angle), angle / 2)
    uu = np.kron(u, u)
    reference = extract_observable(cbs_scenario(name))
    rotated = cbs_geometry(k_in=rotation @ [0.0, 0.0, 1.0], n_axis=rotation @ [1.0, 0.0, 0.0])
    assert max_abs(extract_observable(cbs_scenario(name, rotated)) - uu @ reference @ uu.conj().T) < 1e-10


@pytest.mark.parametrize("name, kind", [("triplet", BellKind.PSI_PLUS), ("singlet", BellKind.PSI_MINUS)])
def test_cbs_fringe_sign(name, kind):
    s = cbs_scenario(name)
    detected = pattern_params(s, bell_density(kind))
    assert np.cos(detected.alpha) < 0
    assert detected.visibility == pytest.approx(1.0)
    mixed = pattern_params(s, maximally_mixed())
    assert mixed.visibility * np.cos(mixed.alpha) == pytest.approx(0.5)


def test_cbs_channel_aliases():
    geom = cbs_geometry()
    assert max_abs(cbs_channel("parallel", geom).direction - [1, 0, 0]) == 0
    assert max_abs(cbs_channel("perpendicular", geom).direction - [0, -1, 0]) == 0
    with pytest.raises(UsageError):
        cbs_channel("diagonal", geom)


def test_cbs_needs_backscattering_geometry():
    with pytest.raises(UsageError):
        cbs_scenario("singlet", PERPENDICULAR)
    with pytest.raises(UsageError):
        cbs_scenario(DetectionChannel.linear(normalized([1, 1, 0])))


@pytest.mark.parametrize(
    "kind, visibility", [("psi-", 0.0), ("psi+", 0.0), ("phi+", 1.0), ("phi-", 1.0)]
)
def test_single_scattering_background_on_bell_states(kind, visibility):
    pattern = single_scattering_background(bell_density(kind))
    assert pattern.i0 == pytest.approx(4.0)
    assert pattern.visibility == pytest.approx(visibility, abs=1e-12)


def test_single_scattering_background_formula(rng):
    pattern = single_scattering_background(maximally_mixed())
    assert pattern.visibility == pytest.approx(0.5)
    for _ in range(10):
        rho = random_density(rng)
        expected = background_visibility_formula(rho)
        assert single_scattering_background(rho).visibility == pytest.approx(expected, abs=1e-12)


def test_single_scattering_background_per_channel():
    pattern = single_scattering_background(maximally_mixed(), channel="parallel")
    assert pattern.i0 == pytest.approx(2.0)
    assert pattern.visibility == pytest.approx(0.5)


def test_geometry_validation():
    with pytest.raises(UsageError):
        ScatteringGeometry(k_in=[0, 0, 2], k_out=[0, 0, 1])
    with pytest.raises(UsageError):
        ScatteringGeometry(k_in=[0, 0, 1], k_out=[0, 0, 1], r2=[0, 1, 0])
    with pytest.raises(UsageError):
        ScatteringGeometry(k_in=[0, 0, 1], k_out=[0, 0, 1], wavenumber=0.0)

