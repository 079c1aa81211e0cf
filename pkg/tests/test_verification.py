import pytest

from probe_witness.verification import CheckResult, run_checks

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def checks():
    return run_checks(0)


@pytest.fixture(scope="module")
def results(checks):
    return {result.name: result for result in checks}


def test_every_check_passes(results):
    failed = {name: (r.residual, r.tolerance) for name, r in results.items() if not r.passed}
    assert failed == {}


def test_checks_have_unique_names(checks, results):
    assert len(checks) == len(results)


def test_cbs_scales(results):
    for channel in ("singlet", "triplet"):
        detail = results[f"cbs-{channel}-affine"].detail
        assert detail["scale"] == pytest.approx(4.0)
        assert detail["offset"] == pytest.approx(0.0, abs=1e-12)


def test_werner_boundary(results):
    detail = results["werner-boundary"].detail
    assert detail["verdict_from"] == pytest.approx(0.34)
    assert detail["ppt_from"] == pytest.approx(0.34)


def test_soundness_has_no_false_alarms(results):
    assert results["soundness-separable"].residual == 0
    assert results["soundness-verdict-implies-ppt"].residual == 0


def test_check_result_pass_rule():
    assert CheckResult(name="x", residual=0.0, tolerance=0.0).passed
    assert not CheckResult(name="x", residual=1e-3, tolerance=1e-4).passed
