import numpy as np
import pytest

from qplatoon.errors import ConfigurationError
from qplatoon.topology import (
    CommTopology,
    TopologyKind,
    build_standard,
    from_arrays,
    laplacian_plus_pinning,
    validate,
)

KINDS = [k.value for k in TopologyKind]


def test_pf3():
    ls, spec = laplacian_plus_pinning(build_standard("PF", 3))
    np.testing.assert_array_equal(ls, [[1, 0, 0], [-1, 1, 0], [0, -1, 1]])
    assert spec.real[0] == spec.real[-1] == 1.0


def test_bd2():
    ls, spec = laplacian_plus_pinning(build_standard("BD", 2))
    np.testing.assert_array_equal(ls, [[2, -1], [-1, 1]])
    np.testing.assert_allclose(spec.real, [(3 - np.sqrt(5)) / 2, (3 + np.sqrt(5)) / 2], rtol=1e-14)
    assert spec.real[0] == pytest.approx(0.381966, abs=1e-6)


def test_plf2():
    # follower 1 has no follower predecessor, so its row is just the pin
    ls, spec = laplacian_plus_pinning(build_standard("PLF", 2))
    np.testing.assert_array_equal(ls, [[1, 0], [-1, 2]])
    np.testing.assert_array_equal(spec.real, [1.0, 2.0])


def test_bdl1_single_follower():
    ls, spec = laplacian_plus_pinning(build_standard("BDL", 1))
    np.testing.assert_array_equal(ls, [[1.0]])
    np.testing.assert_array_equal(spec.real, [1.0])


def test_tpf_pins_first_two_followers():
    topo = build_standard("TPF", 4)
    np.testing.assert_array_equal(topo.pinning, [1, 1, 0, 0])
    np.testing.assert_array_equal(topo.adjacency[3], [0, 1, 1, 0])
    np.testing.assert_array_equal(topo.adjacency[1], [1, 0, 0, 0])
    np.testing.assert_array_equal(build_standard("TPLF", 4).pinning, [1, 1, 1, 1])


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("n", range(1, 11))
def test_standard_topologies_validate(kind, n):
    topo = build_standard(kind, n)
    report = validate(topo)
    assert report.passed, report.failures
    assert report.spectrum.all_real and report.spectrum.real[0] > 0
    # L 1 = 0 exactly
    np.testing.assert_array_equal(topo.laplacian @ np.ones(n), np.zeros(n))


@pytest.mark.parametrize("kind", ["PF", "PLF"])
def test_triangular_eigenvalues_are_diagonal_entries(kind):
    ls, spec = laplacian_plus_pinning(build_standard(kind, 10))
    np.testing.assert_array_equal(spec.real, np.sort(np.diag(ls)))


def test_no_pinned_follower_fails():
    topo = CommTopology(build_standard("PF", 3).adjacency, np.zeros(3))
    report = validate(topo)
    assert not report.passed
    assert any("pinned" in f for f in report.failures)


def test_isolated_follower_fails_reachability():
    m = np.zeros((3, 3))
    m[1, 0] = 1
    report = validate(CommTopology(m, [1, 0, 0]))
    assert report.reachable == (True, True, False)
    assert any("reachable" in f for f in report.failures)


def test_complex_spectrum_rejected():
    # directed 3-cycle plus one pin has complex eigenvalues
    m = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float)
    topo = CommTopology(m, [1, 0, 0])
    assert not validate(topo).spectrum.all_real
    with pytest.raises(ConfigurationError):
        laplacian_plus_pinning(topo)
    with pytest.raises(ConfigurationError):
        from_arrays(m, [1, 0, 0])


def test_bad_inputs():
    with pytest.raises(ConfigurationError):
        build_standard("PF", 0)
    with pytest.raises(ValueError):
        build_standard("XYZ", 3)
    with pytest.raises(ConfigurationError):
        CommTopology([[1.0]], [1.0])
    with pytest.raises(ConfigurationError):
        CommTopology([[0.0, 2.0], [0.0, 0.0]], [1.0, 0.0])


def test_roundtrip_dict():
    topo = build_standard("TPF", 5)
    assert topo.to_dict() == {"kind": "TPF", "n": 5}
    custom = from_arrays(topo.adjacency, topo.pinning)
    assert custom == topo
    assert from_arrays(**custom.to_dict()) == topo
