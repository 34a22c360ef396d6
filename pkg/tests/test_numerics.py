import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qplatoon.errors import DimensionError, NumericalError, PreconditionError
from qplatoon.numerics import (
    as_matrix,
    care_residual,
    eigenvalues,
    expm,
    kron,
    lyapunov_residual,
    rk4_affine_propagator,
    rk4_step,
    solve_care,
    solve_lyapunov,
)
from qplatoon.topology import build_standard


def test_eigenvalues_diagonal():
    spec = eigenvalues(np.diag([3.0, 1.0, 2.0]))
    assert spec.all_real
    np.testing.assert_array_equal(spec.real, [1.0, 2.0, 3.0])


def test_eigenvalues_rotation_is_complex_and_sorted_by_imag():
    spec = eigenvalues([[0.0, 1.0], [-1.0, 0.0]])
    assert not spec.all_real
    np.testing.assert_allclose(spec.eigenvalues, [-1j, 1j], atol=1e-12)


def test_eigenvalues_pf3_is_triple_one():
    topo = build_standard("PF", 3)
    spec = eigenvalues(topo.laplacian + topo.pinning_matrix)
    np.testing.assert_array_equal(spec.real, [1.0, 1.0, 1.0])


def test_eigenvalues_rejects_bad_input():
    with pytest.raises(DimensionError):
        eigenvalues(np.ones((2, 3)))
    with pytest.raises(NumericalError):
        eigenvalues([[np.nan, 0.0], [0.0, 1.0]])


def test_as_matrix_rejects_empty():
    with pytest.raises(DimensionError):
        as_matrix(np.zeros((0, 3)))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-5, 5)))
def test_eigenvalues_of_transpose_match(a):
    w1 = eigenvalues(a).eigenvalues
    w2 = eigenvalues(a.T).eigenvalues
    # compare as multisets: every eigenvalue of a^T has a partner in a
    for z in w2:
        assert np.min(np.abs(w1 - z)) <= 1e-9 * max(1.0, np.abs(a).max()) + 1e-7 * (np.abs(z) > 0)


def test_expm_examples():
    np.testing.assert_array_equal(expm(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_allclose(expm(np.diag([0.5, -2.0])), np.diag(np.exp([0.5, -2.0])), rtol=1e-14)
    np.testing.assert_allclose(expm([[0.0, 1.0], [0.0, 0.0]]), [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (3, 3), elements=st.floats(-3.3, 3.3)))
def test_expm_inverse_property(a):
    if np.linalg.norm(a, 2) > 10:
        a = a * (10 / np.linalg.norm(a, 2))
    prod = expm(a) @ expm(-a)
    scale = np.linalg.norm(expm(a), 2) * np.linalg.norm(expm(-a), 2)
    np.testing.assert_allclose(prod, np.eye(3), atol=1e-8 * max(1.0, scale / 1e4))


def test_kron_examples():
    np.testing.assert_array_equal(kron(np.eye(2), [[5.0]]), np.diag([5.0, 5.0]))
    np.testing.assert_array_equal(kron(np.ones(2), [1.0, 2.0]).ravel(), [1.0, 2.0, 1.0, 2.0])
    swap = kron([[0.0, 1.0], [1.0, 0.0]], np.eye(2))
    np.testing.assert_array_equal(swap[:2, 2:], np.eye(2))
    np.testing.assert_array_equal(swap[:2, :2], np.zeros((2, 2)))
    assert kron(np.ones((2, 3)), np.ones((4, 5))).shape == (8, 15)


def test_lyapunov_scalar_and_diagonal():
    np.testing.assert_allclose(solve_lyapunov([[-1.0]], [[1.0]]), [[0.5]])
    np.testing.assert_allclose(solve_lyapunov(-np.eye(2), np.diag([2.0, 4.0])), np.diag([1.0, 2.0]))


def test_lyapunov_upper_triangular_substitution():
    a = np.array([[-1.0, 1.0], [0.0, -2.0]])
    w = solve_lyapunov(a, np.eye(2))
    assert lyapunov_residual(a, w, np.eye(2)) <= 1e-8
    # agrees with an independent Bartels-Stewart implementation
    np.testing.assert_allclose(w, scipy.linalg.solve_continuous_lyapunov(a, -np.eye(2)), atol=1e-12)


def test_lyapunov_rejects_unstable():
    with pytest.raises(PreconditionError):
        solve_lyapunov(np.eye(2), np.eye(2))


def _random_hurwitz(rng, n):
    a = rng.normal(size=(n, n))
    shift = np.max(np.linalg.eigvals(a).real) + rng.uniform(0.2, 2.0)
    return a - shift * np.eye(n)


@pytest.mark.parametrize("seed", range(20))
def test_lyapunov_random_residual_and_symmetry(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    a = _random_hurwitz(rng, n)
    c = rng.normal(size=(n, n))
    q = c @ c.T
    w = solve_lyapunov(a, q)
    assert lyapunov_residual(a, w, q) <= 1e-8 * max(1.0, np.linalg.norm(q))
    assert np.linalg.norm(w - w.T) <= 1e-10 * np.linalg.norm(w)
    assert np.linalg.eigvalsh(w).min() >= -1e-10 * np.linalg.norm(w)


@pytest.mark.parametrize(
    "a, q, expected",
    [
        (0.0, 1.0, 1.0),  # -p^2 + 1 = 0
        (-1.0, 3.0, 1.0),  # -2p - p^2 + 3 = 0
    ],
)
def test_care_scalar_quadratic_formula(a, q, expected):
    p = solve_care([[a]], [[1.0]], [[q]], 1.0)
    # positive root of -p^2 + 2 a p + q = 0
    assert expected == pytest.approx(a + np.sqrt(a * a + q))
    assert p[0, 0] == pytest.approx(expected, abs=1e-12)


def test_care_vehicle_model_satisfies_gain_condition_with_equality():
    tau = 0.5
    a = np.array([[0, 1, 0], [0, 0, 1], [0, 0, -1 / tau]], dtype=float)
    b = np.array([[0.0], [0.0], [1 / tau]])
    lam = 1.0
    p = solve_care(a, b, np.eye(3), 2 * lam)
    cond = p @ a + a.T @ p - 2 * lam * p @ b @ b.T @ p + np.eye(3)
    assert np.abs(np.linalg.eigvalsh(cond)).max() <= 1e-6


@pytest.mark.parametrize("seed", range(15))
def test_care_random_instances(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(1, 6))
    m = int(rng.integers(1, 3))
    a = rng.normal(size=(n, n))
    b = rng.normal(size=(n, m))
    c = rng.normal(size=(n, n))
    q = c @ c.T + 0.1 * np.eye(n)
    r_inv = float(rng.uniform(0.2, 5.0))
    p = solve_care(a, b, q, r_inv)
    res = np.linalg.norm(care_residual(a, b, q, r_inv, p))
    assert res <= 1e-8 * max(1.0, np.linalg.norm(q))
    np.testing.assert_allclose(p, p.T, atol=1e-12 * np.linalg.norm(p))
    assert np.linalg.eigvalsh(p).min() > 0
    assert np.linalg.eigvals(a - r_inv * b @ b.T @ p).real.max() < 0


def test_rk4_step_matches_exponential_decay():
    x = rk4_step(lambda t, x: -x, 0.0, np.array([1.0]), 0.1)
    h = 0.1
    assert x[0] == pytest.approx(1 - h + h**2 / 2 - h**3 / 6 + h**4 / 24, rel=1e-15)


def test_affine_propagator_equals_repeated_rk4_steps():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(3, 3))
    w = rng.normal(size=3)
    x0 = rng.normal(size=3)
    h, steps = 1e-3, 10
    phi, psi = rk4_affine_propagator(a, h, steps)
    x = x0.copy()
    for k in range(steps):
        x = rk4_step(lambda t, y: a @ y + w, k * h, x, h)
    np.testing.assert_allclose(phi @ x0 + psi @ w, x, rtol=1e-13, atol=1e-14)
