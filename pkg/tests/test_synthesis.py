import dataclasses

import numpy as np
import pytest

from qplatoon.errors import ConfigurationError
from qplatoon.numerics import solve_care
from qplatoon.synthesis import synthesize, uub_bound
from qplatoon.topology import TopologyKind, build_standard

from conftest import MODEL, gains_for

KINDS = [k.value for k in TopologyKind]


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("n", range(2, 11))
@pytest.mark.parametrize("kind", KINDS)
def test_gain_condition_holds_for_every_eigenvalue(kind, n, gamma):
    g = gains_for(kind, n, gamma)
    np.testing.assert_array_equal(g.K, g.B.T @ g.P)
    assert g.condition_residual() <= 1e-6
    for lam in np.linalg.eigvals(g.L_plus_S).real:
        assert g.condition_residual(lam) <= 1e-6
    assert g.closed_loop_spectrum().real.max() < 0


@pytest.mark.parametrize("kind", ["PF", "PLF", "TPF", "TPLF"])
def test_closed_loop_is_block_triangular_for_triangular_topologies(kind):
    # repeated eigenvalues of L+S make A_eps defective, so compare structure
    # exactly instead of comparing ill-conditioned computed eigenvalues
    g = gains_for(kind, 6)
    ls = g.L_plus_S
    assert np.array_equal(ls, np.tril(ls))
    bk = g.B @ g.K
    for i in range(6):
        for j in range(6):
            block = g.A_eps[3 * i : 3 * i + 3, 3 * j : 3 * j + 3]
            expected = (g.A if i == j else 0.0) - ls[i, j] * bk
            np.testing.assert_array_equal(block, expected)


@pytest.mark.parametrize("kind", ["BD", "BDL"])
@pytest.mark.parametrize("n", [3, 6, 10])
def test_closed_loop_spectrum_is_union_of_blocks(kind, n):
    g = gains_for(kind, n)
    lam = np.linalg.eigvalsh(g.L_plus_S)
    assert np.min(np.diff(lam)) > 1e-3
    blocks = np.concatenate([np.linalg.eigvals(g.A - l * g.B @ g.K) for l in lam])
    full = g.closed_loop_spectrum().eigenvalues
    remaining = list(full)
    for z in blocks:
        j = int(np.argmin(np.abs(np.array(remaining) - z)))
        assert abs(remaining[j] - z) <= 1e-8
        remaining.pop(j)


def test_closed_loop_spectrum_union_tight_for_distinct_eigenvalues():
    g = gains_for("BD", 5)
    lam = np.linalg.eigvals(g.L_plus_S).real
    assert np.min(np.diff(np.sort(lam))) > 0.1
    blocks = np.sort_complex(np.concatenate([np.linalg.eigvals(g.A - l * g.B @ g.K) for l in lam]))
    full = np.sort_complex(g.closed_loop_spectrum().eigenvalues)
    np.testing.assert_allclose(full, blocks, atol=1e-8)


def test_pf_reference_case():
    g = gains_for("PF", 10)
    assert g.lambda_1 == 1.0
    assert g.condition_residual() <= 1e-6
    np.testing.assert_allclose(g.P, g.P.T)
    assert np.linalg.eigvalsh(g.P).min() > 0


def test_leader_links_do_not_increase_gain():
    k_pf = np.linalg.norm(gains_for("PF", 10).K)
    k_plf = np.linalg.norm(gains_for("PLF", 10).K)
    k_bd = np.linalg.norm(gains_for("BD", 10).K)
    k_bdl = np.linalg.norm(gains_for("BDL", 10).K)
    assert k_plf <= k_pf * (1 + 1e-12)
    assert k_bdl <= k_bd


def test_larger_lambda_gives_smaller_gain():
    # CARE with r_inv = 2 lambda: the gain shrinks as lambda_1 grows
    norms = [np.linalg.norm(MODEL.B.T @ solve_care(MODEL.A, MODEL.B, np.eye(3), 2 * lam)) for lam in (0.5, 1, 2, 4)]
    assert all(b < a for a, b in zip(norms, norms[1:]))


def test_single_follower():
    g = gains_for("PF", 1)
    np.testing.assert_allclose(g.A_eps, g.A - g.B @ g.K)
    np.testing.assert_allclose(g.B_eps, g.B @ g.K)
    assert g.closed_loop_spectrum().real.max() < 0


def test_invalid_gamma():
    with pytest.raises(ConfigurationError):
        synthesize(MODEL, build_standard("PF", 3), 0.0)
    with pytest.raises(ConfigurationError):
        synthesize(MODEL, build_standard("PF", 3), -1.0)


def test_uub_bound_homogeneity_and_golden_value():
    g = gains_for("PF", 10)
    assert uub_bound(g, 0.0) == 0.0
    assert uub_bound(g, 2.0) == pytest.approx(2 * uub_bound(g, 1.0), rel=1e-15)
    # frozen from the first evaluation of the formula with the synthesized P
    assert uub_bound(g, 1.0) == pytest.approx(182.23804211081207, rel=1e-9)


def test_uub_bound_formula_independent_evaluation():
    g = gains_for("BDL", 4)
    w = np.linalg.eigvalsh(g.P)
    m = g.P @ g.B @ g.B.T @ g.P
    # P B B^T P is rank one, so its spectral norm is |B^T P|^2
    assert np.linalg.norm(m, 2) == pytest.approx((g.K @ g.K.T).item(), rel=1e-12)
    expected = np.sqrt(w[-1] / w[0]) * 2 * np.sqrt(12) * g.lambda_N * (g.K @ g.K.T).item() * 0.7 / g.gamma
    assert uub_bound(g, 0.7) == pytest.approx(expected, rel=1e-12)
    assert uub_bound(dataclasses.replace(g, gamma=2 * g.gamma), 0.7) == pytest.approx(expected / 2)
