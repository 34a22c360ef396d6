"""Gain design for the distributed platoon controller."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericalError
from .numerics import eigenvalues, kron, solve_care
from .topology import laplacian_plus_pinning

__all__ = ["GainSet", "synthesize", "riccati_condition", "uub_bound"]


def riccati_condition(p, a, b, lam, gamma):
    """``P A + A^T P - 2 lam P B B^T P + gamma I``; must be negative semidefinite."""
    return p @ a + a.T @ p - 2.0 * lam * p @ b @ b.T @ p + gamma * np.eye(a.shape[0])


@dataclass(frozen=True, eq=False)
class GainSet:
    """Controller gain ``K = B^T P`` plus the closed-loop error matrices.

    ``A_eps = I_N (x) A - (L+S) (x) B K`` drives the stacked tracking error
    and ``B_eps = (L+S) (x) B K`` maps quantization errors into it.
    """

    P: np.ndarray
    K: np.ndarray
    gamma: float
    lambda_1: float
    lambda_N: float
    A: np.ndarray
    B: np.ndarray
    L_plus_S: np.ndarray
    A_eps: np.ndarray
    B_eps: np.ndarray

    @property
    def n_followers(self):
        return self.L_plus_S.shape[0]

    def condition_matrix(self, lam=None):
        return riccati_condition(self.P, self.A, self.B, self.lambda_1 if lam is None else lam, self.gamma)

    def condition_residual(self, lam=None):
        """Largest eigenvalue of the gain condition matrix (should be <= 0)."""
        return float(np.linalg.eigvalsh(self.condition_matrix(lam)).max())

    def closed_loop_spectrum(self):
        return eigenvalues(self.A_eps, "A_eps")


def synthesize(model, topo, gamma=1.0):
    """Solve the gain condition with equality at ``lambda_1(L+S)``.

    Parameters
    ----------
    model : LinearModel
    topo : CommTopology
    gamma : float
        Positive decay margin in the gain condition.
    """
    gamma = float(gamma)
    if not (np.isfinite(gamma) and gamma > 0):
        raise ConfigurationError(f"gamma must be positive, got {gamma}")
    ls, spec = laplacian_plus_pinning(topo)
    lam1, lam_n = float(spec.real[0]), float(spec.real[-1])
    a, b = model.A, model.B
    p = solve_care(a, b, gamma * np.eye(3), 2.0 * lam1)
    k = b.T @ p
    n = topo.n_followers
    bk = b @ k
    a_eps = kron(np.eye(n), a) - kron(ls, bk)
    b_eps = kron(ls, bk)
    gains = GainSet(p, k, gamma, lam1, lam_n, a, b, ls, a_eps, b_eps)
    worst = gains.closed_loop_spectrum().real.max()
    if worst >= 0.0:
        raise NumericalError(f"closed-loop error matrix is not Hurwitz (max real part {worst:.3g})")
    return gains


def uub_bound(gains, step):
    """Ultimate bound on the collective tracking-error norm under deterministic quantization.

    ``sqrt(cond(P)) * 2 sqrt(3N) lambda_N ||P B B^T P||_2 * step / gamma``
    """
    p = gains.P
    w = np.linalg.eigvalsh(p)
    pbbp = p @ gains.B @ gains.B.T @ p
    n = gains.n_followers
    return float(
        np.sqrt(w[-1] / w[0])
        * 2.0
        * np.sqrt(3 * n)
        * gains.lambda_N
        * np.linalg.norm(pbbp, 2)
        * step
        / gains.gamma
    )
