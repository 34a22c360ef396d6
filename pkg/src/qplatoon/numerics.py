"""Small dense linear-algebra kernel.

Everything here operates on plain 2-D ``numpy`` arrays.  Problem sizes are
tiny (at most a few dozen rows), so the routines favour directness over
asymptotic efficiency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericalError, PreconditionError, SynthesisError

__all__ = [
    "TOL_IMAG",
    "Spectrum",
    "as_matrix",
    "eigenvalues",
    "expm",
    "kron",
    "solve_lyapunov",
    "lyapunov_residual",
    "solve_care",
    "care_residual",
    "rk4_step",
    "rk4_affine_propagator",
]

TOL_IMAG = 1e-9


def as_matrix(m, name="matrix", square=False):
    """Return ``m`` as a finite 2-D float array, validating its shape."""
    a = np.array(m, dtype=float, ndmin=2)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got {a.ndim} dimensions")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise DimensionError(f"{name} has an empty dimension: {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericalError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted ascending by real part, then imaginary part."""

    eigenvalues: np.ndarray
    all_real: bool

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def real(self):
        """Real parts, in sorted order."""
        return self.eigenvalues.real

    @property
    def min(self):
        """Eigenvalue with the smallest real part."""
        return self.eigenvalues[0]

    @property
    def max(self):
        """Eigenvalue with the largest real part."""
        return self.eigenvalues[-1]


def eigenvalues(m, name="matrix", tol_imag=TOL_IMAG):
    """Compute the sorted spectrum of a square matrix."""
    a = as_matrix(m, name, square=True)
    try:
        w = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge for {name}") from exc
    w = np.asarray(w, dtype=complex)
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    all_real = bool(np.all(np.abs(w.imag) <= tol_imag))
    if all_real:
        w = w.real + 0j
    return Spectrum(eigenvalues=w, all_real=all_real)


def expm(m):
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    return scipy.linalg.expm(as_matrix(m, "expm argument", square=True))


def kron(a, b):
    """Kronecker product of two matrices (vectors are treated as columns)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    return np.kron(a, b)


def _require_hurwitz(a, name):
    spec = eigenvalues(a, name)
    if spec.real.max() >= 0.0:
        raise PreconditionError(
            f"{name} is not Hurwitz (max real eigenvalue {spec.real.max():.3g})"
        )


def lyapunov_residual(a, w, q):
    """Frobenius norm of ``a w + w a^T + q``."""
    return float(np.linalg.norm(a @ w + w @ a.T + q, "fro"))


def solve_lyapunov(a, q, check_hurwitz=True):
    """Solve ``a W + W a^T + q = 0`` for symmetric ``W``.

    The equation is vectorised as ``(a (x) I + I (x) a) vec(W) = -vec(q)``
    and solved densely; for the sizes used here (n <= 33) this is a
    system of at most 1089 unknowns.

    Parameters
    ----------
    a : (n, n) array_like
        Hurwitz matrix.
    q : (n, n) array_like
        Symmetric right-hand side, typically positive semidefinite.
    check_hurwitz : bool
        Verify that ``a`` is Hurwitz before solving.

    Returns
    -------
    W : (n, n) ndarray
    """
    a = as_matrix(a, "a", square=True)
    q = as_matrix(q, "q", square=True)
    n = a.shape[0]
    if q.shape != (n, n):
        raise DimensionError(f"q has shape {q.shape}, expected {(n, n)}")
    if check_hurwitz:
        _require_hurwitz(a, "a")
    eye = np.eye(n)
    big = np.kron(a, eye) + np.kron(eye, a)
    try:
        w = np.linalg.solve(big, -q.reshape(-1)).reshape(n, n)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Lyapunov operator is singular") from exc
    w = 0.5 * (w + w.T)
    tol = 1e-8 * max(1.0, np.linalg.norm(q, "fro"))
    res = lyapunov_residual(a, w, q)
    if res > tol:
        raise NumericalError(f"Lyapunov residual {res:.3e} exceeds {tol:.3e}")
    return w


def care_residual(a, b, q, r_inv, p):
    """Residual matrix ``a^T p + p a - r_inv p b b^T p + q``."""
    return a.T @ p + p @ a - r_inv * p @ b @ b.T @ p + q


def _newton_kleinman(a, b, q, r_inv, p, iters):
    # each step solves (a - b k)^T X + X (a - b k) + q + k^T k / r_inv = 0
    for _ in range(iters):
        k = r_inv * b.T @ p
        acl = a - b @ k
        p = solve_lyapunov(acl.T, q + k.T @ k / r_inv, check_hurwitz=True)
    return p


def solve_care(a, b, q, r_inv):
    """Stabilising solution of ``a^T P + P a - r_inv P b b^T P + q = 0``.

    Uses the ordered real Schur form of the Hamiltonian matrix; the stable
    invariant subspace spanned by ``[U11; U21]`` gives ``P = U21 U11^{-1}``.
    When the substitution residual is not small enough the result is
    polished with a few Newton-Kleinman steps.

    Parameters
    ----------
    a : (n, n) array_like
    b : (n, m) array_like
    q : (n, n) array_like
        Symmetric positive definite state weight.
    r_inv : float
        Positive scalar multiplying ``P b b^T P``.

    Returns
    -------
    P : (n, n) ndarray
        Symmetric positive definite solution.  The closed loop
        ``a - r_inv b b^T P`` is Hurwitz.
    """
    a = as_matrix(a, "a", square=True)
    b = as_matrix(b, "b")
    if b.shape[0] == 1 and b.shape[1] == a.shape[0] and a.shape[0] > 1:
        b = b.T
    q = as_matrix(q, "q", square=True)
    n = a.shape[0]
    if b.shape[0] != n or q.shape != (n, n):
        raise DimensionError(f"incompatible shapes a{a.shape}, b{b.shape}, q{q.shape}")
    r_inv = float(r_inv)
    if not r_inv > 0.0:
        raise PreconditionError(f"r_inv must be positive, got {r_inv}")

    g = r_inv * b @ b.T
    ham = np.block([[a, -g], [-q, -a.T]])
    try:
        _, u, sdim = scipy.linalg.schur(ham, output="real", sort="lhp")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SynthesisError("Schur decomposition of the Hamiltonian failed") from exc
    if sdim != n:
        raise SynthesisError(
            f"Hamiltonian has {sdim} stable eigenvalues, expected {n}; "
            "the pair (a, b) may not be stabilisable"
        )
    u11, u21 = u[:n, :n], u[n:, :n]
    try:
        p = np.linalg.solve(u11.T, u21.T).T
    except np.linalg.LinAlgError as exc:
        raise SynthesisError("stable invariant subspace is not a graph") from exc
    p = 0.5 * (p + p.T)

    tol = 1e-8 * max(1.0, np.linalg.norm(q, "fro"))
    res = np.linalg.norm(care_residual(a, b, q, r_inv, p), "fro")
    if res > tol:
        p = _newton_kleinman(a, b, q, r_inv, p, iters=4)
        p = 0.5 * (p + p.T)
        res = np.linalg.norm(care_residual(a, b, q, r_inv, p), "fro")
        if res > tol:
            raise NumericalError(f"CARE residual {res:.3e} exceeds {tol:.3e}")

    if np.linalg.eigvalsh(p).min() <= 0.0:
        raise SynthesisError("Riccati solution is not positive definite")
    if eigenvalues(a - g @ p).real.max() >= 0.0:
        raise SynthesisError("Riccati closed loop is not Hurwitz")
    return p


def rk4_step(f, t, x, h):
    """One classical fourth-order Runge-Kutta step of ``x' = f(t, x)``."""
    k1 = f(t, x)
    k2 = f(t + 0.5 * h, x + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, x + 0.5 * h * k2)
    k4 = f(t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_affine_propagator(a, h, steps=1):
    """Exact RK4 update matrices for ``x' = a x + w`` with ``w`` held constant.

    Applying :func:`rk4_step` ``steps`` times with step ``h`` to this
    system is the affine map ``x -> Phi x + Psi w``; both matrices are
    returned so that a zero-order-hold interval costs one matrix product.
    """
    a = as_matrix(a, "a", square=True)
    n = a.shape[0]
    eye = np.eye(n)
    ha = h * a
    ha2 = ha @ ha
    ha3 = ha2 @ ha
    phi1 = eye + ha + ha2 / 2.0 + ha3 / 6.0 + ha3 @ ha / 24.0
    psi1 = h * (eye + ha / 2.0 + ha2 / 6.0 + ha3 / 24.0)
    phi = eye.copy()
    psi = np.zeros((n, n))
    for _ in range(int(steps)):
        psi = phi1 @ psi + psi1
        phi = phi1 @ phi
    return phi, psi
