"""Theoretical bounds and their empirical checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .numerics import lyapunov_residual, solve_lyapunov
from .quantizer import QuantizerKind
from .sim import run_ensemble
from .synthesis import uub_bound

__all__ = [
    "Z_95",
    "VarianceBound",
    "BoundCheck",
    "EnsembleStats",
    "SweepRow",
    "SweepResult",
    "compute_variance_bound",
    "ensemble_stats",
    "steady_window",
    "steady_rms",
    "check_uub",
    "check_variance",
    "check_mean_convergence",
    "delta_sweep",
]

Z_95 = 1.959963984540054
STEADY_FRACTION = 0.25


@dataclass(frozen=True, eq=False)
class VarianceBound:
    """Steady-state bound ``step^2/4 (N+1) trace(W)`` on ``E[eps^T eps]``."""

    W: np.ndarray
    trace_W: float
    step: float
    bound: float
    residual: float


def compute_variance_bound(gains, step):
    """Solve ``A_eps W + W A_eps^T + B_eps B_eps^T = 0`` and form the bound."""
    q = gains.B_eps @ gains.B_eps.T
    w = solve_lyapunov(gains.A_eps, q)
    tr = float(np.trace(w))
    n = gains.n_followers
    return VarianceBound(
        W=w,
        trace_W=tr,
        step=float(step),
        bound=float(step) ** 2 / 4.0 * (n + 1) * tr,
        residual=lyapunov_residual(gains.A_eps, w, q),
    )


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    """Pointwise Monte Carlo estimates across replicas.

    Half-widths are normal-approximation 95% intervals.  ``half_width_norm``
    is the half-width for the norm of the mean vector,
    ``z * sqrt(sum_j var_j / R)``.
    """

    time: np.ndarray
    mean_error: np.ndarray
    mean_sq_norm: np.ndarray
    replicas: int
    half_width_error: np.ndarray
    half_width_sq_norm: np.ndarray
    half_width_norm: np.ndarray

    @property
    def mean_error_norm(self):
        return np.linalg.norm(self.mean_error, axis=1)


def ensemble_stats(traces, z=Z_95):
    if not traces:
        raise ValueError("need at least one trace")
    t0 = traces[0].time
    for tr in traces[1:]:
        if tr.time.shape != t0.shape or not np.array_equal(tr.time, t0):
            raise ValueError("traces do not share a time grid")
    eps = np.stack([tr.stacked_error for tr in traces])
    sq = np.einsum("rtk,rtk->rt", eps, eps)
    r = len(traces)
    mean = eps.mean(axis=0)
    msq = sq.mean(axis=0)
    if r > 1:
        var = eps.var(axis=0, ddof=1)
        var_sq = sq.var(axis=0, ddof=1)
    else:
        var = np.zeros_like(mean)
        var_sq = np.zeros_like(msq)
    return EnsembleStats(
        time=t0.copy(),
        mean_error=mean,
        mean_sq_norm=msq,
        replicas=r,
        half_width_error=z * np.sqrt(var / r),
        half_width_sq_norm=z * np.sqrt(var_sq / r),
        half_width_norm=z * np.sqrt(var.sum(axis=1) / r),
    )


def steady_window(time, fraction=STEADY_FRACTION):
    """Mask selecting the last ``fraction`` of the horizon."""
    t_end = time[-1]
    return time >= t_end - fraction * (t_end - time[0]) - 1e-12


def steady_rms(traces, fraction=STEADY_FRACTION):
    """Root of the replica- and window-averaged ``eps^T eps``."""
    vals = []
    for tr in traces:
        en = tr.error_norm[steady_window(tr.time, fraction)]
        vals.append(np.mean(en**2))
    return float(np.sqrt(np.mean(vals)))


@dataclass(frozen=True)
class BoundCheck:
    name: str
    observed: float
    bound: float
    passed: bool

    def __str__(self):
        rel = "<=" if self.passed else ">"
        return f"{self.name}: observed {self.observed:.6g} {rel} bound {self.bound:.6g}"


def check_uub(trace, gains, step, t_from=30.0):
    """Deterministic case: ``||eps(t)|| <= uub_bound`` for ``t >= t_from``."""
    obs = float(trace.error_norm[trace.time >= t_from].max())
    b = uub_bound(gains, step)
    return BoundCheck("uub", obs, b, obs <= b)


def check_variance(stats, gains, step, t_from=None):
    """Window-averaged ``E[eps^T eps]`` against the Lyapunov-based bound."""
    mask = steady_window(stats.time) if t_from is None else stats.time >= t_from
    obs = float(stats.mean_sq_norm[mask].mean())
    vb = compute_variance_bound(gains, step)
    return BoundCheck("variance", obs, vb.bound, obs <= vb.bound)


def check_mean_convergence(stats, t, factor=3.0):
    """``||mean eps(t)|| <= factor * half_width_norm(t)`` at the sample nearest ``t``."""
    k = int(np.argmin(np.abs(stats.time - t)))
    obs = float(stats.mean_error_norm[k])
    b = factor * float(stats.half_width_norm[k])
    return BoundCheck("mean", obs, b, obs <= b)


@dataclass(frozen=True)
class SweepRow:
    step: float
    kind: str
    rms: float
    bound: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    monotone: bool | None

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])


def delta_sweep(cfg, steps, replicas=1):
    """Steady-state RMS tracking error for each quantization step.

    The theoretical column is the ultimate bound for the deterministic
    quantizer and the square root of the variance bound otherwise, so it
    is directly comparable with the RMS.  ``monotone`` reports whether the
    RMS is nondecreasing in the step (``None`` for a single step).
    """
    steps = sorted(float(s) for s in steps)
    if not steps:
        raise PreconditionError("need at least one step")
    rows = []
    for s in steps:
        c = cfg.with_(quantizer=type(cfg.quantizer)(cfg.quantizer.kind, s))
        traces = run_ensemble(c, replicas if c.quantizer.is_random else 1)
        if c.quantizer.kind is QuantizerKind.DETERMINISTIC:
            bound = uub_bound(c.gains, s)
        else:
            bound = float(np.sqrt(compute_variance_bound(c.gains, s).bound))
        rows.append(SweepRow(s, c.quantizer.kind.value, steady_rms(traces), bound))
    monotone = None
    if len(rows) > 1:
        rms = [r.rms for r in rows]
        monotone = all(b >= a for a, b in zip(rms, rms[1:]))
    return SweepResult(tuple(rows), monotone)
