"""Privacy analysis of quantized broadcasts.

* Deterministic quantization: every observed level has an uncountable
  preimage cell, so observations alone never pin down the state.
* Probabilistic quantization: the output law of each element is a known
  two-point distribution, so the differential-privacy ``delta`` for a pair
  of adjacent inputs is an exact total-variation distance.
* An eavesdropper who knows the model, the topology and the control
  inputs can still run an injection observer on the intercepted stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import STEADY_FRACTION, steady_window
from .quantizer import cell_index, output_distribution, quantize_det
from .sim import simulate_batch

__all__ = [
    "AdjacencyPair",
    "DpReport",
    "AttackResult",
    "preimage_interval",
    "tv_distance",
    "tv_distance_array",
    "tv_distance_deterministic",
    "verify_dp",
    "random_adjacent_pairs",
    "pair_case",
    "tightness_witness",
    "boundary_witness",
    "run_attack",
]

DP_SLACK = 1e-12


def preimage_interval(observed, step):
    """Half-open interval ``[lo, hi)`` of inputs that quantize to ``observed``."""
    observed = float(observed)
    k = observed / step
    if abs(k - round(k)) > 1e-9 * max(1.0, abs(k)):
        raise ValueError(f"{observed} is not a multiple of the step {step}")
    return observed - step / 2.0, observed + step / 2.0


def _tv(p, q):
    support = set(p) | set(q)
    return 0.5 * sum(abs(p.get(s, 0.0) - q.get(s, 0.0)) for s in support)


def _law(z, step):
    # key by integer level index so equal levels compare exactly
    out = {}
    for level, prob in output_distribution(z, step):
        out[int(round(level / step))] = prob
    return out


def tv_distance(z, z_prime, step):
    """Exact total-variation distance between the probabilistic-quantizer
    output laws at ``z`` and ``z_prime``.

    This equals the largest probability gap over all output events, the
    quantity bounded in the differential-privacy definition with
    ``epsilon = 0``.
    """
    return _tv(_law(z, step), _law(z_prime, step))


def tv_distance_array(z, z_prime, step):
    """Vectorised closed form of :func:`tv_distance` over matching arrays.

    With ``n, f`` the cell index and upper-level probability of each input
    the laws are ``{n: 1-f, n+1: f}``; inputs in the same cell differ by
    ``|f - f'|``, inputs in neighbouring cells share one level, and inputs
    two or more cells apart have disjoint supports.
    """
    n1, f1 = cell_index(np.asarray(z, dtype=float), step)
    n2, f2 = cell_index(np.asarray(z_prime, dtype=float), step)
    swap = n2 < n1
    n1, n2 = np.where(swap, n2, n1), np.where(swap, n1, n2)
    f1, f2 = np.where(swap, f2, f1), np.where(swap, f1, f2)
    off = n2 - n1
    same = np.abs(f1 - f2)
    neighbour = 0.5 * (np.abs(1.0 - f1) + np.abs(f1 - (1.0 - f2)) + np.abs(f2))
    return np.where(off == 0, same, np.where(off == 1, neighbour, 1.0))


def tv_distance_deterministic(z, z_prime, step):
    """TV distance between the point-mass outputs of the deterministic quantizer."""
    return 0.0 if quantize_det(z, step) == quantize_det(z_prime, step) else 1.0


@dataclass(frozen=True, eq=False)
class AdjacencyPair:
    """Two stacked platoon states with ``||chi - chi'||_1 <= zeta``."""

    chi: np.ndarray
    chi_prime: np.ndarray
    zeta: float

    def __post_init__(self):
        a = np.asarray(self.chi, dtype=float).reshape(-1)
        b = np.asarray(self.chi_prime, dtype=float).reshape(-1)
        if a.shape != b.shape:
            raise ValueError("adjacent sequences must have the same dimension")
        if not self.zeta > 0:
            raise ValueError("zeta must be positive")
        dist = float(np.abs(a - b).sum())
        if dist > self.zeta * (1.0 + 1e-12):
            raise ValueError(f"pair is not zeta-adjacent: l1 distance {dist} > {self.zeta}")
        object.__setattr__(self, "chi", a)
        object.__setattr__(self, "chi_prime", b)


@dataclass(frozen=True, eq=False)
class DpReport:
    distances: np.ndarray
    max_distance: float
    claimed: float
    passed: bool


def verify_dp(pairs, step):
    """Check ``(0, zeta/step)``-DP exactly for every element of every pair.

    ``distances`` has one row per pair and one column per element.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no pairs given")
    zeta = max(p.zeta for p in pairs)
    for p in pairs:
        if not p.zeta < step:
            raise ValueError(f"need zeta < step, got zeta={p.zeta}, step={step}")
    dist = tv_distance_array(np.stack([p.chi for p in pairs]), np.stack([p.chi_prime for p in pairs]), step)
    claimed = np.array([p.zeta / step for p in pairs])
    ok = bool(np.all(dist <= claimed[:, None] + DP_SLACK))
    return DpReport(dist, float(dist.max()), float(zeta / step), ok)


def pair_case(z, z_prime, step):
    """1 if both inputs share a quantizer cell, 2 if the cells are adjacent, else 0."""
    n1, _ = cell_index(z, step)
    n2, _ = cell_index(z_prime, step)
    gap = abs(int(n1) - int(n2))
    return {0: 1, 1: 2}.get(gap, 0)


def random_adjacent_pairs(rng, count, dim, zeta, step, scale=50.0):
    """Random zeta-adjacent pairs; half of them straddle a cell boundary.

    The base state is uniform on ``[-scale, scale]``; the perturbation
    spends a random fraction of the l1 budget over random signs and
    coordinates.  For the straddling half, coordinate 0 is moved next to a
    cell boundary so that the two inputs fall into adjacent cells.
    """
    pairs = []
    for k in range(int(count)):
        chi = rng.uniform(-scale, scale, dim)
        weights = rng.dirichlet(np.ones(dim))
        budget = zeta * rng.uniform(0.0, 1.0)
        delta = budget * weights * rng.choice((-1.0, 1.0), dim)
        if k % 2:
            # put coordinate 0 just below an upper cell edge, then push it across
            n, _ = cell_index(chi[0], step)
            d0 = abs(delta[0]) if delta[0] != 0 else budget
            chi[0] = (n + 1.0) * step - rng.uniform(0.0, 1.0) * d0
            delta[0] = d0
        pairs.append(AdjacencyPair(chi, chi + delta, zeta))
    return pairs


def tightness_witness(zeta, step):
    """Inputs in one cell, ``zeta`` apart, whose TV distance is exactly ``zeta/step``."""
    z = 0.5 * (step - zeta)
    return z, z + zeta


def boundary_witness(zeta, step):
    """Inputs ``zeta`` apart straddling the deterministic decision point ``step/2``."""
    mid = 0.5 * step
    return mid - 0.5 * zeta, mid + 0.5 * zeta


@dataclass(frozen=True, eq=False)
class AttackResult:
    time: np.ndarray
    true_state: np.ndarray
    estimate: np.ndarray
    error: np.ndarray

    @property
    def terminal_error(self):
        return float(self.error[-1])

    @property
    def mean_error(self):
        return float(self.error.mean())

    def steady_mean_error(self, fraction=STEADY_FRACTION):
        """Mean error over the last ``fraction`` of the horizon.

        The start-up transient ``exp(-t) (x(0) - xhat(0))`` is the same for
        every quantizer, so comparisons between quantizers use this window.
        """
        return float(self.error[steady_window(self.time, fraction)].mean())


def run_attack(cfg, target, estimate0=None, replica=0):
    """Run the eavesdropper's estimator alongside the platoon.

    The estimator uses the intercepted messages of follower ``target``
    (1-based), that follower's control input and the injection gain
    ``A + I``.  With the probabilistic quantizer it quantizes its own
    estimate with an independent random stream.
    """
    tr = simulate_batch(cfg, [replica], attack_target=target, estimate0=estimate0)[0]
    rec = tr.attack
    return AttackResult(tr.time, rec.true_state, rec.estimate, rec.error)
