"""Closed-loop simulation of the quantized platoon.

Every ``h_comm`` seconds each vehicle quantizes its current state and
broadcasts it; each follower recomputes its control input from the
messages it receives and holds it until the next broadcast.  Between
broadcasts the follower models are integrated with fixed-step RK4 at
``h_int``.  The head vehicle follows its profile in closed form.

Replicas of one configuration are simulated together as a batch; each
replica owns an independent random stream addressed by
``(seed, replica)``, and for the probabilistic quantizer the stream is
consumed in (step, vehicle, element) order, head vehicle first.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import ConfigurationError, DivergenceError, ProtocolError
from .numerics import rk4_affine_propagator
from .quantizer import QuantizerKind, QuantizerSpec, make_rng, quantize_det, quantize_prob_from_uniform
from .synthesis import GainSet
from .topology import CommTopology
from .vehicle import FormationSpec, HeadProfile

__all__ = [
    "Coupling",
    "SimConfig",
    "SimTrace",
    "AttackRecord",
    "control_input",
    "run",
    "run_ensemble",
    "simulate_batch",
]

# random-stream branch used by the eavesdropper's own quantizer
ESTIMATOR_STREAM = 1
# draw this many broadcast steps of uniforms at a time
_DRAW_CHUNK = 256


class Coupling(str, Enum):
    SAMPLED = "sampled"
    CONTINUOUS = "continuous"


def _is_multiple(a, b):
    r = a / b
    return abs(r - round(r)) <= 1e-9 * max(1.0, r)


@dataclass(frozen=True, eq=False)
class SimConfig:
    """Everything needed to run one scenario.

    ``initial_states`` is an ``(N, 3)`` array of follower states; ``None``
    places every follower exactly in formation behind the head.
    ``coupling="continuous"`` re-evaluates the controller inside every RK4
    stage and is only available without quantization.
    """

    topology: CommTopology
    gains: GainSet
    quantizer: QuantizerSpec = field(default_factory=QuantizerSpec)
    head: HeadProfile = field(default_factory=HeadProfile)
    formation: FormationSpec = field(default_factory=FormationSpec)
    initial_states: np.ndarray | None = None
    duration: float = 60.0
    h_int: float = 1e-3
    h_comm: float = 1e-2
    record_every: int = 1
    coupling: Coupling = Coupling.SAMPLED
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coupling", Coupling(self.coupling))
        if not self.duration > 0:
            raise ConfigurationError("duration must be positive")
        if not 0 < self.h_int <= self.h_comm:
            raise ConfigurationError("need 0 < h_int <= h_comm")
        if not _is_multiple(self.h_comm, self.h_int):
            raise ConfigurationError("h_comm must be an integer multiple of h_int")
        if not _is_multiple(self.duration, self.h_comm):
            raise ConfigurationError("duration must be an integer multiple of h_comm")
        if int(self.record_every) < 1:
            raise ConfigurationError("record_every must be >= 1")
        if self.coupling is Coupling.CONTINUOUS and self.quantizer.kind is not QuantizerKind.NONE:
            raise ConfigurationError("continuous coupling requires quantizer kind 'none'")
        n = self.topology.n_followers
        if self.gains.n_followers != n or not np.array_equal(
            self.gains.L_plus_S, self.topology.laplacian + self.topology.pinning_matrix
        ):
            raise ConfigurationError("gains were synthesized for a different topology")
        if self.initial_states is not None:
            x = np.array(self.initial_states, dtype=float)
            if x.shape != (n, 3) or not np.all(np.isfinite(x)):
                raise ConfigurationError(f"initial_states must be a finite ({n}, 3) array")
            x.setflags(write=False)
            object.__setattr__(self, "initial_states", x)

    @property
    def n_followers(self):
        return self.topology.n_followers

    @property
    def substeps(self):
        return int(round(self.h_comm / self.h_int))

    @property
    def n_comm(self):
        return int(round(self.duration / self.h_comm))

    def follower_initial_states(self):
        if self.initial_states is not None:
            return np.array(self.initial_states)
        x0 = self.head.state(0.0)
        return x0[None, :] - self.formation.offsets(self.n_followers)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class AttackRecord:
    """True and estimated states of the eavesdropper's target vehicle."""

    target: int
    true_state: np.ndarray
    estimate: np.ndarray

    @property
    def error(self):
        return np.linalg.norm(self.estimate - self.true_state, axis=-1)


@dataclass(frozen=True, eq=False)
class SimTrace:
    """Recorded time series of one replica.

    Vehicle axis index 0 is the head vehicle; follower ``i`` is at index
    ``i``.  ``control[k]`` and ``transmitted[k]`` are the input and
    messages computed at ``time[k]`` and held until the next broadcast.
    """

    time: np.ndarray
    states: np.ndarray
    tracking_error: np.ndarray
    spacing_error: np.ndarray
    control: np.ndarray
    transmitted: np.ndarray
    replica: int = 0
    attack: AttackRecord | None = None

    @property
    def error_norm(self):
        """Euclidean norm of the collective tracking error at each time."""
        n = self.tracking_error.shape[0]
        return np.linalg.norm(self.tracking_error.reshape(n, -1), axis=1)

    @property
    def stacked_error(self):
        """Collective tracking error as a ``(T, 3N)`` array."""
        return self.tracking_error.reshape(self.tracking_error.shape[0], -1)


def control_input(i, received, own_q, gains, topo, formation):
    """Control input of follower ``i`` (1-based) from its received messages.

    ``received`` maps sender index to quantized state, with ``0`` for the
    head vehicle.  It must contain exactly the senders follower ``i``
    listens to.
    """
    expected = {j + 1 for j in topo.neighbors(i - 1)}
    if topo.pinning[i - 1]:
        expected.add(0)
    got = set(received)
    if got != expected:
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        raise ProtocolError(f"follower {i}: missing senders {missing}, unexpected senders {extra}")
    y_i = np.asarray(own_q, dtype=float) + formation.offset(i)
    acc = np.zeros(3)
    for j, q in received.items():
        if j == 0:
            acc += np.asarray(q, dtype=float) - y_i
        else:
            acc += np.asarray(q, dtype=float) + formation.offset(j) - y_i
    return float(gains.K[0] @ acc)


def _controls(q_head, q_follow, offsets, ls, pin, k_row):
    """Batched control law; ``q_head`` is (R, 3), ``q_follow`` (R, N, 3)."""
    y = q_follow + offsets
    v = -np.einsum("ij,rjk->rik", ls, y) + pin[None, :, None] * q_head[:, None, :]
    return v @ k_row


class _Quantizer:
    """Per-replica message quantization with chunked random draws."""

    def __init__(self, spec, rngs, shape):
        self.spec = spec
        self.rngs = rngs
        self.shape = shape
        self._buf = None
        self._pos = 0

    def __call__(self, x):
        kind = self.spec.kind
        if kind is QuantizerKind.NONE:
            return x.copy()
        if kind is QuantizerKind.DETERMINISTIC:
            return quantize_det(x, self.spec.step)
        if self._buf is None or self._pos == _DRAW_CHUNK:
            self._buf = np.stack([rng.random((_DRAW_CHUNK, *self.shape)) for rng in self.rngs], axis=1)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return quantize_prob_from_uniform(x, self.spec.step, u)


def _check_finite(x, t, offset=1):
    if not np.all(np.isfinite(x)):
        bad = np.argwhere(~np.isfinite(x))[0]
        raise DivergenceError(t, int(bad[1]) + offset if x.ndim == 3 else -1)


def simulate_batch(cfg, replicas, attack_target=None, estimate0=None):
    """Simulate the listed replica indices together.

    Parameters
    ----------
    cfg : SimConfig
    replicas : sequence of int
        Replica indices; each selects an independent random stream.
    attack_target : int, optional
        1-based follower index observed by an eavesdropper running the
        injection estimator ``x' = A x + B u + (A + I)(Q(x_i) - Q(x))``.
    estimate0 : array_like, optional
        Initial estimate for the eavesdropper.  By default the estimate
        starts at the first intercepted message of the target.

    Returns
    -------
    list of SimTrace
    """
    replicas = [int(r) for r in replicas]
    nr = len(replicas)
    n = cfg.n_followers
    a, b = cfg.gains.A, cfg.gains.B
    k_row = cfg.gains.K[0]
    ls = cfg.gains.L_plus_S
    pin = cfg.topology.pinning
    offsets = cfg.formation.offsets(n)
    spec = cfg.quantizer
    if attack_target is not None and not 1 <= attack_target <= n:
        raise ConfigurationError(f"attack target must be in 1..{n}")

    rec_every = int(cfg.record_every)
    n_comm = cfg.n_comm
    rec_steps = np.arange(0, n_comm + 1, rec_every)
    n_rec = rec_steps.size
    times_comm = np.arange(n_comm + 1) * cfg.h_comm
    head = cfg.head.state(times_comm)

    rec_x = np.empty((n_rec, nr, n, 3))
    rec_u = np.empty((n_rec, nr, n))
    rec_q = np.empty((n_rec, nr, n + 1, 3))
    rec_hat = np.empty((n_rec, nr, 3)) if attack_target is not None else None

    x = np.broadcast_to(cfg.follower_initial_states(), (nr, n, 3)).copy()
    xhat = None
    if attack_target is not None:
        e0 = np.full(3, np.nan) if estimate0 is None else np.asarray(estimate0, dtype=float)
        xhat = np.broadcast_to(e0, (nr, 3)).copy()
    c_inj = a + np.eye(3)

    if cfg.coupling is Coupling.CONTINUOUS:
        _run_continuous(cfg, x, xhat, attack_target, head, rec_steps, rec_x, rec_u, rec_q, rec_hat)
    else:
        quant = _Quantizer(spec, [make_rng(cfg.seed, r) for r in replicas], (n + 1, 3))
        quant_hat = _Quantizer(spec, [make_rng(cfg.seed, r, ESTIMATOR_STREAM) for r in replicas], (3,))
        phi, psi = rk4_affine_propagator(a, cfg.h_int, cfg.substeps)
        phi_t = phi.T
        psi_b = psi @ b[:, 0]
        psi_t = psi.T
        ri = 0
        for k in range(n_comm + 1):
            msg = quant(np.concatenate([np.broadcast_to(head[k], (nr, 1, 3)), x], axis=1))
            u = _controls(msg[:, 0], msg[:, 1:], offsets, ls, pin, k_row)
            if k == 0 and xhat is not None and estimate0 is None:
                xhat = msg[:, attack_target].copy()
            if xhat is not None:
                w = u[:, attack_target - 1, None] * b[:, 0] + (msg[:, attack_target] - quant_hat(xhat)) @ c_inj.T
            if ri < n_rec and rec_steps[ri] == k:
                rec_x[ri] = x
                rec_u[ri] = u
                rec_q[ri] = msg
                if xhat is not None:
                    rec_hat[ri] = xhat
                ri += 1
            if k == n_comm:
                break
            x = x @ phi_t + u[..., None] * psi_b
            _check_finite(x, times_comm[k + 1])
            if xhat is not None:
                xhat = xhat @ phi_t + w @ psi_t
                _check_finite(xhat[:, None, :], times_comm[k + 1], offset=attack_target)

    return _assemble(cfg, replicas, times_comm[rec_steps], head[rec_steps], rec_x, rec_u, rec_q, rec_hat, attack_target)


def _run_continuous(cfg, x, xhat, target, head, rec_steps, rec_x, rec_u, rec_q, rec_hat):
    n = cfg.n_followers
    nr = x.shape[0]
    a, b = cfg.gains.A, cfg.gains.B
    k_row = cfg.gains.K[0]
    ls = cfg.gains.L_plus_S
    pin = cfg.topology.pinning
    offsets = cfg.formation.offsets(n)
    c_inj = a + np.eye(3)
    h = cfg.h_int
    sub = cfg.substeps
    with_hat = xhat is not None

    # head evaluated once on the half-step grid used by the RK4 stages
    n_comm = rec_steps[-1]
    head_half = cfg.head.state(np.arange(2 * n_comm * sub + 1) * (0.5 * h))

    def controls(idx, xf):
        x0 = np.broadcast_to(head_half[idx], (nr, 3))
        return _controls(x0, xf, offsets, ls, pin, k_row)

    def rhs(idx, z):
        xf = z[:, :n]
        u = controls(idx, xf)
        dz = np.empty_like(z)
        dz[:, :n] = xf @ a.T + u[..., None] * b[:, 0]
        if with_hat:
            xh = z[:, n]
            dz[:, n] = xh @ a.T + u[:, target - 1, None] * b[:, 0] + (xf[:, target - 1] - xh) @ c_inj.T
        return dz

    if with_hat and np.isnan(xhat).any():
        xhat = x[:, target - 1].copy()
    z = np.concatenate([x, xhat[:, None, :]], axis=1) if with_hat else x
    ri = 0
    for k in range(n_comm + 1):
        t = k * cfg.h_comm
        i0 = 2 * k * sub
        if ri < rec_steps.size and rec_steps[ri] == k:
            xf = z[:, :n]
            rec_x[ri] = xf
            rec_u[ri] = controls(i0, xf)
            rec_q[ri, :, 0] = head[k]
            rec_q[ri, :, 1:] = xf
            if with_hat:
                rec_hat[ri] = z[:, n]
            ri += 1
        if k == n_comm:
            break
        for j in range(sub):
            # classic RK4 with stage times addressed on the half-step grid
            m = i0 + 2 * j
            k1 = rhs(m, z)
            k2 = rhs(m + 1, z + 0.5 * h * k1)
            k3 = rhs(m + 1, z + 0.5 * h * k2)
            k4 = rhs(m + 2, z + h * k3)
            z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_finite(z, t + cfg.h_comm)


def _assemble(cfg, replicas, times, head, rec_x, rec_u, rec_q, rec_hat, target):
    n = cfg.n_followers
    offsets = cfg.formation.offsets(n)
    gap_idx = np.arange(1, n + 1) * cfg.formation.gap
    traces = []
    for j, r in enumerate(replicas):
        xf = rec_x[:, j]
        states = np.concatenate([head[:, None, :], xf], axis=1)
        eps = xf + offsets[None] - head[:, None, :]
        spacing = xf[..., 0] + gap_idx[None] - head[:, None, 0]
        attack = None
        if target is not None:
            attack = AttackRecord(target, xf[:, target - 1].copy(), rec_hat[:, j].copy())
        traces.append(
            SimTrace(
                time=times.copy(),
                states=states,
                tracking_error=eps,
                spacing_error=spacing,
                control=rec_u[:, j].copy(),
                transmitted=rec_q[:, j].copy(),
                replica=r,
                attack=attack,
            )
        )
    return traces


def run(cfg, replica=0):
    """Simulate a single replica."""
    return simulate_batch(cfg, [replica])[0]


def run_ensemble(cfg, replicas, batch_size=50):
    """Simulate ``replicas`` independent replicas ``0..replicas-1``.

    Without probabilistic quantization every replica is identical, so the
    scenario is simulated once and the trace is shared.
    """
    replicas = int(replicas)
    if replicas < 1:
        raise ConfigurationError("need at least one replica")
    if not cfg.quantizer.is_random:
        first = run(cfg)
        return [first] + [replace(first, replica=r) for r in range(1, replicas)]
    out = []
    for start in range(0, replicas, batch_size):
        out.extend(simulate_batch(cfg, range(start, min(replicas, start + batch_size))))
    return out
