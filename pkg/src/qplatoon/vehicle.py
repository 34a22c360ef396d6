"""Longitudinal vehicle dynamics, head-vehicle trajectory and error signals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "VehicleParams",
    "LinearModel",
    "HeadProfile",
    "FormationSpec",
    "engine_input",
    "nonlinear_derivative",
    "linear_model",
    "head_state",
    "tracking_error",
    "spacing_error",
]


@dataclass(frozen=True)
class VehicleParams:
    """Physical constants shared by every (homogeneous) vehicle.

    Units: mass [kg], inertial_delay [s], air_density [kg/m^3],
    cross_section [m^2], drag_coeff [-], mech_drag [N].
    """

    mass: float = 1500.0
    inertial_delay: float = 0.5
    air_density: float = 1.2041
    cross_section: float = 2.2
    drag_coeff: float = 0.35
    mech_drag: float = 150.0

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigurationError(f"vehicle parameter {name} must be positive, got {value}")

    @property
    def drag_factor(self):
        """Lumped aerodynamic factor ``air_density * cross_section * drag_coeff``."""
        return self.air_density * self.cross_section * self.drag_coeff


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Feedback-linearised model ``x' = A x + B u`` with ``x = (p, v, a)``."""

    tau: float

    @property
    def A(self):
        return np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0 / self.tau]])

    @property
    def B(self):
        return np.array([[0.0], [0.0], [1.0 / self.tau]])

    def derivative(self, x, u):
        x = np.asarray(x, dtype=float)
        return x @ self.A.T + np.multiply.outer(np.asarray(u, dtype=float), self.B[:, 0])

    def __eq__(self, other):
        return isinstance(other, LinearModel) and self.tau == other.tau

    def __hash__(self):
        return hash(self.tau)


def linear_model(params):
    if not params.inertial_delay > 0:
        raise ConfigurationError("inertial delay must be positive")
    return LinearModel(tau=float(params.inertial_delay))


def engine_input(params, state, u):
    """Engine command that cancels the drag nonlinearity for input ``u``.

    The velocity-acceleration coupling term carries the inertial delay so
    that it cancels exactly against the ``-c v a / m`` drift term once the
    command is divided by ``tau * m``.
    """
    _, v, a = state
    c = params.drag_factor
    return params.mass * u + 0.5 * c * v**2 + params.mech_drag + params.inertial_delay * c * v * a


def nonlinear_derivative(params, state, b):
    """Time derivative of ``(p, v, a)`` under engine input ``b``."""
    _, v, a = state
    m, tau, c = params.mass, params.inertial_delay, params.drag_factor
    f = -(a + c / (2.0 * m) * v**2 + params.mech_drag / m) / tau - c / m * v * a
    return np.array([v, a, f + b / (tau * m)])


@dataclass(frozen=True)
class HeadProfile:
    """Piecewise-linear head-vehicle velocity with constant-acceleration segments.

    ``breakpoints`` are the segment start times (the first must be 0) and
    ``accelerations`` the constant acceleration on each segment; the last
    segment extends to infinity.  A point ``t`` equal to a breakpoint
    belongs to the segment that ends there, so ``a(5) = 0`` for the
    default ramp.  Positions and velocities are exact integrals.
    """

    v0: float = 20.0
    p0: float = 0.0
    breakpoints: tuple = (0.0, 5.0, 10.0)
    accelerations: tuple = (0.0, 2.0, 0.0)

    def __post_init__(self):
        bp = tuple(float(x) for x in self.breakpoints)
        acc = tuple(float(x) for x in self.accelerations)
        if len(bp) != len(acc) or not bp or bp[0] != 0.0:
            raise ConfigurationError("head profile needs matching breakpoints starting at 0")
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ConfigurationError("head profile breakpoints must increase strictly")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "accelerations", acc)

    @classmethod
    def constant(cls, v0=20.0, p0=0.0):
        return cls(v0=v0, p0=p0, breakpoints=(0.0,), accelerations=(0.0,))

    def to_dict(self):
        return {
            "v0": self.v0,
            "p0": self.p0,
            "breakpoints": list(self.breakpoints),
            "accelerations": list(self.accelerations),
        }

    def state(self, t):
        """Head state ``(p, v, a)`` at scalar time ``t``, or an array for array ``t``."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("head profile is defined for t >= 0 only")
        bp = np.array(self.breakpoints)
        acc = np.array(self.accelerations)
        # velocity and position at each breakpoint
        seg_len = np.diff(bp)
        v_at = self.v0 + np.concatenate(([0.0], np.cumsum(acc[:-1] * seg_len)))
        p_inc = v_at[:-1] * seg_len + 0.5 * acc[:-1] * seg_len**2
        p_at = self.p0 + np.concatenate(([0.0], np.cumsum(p_inc)))
        # (bp[k], bp[k+1]] belongs to segment k; t = 0 belongs to segment 0
        k = np.clip(np.searchsorted(bp, t, side="left") - 1, 0, len(bp) - 1)
        dt = t - bp[k]
        a = acc[k]
        v = v_at[k] + a * dt
        p = p_at[k] + v_at[k] * dt + 0.5 * a * dt**2
        return np.stack([p, v, a], axis=-1)


def head_state(profile, t):
    return profile.state(t)


@dataclass(frozen=True)
class FormationSpec:
    """Constant-gap formation; follower ``i`` (1-based) sits ``i * gap`` behind the head."""

    gap: float = 20.0

    def __post_init__(self):
        if not self.gap > 0:
            raise ConfigurationError(f"desired gap must be positive, got {self.gap}")

    def offset(self, i):
        return np.array([i * self.gap, 0.0, 0.0])

    def offsets(self, n):
        """Stacked offsets for followers ``1..n`` as an ``(n, 3)`` array."""
        d = np.zeros((n, 3))
        d[:, 0] = self.gap * np.arange(1, n + 1)
        return d


def tracking_error(x_i, d_i, x_0):
    """``x_i + d_i - x_0``; broadcasts over leading axes."""
    return np.asarray(x_i) + np.asarray(d_i) - np.asarray(x_0)


def spacing_error(p_i, i, gap, p_0):
    return p_i + i * gap - p_0
