"""Control-versus-privacy trade-off in the quantization step.

Control cost grows like ``step**2`` and the privacy loss like
``1/step``; minimising ``w1 step^2 + w2 / step`` has the closed form
``step* = (w2 / (2 w1))**(1/3)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TradeoffWeights", "objectives", "pareto_front", "optimal_step", "weighted_cost"]


@dataclass(frozen=True)
class TradeoffWeights:
    w1: float
    w2: float

    def __post_init__(self):
        if not (self.w1 > 0 and self.w2 > 0):
            raise ValueError("trade-off weights must be positive")


def objectives(step):
    """Return ``(f1, f2) = (step**2, 1/step)``."""
    step = np.asarray(step, dtype=float)
    if np.any(step <= 0):
        raise ValueError("step must be positive")
    return step**2, 1.0 / step


def weighted_cost(step, weights):
    f1, f2 = objectives(step)
    return weights.w1 * f1 + weights.w2 * f2


def pareto_front(f2):
    """Pairs ``(f2, f1)`` on the front ``f1 = f2**-2``."""
    f2 = np.asarray(f2, dtype=float)
    if np.any(f2 <= 0):
        raise ValueError("front is defined for f2 > 0 only")
    return np.column_stack([f2, f2**-2.0])


def optimal_step(weights):
    """Minimiser of the weighted cost and its value, ``(step*, f(step*))``."""
    step = (weights.w2 / (2.0 * weights.w1)) ** (1.0 / 3.0)
    return step, float(weighted_cost(step, weights))
