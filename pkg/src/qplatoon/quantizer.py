"""Uniform deterministic and probabilistic quantizers.

Both quantizers locate the cell ``(n*step, (n+1)*step]`` containing the
input.  The deterministic one rounds to the nearer endpoint (ties go up);
the probabilistic one picks the upper endpoint with probability
``(z - n*step) / step``, which makes it unbiased.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "QuantizerKind",
    "QuantizerSpec",
    "cell_index",
    "quantize_det",
    "quantize_prob",
    "quantize_prob_from_uniform",
    "output_distribution",
    "quantize_vector",
    "make_rng",
]

# relative distance (in units of step) below which an input counts as a grid point;
# a few ulps, enough to absorb rounding in products like k * step
_GRID_SNAP = 8 * np.finfo(float).eps


class QuantizerKind(str, Enum):
    NONE = "none"
    DETERMINISTIC = "deterministic"
    PROBABILISTIC = "probabilistic"


@dataclass(frozen=True)
class QuantizerSpec:
    kind: QuantizerKind = QuantizerKind.NONE
    step: float = 1.0

    def __post_init__(self):
        try:
            kind = QuantizerKind(self.kind)
        except ValueError:
            raise ConfigurationError(f"unknown quantizer kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        step = float(self.step)
        if kind is not QuantizerKind.NONE and not (np.isfinite(step) and step > 0):
            raise ConfigurationError(f"quantization step must be positive, got {self.step}")
        object.__setattr__(self, "step", step)

    @property
    def is_random(self):
        return self.kind is QuantizerKind.PROBABILISTIC

    def to_dict(self):
        return {"kind": self.kind.value, "step": self.step}


def _check(z, step):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("quantizer input must be finite")
    if not np.all(np.asarray(step) > 0):
        raise ValueError(f"quantization step must be positive, got {step}")
    return z


def cell_index(z, step):
    """Return ``(n, frac)`` with ``z`` in ``(n*step, (n+1)*step]`` and
    ``frac = z/step - n`` in ``(0, 1]``.

    Inputs within a few ulps of a grid point are snapped onto it,
    so that grid points are fixed points of both quantizers.
    """
    k = np.asarray(z, dtype=float) / step
    r = np.rint(k)
    on_grid = np.abs(k - r) <= _GRID_SNAP * np.maximum(1.0, np.abs(k))
    n = np.where(on_grid, r - 1.0, np.ceil(k) - 1.0)
    frac = np.where(on_grid, 1.0, k - n)
    return n, frac


def quantize_det(z, step):
    """Deterministic nearest-level quantizer; ties go to the upper level."""
    z = _check(z, step)
    n, frac = cell_index(z, step)
    out = (n + (frac >= 0.5)) * step
    return out if out.ndim else float(out)


def quantize_prob_from_uniform(z, step, uniform):
    """Probabilistic quantizer driven by given uniforms on ``[0, 1)``.

    The upper level is chosen when ``uniform < frac``; exposed separately so
    that batched simulations can pre-draw their random numbers.
    """
    n, frac = cell_index(z, step)
    out = (n + (np.asarray(uniform) < frac)) * step
    return out if out.ndim else float(out)


def quantize_prob(z, step, rng):
    """Probabilistic quantizer; consumes one uniform draw per element."""
    z = _check(z, step)
    return quantize_prob_from_uniform(z, step, rng.random(z.shape))


def output_distribution(z, step):
    """Exact law of :func:`quantize_prob` as a list of ``(level, probability)``.

    Levels are sorted ascending; a grid point yields a single atom.
    """
    z = float(_check(z, step))
    n, frac = cell_index(z, step)
    n, frac = float(n), float(frac)
    if frac >= 1.0:
        return [((n + 1.0) * step, 1.0)]
    return [(n * step, 1.0 - frac), ((n + 1.0) * step, frac)]


def quantize_vector(x, spec, rng=None):
    """Apply ``spec`` elementwise to an array of any shape."""
    x = np.asarray(x, dtype=float)
    if spec.kind is QuantizerKind.NONE:
        return x.copy()
    if spec.kind is QuantizerKind.DETERMINISTIC:
        return np.asarray(quantize_det(x, spec.step))
    if rng is None:
        raise ValueError("probabilistic quantization needs a random generator")
    return np.asarray(quantize_prob(x, spec.step, rng))


def make_rng(seed, *path):
    """Independent generator for the substream addressed by ``path``.

    ``make_rng(seed, replica)`` and ``make_rng(seed, replica, 1)`` never
    overlap; identical arguments reproduce identical draws bit for bit.
    """
    key = (int(seed), *(int(p) for p in path))
    if min(key) < 0:
        raise ConfigurationError(f"seed and stream indices must be non-negative, got {key}")
    ss = np.random.SeedSequence(entropy=key[0], spawn_key=key[1:])
    return np.random.Generator(np.random.PCG64(ss))
