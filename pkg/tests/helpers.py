"""Small shared helpers for the test suite.

Kept deliberately thin: configuration builders with test-friendly defaults
and a deterministic stand-in RNG for driving the scalar decision sampler
with a prescribed uniform stream.
"""

from __future__ import annotations

import numpy as np

from mcrelay import ProtocolKind, default_two_hop_config


def two_hop(kind: str | ProtocolKind, t_b: float = 400e-6, l_bits: int = 6,
            xi: float = 20.0, **kwargs):
    """Reference-geometry config with short sequences and a common threshold
    on both detectors unless overridden."""
    if not isinstance(kind, ProtocolKind):
        kind = ProtocolKind(kind)
    kwargs.setdefault("xi_r", xi)
    kwargs.setdefault("xi_d", xi)
    return default_two_hop_config(kind, t_b=t_b, l_bits=l_bits, **kwargs)


class QueueRng:
    """Minimal rng look-alike returning a prescribed uniform stream; lets a
    test feed the scalar sampler the exact tosses a vectorized run used."""

    def __init__(self, values):
        self._values = list(np.asarray(values, dtype=np.float64).ravel())
        self._next = 0

    def random(self):
        value = self._values[self._next]
        self._next += 1
        return value


def combined_se(stats_a, stats_b) -> float:
    """Standard error of the difference of two independent estimates."""
    return float(np.hypot(stats_a.standard_error(), stats_b.standard_error()))
