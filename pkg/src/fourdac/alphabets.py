"""1D/2D primitives: Gray labeling, 4ASK and 16QAM point mapping.

The 4ASK levels [-a2, -a1, +a1, +a2] carry the labels [11, 10, 00, 01]:
the first bit is the sign bit (1 for negative), the second selects the
outer amplitude.  Larger alphabets follow the same convention, obtained by
complementing the canonical reflected Gray code so that the leading bit
always equals the sign.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError

__all__ = ["AmplitudeSpec", "Ask4Point", "brgc_labels", "ask4_map", "qam16_map"]


@dataclass(frozen=True)
class AmplitudeSpec:
    """Amplitude levels of the underlying 4ASK grid.

    a1 and a2 are the low/high magnitudes; a_s = K*a1 is the extra scaled
    level used only by the 7-bit format (K is ignored by the 6-bit one).
    """

    a1: float = 1.0
    a2: float = 3.0
    K: float = 1.0
    a_s: float = field(init=False)

    def __post_init__(self):
        for name in ("a1", "a2", "K"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.a1 > 0 and self.a2 > 0 and self.K > 0):
            raise ParameterError(f"amplitudes must be positive: a1={self.a1} a2={self.a2} K={self.K}")
        if not self.a1 < self.a2:
            raise ParameterError(f"need a1 < a2, got a1={self.a1}, a2={self.a2}")
        object.__setattr__(self, "a_s", self.K * self.a1)


@dataclass(frozen=True)
class Ask4Point:
    """A signed 4ASK level together with its 2-bit label (sign bit, amplitude bit)."""

    value: float
    label: tuple


def brgc_labels(m: int) -> list:
    """Labels over 2^m amplitude levels in ascending order, as m-bit tuples.

    Adjacent labels differ in exactly one bit, the first bit is 1 iff the
    level is negative, and for m=2 the sequence is [11, 10, 00, 01].
    """
    if not 1 <= m <= 8:
        raise ParameterError(f"m must be in 1..8, got {m}")
    n = 1 << m
    labels = []
    for i in range(n):
        gray = i ^ (i >> 1)
        word = gray ^ (n - 1)  # complement: leading bit tracks the sign
        labels.append(tuple((word >> (m - 1 - j)) & 1 for j in range(m)))
    return labels


def ask4_map(c_sign: int, c_amp: int, amps: AmplitudeSpec) -> float:
    """Map a (sign, amplitude) bit pair to a signed 4ASK level."""
    mag = amps.a2 if c_amp else amps.a1
    return -mag if c_sign else mag


def qam16_map(c: tuple, amps: AmplitudeSpec) -> tuple:
    """Map a 4-bit word to a 16QAM point as two independent 4ASK coordinates."""
    c1, c2, c3, c4 = c
    return (ask4_map(c1, c2, amps), ask4_map(c3, c4, amps))


def ask4_points(amps: AmplitudeSpec) -> list:
    """The four labeled 4ASK points in ascending level order."""
    levels = [-amps.a2, -amps.a1, amps.a1, amps.a2]
    return [Ask4Point(v, lab) for v, lab in zip(levels, brgc_labels(2))]
