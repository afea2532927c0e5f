"""The 4D amplitude-coding logic circuits.

Both circuits sit between the FEC and two conventional 16QAM mappers.  They
take k_ac input bits (6 or 7), pass the first four through unchanged as the
sign bits c1, c3, c5, c7, and compute the four amplitude bits c2, c4, c6, c8
from the remaining inputs with a handful of gates.  The 6-bit circuit places
the high amplitude a2 in exactly one of the four dimensions; the 7-bit
circuit additionally rescales one whole polarization from a1 to a_s = K*a1,
selected by the flag t = b7 XOR (b5 AND b6) (t=1 scales X-pol, t=0 Y-pol).
"""

from dataclasses import dataclass

import numpy as np

from .alphabets import AmplitudeSpec, ask4_map
from .exceptions import ParameterError

__all__ = [
    "MapperWord",
    "encode6",
    "encode7",
    "decode6",
    "decode7",
    "map_symbol6",
    "map_symbol7",
]

# Dimensions of each polarization (0-based coordinate indices).
XPOL_DIMS = (0, 1)
YPOL_DIMS = (2, 3)


@dataclass(frozen=True)
class MapperWord:
    """8 mapper bits (c1..c8) plus the polarization-scaling flag of the 7-bit format.

    Odd positions c1,c3,c5,c7 are sign bits; even positions are amplitude
    bits.  scale_to_x is always False for the 6-bit circuit.
    """

    bits: tuple
    scale_to_x: bool = False

    @property
    def sign_bits(self) -> tuple:
        return self.bits[0::2]

    @property
    def amplitude_bits(self) -> tuple:
        return self.bits[1::2]


def _check_word(b, k):
    b = tuple(int(x) for x in b)
    if len(b) != k:
        raise ParameterError(f"expected a {k}-bit word, got length {len(b)}")
    if any(x not in (0, 1) for x in b):
        raise ParameterError(f"word must be binary, got {b}")
    return b


def encode6(b) -> MapperWord:
    """6-bit amplitude coding: 6 input bits to 8 mapper bits.

    Amplitude bits: c2 = b5^(b5|b6), c4 = b6^(b5|b6),
    c6 = b5^b6^(b5|b6), c8 = ~(b5|b6).  Exactly one of them is set.
    """
    b1, b2, b3, b4, b5, b6 = _check_word(b, 6)
    o = b5 | b6
    c = (b1, b5 ^ o, b2, b6 ^ o, b3, b5 ^ b6 ^ o, b4, 1 - o)
    return MapperWord(bits=c)


def encode7(b) -> MapperWord:
    """7-bit amplitude coding: 7 input bits to 8 mapper bits plus scale flag.

    With t = b7^(b5&b6): c2 = ~(b5|t), c4 = ~(b6|t), c6 = ~(b5|~t),
    c8 = ~(b6|~t).  The scaled polarization's amplitude bits are both 0.
    """
    b1, b2, b3, b4, b5, b6, b7 = _check_word(b, 7)
    t = b7 ^ (b5 & b6)
    nt = 1 - t
    c = (b1, 1 - (b5 | t), b2, 1 - (b6 | t), b3, 1 - (b5 | nt), b4, 1 - (b6 | nt))
    return MapperWord(bits=c, scale_to_x=bool(t))


def _build_decode_tables():
    dec6, dec7 = {}, {}
    for b5 in (0, 1):
        for b6 in (0, 1):
            dec6[encode6((0, 0, 0, 0, b5, b6)).amplitude_bits] = (b5, b6)
            for b7 in (0, 1):
                w = encode7((0, 0, 0, 0, b5, b6, b7))
                dec7[(w.amplitude_bits, w.scale_to_x)] = (b5, b6, b7)
    return dec6, dec7


# Inverse lookup tables, built once from the forward circuits.
_DEC6, _DEC7 = _build_decode_tables()


def decode6(c: MapperWord):
    """Invert encode6; returns the 6-bit input word, or None if c is not in the image."""
    bits = _check_word(c.bits, 8)
    tail = _DEC6.get(bits[1::2])
    if tail is None:
        return None
    return bits[0::2] + tail


def decode7(c: MapperWord):
    """Invert encode7; the scale flag disambiguates the two all-zero amplitude words."""
    bits = _check_word(c.bits, 8)
    tail = _DEC7.get((bits[1::2], bool(c.scale_to_x)))
    if tail is None:
        return None
    return bits[0::2] + tail


def _map_word(w: MapperWord, amps: AmplitudeSpec) -> np.ndarray:
    c = w.bits
    return np.array([ask4_map(c[2 * i], c[2 * i + 1], amps) for i in range(4)],
                    dtype=np.float64)


def map_symbol6(b, amps: AmplitudeSpec) -> np.ndarray:
    """6 input bits to a 4D symbol; the amplitude vector is a permutation of (a1,a1,a1,a2)."""
    return _map_word(encode6(b), amps)


def map_symbol7(b, amps: AmplitudeSpec) -> np.ndarray:
    """7 input bits to a 4D symbol, scaling the selected polarization by K.

    The scaled polarization always carried (a1, a1) before scaling, so its
    final magnitudes are (a_s, a_s).
    """
    w = encode7(b)
    x = _map_word(w, amps)
    dims = XPOL_DIMS if w.scale_to_x else YPOL_DIMS
    for d in dims:
        x[d] *= amps.K
    return x
