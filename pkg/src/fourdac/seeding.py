"""Deterministic, position-addressable random streams.

Every random quantity in the package is drawn from a Philox counter-based
generator whose 128-bit key is derived from ``(seed, domain)`` and whose
counter addresses an absolute position in the stream.  Philox emits four
64-bit words per counter increment and ``Generator.random`` consumes exactly
one word per double, so the uniform at stream offset ``i`` is a pure function
of ``(seed, domain, i)``.  This is what makes results independent of block
partitioning and worker count.

Gaussian variates are produced by the inverse-CDF method (``scipy.special
.ndtri``) on these uniforms, one uniform per variate: unlike ziggurat
sampling, the consumption per variate is fixed, so Gaussian streams stay
position-addressable.  This sampling method is part of the reproducibility
contract and must not be swapped silently.
"""

import hashlib

import numpy as np
from scipy.special import ndtri

# random() yields u in [0, 1); ndtri(0) is -inf, so floor u at 2^-54.
_U_FLOOR = 2.0**-54


def philox_key(seed: int, domain: str) -> np.ndarray:
    """Derive a 128-bit Philox key from a 64-bit seed and a domain string."""
    digest = hashlib.sha256(f"{int(seed)}:{domain}".encode()).digest()
    return np.frombuffer(digest[:16], dtype=np.uint64).copy()


def uniform_stream(seed: int, domain: str, start: int, count: int) -> np.ndarray:
    """Uniform doubles at absolute offsets [start, start+count) of a keyed stream.

    ``start`` must be a multiple of 4 (the Philox block size in 64-bit words)
    so the counter can be positioned exactly.
    """
    if start % 4 != 0:
        raise ValueError(f"stream offset must be a multiple of 4, got {start}")
    bg = np.random.Philox(key=philox_key(seed, domain), counter=start // 4)
    return np.random.Generator(bg).random(count)


def normal_stream(seed: int, domain: str, start: int, count: int) -> np.ndarray:
    """Standard-normal variates at absolute stream offsets, via inverse CDF."""
    u = uniform_stream(seed, domain, start, count)
    return ndtri(np.maximum(u, _U_FLOOR))


def bit_stream(seed: int, domain: str, count: int) -> np.ndarray:
    """Equiprobable bits (uint8) from offset 0 of a keyed stream."""
    return (uniform_stream(seed, domain, 0, count) < 0.5).astype(np.uint8)


def index_stream(seed: int, domain: str, start: int, count: int, bound: int) -> np.ndarray:
    """Uniform integers in [0, bound) at absolute stream offsets.

    Uses floor(u * bound) rather than rejection sampling so that each index
    consumes exactly one stream position.
    """
    u = uniform_stream(seed, domain, start, count)
    idx = np.floor(u * bound).astype(np.int64)
    # u < 1.0 guarantees idx < bound, but guard against FP rounding anyway
    return np.minimum(idx, bound - 1)
