"""Bitwise soft demapping over a 4D constellation.

LLR sign convention: positive LLR favors bit 0, i.e.
L_i = ln( sum_{x: bit_i=0} exp(-||y-x||^2 / 2s2) / sum_{x: bit_i=1} ... ).
Values are clamped to +-LLR_CLAMP, far beyond any decision-relevant
magnitude but safe inside downstream exp().  The same convention is
assumed by the metrics and fec modules.

Internally the exponent -||y-x||^2/(2 s2) is replaced by the gauge metric
(y.x - ||x||^2/2)/s2, which differs only by a per-sample constant that
cancels in every LLR, hard decision and mutual-information difference; it
saves the dominant ||y||^2 broadcast on large blocks.
"""

from dataclasses import dataclass

import numpy as np

from .constellations import Constellation4D
from .exceptions import ParameterError

__all__ = [
    "LlrFrame",
    "LLR_CLAMP",
    "SIGN_CONVENTION",
    "exact_llr",
    "exact_llrs",
    "maxlog_llr",
    "maxlog_llrs",
    "hard_decide",
    "hard_decisions",
    "demap_frame",
]

LLR_CLAMP = 50.0
SIGN_CONVENTION = "positive favors bit 0"
_CHUNK = 65536


@dataclass(frozen=True)
class LlrFrame:
    """Per-bit LLRs for a block of received symbols (N x k)."""

    llrs: np.ndarray
    sign_convention: str = SIGN_CONVENTION


def gauge_metrics(ys: np.ndarray, c: Constellation4D, sigma2: float) -> np.ndarray:
    """(y.x - ||x||^2/2)/sigma2: the demapping exponent up to a per-row constant."""
    half_e = 0.5 * np.sum(c.points**2, axis=1)
    return (ys @ c.points.T - half_e[None, :]) / sigma2


def _as_batch(y) -> np.ndarray:
    ys = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if ys.shape[1] != 4:
        raise ParameterError(f"expected 4D samples, got shape {ys.shape}")
    return ys


def bitwise_logsums(ys: np.ndarray, c: Constellation4D, sigma2: float):
    """Max-stabilized log of the per-bit subset sums in the gauge metric.

    Returns (lse0, lse1), each (N, k); their difference is the exact LLR.
    The row max is subtracted before exponentiation and added back, so one
    of the two subset sums per bit is always >= 1.  Scratch buffers are
    allocated once per call and reused across chunks (page faults on the
    (chunk, M) intermediates dominate the cost otherwise).
    """
    n = ys.shape[0]
    b1 = np.ascontiguousarray(c.labels.astype(np.float64))
    b0 = 1.0 - b1
    xs = np.ascontiguousarray(c.points.T) / sigma2
    bias = -0.5 * np.sum(c.points**2, axis=1) / sigma2
    out0 = np.empty((n, c.k))
    out1 = np.empty((n, c.k))
    rows = min(_CHUNK, n)
    buf = np.empty((rows, c.M))
    mmax = np.empty((rows, 1))
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        r = hi - lo
        m, mx = buf[:r], mmax[:r]
        np.dot(ys[lo:hi], xs, out=m)
        np.add(m, bias, out=m)
        np.max(m, axis=1, keepdims=True, out=mx)
        np.subtract(m, mx, out=m)
        np.exp(m, out=m)
        # both subset sums are computed directly: deriving one from the row
        # total cancels catastrophically once the LLR magnitude passes ~36
        s0 = np.dot(m, b0)
        s1 = np.dot(m, b1)
        with np.errstate(divide="ignore"):
            out0[lo:hi] = np.log(s0) + mx
            out1[lo:hi] = np.log(s1) + mx
    return out0, out1


def bitwise_maxima(ys: np.ndarray, c: Constellation4D, sigma2: float):
    """Per-bit subset maxima of the gauge metric, (max0, max1), each (N, k)."""
    out0 = np.empty((ys.shape[0], c.k))
    out1 = np.empty((ys.shape[0], c.k))
    ones = c.labels.astype(bool)
    for lo in range(0, ys.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, ys.shape[0])
        m = gauge_metrics(ys[lo:hi], c, sigma2)
        for i in range(c.k):
            out0[lo:hi, i] = m[:, ~ones[:, i]].max(axis=1)
            out1[lo:hi, i] = m[:, ones[:, i]].max(axis=1)
    return out0, out1


def exact_llrs(ys: np.ndarray, c: Constellation4D, sigma2: float) -> np.ndarray:
    """Exact log-sum-exp LLRs for a block of received 4D samples, (N, k)."""
    if sigma2 <= 0:
        raise ParameterError(f"sigma2 must be positive, got {sigma2}")
    lse0, lse1 = bitwise_logsums(_as_batch(ys), c, sigma2)
    return np.clip(lse0 - lse1, -LLR_CLAMP, LLR_CLAMP)


def exact_llr(y, c: Constellation4D, sigma2: float) -> np.ndarray:
    """Exact LLRs of one received sample, length k."""
    return exact_llrs(_as_batch(y), c, sigma2)[0]


def maxlog_llrs(ys: np.ndarray, c: Constellation4D, sigma2: float) -> np.ndarray:
    """Max-log LLRs: log-sum-exp replaced by the dominant term."""
    if sigma2 <= 0:
        raise ParameterError(f"sigma2 must be positive, got {sigma2}")
    m0, m1 = bitwise_maxima(_as_batch(ys), c, sigma2)
    return np.clip(m0 - m1, -LLR_CLAMP, LLR_CLAMP)


def maxlog_llr(y, c: Constellation4D, sigma2: float) -> np.ndarray:
    return maxlog_llrs(_as_batch(y), c, sigma2)[0]


def hard_decisions(ys: np.ndarray, c: Constellation4D) -> np.ndarray:
    """Minimum-distance point indices for a block of samples; ties go to the lowest index."""
    ys = _as_batch(ys)
    out = np.empty(ys.shape[0], dtype=np.int64)
    for lo in range(0, ys.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, ys.shape[0])
        out[lo:hi] = np.argmax(gauge_metrics(ys[lo:hi], c, 1.0), axis=1)
    return out


def hard_decide(y, c: Constellation4D):
    """Nearest constellation point for one sample: (point index, label word)."""
    idx = int(hard_decisions(_as_batch(y), c)[0])
    return idx, tuple(int(b) for b in c.labels[idx])


def demap_frame(ys: np.ndarray, c: Constellation4D, sigma2: float,
                variant: str = "exact") -> LlrFrame:
    if variant == "exact":
        return LlrFrame(exact_llrs(ys, c, sigma2))
    if variant == "maxlog":
        return LlrFrame(maxlog_llrs(ys, c, sigma2))
    raise ParameterError(f"unknown demapper variant '{variant}'")
