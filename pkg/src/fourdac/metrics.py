"""Monte Carlo information-rate and error-rate metrics.

The GMI estimator is the standard memoryless BICM achievable rate computed
from exact bitwise LLRs L and the transmitted bits b:

    GMI = k - (1/N) sum_t sum_i log2(1 + exp(-(1 - 2 b_ti) L_ti)).

Losses are accumulated in fixed-size blocks in index order, and every random
draw is addressed by absolute symbol index, so estimates are bit-identical
for any partitioning of the work.
"""

from dataclasses import dataclass

import numpy as np

from . import channel, demapper
from .constellations import Constellation4D
from .exceptions import ParameterError, SearchError
from .seeding import index_stream

__all__ = ["GmiEstimate", "gmi_mc", "mi_mc", "required_snr", "ber_count"]

LABEL_DOMAIN = "symbol-labels"
_BLOCK = 65536
_LN2 = np.log(2.0)


@dataclass(frozen=True)
class GmiEstimate:
    value: float        # bits per 4D symbol
    std_error: float
    n_symbols: int
    snr_db: float


def _draw_symbols(c: Constellation4D, n: int, seed: int):
    idx = index_stream(seed, LABEL_DOMAIN, 0, n, c.M)
    return idx, c.points[idx]


def _estimate(losses_sum: float, losses_sq: float, n: int, k: float, snr_db: float) -> GmiEstimate:
    mean = losses_sum / n
    var = max(losses_sq / n - mean**2, 0.0) * n / max(n - 1, 1)
    return GmiEstimate(k - mean, float(np.sqrt(var / n)), n, snr_db)


def gmi_mc(c: Constellation4D, snr_db: float, n: int, seed: int = 0) -> GmiEstimate:
    """Monte Carlo GMI of a normalized constellation at one SNR point."""
    if n < 10_000:
        raise ParameterError(f"need n >= 10^4 symbols, got {n}")
    idx, tx = _draw_symbols(c, n, seed)
    rx = channel.transmit(tx, channel.ChannelConfig(snr_db, seed))
    sigma2 = channel.snr_to_sigma2(snr_db)
    bits = c.labels[idx]
    total = total_sq = 0.0
    for lo in range(0, n, _BLOCK):
        hi = min(lo + _BLOCK, n)
        llrs = demapper.exact_llrs(rx[lo:hi], c, sigma2)
        sgn = 1.0 - 2.0 * bits[lo:hi]
        loss = np.logaddexp(0.0, -sgn * llrs).sum(axis=1) / _LN2
        total += float(loss.sum())
        total_sq += float((loss**2).sum())
    return _estimate(total, total_sq, n, c.k, snr_db)


def mi_mc(c: Constellation4D, snr_db: float, n: int, seed: int = 0) -> GmiEstimate:
    """Symbol-wise mutual information estimator (same draws as gmi_mc)."""
    if n < 10_000:
        raise ParameterError(f"need n >= 10^4 symbols, got {n}")
    idx, tx = _draw_symbols(c, n, seed)
    rx = channel.transmit(tx, channel.ChannelConfig(snr_db, seed))
    sigma2 = channel.snr_to_sigma2(snr_db)
    log2m = np.log2(c.M)
    total = total_sq = 0.0
    for lo in range(0, n, _BLOCK):
        hi = min(lo + _BLOCK, n)
        m = demapper.gauge_metrics(rx[lo:hi], c, sigma2)
        mmax = m.max(axis=1, keepdims=True)
        lse = np.log(np.exp(m - mmax).sum(axis=1)) + mmax[:, 0]
        m_tx = m[np.arange(lo, hi) - lo, idx[lo:hi]]
        loss = (lse - m_tx) / _LN2
        total += float(loss.sum())
        total_sq += float((loss**2).sum())
    return _estimate(total, total_sq, n, log2m, snr_db)


def _bisect(eval_gmi, target: float, lo: float, hi: float, tol_db: float):
    g_lo, g_hi = eval_gmi(lo), eval_gmi(hi)
    if not (g_lo.value < target <= g_hi.value):
        raise SearchError(
            f"target {target} not bracketed in [{lo}, {hi}] dB "
            f"(GMI {g_lo.value:.4f} .. {g_hi.value:.4f})"
        )
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        g_mid = eval_gmi(mid)
        slack_lo = 3.0 * (g_mid.std_error + g_lo.std_error)
        slack_hi = 3.0 * (g_mid.std_error + g_hi.std_error)
        if g_mid.value < g_lo.value - slack_lo or g_mid.value > g_hi.value + slack_hi:
            raise SearchError(
                f"GMI not monotone at {mid:.3f} dB: {g_mid.value:.4f} outside "
                f"[{g_lo.value:.4f}, {g_hi.value:.4f}]"
            )
        if g_mid.value < target:
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid
    return lo, hi


def required_snr(c: Constellation4D, target_gmi: float, tol_db: float = 0.05,
                 n: int = 200_000, seed: int = 0,
                 lo: float = -10.0, hi: float = 40.0) -> float:
    """SNR (dB) at which the constellation's GMI equals ``target_gmi``.

    Bisection with a monotonicity guard; all evaluations share one seed so
    the estimated curve is smooth in SNR.  A coarse pass at reduced n
    narrows the bracket before the full-n refinement.
    """
    if tol_db <= 0:
        raise ParameterError(f"tol_db must be positive, got {tol_db}")
    if target_gmi >= c.k:
        raise SearchError(f"target {target_gmi} is at or above the {c.k}-bit asymptote")

    cache = {}

    def eval_at(n_):
        def f(snr):
            key = (round(snr, 9), n_)
            if key not in cache:
                cache[key] = gmi_mc(c, snr, n_, seed)
            return cache[key]
        return f

    if n >= 100_000:
        c_lo, c_hi = _bisect(eval_at(max(n // 10, 10_000)), target_gmi, lo, hi, 0.2)
        mid = 0.5 * (c_lo + c_hi)
        lo2, hi2 = max(lo, mid - 0.3), min(hi, mid + 0.3)
        f = eval_at(n)
        if f(lo2).value < target_gmi <= f(hi2).value:
            lo, hi = lo2, hi2
    b_lo, b_hi = _bisect(eval_at(n), target_gmi, lo, hi, tol_db)
    return 0.5 * (b_lo + b_hi)


def ber_count(tx_bits, rx_bits):
    """Hamming error statistics: (errors, total, ratio)."""
    tx = np.asarray(tx_bits).ravel()
    rx = np.asarray(rx_bits).ravel()
    if tx.shape != rx.shape:
        raise ParameterError(f"length mismatch: {tx.shape} vs {rx.shape}")
    errors = int(np.count_nonzero(tx != rx))
    total = tx.size
    return errors, total, errors / total if total else 0.0
