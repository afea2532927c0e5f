"""Labeled 4D constellations: shaped formats, uniform baselines, analyses.

All builders return unnormalized constellations on the natural amplitude
grid; ``normalize`` rescales to unit average energy per polarization
(mean ||x||^2 = 2), which is the convention every downstream SNR refers to.
Labels are the information bits (the b-domain): 6 or 7 bits for the shaped
formats, 3+3 bits for PM-8QAM, 7 bits for the set-partitioned baseline.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.distance import pdist

from .alphabets import AmplitudeSpec, brgc_labels, qam16_map
from .circuits import map_symbol6, map_symbol7
from .exceptions import ConstructionError, ParameterError

__all__ = [
    "Constellation4D",
    "Marginal1D",
    "build_6b4dac",
    "build_7b4dac",
    "build_pm8qam",
    "build_sp128_16qam",
    "build_pm16qam",
    "normalize",
    "marginal_1d",
    "min_squared_distance",
    "energy_levels",
    "auto_amplitudes",
]

TARGET_ES4D = 2.0  # unit average energy per 2D after normalize()


@dataclass(frozen=True)
class Constellation4D:
    """M labeled points in 4 real dimensions (I_x, Q_x, I_y, Q_y)."""

    name: str
    points: np.ndarray  # (M, 4) float64
    labels: np.ndarray  # (M, k) uint8, bijective with {0,1}^k
    es4d: float = field(init=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        labs = np.ascontiguousarray(np.asarray(self.labels, dtype=np.uint8))
        m, k = labs.shape
        if pts.shape != (m, 4):
            raise ConstructionError(f"points shape {pts.shape} does not match {m} labels")
        if m != 1 << k:
            raise ConstructionError(f"{m} points cannot carry bijective {k}-bit labels")
        ints = labs @ (1 << np.arange(k - 1, -1, -1))
        if len(np.unique(ints)) != m:
            raise ConstructionError("labels are not distinct")
        if len(np.unique(pts.round(decimals=12), axis=0)) != m:
            raise ConstructionError(f"constellation '{self.name}' has coincident points")
        pts.setflags(write=False)
        labs.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labs)
        object.__setattr__(self, "es4d", float(np.mean(np.sum(pts**2, axis=1))))

    @property
    def M(self) -> int:
        return self.points.shape[0]

    @property
    def k(self) -> int:
        return self.labels.shape[1]

    def label_ints(self) -> np.ndarray:
        return self.labels @ (1 << np.arange(self.k - 1, -1, -1))

    def point_index(self) -> np.ndarray:
        """LUT from label integer to point row."""
        lut = np.empty(self.M, dtype=np.int64)
        lut[self.label_ints()] = np.arange(self.M)
        return lut


@dataclass(frozen=True)
class Marginal1D:
    """Empirical distribution of one coordinate under equiprobable symbols."""

    support: np.ndarray
    probs: np.ndarray


def _all_words(k: int) -> np.ndarray:
    ints = np.arange(1 << k)
    return ((ints[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)


def build_6b4dac(amps: AmplitudeSpec = AmplitudeSpec()) -> Constellation4D:
    """The 64-point constant-modulus shaped format (6 bit/4D-sym)."""
    labels = _all_words(6)
    points = np.array([map_symbol6(b, amps) for b in labels])
    meta = {"a1": amps.a1, "a2": amps.a2, "scale": 1.0}
    return Constellation4D("6b4dac", points, labels, meta=meta)


def build_7b4dac(amps: AmplitudeSpec) -> Constellation4D:
    """The 128-point shaped format with polarization scaling (7 bit/4D-sym).

    Degenerate K (a_s equal to a1 or a2) makes points collide and raises.
    """
    labels = _all_words(7)
    points = np.array([map_symbol7(b, amps) for b in labels])
    meta = {"a1": amps.a1, "a2": amps.a2, "K": amps.K, "a_s": amps.a_s, "scale": 1.0}
    return Constellation4D("7b4dac", points, labels, meta=meta)


def _qam8_rect():
    """Rectangular 8QAM on {+-1,+-3} x {+-1} with a perfect Gray labeling."""
    i_levels = [-3.0, -1.0, 1.0, 3.0]
    q_levels = [-1.0, 1.0]
    pts, labs = [], []
    for ci, li in zip(brgc_labels(2), i_levels):
        for cq, lq in zip(brgc_labels(1), q_levels):
            pts.append((li, lq))
            labs.append(ci + cq)
    return pts, labs


def _qam8_star(ring_ratio: float):
    """Star 8QAM: inner QPSK at 45 deg, outer QPSK on the axes, Gray phase bits."""
    if ring_ratio <= 0 or abs(ring_ratio - 1.0) < 1e-9:
        raise ParameterError(f"star ring_ratio must be positive and != 1, got {ring_ratio}")
    pts, labs = [], []
    phase_gray = [(0, 0), (0, 1), (1, 1), (1, 0)]
    for ring, (radius, offset) in enumerate([(1.0, np.pi / 4), (ring_ratio, 0.0)]):
        for q, (p1, p2) in enumerate(phase_gray):
            ang = offset + q * np.pi / 2
            pts.append((radius * np.cos(ang), radius * np.sin(ang)))
            labs.append((ring, p1, p2))
    return pts, labs


def build_pm8qam(geometry: str = "rect", ring_ratio: float = 1.0 + np.sqrt(3.0)) -> Constellation4D:
    """Uniform 64-point baseline: one 8QAM per polarization, independent labels."""
    if geometry == "rect":
        pts2d, labs2d = _qam8_rect()
    elif geometry == "star":
        pts2d, labs2d = _qam8_star(ring_ratio)
    else:
        raise ParameterError(f"unknown pm8qam geometry '{geometry}'")
    points, labels = [], []
    for px, lx in zip(pts2d, labs2d):
        for py, ly in zip(pts2d, labs2d):
            points.append(px + py)
            labels.append(tuple(lx) + tuple(ly))
    meta = {"geometry": geometry, "scale": 1.0}
    if geometry == "star":
        meta["ring_ratio"] = ring_ratio
    return Constellation4D("pm8qam", np.array(points), np.array(labels), meta=meta)


def build_pm16qam(amps: AmplitudeSpec = AmplitudeSpec()) -> Constellation4D:
    """Full 256-point PM-16QAM with 8 mapper bits as labels (reference set)."""
    labels = _all_words(8)
    points = np.array([qam16_map(b[:4], amps) + qam16_map(b[4:], amps) for b in labels])
    return Constellation4D("pm16qam", points, labels, meta={"a1": amps.a1, "a2": amps.a2, "scale": 1.0})


def build_sp128_16qam(amps: AmplitudeSpec = AmplitudeSpec()) -> Constellation4D:
    """Uniform 128-point baseline: PM-16QAM points with even lattice parity.

    The per-dimension level index has parity c_sign ^ c_amp under the 4ASK
    labeling, so the even-sum constraint is exactly an even parity of the
    eight mapper bits.  The first seven bits are the information label and
    the eighth is the computed parity bit.  The squared minimum distance
    doubles relative to PM-16QAM at equal spacing.
    """
    labels = _all_words(7)
    points = []
    for b in labels:
        c = tuple(b) + (int(np.bitwise_xor.reduce(b)),)
        points.append(qam16_map(c[:4], amps) + qam16_map(c[4:], amps))
    meta = {"a1": amps.a1, "a2": amps.a2, "scale": 1.0}
    return Constellation4D("sp128_16qam", np.array(points), labels, meta=meta)


def normalize(c: Constellation4D) -> Constellation4D:
    """Rescale all coordinates by one factor so mean ||x||^2 = 2 (Es(2D)=1)."""
    scale = np.sqrt(TARGET_ES4D / c.es4d)
    meta = dict(c.meta)
    meta["scale"] = meta.get("scale", 1.0) * scale
    return replace(c, points=c.points * scale, meta=meta)


def marginal_1d(c: Constellation4D, dim: int) -> Marginal1D:
    """Exact distribution of coordinate ``dim`` (1-based) under uniform symbols."""
    if not 1 <= dim <= 4:
        raise ParameterError(f"dim must be 1..4, got {dim}")
    vals = np.sort(c.points[:, dim - 1])
    support, counts = [vals[0]], [1]
    for v in vals[1:]:
        if abs(v - support[-1]) <= 1e-9 * max(1.0, abs(support[-1])):
            counts[-1] += 1
        else:
            support.append(v)
            counts.append(1)
    return Marginal1D(np.array(support), np.array(counts, dtype=float) / c.M)


def min_squared_distance(c: Constellation4D) -> float:
    """Minimum squared Euclidean distance over all point pairs."""
    if c.M < 2:
        raise ParameterError("need at least two points")
    return float(np.min(pdist(c.points, "sqeuclidean")))


def energy_levels(c: Constellation4D) -> np.ndarray:
    """Distinct values of ||x||^2, deduplicated at 1e-9 relative tolerance."""
    e = np.sort(np.sum(c.points**2, axis=1))
    levels = [e[0]]
    for v in e[1:]:
        if v - levels[-1] > 1e-9 * max(1.0, abs(levels[-1])):
            levels.append(v)
    return np.array(levels)


# --- amplitude-parameter resolution -------------------------------------

# Target rates (0.8 * k) whose GMI crossing locates the scan's probe SNR.
_TARGET_RATE = {"6b4dac": 4.8, "7b4dac": 5.6}
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
_scan_cache: dict = {}


def _golden_max(f, lo, hi, tol):
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    return 0.5 * (a + b)


def _probe_snr(fmt, nominal, n, seed):
    from . import metrics  # local import: metrics depends on this module

    build = build_6b4dac if fmt == "6b4dac" else build_7b4dac
    return metrics.required_snr(normalize(build(nominal)), _TARGET_RATE[fmt],
                                tol_db=0.05, n=n, seed=seed)


def _gmi_at(fmt, amps, snr_db, n, seed):
    from . import metrics

    build = build_6b4dac if fmt == "6b4dac" else build_7b4dac
    return metrics.gmi_mc(normalize(build(amps)), snr_db, n, seed).value


def _scan_k(fmt, ratio, probe, n, seed) -> float:
    """Maximize GMI over the 7-bit scaling factor K at a fixed probe SNR.

    K = 1 collapses points, so a coarse grid away from 1 picks the branch
    and a golden-section pass refines it there.
    """
    grid = [k for k in np.arange(0.5, 1.625, 0.125) if abs(k - 1.0) > 0.02]
    best = max(grid, key=lambda k: _gmi_at(fmt, AmplitudeSpec(1.0, ratio, k), probe, n, seed))
    lo, hi = best - 0.12, best + 0.12
    if lo < 1.0 < hi:  # keep the refinement interval on one side of the pole
        lo, hi = (1.02, hi) if best > 1.0 else (lo, 0.98)
    return _golden_max(lambda k: _gmi_at(fmt, AmplitudeSpec(1.0, ratio, k), probe, n, seed),
                       lo, hi, tol=0.005)


def default_amplitudes(fmt: str, n: int = 50_000, seed: int = 1) -> AmplitudeSpec:
    """Default amplitude resolution, per format.

    The 6-bit circuit adds no scaling hardware, so it inherits the stock
    16QAM grid: a2/a1 = 3, no free parameters.  The 7-bit circuit's
    polarization scaler makes its amplitude alphabet a design parameter,
    so its (a2/a1, K) come from the full GMI scan at the 5.6 bit/4D-sym
    operating point.
    """
    if fmt == "6b4dac":
        return AmplitudeSpec(1.0, 3.0)
    if fmt == "7b4dac":
        return auto_amplitudes(fmt, n, seed)
    raise ParameterError(f"no amplitude defaults defined for format '{fmt}'")


def auto_amplitudes(fmt: str, n: int = 50_000, seed: int = 1) -> AmplitudeSpec:
    """Full amplitude scan: maximize GMI over a2/a1 (and K for the 7-bit format).

    Golden-section over the ratio, coordinate descent with the K scan for
    the 7-bit format, all at a probe SNR near the target-rate crossing.
    Results are cached per (fmt, n, seed).
    """
    key = ("auto", fmt, n, seed)
    if key in _scan_cache:
        return _scan_cache[key]
    if fmt not in _TARGET_RATE:
        raise ParameterError(f"no amplitude scan defined for format '{fmt}'")
    if fmt == "6b4dac":
        probe = _probe_snr(fmt, AmplitudeSpec(1.0, 2.2), n, seed)
        ratio = _golden_max(lambda r: _gmi_at(fmt, AmplitudeSpec(1.0, r), probe, n, seed),
                            1.4, 3.8, tol=0.01)
        amps = AmplitudeSpec(1.0, ratio)
    else:
        probe = _probe_snr(fmt, AmplitudeSpec(1.0, 3.0, 1.2), n, seed)
        ratio, kval = 3.0, 1.2
        for _ in range(2):
            ratio = _golden_max(
                lambda r: _gmi_at(fmt, AmplitudeSpec(1.0, r, kval), probe, n, seed),
                2.0, 3.8, tol=0.01)
            kval = _scan_k(fmt, ratio, probe, n, seed)
        amps = AmplitudeSpec(1.0, ratio, kval)
    _scan_cache[key] = amps
    return amps
