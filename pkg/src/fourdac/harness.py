"""Experiment orchestration: configs, sweeps, CSV/text artifacts.

A sweep is a pure function of its configuration: every random quantity is
keyed by (seed, domain, index), tasks fan out over a thread pool but merge
in fixed order, and CSV bodies carry no timestamps, so reruns are
byte-identical for any worker count.

SNR columns are Es(2D)/N0 in dB under the Es(2D)=1 normalization; LLRs use
the positive-favors-bit-0 convention.
"""

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import __version__, channel, demapper, fec, metrics
from .alphabets import AmplitudeSpec
from .circuits import encode6, encode7
from .constellations import (Constellation4D, auto_amplitudes, build_6b4dac,
                             build_7b4dac, build_pm8qam, build_sp128_16qam,
                             default_amplitudes, normalize)
from .exceptions import ConfigurationError
from .seeding import bit_stream

__all__ = [
    "SimConfig",
    "load_config",
    "build_constellation",
    "run_gmi_sweep",
    "run_required_snr",
    "run_ber_sweep",
    "run_truth_table",
    "dump_constellation",
]

FORMATS = ("6b4dac", "7b4dac", "pm8qam", "sp128_16qam")
SCAN_N = 50_000  # symbols per GMI evaluation inside amplitude scans

# Fixed row orders of the truth-table artifact (part of the output format).
TRUTH_ROWS_6 = [(0, 0), (0, 1), (1, 1), (1, 0)]
TRUTH_ROWS_7 = [(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 1),
                (1, 1, 0), (0, 0, 1), (0, 1, 1), (1, 0, 1)]


@dataclass
class SimConfig:
    """One experiment: formats, SNR grid, sizes, seed, optional FEC block."""

    formats: list
    snr_grid: list = field(default_factory=list)
    n_symbols: int = 200_000
    seed: int = 0
    amplitudes: object = "default"   # "default" | "auto" | {"ratio": r, "K": k}
    pm8qam_geometry: str = "rect"
    ring_ratio: float = 1.0 + np.sqrt(3.0)
    target_gmi: float | None = None
    tol_db: float = 0.05
    fec: dict | None = None
    workers: int = 1

    def __post_init__(self):
        for fmt in self.formats:
            if fmt not in FORMATS:
                raise ConfigurationError(f"unknown format '{fmt}' (choose from {FORMATS})")
        grid = [float(s) for s in self.snr_grid]
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigurationError(f"snr_grid must be strictly increasing, got {grid}")
        self.snr_grid = grid


def load_config(path) -> SimConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{path}: config must be a mapping")
    if "format" in raw:  # single-format convenience spelling
        raw["formats"] = [raw.pop("format")]
    known = {f.name for f in SimConfig.__dataclass_fields__.values()}
    unknown = set(raw) - known
    if unknown:
        raise ConfigurationError(f"{path}: unknown config keys {sorted(unknown)}")
    try:
        return SimConfig(**raw)
    except TypeError as e:
        raise ConfigurationError(f"{path}: {e}") from e


def build_constellation(fmt: str, cfg: SimConfig, normalized: bool = True):
    """Build one format (normalized by default); returns (constellation, resolved params)."""
    if fmt in ("6b4dac", "7b4dac"):
        mode = cfg.amplitudes
        if isinstance(mode, dict):
            amps = AmplitudeSpec(1.0, float(mode["ratio"]), float(mode.get("K", 1.2)))
        elif mode == "default":
            amps = default_amplitudes(fmt, n=SCAN_N, seed=cfg.seed)
        elif mode == "auto":
            amps = auto_amplitudes(fmt, n=SCAN_N, seed=cfg.seed)
        else:
            raise ConfigurationError(f"bad amplitudes spec {mode!r}")
        c = build_6b4dac(amps) if fmt == "6b4dac" else build_7b4dac(amps)
        resolved = {"a2_over_a1": amps.a2 / amps.a1}
        if fmt == "7b4dac":
            resolved["K"] = amps.K
    elif fmt == "pm8qam":
        c = build_pm8qam(cfg.pm8qam_geometry, cfg.ring_ratio)
        resolved = {"geometry": cfg.pm8qam_geometry}
        if cfg.pm8qam_geometry == "star":
            resolved["ring_ratio"] = cfg.ring_ratio
    else:
        c = build_sp128_16qam()
        resolved = {}
    return (normalize(c) if normalized else c), resolved


def _fmt_params(resolved: dict) -> str:
    return ";".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                    for k, v in sorted(resolved.items())) or "-"


def _csv_header(cfg: SimConfig, columns) -> list:
    return [
        f"# fourdac {__version__}",
        "# snr convention: Es(2D)/N0 in dB, Es(2D)=1 normalization",
        f"# seed: {cfg.seed}",
        ",".join(columns),
    ]


def _pooled(tasks, workers):
    """Run tasks (list of zero-arg callables) and return results in task order."""
    if workers <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(t) for t in tasks]
        return [f.result() for f in futures]


def run_gmi_sweep(cfg: SimConfig) -> str:
    """One GMI row per (format, snr); returns the CSV text."""
    if not cfg.formats or not cfg.snr_grid:
        raise ConfigurationError("gmi-sweep needs at least one format and one SNR point")
    if cfg.n_symbols < 10_000:
        raise ConfigurationError("GMI runs need n_symbols >= 10^4")
    built = {fmt: build_constellation(fmt, cfg) for fmt in cfg.formats}

    def task(fmt, snr):
        c, resolved = built[fmt]
        est = metrics.gmi_mc(c, snr, cfg.n_symbols, cfg.seed)
        return (fmt, snr, est, resolved)

    results = _pooled([lambda f=f, s=s: task(f, s)
                       for f in cfg.formats for s in cfg.snr_grid], cfg.workers)
    lines = _csv_header(cfg, ["format", "snr_db", "gmi", "std_error", "n", "seed", "params"])
    for fmt, snr, est, resolved in results:
        lines.append(f"{fmt},{snr:.4f},{est.value:.6f},{est.std_error:.6f},"
                     f"{est.n_symbols},{cfg.seed},{_fmt_params(resolved)}")
    return "\n".join(lines) + "\n"


def run_required_snr(cfg: SimConfig) -> str:
    """Required-SNR rows at cfg.target_gmi for each format."""
    if not cfg.formats:
        raise ConfigurationError("required-snr needs at least one format")
    if cfg.target_gmi is None:
        raise ConfigurationError("required-snr needs target_gmi")

    def task(fmt):
        c, resolved = build_constellation(fmt, cfg)
        snr = metrics.required_snr(c, cfg.target_gmi, tol_db=cfg.tol_db,
                                   n=cfg.n_symbols, seed=cfg.seed)
        return (fmt, snr, resolved)

    results = _pooled([lambda f=f: task(f) for f in cfg.formats], cfg.workers)
    lines = _csv_header(cfg, ["format", "target_gmi", "required_snr_db", "tol_db",
                              "n", "seed", "params"])
    for fmt, snr, resolved in results:
        lines.append(f"{fmt},{cfg.target_gmi:.4f},{snr:.4f},{cfg.tol_db:.4f},"
                     f"{cfg.n_symbols},{cfg.seed},{_fmt_params(resolved)}")
    return "\n".join(lines) + "\n"


def _resolve_code(fec_cfg: dict) -> fec.LdpcCode:
    source = fec_cfg.get("code", "toy")
    if source == "toy":
        return fec.load_code(fec.toy_code_path())
    if source == "r45_64800":
        return fec.load_code(fec.big_code_path())
    return fec.load_code(source)


def run_ber_frame(c: Constellation4D, code: fec.LdpcCode, sched: fec.FrameSchedule,
                  lut: np.ndarray, snr_db: float, seed: int, frame: int,
                  max_iters: int, variant: str, alpha: float):
    """One coded frame through the chain; returns error counts and iterations."""
    info = bit_stream(seed, f"info-bits/frame{frame}", code.k_c)
    cw = fec.encode(code, info)
    words = fec.frame_to_symbols(cw, sched)
    ints = words @ (1 << np.arange(sched.k_ac - 1, -1, -1))
    tx = c.points[lut[ints]]
    rx = channel.transmit(tx, channel.ChannelConfig(snr_db, seed),
                          start_index=frame * sched.n)
    sigma2 = channel.snr_to_sigma2(snr_db)
    llrs = demapper.exact_llrs(rx, c, sigma2)
    code_llrs = fec.deframe_llrs(llrs, sched)
    pre_errs = int(np.count_nonzero((code_llrs < 0) != cw))
    out, _, iters = fec.decode(code, code_llrs, max_iters=max_iters,
                               variant=variant, alpha=alpha)
    post_errs = int(np.count_nonzero(out != info))
    return pre_errs, post_errs, iters


def run_ber_sweep(cfg: SimConfig) -> str:
    """Pre/post-FEC BER per (format, snr), stopping at enough errors or max frames."""
    if not cfg.formats or not cfg.snr_grid:
        raise ConfigurationError("ber-sweep needs at least one format and one SNR point")
    if cfg.fec is None:
        raise ConfigurationError("ber-sweep needs a fec block in the config")
    code = _resolve_code(cfg.fec)
    max_iters = int(cfg.fec.get("max_iters", 50))
    variant = cfg.fec.get("variant", "sum_product")
    alpha = float(cfg.fec.get("alpha", 0.75))
    interleave = cfg.fec.get("interleave", "block")
    max_frames = int(cfg.fec.get("max_frames", 100))
    target_errs = int(cfg.fec.get("target_bit_errors", 100))

    def task(fmt, snr):
        c, resolved = build_constellation(fmt, cfg)
        sched = fec.make_schedule(code.n_c, c.k, interleave, cfg.seed)
        lut = c.point_index()
        pre = post = frames = iters_total = 0
        while frames < max_frames:
            p, q, it = run_ber_frame(c, code, sched, lut, snr, cfg.seed, frames,
                                     max_iters, variant, alpha)
            pre += p
            post += q
            iters_total += it
            frames += 1
            if post >= target_errs:
                break
        stop = "errors" if post >= target_errs else "frames"
        return (fmt, snr, frames, pre / (frames * code.n_c),
                post / (frames * code.k_c), iters_total / frames, stop, resolved)

    results = _pooled([lambda f=f, s=s: task(f, s)
                       for f in cfg.formats for s in cfg.snr_grid], cfg.workers)
    lines = _csv_header(cfg, ["format", "snr_db", "frames", "pre_fec_ber",
                              "post_fec_ber", "avg_iters", "seed", "stop_reason", "params"])
    for fmt, snr, frames, pre, post, avg_it, stop, resolved in results:
        lines.append(f"{fmt},{snr:.4f},{frames},{pre:.6e},{post:.6e},"
                     f"{avg_it:.2f},{cfg.seed},{stop},{_fmt_params(resolved)}")
    return "\n".join(lines) + "\n"


def run_truth_table(k_ac: int) -> str:
    """The circuit mapping tables in a fixed textual format for conformance diffs."""
    out = io.StringIO()
    if k_ac == 6:
        print("# 4D amplitude coding truth table, k_ac=6", file=out)
        print("# signs: c1=b1 c3=b2 c5=b3 c7=b4 ; s_i=(-1)^c(2i-1)", file=out)
        print("[b5b6] -> [c2c4c6c8] -> amplitudes", file=out)
        for b5, b6 in TRUTH_ROWS_6:
            w = encode6((0, 0, 0, 0, b5, b6))
            amp = ",".join("a2" if a else "a1" for a in w.amplitude_bits)
            bits = "".join(str(x) for x in w.amplitude_bits)
            print(f"[{b5}{b6}] -> [{bits}] -> ({amp})", file=out)
    elif k_ac == 7:
        print("# 4D amplitude coding truth table, k_ac=7", file=out)
        print("# signs: c1=b1 c3=b2 c5=b3 c7=b4 ; s_i=(-1)^c(2i-1)", file=out)
        print("# t = b7 xor (b5 and b6); t=1 scales X-pol to (as,as), t=0 Y-pol", file=out)
        print("[b5b6b7] -> [c2c4c6c8] -> amplitudes (t)", file=out)
        for b5, b6, b7 in TRUTH_ROWS_7:
            w = encode7((0, 0, 0, 0, b5, b6, b7))
            scaled = (0, 1) if w.scale_to_x else (2, 3)
            amp = ",".join("as" if i in scaled else ("a2" if w.amplitude_bits[i] else "a1")
                           for i in range(4))
            bits = "".join(str(x) for x in w.amplitude_bits)
            print(f"[{b5}{b6}{b7}] -> [{bits}] -> ({amp}) (t={int(w.scale_to_x)})", file=out)
    else:
        raise ConfigurationError(f"k_ac must be 6 or 7, got {k_ac}")
    return out.getvalue()


def dump_constellation(c: Constellation4D) -> str:
    """CSV dump, one row per point: label_bits,x1,x2,x3,x4,energy."""
    lines = ["label_bits,x1,x2,x3,x4,energy"]
    order = np.argsort(c.label_ints())
    for i in order:
        bits = "".join(str(b) for b in c.labels[i])
        x = c.points[i]
        e = float(np.sum(x**2))
        coords = ",".join(f"{v:.12g}" for v in x)
        lines.append(f"{bits},{coords},{e:.12g}")
    return "\n".join(lines) + "\n"
