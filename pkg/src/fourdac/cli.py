"""Command-line interface.

Subcommands: truth-table, constellation dump, gmi-sweep, required-snr,
ber-sweep.  Sweeps read a YAML config (see configs/ in the repo) and accept
flag overrides; everything is deterministic given the config.
"""

import argparse
import sys
from pathlib import Path

from . import __version__, harness
from .exceptions import ConfigurationError


def _write_out(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _add_common(p):
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--seed", type=int, help="override config seed")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--workers", type=int, help="worker threads (results are invariant)")


def _load_cfg(args, **overrides) -> harness.SimConfig:
    if args.config:
        cfg = harness.load_config(args.config)
    else:
        cfg = harness.SimConfig(formats=[])
    if args.seed is not None:
        cfg.seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    for key, val in overrides.items():
        if val is not None:
            setattr(cfg, key, val)
    return cfg


def _amplitudes_arg(text):
    if text in ("default", "auto"):
        return text
    parts = text.split(",")
    spec = {"ratio": float(parts[0])}
    if len(parts) > 1:
        spec["K"] = float(parts[1])
    return spec


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fourdac",
                                 description="4D amplitude-coded modulation simulator")
    ap.add_argument("--version", action="version", version=f"fourdac {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("truth-table", help="print a circuit mapping table")
    p.add_argument("--kac", type=int, choices=(6, 7), required=True)
    p.add_argument("--out")

    p = sub.add_parser("constellation", help="constellation artifacts")
    csub = p.add_subparsers(dest="subcommand", required=True)
    d = csub.add_parser("dump", help="CSV of points, labels and energies")
    d.add_argument("--format", required=True, choices=harness.FORMATS)
    d.add_argument("--amplitudes", type=_amplitudes_arg, default=None,
                   help="'default', 'auto', or 'ratio[,K]'")
    d.add_argument("--geometry", choices=("rect", "star"), default=None)
    d.add_argument("--raw", action="store_true", help="skip normalization")
    _add_common(d)

    p = sub.add_parser("gmi-sweep", help="GMI vs SNR CSV")
    p.add_argument("--format", action="append", choices=harness.FORMATS)
    p.add_argument("--snr", help="comma list or lo:hi:step (dB)")
    p.add_argument("--n", type=int, help="symbols per point")
    p.add_argument("--amplitudes", type=_amplitudes_arg, default=None)
    _add_common(p)

    p = sub.add_parser("required-snr", help="SNR at a target GMI")
    p.add_argument("--format", action="append", choices=harness.FORMATS)
    p.add_argument("--target", type=float, help="target GMI (bit/4D-sym)")
    p.add_argument("--tol-db", type=float, dest="tol_db")
    p.add_argument("--n", type=int)
    p.add_argument("--amplitudes", type=_amplitudes_arg, default=None)
    _add_common(p)

    p = sub.add_parser("ber-sweep", help="coded BER vs SNR CSV")
    p.add_argument("--format", action="append", choices=harness.FORMATS)
    p.add_argument("--snr", help="comma list or lo:hi:step (dB)")
    p.add_argument("--code", help="toy | r45_64800 | path to parity file")
    p.add_argument("--max-frames", type=int, dest="max_frames")
    _add_common(p)
    return ap


def _parse_snr(text):
    if text is None:
        return None
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        out = []
        v = lo
        while v <= hi + 1e-9:
            out.append(round(v, 9))
            v += step
        return out
    return [float(x) for x in text.split(",")]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "truth-table":
            _write_out(harness.run_truth_table(args.kac), args.out)
        elif args.command == "constellation":
            cfg = _load_cfg(args, amplitudes=args.amplitudes,
                            pm8qam_geometry=args.geometry)
            c, _ = harness.build_constellation(args.format, cfg,
                                               normalized=not args.raw)
            _write_out(harness.dump_constellation(c), args.out)
        elif args.command == "gmi-sweep":
            cfg = _load_cfg(args, formats=args.format, snr_grid=_parse_snr(args.snr),
                            n_symbols=args.n, amplitudes=args.amplitudes)
            _write_out(harness.run_gmi_sweep(cfg), args.out)
        elif args.command == "required-snr":
            cfg = _load_cfg(args, formats=args.format, target_gmi=args.target,
                            tol_db=args.tol_db, n_symbols=args.n,
                            amplitudes=args.amplitudes)
            _write_out(harness.run_required_snr(cfg), args.out)
        elif args.command == "ber-sweep":
            cfg = _load_cfg(args, formats=args.format, snr_grid=_parse_snr(args.snr))
            if args.code or args.max_frames:
                fec_cfg = dict(cfg.fec or {})
                if args.code:
                    fec_cfg["code"] = args.code
                if args.max_frames:
                    fec_cfg["max_frames"] = args.max_frames
                cfg.fec = fec_cfg
            _write_out(harness.run_ber_sweep(cfg), args.out)
    except Exception as e:  # uniform diagnostics, nonzero exit
        print(f"fourdac: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
