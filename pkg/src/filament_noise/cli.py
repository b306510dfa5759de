"""Command-line interface.

Exit codes: 0 success, 2 configuration, 3 file I/O, 4 numerical failure,
5 degenerate statistics.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io
from .config import load_config
from .detection import Channel, DetectorModel, conjugate_wavelength
from .errors import ConfigError, FilamentNoiseError, FormatError
from .pipeline import analyze, map_to_csv, metrics_to_json, report, simulate


def _window(text):
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like lo:hi, got {text!r}")


def _channels(text, bandwidth):
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            c, w = part.split(":")
            out.append(Channel(float(c), float(w)))
        else:
            out.append(Channel(float(part), bandwidth))
    return out


def cmd_simulate(args):
    config = load_config(args.config)
    arms = ("filament", "reference") if args.arm == "both" else (args.arm,)
    outdir = Path(args.output) if args.output else config.output_dir
    print(f"seed {config.seed}")
    print(f"digest {config.digest_hex}")
    results = simulate(config, arms, workers=args.workers)
    for arm, ens in results.items():
        path = outdir / f"{arm}.fnse"
        io.save_ensemble(ens, path)
        print(f"wrote {path} ({ens.n_shots} shots x {ens.n_bins} bins)")
    return 0


def cmd_analyze(args):
    ens = io.load_ensemble(args.input)
    ref = io.load_ensemble(args.reference) if args.reference else None
    channels = _channels(args.channels, args.bandwidth) if args.channels else []
    detector = DetectorModel(poisson=args.poisson)
    cmap, metrics = analyze(
        ens, args.lambda0, channels, args.window or [], ref, detector,
        args.detector_seed, args.target_photons, args.noise_mode,
    )
    outdir = Path(args.output)
    io.atomic_write(outdir / "map.csv", map_to_csv(cmap, ens.config_digest.hex()))
    io.atomic_write(outdir / "metrics.json", metrics_to_json(metrics))
    print(f"wrote {outdir / 'map.csv'} and {outdir / 'metrics.json'}")
    return 0


def cmd_conjugate(args):
    print(f"{conjugate_wavelength(args.lambda0, args.lambda2):.2f}")
    return 0


def cmd_report(args):
    try:
        metrics = json.loads(Path(args.input).read_text(encoding="utf-8"))
    except OSError as exc:
        raise FormatError(f"cannot read {args.input}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{args.input} is not valid JSON: {exc}") from exc
    sys.stdout.write(report(metrics, force=args.force))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="filament-noise",
        description="Simulate and analyze spectral correlations of SPM-broadened pulses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the filament and/or reference arm")
    p.add_argument("--config", required=True)
    p.add_argument("--arm", choices=("filament", "reference", "both"), default="both")
    p.add_argument("--output", help="output directory (default: output.dir of the config)")
    p.add_argument("--workers", type=int, default=None, help="override shots.workers")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="correlation map and noise metrics of an ensemble")
    p.add_argument("--input", required=True, help=".fnse or .csv ensemble")
    p.add_argument("--reference", help="reference-arm ensemble for dB figures")
    p.add_argument("--lambda0", type=float, required=True, help="carrier wavelength, nm")
    p.add_argument("--channels", help="comma-separated centres, optionally centre:width")
    p.add_argument("--bandwidth", type=float, default=9.0, help="default channel width, nm")
    p.add_argument("--window", type=_window, action="append", help="lo:hi filter window, nm")
    p.add_argument("--output", default=".")
    p.add_argument("--poisson", action=argparse.BooleanOptionalAction, default=True,
                   help="draw Poisson photon counts")
    p.add_argument("--detector-seed", type=int, default=0)
    p.add_argument("--target-photons", type=float, default=None,
                   help="attenuate each channel to this mean photon number")
    p.add_argument("--noise-mode", choices=("rin", "variance"), default="rin")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("conjugate", help="conjugate wavelength under 2/l0 = 1/l1 + 1/l2")
    p.add_argument("lambda0", type=float)
    p.add_argument("lambda2", type=float)
    p.set_defaults(func=cmd_conjugate)

    p = sub.add_parser("report", help="summarize a metrics file")
    p.add_argument("--input", required=True)
    p.add_argument("--force", action="store_true",
                   help="compare inputs even if their config digests differ")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FilamentNoiseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, ConfigError) and len(exc.problems) > 1:
            for problem in exc.problems:
                print(f"  - {problem}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
