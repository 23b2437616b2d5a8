"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure
(no convergence, non-PSD projector, degenerate spectrum).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .array_model import AngleGrid, build_manifold
from .config import RunConfig, load_config
from .errors import DimensionMismatch, DoaError, NumericalError
from .evaluation import (bench_scan_ranges, dual_precision_validate, write_accuracy_csv,
                         write_bench_csv, write_bench_sidecar)
from .pipeline import estimate_doa
from .signal_sim import SnapshotMatrix, generate_snapshots, read_snapshots, write_snapshots
from .spectrum import resolve_workers, write_spectrum_binary, write_spectrum_csv
from .subspace import ALGORITHMS

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _workers(text: str):
    return "auto" if text == "auto" else resolve_workers(text)


def _ranges(text: str) -> list[AngleGrid]:
    return [AngleGrid.parse(part.strip()) for part in text.split(",") if part.strip()]


def _algorithms(arg: str | None, cfg: RunConfig) -> tuple[str, ...]:
    if arg is None:
        return cfg.algorithms
    return ALGORITHMS if arg == "all" else (arg,)


def _precisions(arg: str | None, cfg: RunConfig) -> tuple[str, ...]:
    p = arg or cfg.precision
    return ("single", "double") if p == "both" else (p,)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.seed)
    snap = generate_snapshots(cfg.scenario)
    path = _out_dir(args) / "snapshots.bin"
    write_snapshots(path, snap)
    sc = cfg.scenario
    snr = "noiseless" if sc.noiseless else f"{sc.snr_db:g} dB"
    print(f"seed={sc.seed} snr={snr} noise_var={sc.noise_variance:.6g} "
          f"m={snap.shape[0]} N={snap.shape[1]} d={sc.num_sources}")
    print(f"wrote {path}")
    return EXIT_OK


def _print_estimate(est, precision: str) -> None:
    flag = "  [underdetermined: fewer peaks than sources]" if est.underdetermined else ""
    print(f"[{est.algorithm} / {precision}] D={est.model_order}{flag}")
    for rank, p in enumerate(est.peaks, 1):
        print(f"  {rank}. azimuth={p.azimuth:g} deg  elevation={p.elevation:g} deg  power={p.power:.6g}")


def cmd_estimate(args) -> int:
    cfg = load_config(args.config, args.seed)
    if args.snapshots:
        snap = read_snapshots(args.snapshots)
        m = cfg.scenario.geometry.num_elements
        if snap.shape[0] != m:
            raise DimensionMismatch(
                f"snapshot file has {snap.shape[0]} channels but the configured array has {m} elements")
    else:
        snap = generate_snapshots(cfg.scenario)
    if snap.precision != "double":
        snap = SnapshotMatrix(snap.data.astype("complex128"), "double", snap.seed, snap.snr_db, snap.num_sources)
    out = _out_dir(args)
    workers = args.workers if args.workers is not None else cfg.workers
    for precision in _precisions(args.precision, cfg):
        manifold = build_manifold(cfg.scenario.geometry, cfg.grid, precision)
        for alg in _algorithms(args.alg, cfg):
            res = estimate_doa(snap, manifold, cfg.model_order, alg, workers)
            _print_estimate(res.estimate, precision)
            stem = out / f"spectrum_{alg}_{precision}"
            write_spectrum_csv(stem.with_suffix(".csv"), res.spectrum)
            write_spectrum_binary(stem.with_suffix(".bin"), res.spectrum)
            if args.plot:
                from .plotting import plot_spectrum

                plot_spectrum(res.spectrum, stem.with_suffix(".png"), res.estimate)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = load_config(args.config, args.seed)
    measured = args.precision or "single"
    if measured == "both":
        measured = "single"
    reports = [
        dual_precision_validate(cfg.scenario, cfg.grid, alg, cfg.model_order, measured, args.ground_truth)
        for alg in _algorithms(args.alg, cfg)
    ]
    print(f"{'algorithm':<10}{'pair':<15}{'grid':<9}{'percent_error':>15}{'max_abs_rel':>14}  match")
    for r in reports:
        print(f"{r.algorithm:<10}{r.precision_pair:<15}{r.grid:<9}{r.percent_error:>15.6f}"
              f"{r.max_abs_relative:>14.6f}  {str(r.estimates_match).lower()}")
    path = _out_dir(args) / "accuracy.csv"
    write_accuracy_csv(path, reports)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = load_config(args.config, args.seed)
    if args.repeats is not None and args.repeats < 3:
        print("error: --repeats must be at least 3", file=sys.stderr)
        return EXIT_USAGE
    ranges = _ranges(args.ranges) if args.ranges else [AngleGrid.parse(r) for r in cfg.bench_ranges]
    precision = args.precision if args.precision in ("single", "double") else "double"
    workers = args.workers if args.workers is not None else "auto"
    out = _out_dir(args)
    for alg in _algorithms(args.alg, cfg) if args.alg else (cfg.bench_algorithm,):
        report = bench_scan_ranges(cfg.scenario, ranges, alg, args.repeats or cfg.bench_repeats,
                                   workers, precision, cfg.model_order)
        suffix = "" if args.alg != "all" else f"_{alg}"
        write_bench_csv(out / f"bench{suffix}.csv", report)
        write_bench_sidecar(out / f"bench{suffix}_env.json", report)
        print(f"{'range':<9}{'1 worker ms':>13}{'multi ms':>11}{'workers':>9}{'speedup':>9}")
        for r in report.ranges:
            print(f"{r.az_count}x{r.el_count:<5}{r.single_ms:>13.3f}{r.multi_ms:>11.3f}{r.workers:>9}{r.speedup:>9.3f}")
        if args.plot:
            from .plotting import plot_bench

            plot_bench(report, out / f"bench{suffix}.png")
        print(f"wrote {out / f'bench{suffix}.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration (default: built-in scenario)")
    common.add_argument("--seed", type=int, help="override the scenario seed")
    common.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")

    parser = _Parser(prog="subspace-doa", description="Noise-subspace DOA estimation (PHD, MUSIC, EV, MN).")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="write a synthetic snapshot file")
    p.set_defaults(func=cmd_simulate)

    alg_choices = [*ALGORITHMS, "all"]
    p = sub.add_parser("estimate", parents=[common], help="estimate DOAs and write spectra")
    p.add_argument("--snapshots", metavar="FILE", help="snapshot file (default: simulate from config)")
    p.add_argument("--alg", choices=alg_choices)
    p.add_argument("--precision", choices=["single", "double", "both"])
    p.add_argument("--workers", type=_workers, metavar="{N|auto}")
    p.add_argument("--plot", action="store_true", help="also render PNG figures")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("validate", parents=[common], help="single- vs double-precision accuracy report")
    p.add_argument("--alg", choices=alg_choices)
    p.add_argument("--precision", choices=["single", "double", "both"], help="measured precision (default single)")
    p.add_argument("--ground-truth", choices=["single", "double"], default="double")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", parents=[common], help="scan-range timing, one worker vs many")
    p.add_argument("--alg", choices=alg_choices)
    p.add_argument("--ranges", metavar="AxB[,AxB...]")
    p.add_argument("--repeats", type=int, metavar="N")
    p.add_argument("--workers", type=_workers, metavar="{N|auto}")
    p.add_argument("--precision", choices=["single", "double"])
    p.add_argument("--plot", action="store_true", help="also render a PNG figure")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DoaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
