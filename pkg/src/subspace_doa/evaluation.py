"""Accuracy validation, analytic step costs and the scan-range benchmark."""

from __future__ import annotations

import csv
import json
import math
import os
import platform
import statistics
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .array_model import AngleGrid, build_manifold
from .errors import InvalidParameter
from .pipeline import STEPS, estimate_doa
from .signal_sim import ScenarioConfig, generate_snapshots
from .spectrum import resolve_workers


def percent_error(measured, ground_truth) -> float:
    """Mean absolute relative deviation in percent: (100/N) sum |y - g| / |g|."""
    y = np.asarray(measured, dtype=np.float64).ravel()
    g = np.asarray(ground_truth, dtype=np.float64).ravel()
    if y.size != g.size:
        raise InvalidParameter(f"length mismatch: {y.size} measured vs {g.size} ground-truth values")
    if y.size == 0:
        raise InvalidParameter("percent_error needs at least one value")
    if np.any(g == 0):
        raise InvalidParameter("ground truth contains an exact zero")
    return float(100.0 / y.size * np.sum(np.abs(y - g) / np.abs(g)))


@dataclass(frozen=True)
class AccuracyReport:
    algorithm: str
    percent_error: float
    num_points: int
    max_abs_relative: float
    estimates_match: bool
    precision_pair: str = "single/double"
    grid: str = ""


def dual_precision_validate(cfg: ScenarioConfig, grid: AngleGrid, alg: str, model_order: int | None = None,
                            measured: str = "single", ground_truth: str = "double",
                            workers: int | str | None = 1) -> AccuracyReport:
    """Compare the pipeline in ``measured`` precision against ``ground_truth``.

    Both runs see the same snapshot draw; it is generated in double and
    rounded to the measured precision.
    """
    d = model_order or cfg.num_sources
    snap = generate_snapshots(cfg)
    runs = {}
    for p in {measured, ground_truth}:
        runs[p] = estimate_doa(snap, build_manifold(cfg.geometry, grid, p), d, alg, workers)
    y, g = runs[measured], runs[ground_truth]
    yv = y.spectrum.values.astype(np.float64)
    gv = g.spectrum.values.astype(np.float64)
    rel = np.abs(yv - gv) / np.abs(gv)
    return AccuracyReport(
        algorithm=alg,
        percent_error=percent_error(yv, gv),
        num_points=grid.size,
        max_abs_relative=float(100.0 * rel.max()),
        estimates_match=sorted(y.estimate.cells) == sorted(g.estimate.cells),
        precision_pair=f"{measured}/{ground_truth}",
        grid=grid.label,
    )


ACCURACY_FIELDS = ["algorithm", "precision_pair", "grid", "percent_error", "max_abs_rel", "estimates_match"]


def write_accuracy_csv(path, reports: list[AccuracyReport]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ACCURACY_FIELDS)
        for r in reports:
            w.writerow([r.algorithm, r.precision_pair, r.grid, repr(r.percent_error),
                        repr(r.max_abs_relative), str(r.estimates_match).lower()])


def read_accuracy_csv(path) -> list[AccuracyReport]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        a, b = (int(v) for v in row["grid"].split("x"))
        out.append(AccuracyReport(
            algorithm=row["algorithm"],
            percent_error=float(row["percent_error"]),
            num_points=a * b,
            max_abs_relative=float(row["max_abs_rel"]),
            estimates_match=row["estimates_match"] == "true",
            precision_pair=row["precision_pair"],
            grid=row["grid"],
        ))
    return out


# -- analytic cost model ------------------------------------------------------

@dataclass(frozen=True)
class CostModel:
    M: int
    N: int
    D: int
    L: int


def step_costs(model: CostModel) -> dict[str, float]:
    """Operation counts per pipeline step from the closed-form cost formulas.

    Step-6 uses the natural logarithm. Steps 1-5 are integers for every
    valid input and are returned as ints.
    """
    M, N, D, L = model.M, model.N, model.D, model.L
    if min(M, N, D, L) < 1:
        raise InvalidParameter("all cost-model counts must be >= 1")
    # doubled to stay in integers; every bracket below is even
    step1 = (3 * M * M * N + M * N) // 2
    step4 = (2 * M**3 + (1 - 2 * D) * M * M - (1 + 2 * D) * M) // 2
    return {
        "step1": step1,
        "step2_3": 12 * M**3,
        "step4": step4,
        "step5": L * (2 * N * N + N),
        "step6": L * math.log(L),
    }


def step5_share(costs: dict[str, float]) -> float:
    return costs["step5"] / sum(costs.values())


# -- timing ------------------------------------------------------------------

@dataclass
class RangeTiming:
    az_count: int
    el_count: int
    single_ms: float
    multi_ms: float
    workers: int

    @property
    def speedup(self) -> float:
        return self.single_ms / self.multi_ms


@dataclass
class BenchReport:
    algorithm: str
    ranges: list[RangeTiming]
    environment: dict = field(default_factory=dict)


def environment_descriptor(precision: str, workers: int) -> dict:
    cpu = platform.processor() or platform.machine()
    try:
        with open("/proc/cpuinfo") as fh:
            for line in fh:
                if line.startswith("model name"):
                    cpu = line.split(":", 1)[1].strip()
                    break
    except OSError:
        pass
    return {
        "cpu_model": cpu,
        "logical_cores": os.cpu_count(),
        "precision": precision,
        "multi_workers": workers,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def _median_ms(fn, repeats: int, trace: list | None, label: str) -> float:
    fn()  # warm-up, discarded
    samples = []
    for _ in range(repeats):
        if trace is not None:
            trace.append(("timed_start", label))
        t0 = time.perf_counter_ns()
        fn()
        samples.append((time.perf_counter_ns() - t0) / 1e6)
        if trace is not None:
            trace.append(("timed_end", label))
    return round(statistics.median(samples), 3)


def bench_scan_ranges(cfg: ScenarioConfig, ranges: list[AngleGrid], alg: str = "music",
                      repeats: int = 5, workers: int | str | None = "auto", precision: str = "double",
                      model_order: int | None = None, trace: list | None = None) -> BenchReport:
    """Median post-manifold pipeline time per scan range, one worker vs ``workers``.

    The manifold table is built before any timed region; ``trace`` (if given)
    receives ``(event, label)`` tuples so callers can check that.
    """
    if repeats < 3:
        raise InvalidParameter(f"repeats must be >= 3, got {repeats}")
    n_workers = resolve_workers(workers)
    d = model_order or cfg.num_sources
    snap = generate_snapshots(cfg)
    rows = []
    for grid in ranges:
        if trace is not None:
            trace.append(("manifold_start", grid.label))
        manifold = build_manifold(cfg.geometry, grid, precision)
        if trace is not None:
            trace.append(("manifold_end", grid.label))
        single = _median_ms(lambda: estimate_doa(snap, manifold, d, alg, 1), repeats, trace, grid.label)
        multi = _median_ms(lambda: estimate_doa(snap, manifold, d, alg, n_workers), repeats, trace, grid.label)
        rows.append(RangeTiming(*grid.shape, single, multi, n_workers))
    return BenchReport(alg, rows, environment_descriptor(precision, n_workers))


def hotspot_profile(cfg: ScenarioConfig, grid: AngleGrid, alg: str = "music", repeats: int = 5,
                    precision: str = "double", model_order: int | None = None) -> dict[str, float]:
    """Median seconds per pipeline step for a single-worker run, manifold excluded."""
    d = model_order or cfg.num_sources
    snap = generate_snapshots(cfg)
    manifold = build_manifold(cfg.geometry, grid, precision)
    estimate_doa(snap, manifold, d, alg, 1)
    runs = [estimate_doa(snap, manifold, d, alg, 1).timings for _ in range(repeats)]
    return {k: statistics.median(r[k] for r in runs) for k in STEPS}


BENCH_FIELDS = ["algorithm", "az_count", "el_count", "workers", "median_ms", "speedup"]


def write_bench_csv(path, report: BenchReport) -> None:
    """One row per range: the multi-worker median and its speedup over one worker."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BENCH_FIELDS)
        for r in report.ranges:
            w.writerow([report.algorithm, r.az_count, r.el_count, r.workers,
                        f"{r.multi_ms:.3f}", f"{r.speedup:.4f}"])


def write_bench_sidecar(path, report: BenchReport) -> None:
    payload = {
        "environment": report.environment,
        "algorithm": report.algorithm,
        "ranges": [dict(asdict(r), speedup=r.speedup) for r in report.ranges],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
