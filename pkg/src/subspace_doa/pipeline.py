"""The six-step estimation pipeline with optional per-step timing."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .array_model import ManifoldTable
from .errors import DimensionMismatch
from .linalg import hermitian_svd
from .signal_sim import SnapshotMatrix
from .spectrum import DoaEstimate, PseudoSpectrum, find_peaks, scan, select_doa
from .subspace import NoiseProjector, check_algorithm, projector_from_svd, sample_covariance

STEPS = ("step1", "step2", "step3_4", "step5", "step6")


@dataclass(frozen=True, eq=False)
class PipelineResult:
    spectrum: PseudoSpectrum
    estimate: DoaEstimate
    timings: dict[str, float]


def estimate_doa(snapshots: SnapshotMatrix, manifold: ManifoldTable, model_order: int,
                 algorithm: str, workers: int | str | None = 1) -> PipelineResult:
    """Run covariance -> decomposition -> projector -> scan -> peak selection.

    The snapshots are cast to the manifold's precision first. ``timings``
    holds seconds spent in each step (keys in ``STEPS``).
    """
    check_algorithm(algorithm)
    if snapshots.shape[0] != manifold.num_elements:
        raise DimensionMismatch(
            f"snapshots have {snapshots.shape[0]} channels but the array has {manifold.num_elements} elements")
    x = snapshots.astype(manifold.precision)
    clock = time.perf_counter
    t0 = clock()
    cov = sample_covariance(x)
    t1 = clock()
    svd = hermitian_svd(cov.R)
    t2 = clock()
    proj = NoiseProjector(projector_from_svd(svd, model_order, algorithm), algorithm, model_order)
    t3 = clock()
    spec = scan(manifold, proj, workers)
    t4 = clock()
    peaks = find_peaks(spec)
    est = select_doa(peaks, model_order, manifold.grid, algorithm,
                     {"grid": manifold.grid.label, "seed": snapshots.seed, "precision": manifold.precision})
    t5 = clock()
    timings = dict(zip(STEPS, (t1 - t0, t2 - t1, t3 - t2, t4 - t3, t5 - t4)))
    est.metadata["timings"] = timings
    return PipelineResult(spec, est, timings)
