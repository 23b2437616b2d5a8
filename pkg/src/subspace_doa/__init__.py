"""Noise-subspace narrowband DOA estimation: PHD, MUSIC, EV and MN.

Typical use::

    from subspace_doa import (AngleGrid, ScenarioConfig, SourceSpec, build_manifold,
                              estimate_doa, generate_snapshots, uniform_circular_array)

    geom = uniform_circular_array(8, 10.0, 15e6)
    cfg = ScenarioConfig(geom, [SourceSpec(40), SourceSpec(130)], snr_db=15, seed=42)
    manifold = build_manifold(geom, AngleGrid.from_counts(360, 1))
    result = estimate_doa(generate_snapshots(cfg), manifold, 2, "music", workers="auto")
    print(result.estimate.azimuths)
"""

__version__ = "0.1.0"

from .array_model import (SPEED_OF_LIGHT, AngleGrid, ArrayGeometry, ManifoldTable, build_manifold,
                          steering_vector, uniform_circular_array)
from .errors import (DegenerateSpectrum, DimensionMismatch, DoaError, FormatError, InvalidParameter,
                     InvalidScenario, NoConvergence, NonPSDProjector, NotHermitian, NumericalError)
from .evaluation import (AccuracyReport, BenchReport, CostModel, bench_scan_ranges, dual_precision_validate,
                         percent_error, step_costs)
from .linalg import SvdResult, hermitian_svd, svd_residual
from .pipeline import PipelineResult, estimate_doa
from .signal_sim import (ScenarioConfig, SnapshotMatrix, SourceSpec, asymptotic_covariance,
                         generate_snapshots)
from .spectrum import DoaEstimate, PseudoSpectrum, find_peaks, scan, select_doa
from .subspace import ALGORITHMS, CovarianceMatrix, NoiseProjector, noise_projector, sample_covariance
