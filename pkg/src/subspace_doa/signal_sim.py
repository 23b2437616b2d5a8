"""Synthetic narrowband snapshots, X = A S + W.

Each source emits i.i.d. circular complex Gaussian samples with variance equal
to its power; noise is i.i.d. circular complex Gaussian on every element with
variance ``mean(source power) / 10**(snr_db / 10)``.

Random streams come from numpy's PCG64 seeded through ``SeedSequence``:
source ``i`` draws from spawn key ``(0, i)`` and noise from ``(1,)``, so adding
a source never changes the noise realisation or the other sources' samples.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import precision as prec
from .array_model import ArrayGeometry, steering_matrix
from .errors import FormatError, InvalidParameter, InvalidScenario

SOURCE_STREAM = 0
NOISE_STREAM = 1


@dataclass(frozen=True)
class SourceSpec:
    azimuth: float
    elevation: float = 90.0
    power: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.azimuth) and math.isfinite(self.elevation)):
            raise InvalidParameter("source angles must be finite")
        if not (math.isfinite(self.power) and self.power > 0):
            raise InvalidParameter(f"source power must be positive, got {self.power}")


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Everything needed to synthesise one snapshot matrix.

    ``sampling_hz`` and ``direct_paths`` are carried for completeness of the
    scenario description; the narrowband model does not use them.
    """

    geometry: ArrayGeometry
    sources: tuple[SourceSpec, ...]
    snr_db: float = 15.0
    num_snapshots: int = 128
    seed: int = 0
    noiseless: bool = False
    sampling_hz: float | None = None
    direct_paths: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        d, m = len(self.sources), self.geometry.num_elements
        if d < 1:
            raise InvalidScenario("scenario needs at least one source")
        if d >= m:
            raise InvalidScenario(f"{d} sources leave no noise subspace on a {m}-element array")
        if int(self.num_snapshots) != self.num_snapshots or self.num_snapshots < 1:
            raise InvalidScenario(f"num_snapshots must be a positive integer, got {self.num_snapshots}")
        if not self.noiseless and not math.isfinite(self.snr_db):
            raise InvalidScenario("snr_db must be finite; use noiseless=True to disable noise")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidScenario("seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "num_snapshots", int(self.num_snapshots))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def num_sources(self) -> int:
        return len(self.sources)

    @property
    def powers(self) -> np.ndarray:
        return np.array([s.power for s in self.sources])

    @property
    def noise_variance(self) -> float:
        if self.noiseless:
            return 0.0
        return float(self.powers.mean() / 10.0 ** (self.snr_db / 10.0))

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return dataclasses.replace(self, seed=seed)


@dataclass(frozen=True, eq=False)
class SnapshotMatrix:
    """m x N array output, one column per time sample."""

    data: np.ndarray
    precision: str = "double"
    seed: int = 0
    snr_db: float = math.inf
    num_sources: int = 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def astype(self, precision: str) -> "SnapshotMatrix":
        return SnapshotMatrix(self.data.astype(prec.complex_dtype(precision)), precision,
                              self.seed, self.snr_db, self.num_sources)


def _generator(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _circular_gaussian(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    draws = rng.standard_normal((2, *shape))
    return math.sqrt(variance / 2.0) * (draws[0] + 1j * draws[1])


def source_signals(cfg: ScenarioConfig) -> np.ndarray:
    """d x N source samples S(t)."""
    n = cfg.num_snapshots
    return np.stack([
        _circular_gaussian(_generator(cfg.seed, SOURCE_STREAM, i), (n,), src.power)
        for i, src in enumerate(cfg.sources)
    ])


def noise_samples(cfg: ScenarioConfig) -> np.ndarray:
    """m x N noise W(t); zeros when the scenario is noiseless."""
    shape = (cfg.geometry.num_elements, cfg.num_snapshots)
    if cfg.noiseless:
        return np.zeros(shape, dtype=np.complex128)
    return _circular_gaussian(_generator(cfg.seed, NOISE_STREAM), shape, cfg.noise_variance)


def source_steering(cfg: ScenarioConfig) -> np.ndarray:
    """m x d matrix A with one steering vector per source."""
    return steering_matrix(cfg.geometry, [s.azimuth for s in cfg.sources],
                           [s.elevation for s in cfg.sources])


def generate_snapshots(cfg: ScenarioConfig) -> SnapshotMatrix:
    x = source_steering(cfg) @ source_signals(cfg) + noise_samples(cfg)
    snr = math.inf if cfg.noiseless else cfg.snr_db
    return SnapshotMatrix(x, "double", cfg.seed, snr, cfg.num_sources)


def asymptotic_covariance(cfg: ScenarioConfig) -> np.ndarray:
    """Exact covariance A diag(p) A^H + sigma^2 I of the scenario."""
    a = source_steering(cfg)
    r = (a * cfg.powers[None, :]) @ a.conj().T
    r = r + cfg.noise_variance * np.eye(a.shape[0])
    return (r + r.conj().T) / 2


# -- binary snapshot file -------------------------------------------------
#
# One ASCII header line of 8 space-separated fields
#     DOASNAP <version> <m> <N> <precision> <seed> <snr_db> <d>\n
# then m*N complex values, row-major, little-endian interleaved (re, im),
# float32 pairs for single and float64 pairs for double. A noiseless
# scenario writes snr_db as "inf".

SNAPSHOT_MAGIC = "DOASNAP"
SNAPSHOT_VERSION = 1


def write_snapshots(path, snap: SnapshotMatrix) -> None:
    m, n = snap.shape
    header = (f"{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} {m} {n} {snap.precision} "
              f"{snap.seed} {snap.snr_db!r} {snap.num_sources}\n")
    dtype = "<c8" if snap.precision == "single" else "<c16"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(snap.data, dtype=dtype).tobytes())


def read_snapshots(path) -> SnapshotMatrix:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii", errors="replace").split()
        payload = fh.read()
    if len(header) != 8 or header[0] != SNAPSHOT_MAGIC:
        raise FormatError(f"{path}: not a snapshot file (bad header)")
    try:
        version, m, n = int(header[1]), int(header[2]), int(header[3])
        precision, seed, snr, d = header[4], int(header[5]), float(header[6]), int(header[7])
    except ValueError as exc:
        raise FormatError(f"{path}: malformed header field: {exc}") from exc
    if version != SNAPSHOT_VERSION:
        raise FormatError(f"{path}: unsupported snapshot version {version}")
    if precision not in ("single", "double"):
        raise FormatError(f"{path}: unknown precision {precision!r}")
    dtype = np.dtype("<c8" if precision == "single" else "<c16")
    if len(payload) != m * n * dtype.itemsize:
        raise FormatError(f"{path}: expected {m * n * dtype.itemsize} data bytes, found {len(payload)}")
    data = np.frombuffer(payload, dtype=dtype).reshape(m, n).astype(prec.complex_dtype(precision))
    return SnapshotMatrix(data, precision, seed, snr, d)
