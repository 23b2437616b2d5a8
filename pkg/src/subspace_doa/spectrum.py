"""Pseudospectrum scan over the manifold table, peak finding and DOA selection.

The scan is the only parallel stage. The flat grid is cut into contiguous
chunks, one per worker thread; each chunk runs the same compiled loop, which
releases the GIL. Every grid point is evaluated by exactly one worker with
the same operation order, so the output does not depend on the worker count.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numba
import numpy as np

from . import precision as prec
from .array_model import AngleGrid, ManifoldTable
from .errors import DimensionMismatch, FormatError, InvalidParameter, NonPSDProjector, NotHermitian
from .subspace import NoiseProjector

INV_FLOOR = {"single": 1e-18, "double": 1e-30}


@dataclass(frozen=True, eq=False)
class PseudoSpectrum:
    grid: AngleGrid
    values: np.ndarray
    algorithm: str
    precision: str

    def as_grid(self) -> np.ndarray:
        """Values reshaped to (n_azimuth, n_elevation)."""
        return self.values.reshape(self.grid.shape)


@dataclass(frozen=True)
class Peak:
    index: int
    azimuth: float
    elevation: float
    power: float


@dataclass(frozen=True, eq=False)
class DoaEstimate:
    peaks: list[Peak]
    algorithm: str
    model_order: int
    underdetermined: bool
    metadata: dict = field(default_factory=dict)

    @property
    def azimuths(self) -> list[float]:
        return [p.azimuth for p in self.peaks]

    @property
    def cells(self) -> list[int]:
        return [p.index for p in self.peaks]


def resolve_workers(workers: int | str | None) -> int:
    if workers in (None, "auto"):
        return os.cpu_count() or 1
    try:
        n = int(workers)
    except (TypeError, ValueError):
        raise InvalidParameter(f"workers must be a positive integer or 'auto', got {workers!r}") from None
    if n < 1:
        raise InvalidParameter(f"workers must be >= 1, got {n}")
    return n


def _make_kernel(complex_type):
    zero = complex_type(0)

    @numba.njit(cache=True, nogil=True)
    def quadratic_forms(vectors, c, start, stop, out_re, out_im):
        m = c.shape[0]
        for i in range(start, stop):
            acc = zero
            for k in range(m):
                row = zero
                for l in range(m):
                    row += c[k, l] * vectors[i, l]
                acc += np.conj(vectors[i, k]) * row
            out_re[i] = acc.real
            out_im[i] = acc.imag

    return quadratic_forms


@lru_cache(maxsize=None)
def _kernel(precision: str):
    return _make_kernel(prec.complex_dtype(precision).type)


@lru_cache(maxsize=None)
def _pool(workers: int) -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=workers, thread_name_prefix="scan")


def chunk_bounds(size: int, workers: int) -> list[tuple[int, int]]:
    """Disjoint contiguous [start, stop) ranges covering ``range(size)``."""
    edges = np.linspace(0, size, min(workers, size) + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def inverse_spectrum(manifold: ManifoldTable, projector: NoiseProjector,
                     workers: int | str | None = 1) -> tuple[np.ndarray, np.ndarray]:
    """Real and imaginary parts of a^H C a at every grid point."""
    vectors = manifold.vectors
    c = projector.C
    if vectors.shape[1] != c.shape[0]:
        raise DimensionMismatch(
            f"manifold has {vectors.shape[1]} elements but the projector is {c.shape[0]} x {c.shape[1]}")
    if manifold.precision != projector.precision:
        raise DimensionMismatch(
            f"manifold precision {manifold.precision} differs from projector precision {projector.precision}")
    c = np.ascontiguousarray(c)
    rdtype = prec.real_dtype(manifold.precision)
    size = vectors.shape[0]
    out_re = np.empty(size, dtype=rdtype)
    out_im = np.empty(size, dtype=rdtype)
    kernel = _kernel(manifold.precision)
    chunks = chunk_bounds(size, resolve_workers(workers))
    if len(chunks) == 1:
        kernel(vectors, c, 0, size, out_re, out_im)
    else:
        futures = [_pool(len(chunks)).submit(kernel, vectors, c, a, b, out_re, out_im) for a, b in chunks]
        for f in futures:
            f.result()
    return out_re, out_im


def scan(manifold: ManifoldTable, projector: NoiseProjector, workers: int | str | None = 1) -> PseudoSpectrum:
    """P = 1 / max(Re(a^H C a), floor) over the whole grid."""
    inv_re, inv_im = inverse_spectrum(manifold, projector, workers)
    p = manifold.precision
    m = projector.num_elements
    norm_c = float(np.linalg.norm(projector.C))
    residue = 1e-6 * np.abs(inv_re) + prec.eps(p) * m * m * norm_c
    if np.any(np.abs(inv_im) > residue):
        worst = int(np.argmax(np.abs(inv_im) - residue))
        raise NotHermitian(f"a^H C a has imaginary part {inv_im[worst]:.3e} at grid index {worst}")
    if np.any(inv_re < -m * prec.tol(p) * norm_c):
        raise NonPSDProjector(f"a^H C a reaches {inv_re.min():.3e}; the projector is not PSD")
    rtype = inv_re.dtype.type
    values = rtype(1) / np.maximum(inv_re, rtype(INV_FLOOR[p]))
    return PseudoSpectrum(manifold.grid, values, projector.algorithm, p)


_NEIGHBOUR_OFFSETS = [(da, de) for da in (-1, 0, 1) for de in (-1, 0, 1) if (da, de) != (0, 0)]


def local_maxima_mask(values: np.ndarray) -> np.ndarray:
    """Strict local maxima of an (n_az, n_el) array.

    Azimuth wraps around, elevation is clamped: points on the first or last
    elevation row simply have fewer neighbours.
    """
    n_az, n_el = values.shape
    if n_az == 1 and n_el == 1:
        return np.zeros(values.shape, dtype=bool)
    # one wrapped row on each azimuth side, a -inf guard column on each elevation side
    padded = np.full((n_az + 2, n_el + 2), -np.inf, dtype=values.dtype)
    padded[1:-1, 1:-1] = values
    padded[0, 1:-1] = values[-1]
    padded[-1, 1:-1] = values[0]
    mask = np.ones(values.shape, dtype=bool)
    for da, de in _NEIGHBOUR_OFFSETS:
        if n_az == 1 and da != 0:
            continue  # the wrapped neighbour is the point itself
        if n_el == 1 and de != 0:
            continue
        mask &= values > padded[1 + da : 1 + da + n_az, 1 + de : 1 + de + n_el]
    return mask


def find_peaks(spec: PseudoSpectrum) -> list[tuple[int, float]]:
    """All strict local maxima as (flat index, value), strongest first.

    Ties are broken by lower azimuth index, then lower elevation index, which
    in azimuth-major order is simply the lower flat index.
    """
    if spec.values.size == 0:
        raise InvalidParameter("empty spectrum")
    grid_values = spec.as_grid()
    idx = np.flatnonzero(local_maxima_mask(grid_values))
    vals = spec.values[idx]
    order = np.lexsort((idx, -vals.astype(np.float64)))
    return [(int(idx[o]), float(vals[o])) for o in order]


def select_doa(peaks: list[tuple[int, float]], model_order: int, grid: AngleGrid,
               algorithm: str = "", metadata: dict | None = None) -> DoaEstimate:
    """Keep the ``model_order`` strongest peaks and map them to degrees.

    Fewer peaks than sources is reported through ``underdetermined``.
    """
    if model_order < 1:
        raise InvalidParameter(f"model order must be >= 1, got {model_order}")
    ranked = sorted(peaks, key=lambda p: (-p[1], p[0]))[:model_order]
    chosen = []
    for index, value in ranked:
        i, j = grid.unravel(index)
        chosen.append(Peak(index, float(grid.azimuth[i]), float(grid.elevation[j]), value))
    return DoaEstimate(chosen, algorithm, model_order, len(chosen) < model_order, dict(metadata or {}))


# -- exports ----------------------------------------------------------------

SPECTRUM_MAGIC = "DOASPEC"
SPECTRUM_VERSION = 1


def write_spectrum_csv(path, spec: PseudoSpectrum) -> None:
    az, el = spec.grid.angles()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["azimuth_deg", "elevation_deg", "power"])
        for a, e, v in zip(az, el, spec.values):
            w.writerow([repr(float(a)), repr(float(e)), repr(float(v))])


def read_spectrum_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Columns (azimuth, elevation, power) of a spectrum CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["azimuth_deg", "elevation_deg", "power"]:
        raise FormatError(f"{path}: missing spectrum CSV header")
    data = np.array(rows[1:], dtype=np.float64).reshape(-1, 3)
    return data[:, 0], data[:, 1], data[:, 2]


# Binary grid: one ASCII line
#     DOASPEC <version> <n_az> <n_el> <step> <precision> <algorithm>\n
# then n_az azimuths and n_el elevations as little-endian float64, then the
# L powers as little-endian float32 (single) or float64 (double), azimuth-major.

def write_spectrum_binary(path, spec: PseudoSpectrum) -> None:
    n_az, n_el = spec.grid.shape
    header = (f"{SPECTRUM_MAGIC} {SPECTRUM_VERSION} {n_az} {n_el} {spec.grid.step!r} "
              f"{spec.precision} {spec.algorithm or '-'}\n")
    dtype = "<f4" if spec.precision == "single" else "<f8"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(spec.grid.azimuth.astype("<f8").tobytes())
        fh.write(spec.grid.elevation.astype("<f8").tobytes())
        fh.write(spec.values.astype(dtype).tobytes())


def read_spectrum_binary(path) -> PseudoSpectrum:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii", errors="replace").split()
        payload = fh.read()
    if len(header) != 7 or header[0] != SPECTRUM_MAGIC:
        raise FormatError(f"{path}: not a spectrum file (bad header)")
    try:
        n_az, n_el, step = int(header[2]), int(header[3]), float(header[4])
    except ValueError as exc:
        raise FormatError(f"{path}: malformed header field: {exc}") from exc
    precision, alg = header[5], header[6]
    if precision not in ("single", "double"):
        raise FormatError(f"{path}: unknown precision {precision!r}")
    dtype = np.dtype("<f4" if precision == "single" else "<f8")
    expected = 8 * (n_az + n_el) + dtype.itemsize * n_az * n_el
    if len(payload) != expected:
        raise FormatError(f"{path}: expected {expected} data bytes, found {len(payload)}")
    az = np.frombuffer(payload, "<f8", n_az)
    el = np.frombuffer(payload, "<f8", n_el, offset=8 * n_az)
    vals = np.frombuffer(payload, dtype, n_az * n_el, offset=8 * (n_az + n_el))
    grid = AngleGrid(az, el, step)
    return PseudoSpectrum(grid, vals.astype(prec.real_dtype(precision)), "" if alg == "-" else alg, precision)
