"""Array geometry, scan grids and the precomputed array manifold.

Angles are in degrees at every public boundary. The steering vector follows
the generic far-field expression

    a_k = exp{ j (2 pi / lambda) (x_k sin(az) sin(el) + y_k cos(az) sin(el) + z_k cos(el)) }

where ``el`` is measured from the +z axis, so ``el = 90`` lies in the array
plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import precision as prec
from .errors import InvalidParameter

SPEED_OF_LIGHT = 299_792_458.0
"Speed of light in m/s (exact)."


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Sensor positions (m x 3, meters) and carrier wavelength (meters)."""

    positions: np.ndarray
    wavelength: float

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise InvalidParameter(f"positions must be an (m, 3) array, got shape {pos.shape}")
        if pos.shape[0] < 2:
            raise InvalidParameter("an array needs at least 2 elements")
        if not np.all(np.isfinite(pos)):
            raise InvalidParameter("element coordinates must be finite")
        if not (math.isfinite(self.wavelength) and self.wavelength > 0):
            raise InvalidParameter(f"wavelength must be positive, got {self.wavelength}")
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "wavelength", float(self.wavelength))

    @property
    def num_elements(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def from_carrier(cls, positions, carrier_frequency: float) -> "ArrayGeometry":
        if not carrier_frequency > 0:
            raise InvalidParameter(f"carrier frequency must be positive, got {carrier_frequency}")
        return cls(positions, SPEED_OF_LIGHT / carrier_frequency)


def uniform_circular_array(num_elements: int, radius: float, carrier_frequency: float) -> ArrayGeometry:
    """Uniform circular array in the z=0 plane.

    Element 0 sits on the +x axis; the rest follow counter-clockwise.
    """
    if int(num_elements) != num_elements or num_elements < 2:
        raise InvalidParameter(f"num_elements must be an integer >= 2, got {num_elements}")
    if not radius > 0:
        raise InvalidParameter(f"radius must be positive, got {radius}")
    if not carrier_frequency > 0:
        raise InvalidParameter(f"carrier frequency must be positive, got {carrier_frequency}")
    m = int(num_elements)
    phi = 2.0 * np.pi * np.arange(m) / m
    pos = np.column_stack((radius * np.cos(phi), radius * np.sin(phi), np.zeros(m)))
    # exact zeros at the quarter points instead of 6e-16 residue
    pos[np.abs(pos) < 1e-12 * radius] = 0.0
    return ArrayGeometry.from_carrier(pos, carrier_frequency)


@dataclass(frozen=True, eq=False)
class AngleGrid:
    """Azimuth x elevation scan lattice, in degrees.

    ``L = len(azimuth) * len(elevation)``. Flat index of ``(i, j)`` is
    ``i * len(elevation) + j`` (azimuth-major).
    """

    azimuth: np.ndarray
    elevation: np.ndarray
    step: float = 1.0

    def __post_init__(self):
        az = np.atleast_1d(np.asarray(self.azimuth, dtype=np.float64))
        el = np.atleast_1d(np.asarray(self.elevation, dtype=np.float64))
        if az.ndim != 1 or el.ndim != 1 or az.size == 0 or el.size == 0:
            raise InvalidParameter("azimuth and elevation must be non-empty 1-D sequences")
        if not (np.all(np.isfinite(az)) and np.all(np.isfinite(el))):
            raise InvalidParameter("grid angles must be finite")
        if np.any(az < 0) or np.any(az >= 360):
            raise InvalidParameter("azimuth values must lie in [0, 360)")
        if np.any(el <= 0) or np.any(el > 90):
            raise InvalidParameter("elevation values must lie in (0, 90]")
        if np.any(np.diff(az) <= 0) or np.any(np.diff(el) <= 0):
            raise InvalidParameter("grid values must be strictly ascending")
        if not self.step > 0:
            raise InvalidParameter(f"step must be positive, got {self.step}")
        object.__setattr__(self, "azimuth", _frozen(az))
        object.__setattr__(self, "elevation", _frozen(el))
        object.__setattr__(self, "step", float(self.step))

    @property
    def shape(self) -> tuple[int, int]:
        return self.azimuth.size, self.elevation.size

    @property
    def size(self) -> int:
        return self.azimuth.size * self.elevation.size

    @property
    def label(self) -> str:
        return f"{self.azimuth.size}x{self.elevation.size}"

    def angles(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (azimuth, elevation) pairs in grid order."""
        az, el = np.meshgrid(self.azimuth, self.elevation, indexing="ij")
        return az.ravel(), el.ravel()

    def unravel(self, index: int) -> tuple[int, int]:
        return divmod(int(index), self.elevation.size)

    @classmethod
    def from_counts(cls, az_count: int, el_count: int, step: float = 1.0) -> "AngleGrid":
        """``az_count`` azimuths from 0 and ``el_count`` elevations ending at 90.

        ``from_counts(360, 90)`` is the full [0:359] x [1:90] scan and
        ``from_counts(360, 1)`` the in-plane ring at elevation 90.
        """
        if az_count < 1 or el_count < 1:
            raise InvalidParameter("grid counts must be >= 1")
        az = np.arange(az_count) * float(step)
        el = 90.0 - float(step) * np.arange(el_count - 1, -1, -1)
        return cls(az, el, step)

    @classmethod
    def parse(cls, text: str, step: float = 1.0) -> "AngleGrid":
        """Parse an ``AxB`` range label such as ``360x90``."""
        try:
            a, b = text.lower().split("x")
            return cls.from_counts(int(a), int(b), step)
        except ValueError as exc:
            raise InvalidParameter(f"bad scan range {text!r}, expected AxB") from exc


def _direction_cosines(azimuth, elevation):
    az = np.deg2rad(np.mod(np.asarray(azimuth, dtype=np.float64), 360.0))
    el = np.deg2rad(np.asarray(elevation, dtype=np.float64))
    sin_el = np.sin(el)
    return np.sin(az) * sin_el, np.cos(az) * sin_el, np.cos(el)


def _steering(geom: ArrayGeometry, azimuth: np.ndarray, elevation: np.ndarray) -> np.ndarray:
    # (P, m) complex128; elementwise only, so a row never depends on its neighbours
    ux, uy, uz = _direction_cosines(azimuth, elevation)
    x, y, z = geom.positions.T
    k = 2.0 * np.pi / geom.wavelength
    phase = k * (x[None, :] * ux[:, None] + y[None, :] * uy[:, None] + z[None, :] * uz[:, None])
    out = np.empty(phase.shape, dtype=np.complex128)
    out.real = np.cos(phase)
    out.imag = np.sin(phase)
    return out


def steering_vector(geom: ArrayGeometry, azimuth: float, elevation: float,
                    precision: str = "double") -> np.ndarray:
    """Length-m steering vector for one direction (degrees)."""
    if not (math.isfinite(azimuth) and math.isfinite(elevation)):
        raise InvalidParameter("angles must be finite")
    a = _steering(geom, np.array([azimuth]), np.array([elevation]))[0]
    return a.astype(prec.complex_dtype(precision))


def steering_matrix(geom: ArrayGeometry, azimuths, elevations, precision: str = "double") -> np.ndarray:
    """Steering vectors as the columns of an (m, d) matrix."""
    a = _steering(geom, np.atleast_1d(azimuths), np.atleast_1d(elevations))
    return np.ascontiguousarray(a.T).astype(prec.complex_dtype(precision))


@dataclass(frozen=True, eq=False)
class ManifoldTable:
    """Steering vectors for every grid point, shape (L, m), row ``i*n_el + j``."""

    grid: AngleGrid
    vectors: np.ndarray
    precision: str
    geometry: ArrayGeometry | None = field(default=None, repr=False)

    @property
    def num_elements(self) -> int:
        return self.vectors.shape[1]


def build_manifold(geom: ArrayGeometry, grid: AngleGrid, precision: str = "double") -> ManifoldTable:
    """Precompute the array manifold lookup table over ``grid``."""
    dtype = prec.complex_dtype(precision)
    az, el = grid.angles()
    try:
        vectors = _steering(geom, az, el).astype(dtype)
    except MemoryError as exc:
        raise MemoryError(f"cannot allocate manifold of {grid.size} x {geom.num_elements}") from exc
    return ManifoldTable(grid, _frozen(vectors), precision, geom)
