"""Precision tags shared by every numerical stage."""

from typing import Literal

import numpy as np

Precision = Literal["single", "double"]

_COMPLEX = {"single": np.dtype(np.complex64), "double": np.dtype(np.complex128)}
_REAL = {"single": np.dtype(np.float32), "double": np.dtype(np.float64)}


def check(precision: str) -> str:
    if precision not in _COMPLEX:
        raise ValueError(f"precision must be 'single' or 'double', got {precision!r}")
    return precision


def complex_dtype(precision: str) -> np.dtype:
    return _COMPLEX[check(precision)]


def real_dtype(precision: str) -> np.dtype:
    return _REAL[check(precision)]


def of(array: np.ndarray) -> str:
    """Precision tag of a numpy array."""
    if array.dtype in (np.complex64, np.float32):
        return "single"
    if array.dtype in (np.complex128, np.float64):
        return "double"
    raise TypeError(f"unsupported dtype {array.dtype}")


def eps(precision: str) -> float:
    return float(np.finfo(real_dtype(precision)).eps)


def tol(precision: str) -> float:
    """Rank/degeneracy tolerance: 100 machine epsilons of the active precision."""
    return 100.0 * eps(precision)
