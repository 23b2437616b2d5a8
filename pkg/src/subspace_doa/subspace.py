"""Sample covariance and the noise-subspace projectors of PHD, MUSIC, EV and MN.

All four start from the same decomposition ``R = U diag(S) U^H`` (S
descending) and differ only in which noise eigenvectors they keep and how
they weight them:

    phd    C = e_min e_min^H                      e_min: eigenvector of the smallest S
    music  C = E_n E_n^H                          E_n:   columns D..m-1 of U
    ev     C = sum_k e_k e_k^H / S_k^2            over the noise columns
    mn     C = v v^H, v = P_n e_1 / (e_1^H P_n e_1),  P_n = E_n E_n^H
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import precision as prec
from .errors import DegenerateSpectrum, DimensionMismatch, InvalidParameter
from .linalg import SvdResult, hermitian_svd
from .signal_sim import SnapshotMatrix

Algorithm = Literal["phd", "music", "ev", "mn"]
ALGORITHMS: tuple[str, ...] = ("phd", "music", "ev", "mn")


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    R: np.ndarray
    num_snapshots: int

    @property
    def precision(self) -> str:
        return prec.of(self.R)


@dataclass(frozen=True, eq=False)
class NoiseProjector:
    C: np.ndarray
    algorithm: str
    model_order: int

    @property
    def precision(self) -> str:
        return prec.of(self.C)

    @property
    def num_elements(self) -> int:
        return self.C.shape[0]


def sample_covariance(x: SnapshotMatrix | np.ndarray) -> CovarianceMatrix:
    """R = X X^H / N, symmetrised after accumulation."""
    data = x.data if isinstance(x, SnapshotMatrix) else np.asarray(x)
    if data.ndim != 2 or data.shape[1] < 1 or data.shape[0] < 1:
        raise DimensionMismatch(f"need an m x N snapshot matrix with N >= 1, got shape {data.shape}")
    if data.dtype not in (np.complex64, np.complex128):
        data = data.astype(np.complex128)
    n = data.shape[1]
    r = (data @ data.conj().T) / data.real.dtype.type(n)
    half = data.real.dtype.type(0.5)
    r = (r + r.conj().T) * half
    return CovarianceMatrix(r.astype(data.dtype, copy=False), n)


def check_algorithm(alg: str) -> str:
    if alg not in ALGORITHMS:
        raise InvalidParameter(f"unknown algorithm {alg!r}; choose from {', '.join(ALGORITHMS)}")
    return alg


def projector_from_svd(svd: SvdResult, model_order: int, alg: str) -> np.ndarray:
    """Step-3/4 assembly of C from an existing decomposition."""
    check_algorithm(alg)
    u, s = svd.U, svd.S
    m = u.shape[0]
    if not 1 <= model_order < m:
        raise InvalidParameter(f"model order must satisfy 1 <= D < {m}, got {model_order}")
    rtype = s.dtype.type
    tol = prec.tol(prec.of(u))
    if alg == "phd":
        # highest column index on ties
        min_idx = m - 1 - int(np.argmin(s[::-1]))
        e_min = u[:, min_idx : min_idx + 1]
        c = e_min @ e_min.conj().T
    elif alg == "music":
        e_n = u[:, model_order:]
        c = e_n @ e_n.conj().T
    elif alg == "ev":
        w = s[model_order:]
        if np.any(w <= tol * s[0]):
            raise DegenerateSpectrum(
                f"EV weights need nonzero noise singular values; smallest is {w.min():.3e}")
        e_nw = u[:, model_order:] * (rtype(1) / w)[None, :]
        c = e_nw @ e_nw.conj().T
    else:
        e_n = u[:, model_order:]
        p_n = e_n @ e_n.conj().T
        unit = np.zeros(m, dtype=u.dtype)
        unit[0] = 1
        denom = (unit.conj() @ p_n @ unit).real
        if denom <= tol:
            raise DegenerateSpectrum(f"MN normalisation e1^H P_n e1 = {denom:.3e} is degenerate")
        lam = rtype(1) / rtype(denom)
        valph = (p_n @ unit) * lam
        c = np.outer(valph, valph.conj())
    c = (c + c.conj().T) * rtype(0.5)
    return c.astype(u.dtype, copy=False)


def noise_projector(cov: CovarianceMatrix | np.ndarray, model_order: int, alg: str) -> NoiseProjector:
    r = cov.R if isinstance(cov, CovarianceMatrix) else np.asarray(cov)
    check_algorithm(alg)
    m = r.shape[0]
    if not 1 <= model_order < m:
        raise InvalidParameter(f"model order must satisfy 1 <= D < {m}, got {model_order}")
    svd = hermitian_svd(r)
    return NoiseProjector(projector_from_svd(svd, model_order, alg), alg, model_order)
