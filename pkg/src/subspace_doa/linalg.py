"""Small dense complex linear algebra.

The decomposition is a cyclic-by-rows Jacobi eigensolver for Hermitian
matrices, run in the working precision of its input (complex64 arithmetic
stays float32 throughout). For a Hermitian PSD matrix the eigen- and singular
value decompositions coincide, which is what the subspace stage needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from . import precision as prec
from .errors import DimensionMismatch, NoConvergence, NotHermitian

MAX_SWEEPS = 30


def _check_2d(a: np.ndarray, name: str) -> None:
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")


def adjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    a = np.asarray(a)
    if a.ndim == 1:
        return a.conj()
    _check_2d(a, "matrix")
    return a.conj().T


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape[-1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def outer_product(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """u v^H."""
    u, v = np.asarray(u), np.asarray(v)
    if u.ndim != 1 or v.ndim != 1:
        raise DimensionMismatch("outer_product takes two vectors")
    return np.outer(u, v.conj())


def quadratic_form(a: np.ndarray, c: np.ndarray) -> complex:
    """a^H C a as a complex scalar."""
    a, c = np.asarray(a), np.asarray(c)
    if a.ndim != 1 or c.shape != (a.size, a.size):
        raise DimensionMismatch(f"vector of length {a.size} does not fit matrix {c.shape}")
    return complex(a.conj() @ (c @ a))


def real_part_of_hermitian_form(value: complex, scale: float, precision: str = "double") -> float:
    """Drop the imaginary residue of a Hermitian form after checking it is residue.

    ``scale`` is the magnitude the roundoff is measured against, typically
    ``m * ||C||_F * ||a||^2 / m``.
    """
    bound = 1e-6 * abs(value.real) + prec.eps(precision) * scale
    if abs(value.imag) > bound:
        raise NotHermitian(f"imaginary part {value.imag:.3e} of a Hermitian form exceeds {bound:.3e}")
    return value.real


@dataclass(frozen=True, eq=False)
class SvdResult:
    """A = U diag(S) V^H with S descending."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    sweeps: int = 0


def _make_jacobi(real_type):
    zero = real_type(0.0)
    one = real_type(1.0)
    two = real_type(2.0)
    eps = real_type(np.finfo(real_type).eps)
    tiny = real_type(np.finfo(real_type).tiny)
    stop_factor = real_type(10.0) * eps

    @numba.njit(cache=True, nogil=True)
    def jacobi(a, v, max_sweeps):
        # a: Hermitian (overwritten with its diagonalisation), v: identity on entry
        n = a.shape[0]
        fro = zero
        for i in range(n):
            for j in range(n):
                fro += a[i, j].real * a[i, j].real + a[i, j].imag * a[i, j].imag
        fro = np.sqrt(fro)
        target = stop_factor * fro
        for sweep in range(max_sweeps + 1):
            off = zero
            for i in range(n):
                for j in range(n):
                    if i != j:
                        off += a[i, j].real * a[i, j].real + a[i, j].imag * a[i, j].imag
            if np.sqrt(off) <= target:
                return sweep
            if sweep == max_sweeps:
                return -1
            rotated = False
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    g = abs(apq)
                    app = a[p, p].real
                    aqq = a[q, q].real
                    threshold = two * eps * max(abs(app), abs(aqq))
                    if g <= max(threshold, tiny):
                        continue
                    rotated = True
                    phase = apq / g
                    tau = (aqq - app) / (two * g)
                    t = one / (abs(tau) + np.sqrt(one + tau * tau))
                    if tau < zero:
                        t = -t
                    c = one / np.sqrt(one + t * t)
                    s = t * c
                    sp = s * phase
                    sm = s * np.conj(phase)
                    # A <- A J, J = [[c, s e^{ia}], [-s e^{-ia}, c]]
                    for k in range(n):
                        akp = a[k, p]
                        akq = a[k, q]
                        a[k, p] = c * akp - sm * akq
                        a[k, q] = sp * akp + c * akq
                    # A <- J^H A
                    for k in range(n):
                        apk = a[p, k]
                        aqk = a[q, k]
                        a[p, k] = c * apk - sp * aqk
                        a[q, k] = sm * apk + c * aqk
                    a[p, q] = zero
                    a[q, p] = zero
                    a[p, p] = a[p, p].real
                    a[q, q] = a[q, q].real
                    for k in range(n):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = c * vkp - sm * vkq
                        v[k, q] = sp * vkp + c * vkq
            if not rotated:
                return sweep + 1
        return -1

    return jacobi


@lru_cache(maxsize=None)
def _jacobi_kernel(precision: str):
    return _make_jacobi(prec.real_dtype(precision).type)


def normalize_phase(u: np.ndarray) -> np.ndarray:
    """Scale each column so its largest-magnitude entry is real and positive."""
    u = np.array(u, copy=True)
    idx = np.argmax(np.abs(u), axis=0)
    pivot = u[idx, np.arange(u.shape[1])]
    mag = np.abs(pivot)
    ok = mag > 0
    rot = np.ones_like(pivot)
    rot[ok] = pivot[ok].conj() / mag[ok]
    u *= rot[None, :]
    u[idx[ok], np.arange(u.shape[1])[ok]] = mag[ok]
    return u


def hermitian_svd(a: np.ndarray, max_sweeps: int = MAX_SWEEPS) -> SvdResult:
    """SVD of a square Hermitian (PSD) matrix by Jacobi rotations.

    Works in the precision of ``a`` (complex64 -> single, complex128 -> double).
    Columns of ``U`` carry the deterministic phase from ``normalize_phase``;
    ``V`` equals ``U`` except for columns whose eigenvalue came out negative,
    which are negated so that ``A = U diag(S) V^H`` still holds.

    Raises
    ------
    NotHermitian
        if ``||A - A^H||_F > 10 eps ||A||_F``.
    NoConvergence
        if the off-diagonal mass is still above target after ``max_sweeps``.
    """
    a = np.asarray(a)
    if a.dtype not in (np.complex64, np.complex128):
        a = a.astype(np.complex128)
    _check_2d(a, "matrix")
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got {a.shape}")
    p = prec.of(a)
    n = a.shape[0]
    fro = float(np.linalg.norm(a))
    asym = float(np.linalg.norm(a - a.conj().T))
    if asym > 10 * prec.eps(p) * fro:
        raise NotHermitian(f"||A - A^H||_F = {asym:.3e} exceeds 10 eps ||A||_F = {10 * prec.eps(p) * fro:.3e}")
    work = ((a + a.conj().T) / a.real.dtype.type(2)).astype(a.dtype)
    vecs = np.eye(n, dtype=a.dtype)
    sweeps = _jacobi_kernel(p)(work, vecs, max_sweeps)
    if sweeps < 0:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    evals = work.diagonal().real.copy()
    order = np.argsort(-np.abs(evals), kind="stable")
    evals = evals[order]
    u = normalize_phase(vecs[:, order])
    sign = np.where(evals < 0, -1, 1).astype(a.real.dtype)
    return SvdResult(U=u, S=np.abs(evals), V=u * sign[None, :], sweeps=sweeps)


def svd_residual(a: np.ndarray, r: SvdResult) -> float:
    """Frobenius norm of A - U diag(S) V^H, evaluated in double precision."""
    a = np.asarray(a)
    if r.U.shape[0] != a.shape[0] or r.V.shape[0] != a.shape[1] or r.S.size != r.U.shape[1]:
        raise DimensionMismatch("decomposition does not match the matrix shape")
    u = r.U.astype(np.complex128)
    v = r.V.astype(np.complex128)
    recon = (u * r.S.astype(np.float64)[None, :]) @ v.conj().T
    return float(np.linalg.norm(a.astype(np.complex128) - recon))
