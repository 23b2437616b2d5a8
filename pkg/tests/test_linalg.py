import math

import numpy as np
import pytest

from subspace_doa.errors import DimensionMismatch, NoConvergence, NotHermitian
from subspace_doa.linalg import (SvdResult, adjoint, hermitian_svd, matmul, normalize_phase, outer_product,
                                 quadratic_form, svd_residual)

from oracles import naive_frobenius_residual, naive_matmul


def random_psd(rng, m=8, dtype=np.complex128):
    b = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    a = b @ b.conj().T
    return ((a + a.conj().T) / 2).astype(dtype)


def test_identity():
    r = hermitian_svd(np.eye(8, dtype=complex))
    np.testing.assert_array_equal(r.S, np.ones(8))
    np.testing.assert_array_equal(r.U, np.eye(8))
    np.testing.assert_array_equal(r.V, np.eye(8))
    assert svd_residual(np.eye(8), r) == 0.0


def test_diagonal_is_already_decomposed():
    r = hermitian_svd(np.diag([4.0, 1.0]).astype(complex))
    np.testing.assert_array_equal(r.S, [4.0, 1.0])
    np.testing.assert_array_equal(r.U, np.eye(2))
    np.testing.assert_array_equal(r.V, np.eye(2))


def test_diagonal_gets_sorted():
    r = hermitian_svd(np.diag([1.0, 5.0, 3.0]).astype(complex))
    np.testing.assert_array_equal(r.S, [5.0, 3.0, 1.0])
    np.testing.assert_array_equal(np.abs(r.U), np.eye(3)[:, [1, 2, 0]])


@pytest.mark.parametrize("dtype,bound", [(np.complex64, 1.882e-05), (np.complex128, 1e-12)])
def test_random_residual_bounds(dtype, bound):
    rng = np.random.default_rng(2024)
    for _ in range(50):
        a = random_psd(rng, dtype=dtype)
        r = hermitian_svd(a)
        assert r.U.dtype == dtype and r.S.dtype == np.finfo(dtype).dtype
        assert svd_residual(a, r) <= bound * np.linalg.norm(a.astype(complex))


def test_matches_reference_eigenvalues():
    rng = np.random.default_rng(5)
    a = random_psd(rng)
    r = hermitian_svd(a)
    np.testing.assert_allclose(r.S, np.sort(np.linalg.eigvalsh(a))[::-1], rtol=1e-12)
    assert np.all(np.diff(r.S) <= 0)


def test_unitary_and_eigen_relation():
    rng = np.random.default_rng(6)
    a = random_psd(rng)
    r = hermitian_svd(a)
    tol = 100 * np.finfo(float).eps
    assert np.linalg.norm(r.U.conj().T @ r.U - np.eye(8)) <= 8 * tol
    for k in range(8):
        assert np.linalg.norm(a @ r.U[:, k] - r.S[k] * r.U[:, k]) <= 8 * tol * np.linalg.norm(a)
    np.testing.assert_array_equal(r.U, r.V)


def test_phase_rule():
    rng = np.random.default_rng(7)
    r = hermitian_svd(random_psd(rng))
    for k in range(8):
        col = r.U[:, k]
        j = np.argmax(np.abs(col))
        assert col[j].imag == 0 and col[j].real > 0


def test_deterministic_bits():
    rng = np.random.default_rng(8)
    a = random_psd(rng)
    r1, r2 = hermitian_svd(a), hermitian_svd(a.copy())
    assert r1.U.tobytes() == r2.U.tobytes() and r1.S.tobytes() == r2.S.tobytes()


def test_negative_roundoff_eigenvalue_keeps_reconstruction():
    a = np.diag([2.0, -1e-17]).astype(complex)
    r = hermitian_svd(a)
    assert np.all(r.S >= 0)
    assert svd_residual(a, r) == 0.0


def test_rejects_non_hermitian():
    a = np.array([[1, 2], [0, 1]], dtype=complex)
    with pytest.raises(NotHermitian):
        hermitian_svd(a)


def test_symmetrises_small_asymmetry():
    rng = np.random.default_rng(9)
    a = random_psd(rng)
    a[0, 1] += 1e-16
    r = hermitian_svd(a)
    assert svd_residual(a, r) < 1e-12 * np.linalg.norm(a)


def test_no_convergence_is_an_error():
    rng = np.random.default_rng(10)
    with pytest.raises(NoConvergence):
        hermitian_svd(random_psd(rng), max_sweeps=1)


def test_residual_with_zeroed_singular_values():
    r = SvdResult(np.eye(8, dtype=complex), np.zeros(8), np.eye(8, dtype=complex))
    assert svd_residual(np.eye(8), r) == pytest.approx(math.sqrt(8), rel=1e-15)


def test_residual_matches_naive_sum():
    rng = np.random.default_rng(11)
    a = random_psd(rng)
    r = hermitian_svd(a)
    # perturb so the residual is well above roundoff
    s = r.S * (1 + 1e-6 * rng.standard_normal(8))
    pert = SvdResult(r.U, s, r.V)
    got = svd_residual(a, pert)
    ref = naive_frobenius_residual(a, r.U, s, r.V)
    assert got == pytest.approx(ref, rel=1e-9)


def test_residual_shape_mismatch():
    r = hermitian_svd(np.eye(3, dtype=complex))
    with pytest.raises(DimensionMismatch):
        svd_residual(np.eye(4), r)


def test_quadratic_form_identity_gives_norm():
    a = np.exp(1j * np.linspace(0, 3, 8))
    assert quadratic_form(a, np.eye(8)) == pytest.approx(8.0, abs=1e-14)


def test_adjoint_is_an_involution():
    rng = np.random.default_rng(12)
    a = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    assert adjoint(adjoint(a)).tobytes() == a.tobytes()


@pytest.mark.parametrize("dtype", [np.complex64, np.complex128])
def test_matmul_against_triple_loop(dtype):
    rng = np.random.default_rng(13)
    a = (rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))).astype(dtype)
    b = (rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))).astype(dtype)
    ref = naive_matmul(a.astype(complex), b.astype(complex))
    got = matmul(a, b)
    eps = np.finfo(dtype).eps
    # 4 ulp of the accumulated magnitude per entry
    scale = naive_matmul(np.abs(a).astype(float), np.abs(b).astype(float))
    assert np.all(np.abs(got - ref) <= 4 * eps * scale * 8 ** 0.5)


def test_outer_product_and_shapes():
    u = np.array([1, 1j])
    np.testing.assert_array_equal(outer_product(u, u), [[1, -1j], [1j, 1]])
    with pytest.raises(DimensionMismatch):
        matmul(np.eye(2), np.eye(3))
    with pytest.raises(DimensionMismatch):
        quadratic_form(np.ones(3), np.eye(2))


def test_normalize_phase_is_idempotent():
    rng = np.random.default_rng(14)
    u = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    once = normalize_phase(u)
    np.testing.assert_allclose(normalize_phase(once), once, rtol=0, atol=1e-15)
