import numpy as np
import pytest
from scipy import linalg as sla

from ajdkit.linalg import (
    DimensionError,
    DomainError,
    NotHPDError,
    as_hpd,
    commutation_matrix,
    correlation_scale,
    diag_part,
    diag_projection,
    expm,
    hermitian,
    invsqrtm,
    is_hpd,
    logdet_alpha_divergence,
    logdet_alpha_divergence_direct,
    logm,
    matrix_function,
    powm,
    riemannian_distance,
    sqrtm,
    unvec,
    vec,
)

from conftest import random_hpd, random_invertible


class TestHermitian:
    def test_exact_symmetry_from_lower_triangle(self, rng):
        x = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        h = hermitian(x)
        assert np.array_equal(h, h.conj().T)
        np.testing.assert_array_equal(np.tril(h, -1), np.tril(x, -1))
        np.testing.assert_array_equal(np.diag(h), np.real(np.diag(x)))

    def test_real_input_stays_real(self, rng):
        h = hermitian(rng.standard_normal((4, 4)))
        assert h.dtype == np.float64

    def test_non_square(self):
        with pytest.raises(DimensionError):
            hermitian(np.ones((2, 3)))


class TestAsHpd:
    def test_accepts_hpd(self, rng):
        a = random_hpd(rng, 4, complex_=True)
        np.testing.assert_allclose(as_hpd(a), a, rtol=0, atol=1e-14)
        assert is_hpd(a)

    def test_rejects_indefinite(self):
        with pytest.raises(NotHPDError, match="eigenvalues"):
            as_hpd(np.diag([1.0, -1.0]))
        assert not is_hpd(np.diag([1.0, -1.0]))

    def test_rejects_numerically_singular(self):
        with pytest.raises(NotHPDError):
            as_hpd(np.diag([1.0, 1e-20]))

    def test_rejects_nan(self):
        with pytest.raises(NotHPDError):
            as_hpd(np.array([[1.0, np.nan], [np.nan, 1.0]]))

    def test_not_hpd_is_a_domain_error(self):
        assert issubclass(NotHPDError, DomainError)


class TestDiagPart:
    def test_examples(self):
        np.testing.assert_array_equal(diag_part(np.eye(3)), np.eye(3))
        np.testing.assert_array_equal(diag_part([[1, 0.5], [0.5, 1]]), np.eye(2))

    def test_discrete_rotation_average(self, rng):
        n = 5
        a = hermitian(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        avg = np.zeros((n, n), dtype=complex)
        for k in range(n):
            u = np.diag(np.exp(1j * np.arange(n) * 2 * np.pi * k / n))
            avg += u @ a @ u.conj().T
        np.testing.assert_allclose(avg / n, diag_part(a), atol=1e-14)

    def test_trace_identities(self, rng):
        a, b = rng.standard_normal((2, 4, 4))
        lhs = np.trace(diag_part(a) @ diag_part(b))
        np.testing.assert_allclose(np.trace(a @ diag_part(b)), lhs, rtol=1e-12)
        np.testing.assert_allclose(np.trace(diag_part(a) @ b), lhs, rtol=1e-12)

    def test_non_square(self):
        with pytest.raises(DimensionError):
            diag_part(np.ones((2, 3)))


class TestCorrelationScale:
    def test_example(self):
        form = correlation_scale([[4.0, 1.0], [1.0, 1.0]])
        np.testing.assert_allclose(form.a_hat, [[1, 0.5], [0.5, 1]], rtol=1e-15)
        np.testing.assert_allclose(form.a_tilde, [[0, 0.5], [0.5, 0]], rtol=1e-15)

    def test_diagonal_input(self):
        form = correlation_scale(np.diag([2.0, 3.0, 5.0]))
        np.testing.assert_array_equal(form.a_hat, np.eye(3))
        assert not np.any(form.a_tilde)

    def test_unit_diagonal_and_scale_invariance(self, rng):
        a = random_hpd(rng, 5, complex_=True)
        d = np.diag(rng.uniform(0.1, 10, 5))
        f1, f2 = correlation_scale(a), correlation_scale(d @ a @ d)
        assert np.all(np.diag(f1.a_hat) == 1.0)
        assert np.trace(f1.a_tilde) == 0
        assert np.max(np.abs(f1.a_tilde)) < 1
        np.testing.assert_allclose(f2.a_hat, f1.a_hat, atol=1e-14)


class TestMatrixFunctions:
    def test_log_identity(self):
        np.testing.assert_array_equal(logm(np.eye(3)), np.zeros((3, 3)))

    def test_exp_log_roundtrip(self, rng):
        a = random_hpd(rng, 6, complex_=True)
        np.testing.assert_allclose(expm(logm(a)), a, rtol=1e-12, atol=1e-12 * np.linalg.norm(a))

    def test_against_scipy(self, rng):
        a = random_hpd(rng, 5)
        np.testing.assert_allclose(logm(a), sla.logm(a), atol=1e-12)
        np.testing.assert_allclose(sqrtm(a), sla.sqrtm(a), atol=1e-12)
        np.testing.assert_allclose(expm(a / 10), sla.expm(a / 10), rtol=1e-12)

    def test_roots_and_powers(self, rng):
        a = random_hpd(rng, 4, complex_=True)
        s = sqrtm(a)
        np.testing.assert_allclose(s @ s, a, atol=1e-12)
        np.testing.assert_allclose(invsqrtm(a) @ s, np.eye(4), atol=1e-12)
        np.testing.assert_allclose(powm(a, 0.5), s, atol=1e-12)
        np.testing.assert_allclose(powm(a, -1.0), np.linalg.inv(a), atol=1e-12)

    def test_exactly_hermitian_output(self, rng):
        out = logm(random_hpd(rng, 5, complex_=True))
        assert np.array_equal(out, out.conj().T)

    def test_unitary_similarity(self, rng):
        b = random_hpd(rng, 4, complex_=True)
        u, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        np.testing.assert_allclose(logm(u.conj().T @ b @ u), u.conj().T @ logm(b) @ u, atol=1e-12)

    def test_callable(self, rng):
        a = random_hpd(rng, 3)
        np.testing.assert_allclose(matrix_function(a, lambda w: w**2), a @ a, rtol=1e-12)

    def test_domain(self):
        with pytest.raises(NotHPDError):
            logm(np.diag([1.0, -2.0]))
        with pytest.raises(ValueError):
            matrix_function(np.eye(2), "cos")
        with pytest.raises(ValueError):
            matrix_function(np.eye(2), "pow")


class TestRiemannianDistance:
    def test_examples(self, rng):
        p = random_hpd(rng, 3)
        assert riemannian_distance(p, p) == pytest.approx(0.0, abs=1e-12)
        e2 = np.exp(2.0)
        assert riemannian_distance(np.eye(2), np.diag([e2, e2])) == pytest.approx(2 * np.sqrt(2), rel=1e-14)

    def test_congruence_and_inversion_invariance(self, rng):
        p, q = random_hpd(rng, 4, True), random_hpd(rng, 4, True)
        c = random_invertible(rng, 4, True)
        d = riemannian_distance(p, q)
        assert riemannian_distance(c @ p @ c.conj().T, c @ q @ c.conj().T) == pytest.approx(d, rel=1e-10)
        assert riemannian_distance(np.linalg.inv(p), np.linalg.inv(q)) == pytest.approx(d, rel=1e-10)
        assert riemannian_distance(q, p) == pytest.approx(d, rel=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            riemannian_distance(np.eye(2), np.eye(3))


class TestLogdetAlphaDivergence:
    @pytest.mark.parametrize("alpha", [-1.0, -0.75, -0.3, 0.0, 0.3, 0.75, 1.0])
    def test_matches_determinant_route(self, rng, alpha):
        a, b = random_hpd(rng, 5, True), random_hpd(rng, 5, True)
        np.testing.assert_allclose(
            logdet_alpha_divergence(a, b, alpha), logdet_alpha_divergence_direct(a, b, alpha), rtol=1e-10
        )

    def test_zero_on_equal_arguments(self, rng):
        a = random_hpd(rng, 4)
        for alpha in (-1, -0.5, 0, 0.5, 1):
            assert logdet_alpha_divergence(a, a, alpha) == pytest.approx(0.0, abs=1e-12)

    def test_hand_example(self):
        assert logdet_alpha_divergence(np.eye(2), np.diag([2.0, 2.0]), -1.0) == pytest.approx(2 - 2 * np.log(2), rel=1e-14)

    def test_duality_and_symmetry(self, rng):
        a, b = random_hpd(rng, 4), random_hpd(rng, 4)
        for alpha in (-0.75, 0.3, 1.0):
            np.testing.assert_allclose(
                logdet_alpha_divergence(a, b, alpha), logdet_alpha_divergence(b, a, -alpha), rtol=1e-12
            )
        np.testing.assert_allclose(logdet_alpha_divergence(a, b, 0), logdet_alpha_divergence(b, a, 0), rtol=1e-12)

    def test_endpoint_limits(self, rng):
        a, b = random_hpd(rng, 4, True), random_hpd(rng, 4, True)
        for end in (-1.0, 1.0):
            near = logdet_alpha_divergence(a, b, end * (1 - 1e-8))
            assert abs(near - logdet_alpha_divergence(a, b, end)) < 1e-6

    def test_domain(self):
        with pytest.raises(DomainError):
            logdet_alpha_divergence(np.eye(2), np.eye(2), 1.5)


class TestVecAlgebra:
    def test_vec_example(self):
        np.testing.assert_array_equal(vec(np.array([[1, 3], [2, 4]])), [1, 2, 3, 4])

    def test_unvec_inverse(self, rng):
        z = rng.standard_normal((3, 5))
        np.testing.assert_array_equal(unvec(vec(z), 3, 5), z)
        with pytest.raises(DimensionError):
            unvec(np.ones(7), 2, 3)

    def test_vec_of_product(self, rng):
        a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        z = rng.standard_normal((4, 2))
        b = rng.standard_normal((2, 5))
        np.testing.assert_allclose(vec(a @ z @ b), np.kron(b.T, a) @ vec(z), atol=1e-12)

    def test_trace_vec_identities(self, rng):
        a, b, z = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)) for _ in range(3))
        eye = np.eye(4)
        p = commutation_matrix(4, 4).dense()
        np.testing.assert_allclose(np.trace(a.conj().T @ b), vec(a).conj() @ vec(b), rtol=1e-12)
        np.testing.assert_allclose(
            np.trace(z.conj().T @ a @ z @ b), vec(z).conj() @ np.kron(b.T, a) @ vec(z), rtol=1e-12
        )
        np.testing.assert_allclose(
            np.trace(a @ z @ b @ z), vec(z) @ np.kron(eye, a.T) @ p @ np.kron(eye, b) @ vec(z), rtol=1e-12
        )


class TestStructuredPermutations:
    @pytest.mark.parametrize("m,n", [(1, 1), (2, 3), (3, 2), (4, 4)])
    def test_commutation_definition(self, rng, m, n):
        p = commutation_matrix(m, n)
        z = rng.standard_normal((m, n))
        np.testing.assert_array_equal(p.apply(vec(z)), vec(z.T))
        np.testing.assert_array_equal(p.dense() @ vec(z), vec(z.T))
        np.testing.assert_array_equal(p.dense().T, commutation_matrix(n, m).dense())
        np.testing.assert_array_equal(p.dense() @ commutation_matrix(n, m).dense(), np.eye(m * n))
        d = p.dense()
        assert np.all(d.sum(axis=0) == 1) and np.all(d.sum(axis=1) == 1)

    def test_involution(self):
        p = commutation_matrix(3, 3).dense()
        np.testing.assert_array_equal(p @ p, np.eye(9))

    @pytest.mark.parametrize("n", range(1, 7))
    def test_diag_projection(self, rng, n):
        pd = diag_projection(n).dense()
        z = rng.standard_normal((n, n))
        np.testing.assert_array_equal(pd @ vec(z), vec(np.diag(np.diag(z))))
        np.testing.assert_array_equal(pd @ pd, pd)
        p = commutation_matrix(n, n).dense()
        np.testing.assert_array_equal(pd @ p, p @ pd)

    def test_kronecker_permutation_identity(self, rng):
        # A (p x q) kron B (r x s) = P_{p x r} (B kron A) P_{s x q}
        p_, q_, r_, s_ = 2, 3, 4, 2
        a = rng.standard_normal((p_, q_))
        b = rng.standard_normal((r_, s_))
        lhs = np.kron(a, b)
        rhs = commutation_matrix(p_, r_).dense() @ np.kron(b, a) @ commutation_matrix(s_, q_).dense()
        np.testing.assert_allclose(lhs, rhs, atol=1e-14)

    def test_bad_sizes(self):
        with pytest.raises(DimensionError):
            commutation_matrix(0, 2)
        with pytest.raises(DimensionError):
            diag_projection(0)
