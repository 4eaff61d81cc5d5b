import warnings

import numpy as np
import pytest

from ajdkit.linalg import ConvergenceWarning, DomainError, logdet_alpha_divergence, riemannian_distance
from ajdkit.measures import diagonality
from ajdkit.projections import (
    CRITERIA,
    alpha_residual,
    closest_diagonal,
    divergence,
    riemannian_residual,
    true_diagonality,
)

from conftest import random_hpd


def project(a, criterion, **kw):
    alpha = 0.4 if criterion == "logdet_alpha" else None
    return closest_diagonal(a, criterion, alpha=alpha, **kw)


class TestClosedForms:
    def test_kl_left_hand_value(self):
        a = np.array([[2.0, 0.6], [0.6, 1.0]])
        x, rep = closest_diagonal(a, "kl_left")
        np.testing.assert_allclose(np.diag(x), [1.64, 0.82], rtol=1e-14)
        assert rep.iterations == 0 and rep.converged

    def test_formulas(self, rng):
        a = random_hpd(rng, 4, complex_=True)
        d = np.real(np.diag(a))
        e = np.real(np.diag(np.linalg.inv(a)))
        np.testing.assert_allclose(np.diag(project(a, "frobenius")[0]), d)
        np.testing.assert_allclose(np.diag(project(a, "kl_right")[0]), d)
        np.testing.assert_allclose(np.diag(project(a, "kl_left")[0]), 1 / e, rtol=1e-12)
        np.testing.assert_allclose(np.diag(project(a, "kl_symmetric")[0]), np.sqrt(d / e), rtol=1e-12)

    @pytest.mark.parametrize("criterion", CRITERIA)
    def test_diagonal_is_fixed(self, criterion):
        a = np.diag([0.3, 2.0, 5.0])
        x, rep = project(a, criterion)
        np.testing.assert_allclose(x, a, rtol=1e-12)
        assert rep.converged

    @pytest.mark.parametrize("criterion", ["kl_right", "kl_left", "kl_symmetric"])
    def test_closed_forms_minimize(self, rng, criterion):
        # the closed form beats random positive diagonal perturbations of itself
        a = random_hpd(rng, 4)
        x, _ = project(a, criterion)
        f = divergence(a, x, criterion)
        for _ in range(20):
            y = x * np.exp(0.05 * rng.standard_normal(4))
            assert divergence(a, np.diag(np.diag(y)), criterion) > f


class TestRiemannian:
    def test_residual_and_optimality(self, rng):
        for complex_ in (False, True):
            a = random_hpd(rng, 5, complex_=complex_)
            x, rep = closest_diagonal(a, "riemannian")
            assert rep.converged
            assert riemannian_residual(a, x) <= 1e-10
            assert riemannian_distance(a, x) <= riemannian_distance(a, np.diag(np.real(np.diag(a))))

    def test_uniqueness_from_three_starts(self, rng):
        a = random_hpd(rng, 5, complex_=True)
        starts = [np.real(np.diag(a)), np.ones(5), 1 / np.real(np.diag(np.linalg.inv(a)))]
        xs = [closest_diagonal(a, "riemannian", x0=s)[0] for s in starts]
        for x in xs[1:]:
            np.testing.assert_allclose(x, xs[0], rtol=1e-8)

    def test_true_diagonality_below_measure(self, rng):
        a = random_hpd(rng, 4)
        assert true_diagonality(a, "riemannian") < diagonality(a, "riemannian")

    def test_non_convergence_is_reported(self, rng):
        a = random_hpd(rng, 5, cond=1e4)
        x, rep = closest_diagonal(a, "riemannian", max_iter=1, tol=1e-14)
        assert not rep.converged and rep.iterations == 1
        assert np.all(np.diag(x) > 0)
        with pytest.warns(ConvergenceWarning):
            true_diagonality(a, "riemannian", max_iter=1, tol=1e-14)


class TestAlpha:
    @pytest.mark.parametrize("alpha", [-0.75, 0.0, 0.75])
    def test_residual_and_optimality(self, rng, alpha):
        a = random_hpd(rng, 5, complex_=True)
        x, rep = closest_diagonal(a, "logdet_alpha", alpha=alpha)
        assert rep.converged
        assert alpha_residual(a, x, alpha) <= 1e-10
        assert np.all(np.diag(x) > 0)
        f = logdet_alpha_divergence(a, x, alpha)
        assert f <= logdet_alpha_divergence(a, np.diag(np.real(np.diag(a))), alpha)
        for _ in range(10):
            y = np.diag(np.diag(x) * np.exp(0.05 * rng.standard_normal(5)))
            assert logdet_alpha_divergence(a, y, alpha) > f

    def test_bhattacharyya_is_alpha_zero(self, rng):
        a = random_hpd(rng, 4)
        np.testing.assert_allclose(
            closest_diagonal(a, "bhattacharyya")[0], closest_diagonal(a, "logdet_alpha", alpha=0.0)[0], rtol=1e-12
        )

    def test_approaches_kl_endpoints(self, rng):
        # D^alpha(A, X) tends to the right KL criterion as alpha -> 1
        a = random_hpd(rng, 4)
        x, _ = closest_diagonal(a, "logdet_alpha", alpha=1 - 1e-6)
        np.testing.assert_allclose(x, closest_diagonal(a, "kl_right")[0], rtol=1e-4)
        x, _ = closest_diagonal(a, "logdet_alpha", alpha=-1 + 1e-6)
        np.testing.assert_allclose(x, closest_diagonal(a, "kl_left")[0], rtol=1e-4)

    def test_alpha_validation(self):
        with pytest.raises(DomainError):
            closest_diagonal(np.eye(2), "logdet_alpha", alpha=1.0)
        with pytest.raises(ValueError):
            closest_diagonal(np.eye(2), "logdet_alpha")
        with pytest.raises(ValueError):
            closest_diagonal(np.eye(2), "nope")
        with pytest.raises(ValueError):
            closest_diagonal(np.eye(2), "riemannian", tol=0.0)


class TestEquivariance:
    @pytest.mark.parametrize("criterion", ["riemannian", "kl_left", "kl_right", "kl_symmetric"])
    def test_diagonal_scaling(self, rng, criterion):
        a = random_hpd(rng, 5, complex_=True)
        d = np.diag(rng.uniform(0.2, 5.0, 5) * rng.choice([-1, 1], 5))
        x, _ = project(a, criterion)
        y, _ = project(d @ a @ d, criterion)
        np.testing.assert_allclose(y, d @ x @ d, rtol=1e-8)


class TestTrueDiagonality:
    @pytest.mark.parametrize("criterion", CRITERIA)
    def test_zero_on_diagonal(self, criterion):
        assert abs(true_diagonality(np.diag([1.0, 3.0]), criterion, alpha=0.2 if criterion == "logdet_alpha" else None)) < 1e-14

    def test_frobenius_matches_measure(self, rng):
        a = random_hpd(rng, 4, complex_=True)
        assert true_diagonality(a, "frobenius") == pytest.approx(diagonality(a, "frobenius"), rel=1e-14)

    def test_diag_projection_matches_log_barrier_measure(self, rng):
        # the KL projection onto Diag(A) leaves -log det of the correlation matrix
        a = random_hpd(rng, 4, complex_=True)
        assert true_diagonality(a, "kl_right") == pytest.approx(diagonality(a, "kl_left"), rel=1e-12)

    def test_other_criteria_undercut_measures(self, rng):
        a = random_hpd(rng, 4)
        assert true_diagonality(a, "kl_left") < diagonality(a, "kl_right")
        assert true_diagonality(a, "kl_symmetric") < diagonality(a, "kl_symmetric")
        assert true_diagonality(a, "bhattacharyya") < diagonality(a, "bhattacharyya")

    def test_no_warning_when_converged(self, rng):
        with warnings.catch_warnings():
            warnings.simplefilter("error", ConvergenceWarning)
            true_diagonality(random_hpd(rng, 3), "riemannian")
