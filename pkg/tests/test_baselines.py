import numpy as np
import pytest

from ajdkit.ajd import AjdProblem, SolveOptions, cost, solve
from ajdkit.baselines import jadiag, off_criterion, uwedge
from ajdkit.bench import amari_moreau

from conftest import diagonalizable_set, random_hpd


@pytest.mark.parametrize("algo", [jadiag, uwedge])
class TestBaselines:
    @pytest.mark.parametrize("complex_", [False, True])
    def test_noiseless_recovery(self, rng, algo, complex_):
        mats, a = diagonalizable_set(rng, 5, 8, complex_=complex_)
        res = algo(AjdProblem(mats, 0.0))
        assert res.converged
        assert amari_moreau(res.c @ a) < 1e-6

    def test_starts_from_identity(self, rng, algo):
        mats, _ = diagonalizable_set(rng, 4, 5)
        seen = []
        algo(AjdProblem(mats), opts=SolveOptions(max_iter=1), callback=lambda it, c: seen.append(c.copy()))
        p = AjdProblem(mats)
        d = np.sqrt(np.diag(p.mean_matrix()))
        np.testing.assert_allclose(seen[0], np.diag(1 / d), rtol=1e-14)

    def test_shared_result_contract(self, rng, algo):
        mats, _ = diagonalizable_set(rng, 4, 5)
        p = AjdProblem(mats)
        res = algo(p, opts=SolveOptions(max_iter=3))
        assert res.iterations == 3 and len(res.trace) == 4
        np.testing.assert_allclose(np.diag(res.c @ p.mean_matrix() @ res.c.T), 1.0, rtol=1e-12)
        assert [t.iter for t in res.trace] == [0, 1, 2, 3]

    def test_alpha_is_ignored(self, rng, algo):
        mats = [random_hpd(rng, 3) for _ in range(4)]
        a = algo(AjdProblem(mats, -0.5), opts=SolveOptions(max_iter=5)).c
        b = algo(AjdProblem(mats, 0.5), opts=SolveOptions(max_iter=5)).c
        np.testing.assert_array_equal(a, b)


class TestJadiag:
    def test_decreases_left_kl(self, rng):
        p = AjdProblem([random_hpd(rng, 4) for _ in range(6)], 1.0)
        res = jadiag(p, opts=SolveOptions(max_iter=20))
        costs = res.costs
        assert np.all(np.diff(costs) <= 1e-12 * costs[0])
        np.testing.assert_allclose(costs[-1], cost(res.c, p), rtol=1e-14)

    def test_matches_newton_minimum(self, rng):
        p = AjdProblem([random_hpd(rng, 3) for _ in range(5)], 1.0)
        f_jadiag = jadiag(p, opts=SolveOptions(max_iter=2000, tol=1e-20)).trace[-1].cost
        f_newton = solve(p).trace[-1].cost
        assert f_jadiag == pytest.approx(f_newton, rel=1e-8)


class TestUwedge:
    def test_off_criterion(self, rng):
        mats, a = diagonalizable_set(rng, 3, 4)
        p = AjdProblem(mats)
        assert off_criterion(np.linalg.inv(a), p) < 1e-25
        expected = sum(np.sum(x**2) - np.sum(np.diag(x) ** 2) for x in mats)
        assert off_criterion(np.eye(3), p) == pytest.approx(expected, rel=1e-14)
