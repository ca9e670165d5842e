import math

import numpy as np
import pytest

from dymart.errors import CapacityError, DomainError, SolverError
from dymart.integral import RandomWalk
from dymart.sde import (
    Sampled,
    SdeProblem,
    euler_mean_recursion,
    euler_solve,
    exact_mean,
    gbm,
    martingale_diagnostic,
    ou,
    polynomial,
    weak_expectation,
)


def zero(t, x):
    return 0.0 * x


def one(t, x):
    return 1.0


class TestEulerSolve:
    def test_no_motion(self):
        X = euler_solve(SdeProblem(zero, zero, 1.5, 5))
        assert np.all(X.values == 1.5)

    def test_deterministic_drift(self):
        n = 6
        X = euler_solve(SdeProblem(one, zero, 0.25, n))
        for l in range(n + 1):
            # forward Euler on dx = dt, accumulated step by step
            expected = 0.25
            for _ in range(l):
                expected = expected + 1.0 / n
            assert np.all(X.values[l] == expected)
            assert X.values[l][0] == pytest.approx(0.25 + l / n, abs=1e-15)

    def test_pure_noise_is_walk(self):
        n = 7
        X = euler_solve(SdeProblem(zero, one, 2.0, n))
        np.testing.assert_allclose(X.values, 2.0 + RandomWalk(X.space).values, atol=1e-14)

    def test_zero_noise_matches_forward_euler(self):
        n = 8
        X = euler_solve(SdeProblem(lambda t, x: np.cos(t) * x, zero, 1.0, n))
        x = 1.0
        for l in range(n):
            x = x + math.cos(l / n) * x / n
            assert np.all(X.values[l + 1] == x)

    def test_non_finite_coefficient(self):
        p = SdeProblem(lambda t, x: np.where(x > 0, 1.0, np.inf), zero, 0.0, 3)
        with pytest.raises(SolverError, match="drift inf at time step 0.*x=0.0"):
            euler_solve(p)

    def test_capacity(self, monkeypatch):
        monkeypatch.setenv("DYMART_DEPTH_CAP", "10")
        with pytest.raises(CapacityError):
            euler_solve(gbm(depth=11))

    def test_sampled_full_count_sequential(self):
        p = gbm(depth=8)
        full = euler_solve(p)
        sampled = euler_solve(p, Sampled(256, sequential=True))
        np.testing.assert_array_equal(sampled.atoms, np.arange(256))
        np.testing.assert_array_equal(sampled.paths, full.values.T)

    def test_sampled_seeded_rows_match(self):
        p = ou(depth=9)
        full = euler_solve(p)
        a = euler_solve(p, Sampled(40, seed=3))
        b = euler_solve(p, Sampled(40, seed=3))
        np.testing.assert_array_equal(a.atoms, b.atoms)
        assert len(set(a.atoms.tolist())) == 40
        np.testing.assert_array_equal(a.paths, full.values.T[a.atoms])

    def test_sampled_full_permutation(self):
        p = gbm(depth=6)
        s = euler_solve(p, Sampled(64, seed=11))
        order = np.argsort(s.atoms)
        np.testing.assert_array_equal(s.paths[order], euler_solve(p).values.T)

    @pytest.mark.parametrize("count", [0, 257])
    def test_sampled_count(self, count):
        with pytest.raises(DomainError):
            euler_solve(gbm(depth=8), Sampled(count))

    def test_unknown_mode(self):
        with pytest.raises(DomainError):
            euler_solve(gbm(depth=3), "partial")


class TestWeakExpectation:
    @pytest.mark.parametrize("n", [1, 4, 10])
    def test_gbm_mean_recursion(self, n):
        mu, sigma, x0 = 0.05, 0.2, 1.3
        est = weak_expectation(gbm(mu, sigma, x0, n), lambda x: x)
        assert est == pytest.approx(x0 * (1 + mu / n) ** n, abs=1e-12)

    def test_constant_payoff(self):
        assert weak_expectation(gbm(depth=5), lambda x: 1.0) == 1.0

    @pytest.mark.parametrize("n", [2, 7, 12])
    def test_walk_second_moment(self, n):
        x0 = 0.5
        est = weak_expectation(SdeProblem(zero, one, x0, n), lambda x: x * x)
        assert est == pytest.approx(x0**2 + 1, abs=1e-12)

    def test_weak_error_decreases(self):
        errs = []
        for n in (6, 8, 10, 12, 14):
            p = gbm(0.05, 0.2, 1.0, n)
            err = abs(weak_expectation(p, lambda x: x) - math.exp(0.05))
            bound = abs((1 + 0.05 / n) ** n - math.exp(0.05))
            assert err <= bound + 1e-12
            errs.append(err)
        assert all(a > b for a, b in zip(errs, errs[1:]))


class TestReferences:
    def test_recursion_matches_closed_form_for_gbm(self):
        p = gbm(0.05, 0.2, 2.0, 9)
        assert euler_mean_recursion(p) == pytest.approx(2.0 * (1 + 0.05 / 9) ** 9, rel=1e-15)

    def test_exact_mean(self):
        assert exact_mean(gbm(0.1, 0.3, 2.0)) == pytest.approx(2.0 * math.exp(0.1))
        # OU mean: m + (x0 - m) e^{-theta}
        assert exact_mean(ou(2.0, 0.5, 0.3, 1.5)) == pytest.approx(0.5 + math.exp(-2.0))
        assert exact_mean(polynomial([0.4], [1.0], 1.0)) == pytest.approx(1.4)

    def test_ou_converges_to_reference(self):
        p = ou()
        errs = [abs(weak_expectation(p.with_depth(n), lambda x: x) - exact_mean(p))
                for n in (6, 10, 14)]
        assert errs[0] > errs[1] > errs[2]

    def test_polynomial_affine_detection(self):
        assert polynomial([1, 2], [0]).affine_drift == (1.0, 2.0)
        assert polynomial([1, 2, 3], [0]).affine_drift is None
        with pytest.raises(DomainError):
            exact_mean(polynomial([0, 0, 1], [0]))

    def test_polynomial_zero(self):
        p = polynomial([0.0], [0.0], 3.5, 6)
        assert weak_expectation(p, lambda x: x) == 3.5


class TestDiagnostic:
    def test_walk(self):
        assert martingale_diagnostic(SdeProblem(zero, one, 0.0, 8)).status == "pass"

    def test_multiplicative(self):
        d = martingale_diagnostic(SdeProblem(zero, lambda t, x: x, 1.0, 10))
        assert d.passed and d.report.max_violation <= 1e-10

    def test_drift_not_applicable(self):
        assert martingale_diagnostic(SdeProblem(one, zero, 0.0, 4)).status == "not-applicable"

    def test_random_diffusions(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(1, 13))
            c = rng.uniform(-1, 1, size=3)
            p = SdeProblem(zero, lambda t, x, c=c: c[0] + c[1] * np.tanh(x) + c[2] * t, 0.3, n)
            assert martingale_diagnostic(p).passed
