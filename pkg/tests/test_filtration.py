import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dymart.errors import DomainError
from dymart.filtration import (
    FiltrationLevel,
    cond_expectation,
    filtration_basis,
    is_measurable,
    measurability_violation,
    spectral_truncate,
)
from dymart.space import DyadicSpace, RandomVariable, expectation, max_coin, rademacher, walsh, wht_forward

from conftest import naive_block_average


def rand_var(space, seed):
    return RandomVariable(space, np.random.default_rng(seed).standard_normal(space.size))


class TestCondExpectation:
    def test_block_example(self):
        f = RandomVariable(DyadicSpace(2), [1, 3, 5, 7])
        np.testing.assert_array_equal(cond_expectation(f, 1).values, [2, 2, 6, 6])

    def test_finest_and_coarsest(self, rng):
        s = DyadicSpace(6)
        f = RandomVariable(s, rng.standard_normal(s.size))
        np.testing.assert_array_equal(cond_expectation(f, 6).values, f.values)
        coarse = cond_expectation(f, 0).values
        assert np.all(coarse == coarse[0])
        assert coarse[0] == expectation(f)

    def test_matches_naive(self, rng):
        n = 7
        s = DyadicSpace(n)
        f = RandomVariable(s, rng.standard_normal(s.size))
        for l in range(n + 1):
            np.testing.assert_allclose(
                cond_expectation(f, l).values, naive_block_average(f.values, l, n), atol=1e-14
            )

    @pytest.mark.parametrize("l", [-1, 4])
    def test_level_range(self, l):
        with pytest.raises(DomainError):
            cond_expectation(DyadicSpace(3).constant(0), l)

    def test_level_object_space_mismatch(self):
        with pytest.raises(DomainError):
            cond_expectation(DyadicSpace(3).constant(0), FiltrationLevel(DyadicSpace(4), 1))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2**32 - 1))
    def test_tower_law_exact(self, n, seed):
        s = DyadicSpace(n)
        f = rand_var(s, seed)
        for l in range(n + 1):
            inner = cond_expectation(f, l)
            for k in range(l + 1):
                np.testing.assert_array_equal(
                    cond_expectation(inner, k).values, cond_expectation(f, k).values
                )

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 10), st.integers(0, 2**32 - 1), st.data())
    def test_idempotent_contractive_mean_preserving(self, n, seed, data):
        s = DyadicSpace(n)
        f = rand_var(s, seed)
        l = data.draw(st.integers(0, n))
        once = cond_expectation(f, l)
        np.testing.assert_array_equal(cond_expectation(once, l).values, once.values)
        assert expectation(once * once) <= expectation(f * f) + 1e-12
        assert expectation(once) == pytest.approx(expectation(f), abs=1e-13)
        assert is_measurable(once, l)


class TestMeasurability:
    def test_examples(self):
        s = DyadicSpace(4)
        assert is_measurable(walsh(s, [1, 2]), 2)
        assert not is_measurable(rademacher(s, 3), 2)
        assert is_measurable(s.constant(5), 0)

    def test_tolerance(self):
        s = DyadicSpace(3)
        f = s.constant(1.0) + 1e-12 * rademacher(s, 3)
        assert is_measurable(f, 2)
        assert not is_measurable(f, 2, tol=1e-13)
        assert measurability_violation(f, 2) == pytest.approx(1e-12)

    def test_integer_fast_path_agrees(self, rng):
        s = DyadicSpace(6)
        for _ in range(50):
            f = RandomVariable(s, rng.integers(-3, 4, size=s.size))
            l = int(rng.integers(0, 7))
            cells = f.values.reshape(2**l, -1)
            assert is_measurable(f, l, tol=0.0) == bool(np.all(cells == cells[:, :1]))

    def test_monotone_in_level(self, rng):
        s = DyadicSpace(6)
        for l in range(7):
            g = cond_expectation(RandomVariable(s, rng.standard_normal(s.size)), l)
            for lp in range(l, 7):
                assert is_measurable(g, lp)


class TestBasis:
    def test_examples(self):
        s = DyadicSpace(4)
        assert filtration_basis(FiltrationLevel(s, 0)) == [0]
        # masks for {}, {1}, {2}, {1, 2} at depth 4
        assert sorted(filtration_basis(FiltrationLevel(s, 2))) == sorted([0, 0b1000, 0b0100, 0b1100])

    def test_matches_enumeration(self):
        n = 6
        s = DyadicSpace(n)
        for l in range(n + 1):
            expected = [m for m in range(s.size) if max_coin(m, n) <= l]
            basis = filtration_basis(FiltrationLevel(s, l))
            assert basis == expected
            assert len(basis) == 2**l

    def test_basis_functions_measurable(self):
        s = DyadicSpace(5)
        for l in range(6):
            for m in filtration_basis(FiltrationLevel(s, l)):
                assert is_measurable(walsh(s, m), l)

    def test_support_of_measurable_functions(self, rng):
        n = 8
        s = DyadicSpace(n)
        for l in range(n + 1):
            g = RandomVariable(s, np.repeat(rng.standard_normal(2**l), 2 ** (n - l)))
            coeffs = wht_forward(g).coeffs.copy()
            basis = filtration_basis(FiltrationLevel(s, l))
            coeffs[basis] = 0.0
            assert np.max(np.abs(coeffs)) <= 1e-12

    def test_requires_level(self):
        with pytest.raises(DomainError):
            filtration_basis(2)


class TestSpectralTruncate:
    def test_examples(self, rng):
        s = DyadicSpace(4)
        f = RandomVariable(s, rng.standard_normal(s.size))
        np.testing.assert_allclose(spectral_truncate(f, 4).values, f.values, atol=1e-14)
        assert np.all(spectral_truncate(walsh(s, [3]), 2).values == 0)
        np.testing.assert_allclose(spectral_truncate(f, 0).values, expectation(f), atol=1e-14)

    @pytest.mark.parametrize("n", [1, 4, 9, 14])
    def test_equals_cond_expectation(self, n):
        s = DyadicSpace(n)
        for seed in range(10):
            f = rand_var(s, seed)
            for l in range(n + 1):
                diff = spectral_truncate(f, l).values - cond_expectation(f, l).values
                assert np.max(np.abs(diff)) <= 1e-10
