"""Invariant suites run by ``dymart verify-all``.

Each suite returns a :class:`SuiteResult`; a suite passes when its largest
violation is within its tolerance.  Failures are reported, never raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DymartError
from .filtration import (
    FiltrationLevel,
    cond_expectation,
    filtration_basis,
    is_measurable,
    spectral_truncate,
)
from .generators import random_integrand, random_measurable, random_terminal, rng_for
from .integral import (
    RandomWalk,
    integral_is_martingale,
    integral_process,
    ito_isometry,
    mrt_roundtrip,
    walk_moment_closed_form,
    walk_moments,
)
from .martingale import (
    close_martingale,
    disjoint_increment_pairs,
    energy_identity,
    independent_increments_check,
    increment_product_check,
    quadratic_variation,
    represent,
)
from .sde import SdeProblem, euler_mean_recursion, gbm, martingale_diagnostic, weak_expectation
from .space import (
    DyadicSpace,
    check_star_independence,
    rademacher,
    walsh_matrix,
    wht_forward,
)

DEFAULT_TOLERANCES = {
    "orthonormality": 0.0,
    "star": 0.0,
    "tower": 0.0,
    "spectral": 1e-10,
    "mrt": 1e-10,
    "integral": 1e-12,
    "ito": 1e-10,
    "energy": 1e-10,
    "qv": 1e-12,
    "moments": 1e-12,
    "increments": 1e-12,
    "sde": 1e-12,
}

GRAM_DEPTH_LIMIT = 10


@dataclass
class SuiteResult:
    suite: str
    checks: int
    max_violation: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "checks": self.checks,
            "max_violation": self.max_violation,
            "pass": self.passed,
        }


def gram_matrix(space: DyadicSpace) -> np.ndarray:
    """Inner products of every pair of Walsh functions (integer sums, exact)."""
    W = walsh_matrix(space)
    return (W @ W.T) / space.size


def suite_orthonormality(depth, seed, trials, tol):
    space = DyadicSpace(min(depth, GRAM_DEPTH_LIMIT))
    G = gram_matrix(space)
    v = float(np.max(np.abs(G - np.eye(space.size))))
    return 1, v


def suite_star(depth, seed, trials, tol):
    rng = rng_for(seed, 1)
    worst, count = 0.0, 0
    for _ in range(max(trials, 1) * 10):
        n = int(rng.integers(1, min(depth, 10) + 1))
        space = DyadicSpace(n)
        k = int(rng.integers(1, n + 1))
        coins = rng.choice(np.arange(1, n + 1), size=k, replace=False)
        alphas = rng.choice([-1.5, -1.0, -0.3, 0.0, 0.7, 1.0, 1.2, 2.0], size=k)
        lhs, rhs = check_star_independence(space, coins, alphas)
        worst = max(worst, abs(lhs - rhs))
        count += 1
    return count, worst


def suite_tower(depth, seed, trials, tol):
    space = DyadicSpace(depth)
    rng = rng_for(seed, 2)
    worst, count = 0.0, 0
    for _ in range(max(trials, 1)):
        f = random_terminal(space, rng)
        for l in range(depth + 1):
            inner = cond_expectation(f, l)
            for k in range(l + 1):
                diff = cond_expectation(inner, k).values - cond_expectation(f, k).values
                worst = max(worst, float(np.max(np.abs(diff))))
                count += 1
    return count, worst


def suite_spectral(depth, seed, trials, tol):
    space = DyadicSpace(depth)
    rng = rng_for(seed, 3)
    worst, count = 0.0, 0
    for _ in range(max(trials, 1)):
        f = random_terminal(space, rng)
        for l in range(depth + 1):
            diff = spectral_truncate(f, l).values - cond_expectation(f, l).values
            worst = max(worst, float(np.max(np.abs(diff))))
            count += 1
    for l in range(depth + 1):
        lvl = FiltrationLevel(space, l)
        basis = filtration_basis(lvl)
        g = random_measurable(space, l, rng)
        coeffs = wht_forward(g).coeffs.copy()
        coeffs[basis] = 0.0
        worst = max(worst, float(np.max(np.abs(coeffs))))
        if len(basis) != 1 << l or not is_measurable(g, l):
            worst = math.inf
        count += 1
    return count, worst


def suite_mrt(depth, seed, trials, tol):
    space = DyadicSpace(depth)
    worst, count = 0.0, 0
    for t in range(trials):
        Y = close_martingale(random_terminal(space, rng_for(seed, 1000 + t)))
        worst = max(worst, mrt_roundtrip(Y).max_error)
        for j, c in enumerate(represent(Y), start=1):
            if not is_measurable(c, j - 1):
                worst = math.inf
        count += 1
    return count, worst


def _integrands(depth, seed, trials):
    space = DyadicSpace(depth)
    for t in range(trials):
        yield random_integrand(space, rng_for(seed, 2000 + t))


def suite_integral(depth, seed, trials, tol):
    worst, count = 0.0, 0
    for H in _integrands(depth, seed, trials):
        report = integral_is_martingale(H, tol)
        v = report.max_violation if report.adapted else math.inf
        worst = max(worst, v)
        count += 1
    return count, worst


def suite_ito(depth, seed, trials, tol):
    worst, count = 0.0, 0
    for H in _integrands(depth, seed, trials):
        lhs, rhs = ito_isometry(H)
        worst = max(worst, abs(lhs - rhs))
        count += 1
    return count, worst


def suite_energy(depth, seed, trials, tol):
    space = DyadicSpace(depth)
    worst, count = 0.0, 0
    for t in range(trials):
        Y = close_martingale(random_terminal(space, rng_for(seed, 3000 + t)))
        lhs, rhs = energy_identity(Y)
        worst = max(worst, abs(lhs - rhs))
        count += 1
    return count, worst


def suite_qv(depth, seed, trials, tol):
    space = DyadicSpace(depth)
    qv = quadratic_variation(RandomWalk(space)).values
    worst = float(np.max(np.abs(qv - (depth - 1) / depth)))
    count = 1
    for H in _integrands(depth, seed, trials):
        full = quadratic_variation(integral_process(H), full_range=True).values
        expected = np.sum(H.values**2, axis=0) / depth
        worst = max(worst, float(np.max(np.abs(full - expected))))
        count += 1
    return count, worst


def suite_moments(depth, seed, trials, tol):
    worst, count = 0.0, 0
    for n in range(1, min(depth, 12) + 1):
        got = walk_moments(DyadicSpace(n))
        for k, value in enumerate(got, start=1):
            worst = max(worst, abs(value - walk_moment_closed_form(n, k)))
            count += 1
    return count, worst


def suite_increments(depth, seed, trials, tol):
    n = min(depth, 8)
    space = DyadicSpace(n)
    chi = RandomWalk(space)
    pairs = disjoint_increment_pairs(n)
    worst = 0.0
    for a, b, c, d in pairs:
        lhs, rhs = increment_product_check(chi, a, b, c, d)
        worst = max(worst, abs(lhs - rhs))
    report = independent_increments_check(chi, pairs, tol)
    worst = max(worst, report.max_discrepancy)
    count = 2 * len(pairs)
    if n >= 2:
        dependent = dependent_martingale(space)
        neg = independent_increments_check(dependent, [(0, 1, 1, 2)], tol)
        if neg.passed:
            worst = math.inf
        count += 1
    return count, worst


def dependent_martingale(space: DyadicSpace):
    """Martingale with uncorrelated but dependent increments ``w1`` and ``(1 + w1) w2``."""
    w1, w2 = rademacher(space, 1), rademacher(space, 2)
    return close_martingale(w1 + w2 + w1 * w2)


def suite_sde(depth, seed, trials, tol):
    worst, count = 0.0, 0
    for n in range(1, min(depth, 14) + 1):
        p = gbm(depth=n)
        worst = max(worst, abs(weak_expectation(p, lambda x: x) - euler_mean_recursion(p)))
        count += 1
    rng = rng_for(seed, 4000)
    n = min(depth, 12)
    for _ in range(max(trials // 4, 1)):
        c0, c1 = rng.uniform(-1, 1, size=2)
        p = SdeProblem(lambda t, x: 0.0 * x, lambda t, x, c0=c0, c1=c1: c0 + c1 * np.sin(x),
                       1.0, n)
        diag = martingale_diagnostic(p, 1e-10)
        if not diag.passed:
            worst = math.inf
        count += 1
    return count, worst


SUITES = {
    "orthonormality": suite_orthonormality,
    "star": suite_star,
    "tower": suite_tower,
    "spectral": suite_spectral,
    "mrt": suite_mrt,
    "integral": suite_integral,
    "ito": suite_ito,
    "energy": suite_energy,
    "qv": suite_qv,
    "moments": suite_moments,
    "increments": suite_increments,
    "sde": suite_sde,
}


def run_suite(name: str, depth: int, seed: int, trials: int, tol: float) -> SuiteResult:
    try:
        checks, violation = SUITES[name](depth, seed, trials, tol)
    except DymartError:
        return SuiteResult(name, 0, math.inf, False)
    return SuiteResult(name, checks, float(violation), bool(violation <= tol))


def run_all(depth: int, seed: int, trials: int, tolerances: dict | None = None) -> list:
    tols = dict(DEFAULT_TOLERANCES)
    tols.update(tolerances or {})
    return [run_suite(name, depth, seed, trials, tols[name]) for name in SUITES]
