"""Euler scheme for ``dX = a(t, X) dt + b(t, X) dW`` driven by the coin increments.

Step ``l`` uses time ``l/n``, step size ``1/n`` and noise ``w_{l+1} / sqrt(n)``::

    X_{l+1} = X_l + a(l/n, X_l) / n + b(l/n, X_l) * w_{l+1} / sqrt(n)

Drift and diffusion are called with an array of states and must work
elementwise (a scalar return value is broadcast).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, SolverError
from .martingale import AdaptedProcess, MartingaleReport, martingale_check
from .space import DyadicSpace, RandomVariable, expectation

Coefficient = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SdeProblem:
    drift: Coefficient
    diffusion: Coefficient
    x0: float
    depth: int
    name: str = "custom"
    # (a0, a1) when the drift is a0 + a1*x for all t; enables closed-form references
    affine_drift: tuple | None = None

    @property
    def space(self) -> DyadicSpace:
        return DyadicSpace(self.depth)

    def with_depth(self, depth: int) -> "SdeProblem":
        return SdeProblem(self.drift, self.diffusion, self.x0, depth, self.name,
                          self.affine_drift)


@dataclass(frozen=True)
class Sampled:
    """Evaluate ``count`` atoms drawn without replacement using ``seed``.

    ``sequential=True`` takes atoms ``0..count-1`` instead.
    """

    count: int
    seed: int = 0
    sequential: bool = False


@dataclass
class SampledPaths:
    atoms: np.ndarray
    paths: np.ndarray  # shape (count, n + 1)


def _coefficient(fn: Coefficient, t: float, x: np.ndarray, what: str, step: int) -> np.ndarray:
    out = np.broadcast_to(np.asarray(fn(t, x), dtype=np.float64), x.shape)
    bad = ~np.isfinite(out)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise SolverError(
            f"non-finite {what} {float(out[i])!r} at time step {step} (t={t:g}) "
            f"for state x={float(x[i])!r}"
        )
    return out


def _euler(p: SdeProblem, atoms: np.ndarray) -> np.ndarray:
    """Paths for the given atoms, shape ``(n + 1, len(atoms))``."""
    n = p.depth
    root = math.sqrt(n)
    out = np.empty((n + 1, atoms.shape[0]))
    x = np.full(atoms.shape[0], float(p.x0))
    out[0] = x
    for l in range(n):
        t = l / n
        a = _coefficient(p.drift, t, x, "drift", l)
        b = _coefficient(p.diffusion, t, x, "diffusion", l)
        coin = np.where(atoms & (1 << (n - l - 1)), 1.0, -1.0)
        x = x + a / n + b * coin / root
        out[l + 1] = x
    return out


def euler_solve(p: SdeProblem, mode="full"):
    """Solve on every atom (``mode="full"``) or on a seeded sample of atoms.

    Full mode returns an :class:`AdaptedProcess`; ``Sampled`` mode returns
    :class:`SampledPaths` with one row per chosen atom.
    """
    space = p.space
    if isinstance(mode, Sampled):
        if mode.count < 1:
            raise DomainError(f"sample count must be >= 1, got {mode.count}")
        if mode.count > space.size:
            raise DomainError(
                f"sample count {mode.count} exceeds the {space.size} atoms at depth {p.depth}"
            )
        if mode.sequential:
            atoms = np.arange(mode.count, dtype=np.int64)
        else:
            rng = np.random.default_rng(mode.seed)
            atoms = rng.choice(space.size, size=mode.count, replace=False).astype(np.int64)
        return SampledPaths(atoms, _euler(p, atoms).T.copy())
    if mode != "full":
        raise DomainError(f"unknown mode {mode!r}; use 'full' or Sampled(...)")
    return AdaptedProcess(space, _euler(p, space.atoms), validate=False)


def weak_expectation(p: SdeProblem, payoff: Callable[[np.ndarray], np.ndarray]) -> float:
    """``E(payoff(X_n))`` over all ``2**n`` atoms."""
    X = euler_solve(p)
    terminal = np.broadcast_to(
        np.asarray(payoff(X.values[p.depth]), dtype=np.float64), (p.space.size,)
    )
    return expectation(RandomVariable(p.space, terminal))


def euler_mean_recursion(p: SdeProblem) -> float:
    """Mean of the Euler solution at ``t = 1`` for affine drift, by the scalar recursion."""
    if p.affine_drift is None:
        raise DomainError(f"problem {p.name!r} has no affine drift")
    a0, a1 = p.affine_drift
    m = float(p.x0)
    for _ in range(p.depth):
        m = m + (a0 + a1 * m) / p.depth
    return m


def exact_mean(p: SdeProblem) -> float:
    """``E(X_1)`` of the continuous-time SDE for affine drift."""
    if p.affine_drift is None:
        raise DomainError(f"problem {p.name!r} has no affine drift")
    a0, a1 = p.affine_drift
    if a1 == 0:
        return p.x0 + a0
    growth = math.exp(a1)
    return p.x0 * growth + a0 * (growth - 1.0) / a1


@dataclass
class SdeDiagnostic:
    status: str  # "pass", "fail" or "not-applicable"
    report: MartingaleReport | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def martingale_diagnostic(p: SdeProblem, tol: float = 1e-10) -> SdeDiagnostic:
    """Martingale check of the solution; only meaningful when the drift vanishes."""
    X = euler_solve(p)
    n = p.depth
    for l in range(n):
        a = _coefficient(p.drift, l / n, X.values[l], "drift", l)
        if np.any(a != 0):
            return SdeDiagnostic("not-applicable")
    report = martingale_check(X, tol)
    return SdeDiagnostic("pass" if report.passed else "fail", report)


def gbm(mu: float = 0.05, sigma: float = 0.2, x0: float = 1.0, depth: int = 14) -> SdeProblem:
    return SdeProblem(
        lambda t, x: mu * x,
        lambda t, x: sigma * x,
        x0, depth, "gbm", (0.0, mu),
    )


def ou(theta: float = 1.0, mean: float = 0.0, sigma: float = 0.3, x0: float = 1.0,
       depth: int = 14) -> SdeProblem:
    """Ornstein-Uhlenbeck: ``dX = theta (mean - X) dt + sigma dW``."""
    return SdeProblem(
        lambda t, x: theta * (mean - x),
        lambda t, x: sigma + 0.0 * x,
        x0, depth, "ou", (theta * mean, -theta),
    )


def polynomial(drift_coeffs=(0.0,), diffusion_coeffs=(0.0,), x0: float = 0.0,
               depth: int = 14) -> SdeProblem:
    """Drift and diffusion as polynomials in the state, lowest degree first."""
    dc = tuple(float(c) for c in drift_coeffs) or (0.0,)
    bc = tuple(float(c) for c in diffusion_coeffs) or (0.0,)
    affine = None
    if all(c == 0 for c in dc[2:]):
        affine = (dc[0], dc[1] if len(dc) > 1 else 0.0)
    return SdeProblem(
        lambda t, x: np.polynomial.polynomial.polyval(x, dc),
        lambda t, x: np.polynomial.polynomial.polyval(x, bc),
        x0, depth, "poly", affine,
    )


BUILTINS = {"gbm": gbm, "ou": ou, "poly": polynomial}
