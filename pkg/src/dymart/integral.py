"""Coin-flip random walk, the discrete stochastic integral and its identities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .martingale import (
    AdaptedProcess,
    DiscreteMartingale,
    MartingaleReport,
    PredictableIntegrand,
    _as_martingale,
    integrand,
    martingale_check,
)
from .errors import DomainError
from .space import DyadicSpace, RandomVariable, expectation, rademacher, tree_sum

INTEGRAL_MARTINGALE_TOL = 1e-12
ROUNDTRIP_TOL = 1e-10


def _coin_matrix(space: DyadicSpace) -> np.ndarray:
    """Row ``j`` holds coin ``j + 1``."""
    return np.array([rademacher(space, j).values for j in range(1, space.depth + 1)])


class RandomWalk(DiscreteMartingale):
    """``chi_l = (w_1 + ... + w_l) / sqrt(n)`` on a space of depth ``n``."""

    def __init__(self, space: DyadicSpace):
        partial = np.cumsum(_coin_matrix(space), axis=0)
        slices = np.vstack([np.zeros((1, space.size)), partial]) / math.sqrt(space.depth)
        super().__init__(space, slices)


def random_walk(space: DyadicSpace) -> RandomWalk:
    return RandomWalk(space)


def _integral_values(H: PredictableIntegrand) -> np.ndarray:
    space = H.space
    steps = H.values * _coin_matrix(space) / math.sqrt(space.depth)
    out = np.zeros((space.depth + 1, space.size))
    np.cumsum(steps, axis=0, out=out[1:])
    return out


def integral_process(H: PredictableIntegrand) -> AdaptedProcess:
    """The whole family ``I_0, ..., I_n`` of the discrete integral of ``H``."""
    return AdaptedProcess(H.space, _integral_values(H), validate=False)


def stochastic_integral(H: PredictableIntegrand, l: int) -> RandomVariable:
    """``I_l = sum_{j<l} H_j * w_{j+1} / sqrt(n)``."""
    if not isinstance(H, PredictableIntegrand):
        raise DomainError(f"expected a PredictableIntegrand, got {type(H).__name__}")
    if not 0 <= l <= H.space.depth:
        raise DomainError(f"step index {l} out of range 0..{H.space.depth}")
    return RandomVariable(H.space, _integral_values(H)[l])


def integral_is_martingale(H: PredictableIntegrand,
                           tol: float = INTEGRAL_MARTINGALE_TOL) -> MartingaleReport:
    return martingale_check(integral_process(H), tol)


def ito_isometry(H: PredictableIntegrand) -> tuple:
    """``E(I_n^2)`` and ``(1/n) sum_j E(H_j^2)``."""
    n = H.space.depth
    terminal = _integral_values(H)[n]
    lhs = float(tree_sum(terminal * terminal)[0]) / H.space.size
    rhs = math.fsum(float(tree_sum(h * h)[0]) / H.space.size for h in H.values) / n
    return lhs, rhs


@dataclass
class RoundtripReport:
    max_error: float
    worst_step: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol


def mrt_roundtrip(Y, tol: float = ROUNDTRIP_TOL) -> RoundtripReport:
    """Rebuild ``Y`` as ``Y_0 + integral of integrand(Y)`` and report the worst error."""
    Y = _as_martingale(Y)
    rebuilt = Y.values[0] + _integral_values(integrand(Y))
    err = np.max(np.abs(rebuilt - Y.values), axis=1)
    worst = int(np.argmax(err))
    return RoundtripReport(float(err[worst]), worst, tol)


def walk_moments(space: DyadicSpace, max_order: int = 4) -> list:
    """``E(chi_n^k)`` for ``k = 1..max_order`` by enumerating every atom."""
    n = space.depth
    # integer partial sums keep the power sums exact before the final scaling
    total = np.bitwise_count(space.atoms).astype(np.int64) * 2 - n
    out = []
    for k in range(1, max_order + 1):
        if n**k * space.size < 2**62:
            power_sum = int(np.sum(total**k))
        else:
            power_sum = int(np.sum(total.astype(object) ** k))
        out.append(power_sum / space.size / n ** (k / 2))
    return out


def walk_moment_closed_form(n: int, k: int) -> float:
    """Closed form of ``E(chi_n^k)`` for ``k <= 4``."""
    if k % 2 == 1:
        return 0.0
    if k == 2:
        return 1.0
    if k == 4:
        return 3.0 - 2.0 / n
    raise DomainError(f"closed form available for k <= 4 only, got k={k}")


def walk_moments_direct(space: DyadicSpace, max_order: int = 4) -> list:
    """Moments of the terminal walk slice itself (floating-point enumeration)."""
    chi = RandomWalk(space)[space.depth]
    return [expectation(chi ** k) for k in range(1, max_order + 1)]
