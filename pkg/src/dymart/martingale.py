"""Adapted processes, discrete martingales and their exact representation.

Processes live on the integer time grid ``0..n``; slice ``l`` is the value at
time ``l/n`` and slice ``n`` is the terminal value.  A martingale's increment
from ``l-1`` to ``l`` is always ``c_l * w_l`` for a coefficient ``c_l`` that only
depends on the first ``l-1`` coins, and since ``w_l**2 == 1`` the coefficient is
recovered by multiplying the increment by ``w_l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from .errors import DomainError, MartingaleError, PredictabilityError, StructuralError
from .filtration import block_average, cond_expectation, measurability_violation
from .space import DyadicSpace, RandomVariable, expectation, rademacher, tree_sum

MARTINGALE_TOL = 1e-10


def _stack(space: DyadicSpace, slices, expected: int, what: str) -> np.ndarray:
    if isinstance(slices, np.ndarray):
        arr = np.array(slices, dtype=np.float64)
    else:
        rows = []
        for s in slices:
            if isinstance(s, RandomVariable):
                if s.space != space:
                    raise DomainError(
                        f"space mismatch: depth {space.depth} vs slice depth {s.space.depth}"
                    )
                rows.append(s.values)
            else:
                rows.append(np.asarray(s, dtype=np.float64))
        arr = np.array(rows, dtype=np.float64) if rows else np.empty((0, space.size))
    if arr.ndim != 2 or arr.shape[0] != expected or arr.shape[1] != space.size:
        raise StructuralError(
            f"{what} needs {expected} slices of {space.size} values at depth "
            f"{space.depth}, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise StructuralError(f"{what} contains non-finite values")
    arr.setflags(write=False)
    return arr


class AdaptedProcess:
    """Slices ``Y_0, ..., Y_n`` with ``Y_l`` determined by the first ``l`` coins.

    ``validate=False`` skips the adaptedness check so that arbitrary candidate
    processes can be handed to :func:`martingale_check`.
    """

    def __init__(self, space: DyadicSpace, slices, *, tol: float = MARTINGALE_TOL,
                 validate: bool = True):
        self.space = space
        self.values = _stack(space, slices, space.depth + 1, "process")
        if validate:
            for l in range(space.depth + 1):
                v = measurability_violation(self[l], l)
                if v > tol:
                    raise StructuralError(
                        f"slice {l} is not measurable at level {l} (violation {v:.3g})"
                    )

    @property
    def depth(self) -> int:
        return self.space.depth

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, l: int) -> RandomVariable:
        return RandomVariable(self.space, self.values[l])

    @property
    def slices(self) -> list:
        return [self[l] for l in range(len(self))]

    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=0)

    def __repr__(self):
        return f"{type(self).__name__}(depth={self.depth})"


@dataclass
class MartingaleReport:
    adapted: bool
    martingale: bool
    max_violation: float
    worst_step: int | None
    step_violations: list = field(default_factory=list)
    adaptedness_violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.adapted and self.martingale


def martingale_check(Y, tol: float = MARTINGALE_TOL) -> MartingaleReport:
    """Check adaptedness and ``E(Y_{l+1} | first l coins) == Y_l`` for every step.

    The one-step property implies the all-pairs one by the tower law.
    ``max_violation`` is the largest absolute pointwise one-step violation.
    """
    if not isinstance(Y, AdaptedProcess):
        raise StructuralError(f"expected an AdaptedProcess, got {type(Y).__name__}")
    n = Y.depth
    adapt = [measurability_violation(Y[l], l) for l in range(n + 1)]
    steps = []
    for l in range(n):
        proj = block_average(Y.values[l + 1], l, n)
        steps.append(float(np.max(np.abs(proj - Y.values[l]))))
    worst = int(np.argmax(steps)) if steps else None
    max_v = max(steps) if steps else 0.0
    return MartingaleReport(
        adapted=all(v <= tol for v in adapt),
        martingale=max_v <= tol,
        max_violation=max_v,
        worst_step=worst,
        step_violations=steps,
        adaptedness_violations=adapt,
    )


class DiscreteMartingale(AdaptedProcess):
    """An adapted process whose conditional expectations telescope.

    Construction runs :func:`martingale_check` and raises
    :class:`MartingaleError` naming the worst step on failure.
    """

    def __init__(self, space: DyadicSpace, slices, *, tol: float = MARTINGALE_TOL):
        super().__init__(space, slices, tol=tol, validate=False)
        report = martingale_check(self, tol)
        if not report.adapted:
            bad = int(np.argmax(report.adaptedness_violations))
            raise MartingaleError(
                f"slice {bad} is not adapted (violation "
                f"{report.adaptedness_violations[bad]:.3g})",
                step=bad,
                violation=report.adaptedness_violations[bad],
            )
        if not report.martingale:
            raise MartingaleError(
                f"martingale property fails at step {report.worst_step} -> "
                f"{report.worst_step + 1} (violation {report.max_violation:.3g} > {tol:g})",
                step=report.worst_step,
                violation=report.max_violation,
            )

    @classmethod
    def from_process(cls, Y: AdaptedProcess, tol: float = MARTINGALE_TOL):
        if isinstance(Y, DiscreteMartingale):
            return Y
        return cls(Y.space, Y.values, tol=tol)


class PredictableIntegrand:
    """Slices ``H_0, ..., H_{n-1}`` with ``H_j`` determined by the first ``j`` coins."""

    def __init__(self, space: DyadicSpace, slices, *, tol: float = MARTINGALE_TOL):
        self.space = space
        self.values = _stack(space, slices, space.depth, "integrand")
        for j in range(space.depth):
            v = measurability_violation(RandomVariable(space, self.values[j]), j)
            if v > tol:
                raise PredictabilityError(
                    f"integrand slice {j} depends on coin {j + 1} or later "
                    f"(violation {v:.3g})",
                    index=j,
                )

    @classmethod
    def constant(cls, space: DyadicSpace, c: float) -> "PredictableIntegrand":
        return cls(space, np.full((space.depth, space.size), float(c)))

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, j: int) -> RandomVariable:
        return RandomVariable(self.space, self.values[j])

    @property
    def slices(self) -> list:
        return [self[j] for j in range(len(self))]


def close_martingale(terminal: RandomVariable) -> DiscreteMartingale:
    """The martingale ``Y_l = E(terminal | first l coins)``."""
    space = terminal.space
    n = space.depth
    slices = [block_average(terminal.values, l, n) for l in range(n + 1)]
    return DiscreteMartingale(space, np.array(slices))


def _as_martingale(Y) -> DiscreteMartingale:
    if isinstance(Y, DiscreteMartingale):
        return Y
    if isinstance(Y, AdaptedProcess):
        return DiscreteMartingale.from_process(Y)
    raise StructuralError(f"expected a martingale, got {type(Y).__name__}")


def represent(Y) -> list:
    """Coefficients ``[c_1, ..., c_n]`` with ``Y_l = Y_0 + sum_{j<=l} c_j * w_j``.

    ``c_j`` is measurable at level ``j - 1``.
    """
    Y = _as_martingale(Y)
    coins = np.array([rademacher(Y.space, j).values for j in range(1, Y.depth + 1)])
    coeffs = Y.increments() * coins
    return [RandomVariable(Y.space, c) for c in coeffs]


def represent_by_projection(Y) -> list:
    """Same coefficients as :func:`represent`, via ``E(Y_n * w_j | first j-1 coins)``."""
    Y = _as_martingale(Y)
    terminal = Y[Y.depth]
    return [
        cond_expectation(terminal * rademacher(Y.space, j), j - 1)
        for j in range(1, Y.depth + 1)
    ]


def integrand(Y) -> PredictableIntegrand:
    """``H_j = sqrt(n) * c_{j+1}`` for ``0 <= j < n``."""
    Y = _as_martingale(Y)
    scale = math.sqrt(Y.depth)
    coeffs = np.array([c.values for c in represent(Y)])
    return PredictableIntegrand(Y.space, scale * coeffs)


def quadratic_variation(Y: AdaptedProcess, full_range: bool = False) -> RandomVariable:
    """Pathwise sum of squared increments.

    By default the sum runs over steps ``j = 0..n-2`` (the last increment is
    left out); ``full_range=True`` includes it.
    """
    inc = Y.increments()
    if not full_range:
        inc = inc[: max(Y.depth - 1, 0)]
    if inc.shape[0] == 0:
        return Y.space.zeros()
    return RandomVariable(Y.space, np.sum(inc * inc, axis=0))


def _check_order(n: int, a: int, b: int, c: int, d: int) -> None:
    if not (0 <= a < b <= c < d <= n):
        raise DomainError(
            f"need 0 <= a < b <= c < d <= {n}, got (a, b, c, d) = ({a}, {b}, {c}, {d})"
        )


def increment_product_check(Y: AdaptedProcess, a: int, b: int, c: int, d: int) -> tuple:
    """``E((Y_d-Y_c)^2 (Y_b-Y_a)^2)`` and ``E((Y_d-Y_c)^2) E((Y_b-Y_a)^2)``."""
    _check_order(Y.depth, a, b, c, d)
    late = Y.values[d] - Y.values[c]
    early = Y.values[b] - Y.values[a]
    size = Y.space.size
    lhs = float(tree_sum(late**2 * early**2)[0]) / size
    rhs = (float(tree_sum(late**2)[0]) / size) * (float(tree_sum(early**2)[0]) / size)
    return lhs, rhs


def total_variation_from_product(x: np.ndarray, z: np.ndarray, resolution: float = 1e-9) -> float:
    """Total-variation distance between the joint law of ``(x, z)`` and the product law.

    Values closer than ``resolution`` are treated as the same outcome.
    """
    size = x.shape[0]
    _, ix = np.unique(np.round(x / resolution), return_inverse=True)
    _, iz = np.unique(np.round(z / resolution), return_inverse=True)
    nx, nz = ix.max() + 1, iz.max() + 1
    joint = np.bincount(ix * nz + iz, minlength=nx * nz).reshape(nx, nz) / size
    px = joint.sum(axis=1)
    pz = joint.sum(axis=0)
    return 0.5 * float(np.abs(joint - np.outer(px, pz)).sum())


@dataclass
class IndependenceReport:
    pairs_checked: int
    max_discrepancy: float
    worst_pair: tuple | None
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tol


def disjoint_increment_pairs(n: int, single_steps: bool = False) -> list:
    """Every ``(a, b, c, d)`` with ``0 <= a < b <= c < d <= n``."""
    if single_steps:
        return [(a, a + 1, c, c + 1) for a in range(n) for c in range(a + 1, n)]
    return [
        (a, b, c, d)
        for a, b, c, d in combinations_with_replacement(range(n + 1), 4)
        if a < b <= c < d
    ]


def independent_increments_check(
    Y: AdaptedProcess,
    pairs: Sequence[tuple],
    tol: float = 1e-12,
    resolution: float = 1e-9,
) -> IndependenceReport:
    """Compare joint and product laws of ``Y_b - Y_a`` and ``Y_d - Y_c`` by enumeration."""
    worst, worst_pair = 0.0, None
    count = 0
    for a, b, c, d in pairs:
        _check_order(Y.depth, a, b, c, d)
        tv = total_variation_from_product(
            Y.values[b] - Y.values[a], Y.values[d] - Y.values[c], resolution
        )
        count += 1
        if worst_pair is None or tv > worst:
            worst, worst_pair = tv, (a, b, c, d)
    return IndependenceReport(count, worst, worst_pair, tol)


def energy_identity(Y) -> tuple:
    """``E((Y_n - Y_0)^2)`` and ``sum_j E(c_j^2)``."""
    Y = _as_martingale(Y)
    lhs = expectation((Y[Y.depth] - Y[0]) ** 2)
    rhs = math.fsum(expectation(c * c) for c in represent(Y))
    return lhs, rhs
