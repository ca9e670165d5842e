"""The dyadic filtration: conditional expectation, measurability and level bases."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .space import (
    DyadicSpace,
    RandomVariable,
    fwht,
    tree_sum,
)

MEASURABILITY_TOL = 1e-10


@dataclass(frozen=True)
class FiltrationLevel:
    """The algebra generated by the first ``level`` coins of ``space``."""

    space: DyadicSpace
    level: int

    def __post_init__(self):
        if not 0 <= self.level <= self.space.depth:
            raise DomainError(
                f"filtration level {self.level} out of range 0..{self.space.depth}"
            )

    @property
    def cells(self) -> int:
        return 1 << self.level

    @property
    def cell_size(self) -> int:
        return 1 << (self.space.depth - self.level)


def _level(space: DyadicSpace, l) -> FiltrationLevel:
    if isinstance(l, FiltrationLevel):
        if l.space != space:
            raise DomainError(
                f"space mismatch: depth {space.depth} vs filtration depth {l.space.depth}"
            )
        return l
    return FiltrationLevel(space, int(l))


def block_average(values: np.ndarray, level: int, depth: int) -> np.ndarray:
    """Replace each level cell by its mean, over the last axis (batch friendly)."""
    cell = 1 << (depth - level)
    sums = tree_sum(values, 1 << level)
    return np.repeat(sums / cell, cell, axis=-1)


def cond_expectation(f: RandomVariable, l) -> RandomVariable:
    """Conditional expectation given the first ``l`` coins (cell-wise average)."""
    lvl = _level(f.space, l)
    return RandomVariable(f.space, block_average(f.values, lvl.level, f.space.depth))


def _tail_mask(depth: int, level: int) -> np.ndarray:
    """Boolean array over masks: True where the mask uses a coin beyond ``level``."""
    return (np.arange(1 << depth) & ((1 << (depth - level)) - 1)) != 0


def is_measurable(f: RandomVariable, l, tol: float = MEASURABILITY_TOL) -> bool:
    lvl = _level(f.space, l)
    if lvl.level == f.space.depth:
        return True
    vals = f.values
    if tol < 1.0 / f.space.size and np.all(vals == np.round(vals)):
        # integer-valued: tail coefficients are multiples of 2**-n, so the
        # tolerance test reduces to exact cell constancy
        cells = vals.reshape(lvl.cells, lvl.cell_size)
        return bool(np.all(cells == cells[:, :1]))
    coeffs = fwht(vals) / f.space.size
    tail = coeffs[_tail_mask(f.space.depth, lvl.level)]
    return bool(np.all(np.abs(tail) <= tol))


def measurability_violation(f: RandomVariable, l) -> float:
    """Largest Walsh coefficient magnitude on masks beyond level ``l``."""
    lvl = _level(f.space, l)
    if lvl.level == f.space.depth:
        return 0.0
    coeffs = fwht(f.values) / f.space.size
    tail = coeffs[_tail_mask(f.space.depth, lvl.level)]
    return float(np.max(np.abs(tail)))


def filtration_basis(l) -> list:
    """Walsh masks generated by the first ``l`` coins, empty mask first."""
    lvl = l if isinstance(l, FiltrationLevel) else None
    if lvl is None:
        raise DomainError("filtration_basis expects a FiltrationLevel")
    step = lvl.cell_size
    return list(range(0, lvl.space.size, step))


def spectral_truncate(f: RandomVariable, l) -> RandomVariable:
    """Drop every Walsh coefficient on a mask beyond level ``l`` and resynthesise."""
    lvl = _level(f.space, l)
    return RandomVariable(f.space, spectral_truncate_array(f.values, lvl.level, f.space.depth))


def spectral_truncate_array(values: np.ndarray, level: int, depth: int) -> np.ndarray:
    coeffs = fwht(values) / (1 << depth)
    coeffs[..., _tail_mask(depth, level)] = 0.0
    return fwht(coeffs, inverse=True)
