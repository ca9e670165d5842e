"""Seeded random inputs: terminals, level-measurable functions and integrands."""

from __future__ import annotations

import numpy as np

from .martingale import PredictableIntegrand
from .space import DyadicSpace, RandomVariable

DEFAULT_SEED = 20240607


def rng_for(seed: int, trial: int = 0) -> np.random.Generator:
    """Independent PCG64 stream for ``(seed, trial)``."""
    return np.random.default_rng([int(seed) % 2**64, int(trial)])


def random_terminal(space: DyadicSpace, rng: np.random.Generator) -> RandomVariable:
    return RandomVariable(space, rng.standard_normal(space.size))


def random_measurable(space: DyadicSpace, level: int, rng: np.random.Generator) -> RandomVariable:
    """Gaussian cell values, constant on each level cell."""
    cells = rng.standard_normal(1 << level)
    return RandomVariable(space, np.repeat(cells, 1 << (space.depth - level)))


def random_integrand(space: DyadicSpace, rng: np.random.Generator) -> PredictableIntegrand:
    """Each ``H_j`` constant on level-``j`` cells; a few slices are exactly zero."""
    n = space.depth
    rows = np.empty((n, space.size))
    for j in range(n):
        cells = rng.standard_normal(1 << j) * rng.uniform(0.5, 2.0)
        if rng.random() < 0.1:
            cells[:] = 0.0
        rows[j] = np.repeat(cells, 1 << (n - j))
    return PredictableIntegrand(space, rows)
