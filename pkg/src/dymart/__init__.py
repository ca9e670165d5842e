"""Finite-depth stochastic calculus on the dyadic coin-flip space."""

from .errors import (
    CapacityError,
    DomainError,
    DymartError,
    MartingaleError,
    PredictabilityError,
    SolverError,
    StructuralError,
)
from .filtration import (
    FiltrationLevel,
    cond_expectation,
    filtration_basis,
    is_measurable,
    spectral_truncate,
)
from .integral import (
    RandomWalk,
    integral_is_martingale,
    integral_process,
    ito_isometry,
    mrt_roundtrip,
    random_walk,
    stochastic_integral,
)
from .martingale import (
    AdaptedProcess,
    DiscreteMartingale,
    PredictableIntegrand,
    close_martingale,
    increment_product_check,
    independent_increments_check,
    integrand,
    martingale_check,
    quadratic_variation,
    represent,
)
from .generators import DEFAULT_SEED, random_integrand, random_terminal, rng_for
from .sde import SdeProblem, Sampled, euler_solve, martingale_diagnostic, weak_expectation
from .space import (
    DyadicSpace,
    RandomVariable,
    SignPath,
    WalshSpectrum,
    binary_signs,
    check_star_independence,
    expectation,
    inner_product,
    rademacher,
    walsh,
    wht_forward,
    wht_inverse,
)

__version__ = "0.1.0"
