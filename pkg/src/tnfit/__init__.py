"""Truncated normal estimation with unknown truncation bounds.

Expectation-solution fitting of all four parameters (mu, sigma, tau_l,
tau_u), the asymptotic-theory calculators for the resulting estimators, a
reproducible Monte Carlo study harness, and a truncated-normal
discriminant classifier with a "no known class" outcome.
"""

from .estimating import (
    LatentCounts,
    SystemValue,
    complete_system,
    latent_expectations,
    observed_system,
    umvu_bounds,
    xi_weight,
    xi_weights,
)
from .solver import EsConfig, EsResult, EsStatus, e_step, fit, s_step
from .truncnorm import (
    ParameterError,
    StdMoments,
    TnParams,
    cdf,
    density,
    log_likelihood,
    quantile,
    sample,
    std_moments,
)

__version__ = "0.1.0"

__all__ = [
    "TnParams",
    "StdMoments",
    "ParameterError",
    "density",
    "cdf",
    "quantile",
    "sample",
    "log_likelihood",
    "std_moments",
    "LatentCounts",
    "SystemValue",
    "xi_weight",
    "xi_weights",
    "latent_expectations",
    "umvu_bounds",
    "complete_system",
    "observed_system",
    "EsConfig",
    "EsResult",
    "EsStatus",
    "e_step",
    "s_step",
    "fit",
    "__version__",
]
