"""Building blocks of the estimating systems.

The location/scale equations regress the ordered sample on plotting
positions xi_k = Phi^{-1}(median of Beta(n_l + k, n_u + n + 1 - k)): the
median of the k-th order statistic's probability position in a parent
normal sample of effective size n_l + n + n_u, where (n_l, n_u) are the
(possibly fractional) latent counts of parent draws falling below/above
the truncation bounds. The bound equations come from the minimum-variance
unbiased endpoint estimators for a known parent. Together they form the
four-component system whose root is the parameter estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .specfns import SQRT_2PI, beta_median_vec, normal_interval_mass
from .truncnorm import ParameterError, TnParams

__all__ = [
    "LatentCounts",
    "SystemValue",
    "xi_weight",
    "xi_weights",
    "latent_expectations",
    "umvu_bounds",
    "complete_system",
    "observed_system",
]

DEFAULT_WIDTH_CAP_MULTIPLIER = 10.0


@dataclass(frozen=True)
class LatentCounts:
    """Expected numbers of parent draws below (n_l) / above (n_u) the bounds.

    Real-valued: the plotting positions are defined for non-integer counts.
    """

    n_l: float
    n_u: float

    def __post_init__(self):
        if not (np.isfinite(self.n_l) and np.isfinite(self.n_u)):
            raise ValueError(f"latent counts must be finite, got ({self.n_l}, {self.n_u})")
        if self.n_l < 0 or self.n_u < 0:
            raise ValueError(f"latent counts must be nonnegative, got ({self.n_l}, {self.n_u})")


@dataclass(frozen=True)
class SystemValue:
    """The four components of an estimating system evaluated at (data, theta)."""

    eq_mu: float
    eq_sigma: float
    eq_tau_l: float
    eq_tau_u: float

    def as_array(self) -> np.ndarray:
        return np.array([self.eq_mu, self.eq_sigma, self.eq_tau_l, self.eq_tau_u])

    def norm(self) -> float:
        """Euclidean norm of the raw four components."""
        return float(np.linalg.norm(self.as_array()))


def _plotting_positions(
    n: int, counts: LatentCounts, med0: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """(xi, beta medians) for k = 1..n; ``med0`` warm-starts the inversion."""
    k = np.arange(1, n + 1, dtype=float)
    med = beta_median_vec(counts.n_l + k, counts.n_u + n + 1.0 - k, x0=med0)
    return _sp.ndtri(med), med


def xi_weights(n: int, counts: LatentCounts) -> np.ndarray:
    """Plotting positions xi_1..xi_n for the whole sample, as one vector.

    One vectorized Beta-median solve; this is the per-iteration cost of the
    solver, so callers should reuse the returned array.
    """
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    return _plotting_positions(n, counts)[0]


def xi_weight(n: int, counts: LatentCounts, k: int) -> float:
    """Plotting position for the k-th order statistic, 1 <= k <= n."""
    if not 1 <= k <= n:
        raise ValueError(f"order-statistic index k={k} out of range 1..{n}")
    med = beta_median_vec(counts.n_l + k, counts.n_u + n + 1.0 - k)
    return float(_sp.ndtri(med[0]))


def latent_expectations(theta: TnParams, n: int) -> LatentCounts:
    """Expected latent counts under the negative-binomial resampling model:

    n_l = n * Phi(tau_l*) / mass,  n_u = n * (1 - Phi(tau_u*)) / mass.
    """
    if not isinstance(theta, TnParams):
        raise ParameterError("theta must be a TnParams instance")
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    lo, hi = theta.std_bounds
    mass = theta.parent_mass
    below = _sp.ndtr(lo)
    above = _sp.ndtr(-hi)
    return LatentCounts(n_l=n * below / mass, n_u=n * above / mass)


def umvu_bounds(
    mu: float,
    sigma: float,
    x_min: float,
    x_max: float,
    n: int,
    max_width_multiplier: float = DEFAULT_WIDTH_CAP_MULTIPLIER,
) -> tuple[float, float]:
    """Minimum-variance unbiased bound estimates for known (mu, sigma):

        tau_l = x_min - sigma * (Phi(W_n) - Phi(W_1)) / ((n-1) * phi(W_1))
        tau_u = x_max + sigma * (Phi(W_n) - Phi(W_1)) / ((n-1) * phi(W_n))

    with W = (x - mu) / sigma. The nonnegative corrections always widen the
    data range. When phi underflows at an extreme W the correction is
    capped at max_width_multiplier * sigma instead of overflowing.
    """
    if n < 2:
        raise ValueError(f"bound estimators need n >= 2, got {n}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if x_min > x_max:
        raise ValueError(f"x_min must not exceed x_max, got ({x_min}, {x_max})")
    w1 = (x_min - mu) / sigma
    wn = (x_max - mu) / sigma
    mass = float(normal_interval_mass(w1, wn))
    cap = max_width_multiplier * sigma
    scale = sigma * mass / (n - 1)

    def correction(w: float) -> float:
        phi = math.exp(-0.5 * w * w) / SQRT_2PI
        if phi == 0.0 or scale / phi > cap:
            return cap
        return scale / phi

    return x_min - correction(w1), x_max + correction(wn)


def _check_sorted(data: np.ndarray) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if data.ndim != 1 or data.size < 2:
        raise ValueError("need a 1-d data vector with at least 2 observations")
    if (np.diff(data) < 0).any():
        raise ValueError("data must be sorted ascending")
    return data


def complete_system(
    data,
    counts: LatentCounts,
    theta: TnParams,
    max_width_multiplier: float = DEFAULT_WIDTH_CAP_MULTIPLIER,
) -> SystemValue:
    """Estimating system for known latent counts, evaluated at theta.

    Components: mean and weighted-mean regression residuals of the ordered
    data on the plotting positions, then the bound-estimator discrepancies.
    """
    data = _check_sorted(data)
    if not isinstance(theta, TnParams):
        raise ParameterError("theta must be a TnParams instance")
    n = data.size
    xi = xi_weights(n, counts)
    resid = data - theta.mu - theta.sigma * xi
    tau_l_hat, tau_u_hat = umvu_bounds(
        theta.mu, theta.sigma, data[0], data[-1], n, max_width_multiplier
    )
    return SystemValue(
        eq_mu=float(np.mean(resid)),
        eq_sigma=float(np.mean(resid * xi)),
        eq_tau_l=tau_l_hat - theta.tau_l,
        eq_tau_u=tau_u_hat - theta.tau_u,
    )


def observed_system(
    data,
    theta: TnParams,
    max_width_multiplier: float = DEFAULT_WIDTH_CAP_MULTIPLIER,
) -> SystemValue:
    """Observed-data system: the complete system with the latent counts
    replaced by their expectations under theta."""
    data = _check_sorted(data)
    counts = latent_expectations(theta, data.size)
    return complete_system(data, counts, theta, max_width_multiplier)
