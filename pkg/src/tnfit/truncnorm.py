"""The truncated normal distribution TN(mu, sigma, tau_l, tau_u).

``mu`` and ``sigma`` are the location and scale of the *parent* normal;
``tau_l < tau_u`` are the truncation bounds. The parent parameterization
uses the standard deviation sigma (not the variance), matching every
formula the estimating machinery consumes.

Density, cdf, quantile, inverse-cdf sampling, log-likelihood, and the
first four raw moments of the standardized law TN(0, 1, tau_l*, tau_u*)
derived from the mgf (they drive the asymptotic covariance algebra).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .specfns import SQRT_2PI, normal_interval_mass, std_normal_pdf_deriv

__all__ = [
    "ParameterError",
    "TnParams",
    "StdMoments",
    "density",
    "cdf",
    "quantile",
    "sample",
    "log_likelihood",
    "std_moments",
]


class ParameterError(ValueError):
    """Raised for an invalid truncated-normal parameter vector."""


@dataclass(frozen=True)
class TnParams:
    """Parameter vector (mu, sigma, tau_l, tau_u) of a truncated normal."""

    mu: float
    sigma: float
    tau_l: float
    tau_u: float

    def __post_init__(self):
        vals = (self.mu, self.sigma, self.tau_l, self.tau_u)
        if not all(np.isfinite(v) for v in vals):
            raise ParameterError(f"parameters must be finite, got {vals}")
        if self.sigma <= 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if not self.tau_l < self.tau_u:
            raise ParameterError(
                f"truncation bounds must satisfy tau_l < tau_u, got ({self.tau_l}, {self.tau_u})"
            )
        lo, hi = self.std_bounds
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ParameterError(f"standardized bounds degenerate: ({lo}, {hi})")

    @property
    def std_bounds(self) -> tuple[float, float]:
        """Truncation bounds on the parent standard-normal scale."""
        return (self.tau_l - self.mu) / self.sigma, (self.tau_u - self.mu) / self.sigma

    @property
    def parent_mass(self) -> float:
        """Probability the parent normal assigns to [tau_l, tau_u]."""
        lo, hi = self.std_bounds
        return float(normal_interval_mass(lo, hi))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.mu, self.sigma, self.tau_l, self.tau_u)


@dataclass(frozen=True)
class StdMoments:
    """First four raw moments of TN(0, 1, tau_l*, tau_u*)."""

    alpha1: float
    alpha2: float
    alpha3: float
    alpha4: float

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError(f"moment set has nonpositive variance: {self}")

    @property
    def variance(self) -> float:
        return self.alpha2 - self.alpha1**2

    def cov_matrix(self) -> np.ndarray:
        """Covariance of (Z, Z^2): [[a2-a1^2, a3-a1*a2], [a3-a1*a2, a4-a2^2]].

        Positive definite for any nondegenerate truncation interval.
        """
        off = self.alpha3 - self.alpha1 * self.alpha2
        return np.array(
            [[self.variance, off], [off, self.alpha4 - self.alpha2**2]]
        )


def density(theta: TnParams, x):
    """Density: phi((x-mu)/sigma) / (sigma * mass) on [tau_l, tau_u], 0 outside."""
    if not isinstance(theta, TnParams):
        raise ParameterError("theta must be a TnParams instance")
    x = np.asarray(x, dtype=float)
    z = (x - theta.mu) / theta.sigma
    out = np.exp(-0.5 * z * z) / (SQRT_2PI * theta.sigma * theta.parent_mass)
    out = np.where((x >= theta.tau_l) & (x <= theta.tau_u), out, 0.0)
    return float(out) if out.ndim == 0 else out


def cdf(theta: TnParams, x):
    """Distribution function: (Phi(z) - Phi(tau_l*)) / mass, clamped to [0, 1]."""
    if not isinstance(theta, TnParams):
        raise ParameterError("theta must be a TnParams instance")
    x = np.asarray(x, dtype=float)
    lo, hi = theta.std_bounds
    z = np.clip((x - theta.mu) / theta.sigma, lo, hi)
    out = normal_interval_mass(lo, z) / theta.parent_mass
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def quantile(theta: TnParams, p):
    """Inverse cdf: mu + sigma * Phi^{-1}(Phi(tau_l*) + p * mass), in [tau_l, tau_u]."""
    if not isinstance(theta, TnParams):
        raise ParameterError("theta must be a TnParams instance")
    p = np.asarray(p, dtype=float)
    if np.isnan(p).any() or (p < 0).any() or (p > 1).any():
        raise ValueError("quantile argument must lie in [0, 1]")
    lo, hi = theta.std_bounds
    mass = theta.parent_mass
    # mirror right-tail intervals so the cdf offset is formed without cancellation
    with np.errstate(divide="ignore"):
        if lo + hi <= 0:
            z = _sp.ndtri(np.clip(_sp.ndtr(lo) + p * mass, 0.0, 1.0))
        else:
            z = -_sp.ndtri(np.clip(_sp.ndtr(-hi) + (1.0 - p) * mass, 0.0, 1.0))
    out = theta.mu + theta.sigma * z
    # exact endpoints; interior values clipped into the support against fp drift
    out = np.where(p == 0.0, theta.tau_l, out)
    out = np.where(p == 1.0, theta.tau_u, out)
    out = np.clip(out, theta.tau_l, theta.tau_u)
    return float(out) if out.ndim == 0 else out


def sample(theta: TnParams, n: int, seed: int) -> np.ndarray:
    """Draw n values by inverse-cdf transform, sorted ascending.

    The stream is a counter-based Philox generator keyed by ``seed``, so
    draws are reproducible regardless of call order or thread schedule.
    """
    if not isinstance(theta, TnParams):
        raise ParameterError("theta must be a TnParams instance")
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    rng = np.random.Generator(np.random.Philox(key=int(seed) & (2**128 - 1)))
    u = rng.random(n)
    x = quantile(theta, u)
    return np.sort(np.atleast_1d(x))


def log_likelihood(theta: TnParams, data) -> float:
    """Sum of log densities; -inf when any observation leaves the support.

    The -inf sentinel (rather than an exception) lets the ES convergence
    check compare successive likelihoods across iterates that momentarily
    exclude data points.
    """
    if not isinstance(theta, TnParams):
        raise ParameterError("theta must be a TnParams instance")
    data = np.atleast_1d(np.asarray(data, dtype=float))
    if data.size == 0:
        raise ValueError("log_likelihood requires nonempty data")
    if (data < theta.tau_l).any() or (data > theta.tau_u).any():
        return float("-inf")
    z = (data - theta.mu) / theta.sigma
    const = np.log(SQRT_2PI * theta.sigma * theta.parent_mass)
    return float(-0.5 * np.dot(z, z) - data.size * const)


def std_moments(tau_l_star: float, tau_u_star: float) -> StdMoments:
    """Raw moments alpha_1..alpha_4 of TN(0, 1, tau_l*, tau_u*).

    From the mgf derivatives at 0: with D = Phi(tau_u*) - Phi(tau_l*) and
    d_k = (phi^(k-1)(tau_u*) - phi^(k-1)(tau_l*)) / D,

        alpha1 = -d1
        alpha2 = 1 + d2
        alpha3 = -3 d1 - d3
        alpha4 = 3 + 6 d2 + d4.
    """
    lo = float(tau_l_star)
    hi = float(tau_u_star)
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValueError(f"need finite tau_l* < tau_u*, got ({tau_l_star}, {tau_u_star})")
    mass = normal_interval_mass(lo, hi)
    if mass <= 0:
        raise ValueError(f"degenerate truncation interval ({lo}, {hi})")
    pts = np.array([hi, lo])
    phi = np.exp(-0.5 * pts * pts) / SQRT_2PI
    d1 = (phi[0] - phi[1]) / mass
    d2 = (std_normal_pdf_deriv(hi, 1) - std_normal_pdf_deriv(lo, 1)) / mass
    d3 = (std_normal_pdf_deriv(hi, 2) - std_normal_pdf_deriv(lo, 2)) / mass
    d4 = (std_normal_pdf_deriv(hi, 3) - std_normal_pdf_deriv(lo, 3)) / mass
    return StdMoments(
        alpha1=-d1,
        alpha2=1.0 + d2,
        alpha3=-3.0 * d1 - d3,
        alpha4=3.0 + 6.0 * d2 + d4,
    )
