"""Large-sample theory for the ES estimators, in computable form.

The estimating system averaged over an infinite sample has an explicit
limit: its value, Jacobian, and the covariance of its first two
components at the truth determine everything reported here --

* ``limiting_system``: the population system Psi(theta) whose root is the
  generating parameter;
* ``bound_limit_cdf``: the n-rate limit laws of the bound estimators
  (unit-rate extreme-value limits shifted by the unbiasedness correction);
* ``sigma_matrix``: the 2x2 covariance of the location/scale components,
  reduced from the L-statistic double integrals to moment identities;
* ``jacobian``: the 4x4 derivative of the limit system at the truth, in
  closed block form;
* ``musigma_limit_cov``: Gamma Sigma Gamma^t, the limit covariance of
  sqrt(n) (mu_hat - mu0, sigma_hat - sigma0).

All moment symbols alpha_k refer to the standardized law at the relevant
parameter's bounds; at the truth the Jacobian needs no quadrature at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _integrate

from .estimating import SystemValue
from .specfns import SQRT_2PI, normal_interval_mass, std_normal_pdf_deriv
from .truncnorm import ParameterError, TnParams, quantile, std_moments

__all__ = [
    "LimitCov",
    "limiting_system",
    "bound_limit_cdf",
    "sigma_matrix",
    "jacobian",
    "musigma_limit_cov",
]


@dataclass(frozen=True)
class LimitCov:
    """Covariance pieces for the (mu, sigma) limit law."""

    sigma_mat: np.ndarray
    gamma_mat: np.ndarray
    musigma_cov: np.ndarray


def _check_theta(theta: TnParams) -> None:
    if not isinstance(theta, TnParams):
        raise ParameterError("expected a TnParams instance")


def _cross_moment(theta: TnParams, theta0: TnParams, quad_tol: float) -> float:
    """integral_0^1 F0^{-1}(t) J_theta(t) dt by adaptive quadrature."""
    std = TnParams(0.0, 1.0, *theta.std_bounds)

    def integrand(t: float) -> float:
        return quantile(theta0, t) * quantile(std, t)

    value, abserr = _integrate.quad(
        integrand, 0.0, 1.0, epsabs=quad_tol, epsrel=quad_tol, limit=200
    )
    if abserr > max(100.0 * quad_tol, 1e-10):
        raise RuntimeError(
            f"cross-moment quadrature did not reach tolerance {quad_tol:g}; "
            f"achieved absolute error {abserr:g}"
        )
    return value


def limiting_system(theta: TnParams, theta0: TnParams, quad_tol: float = 1e-8) -> SystemValue:
    """Population value of the estimating system at theta when data are
    generated by theta0. Zero at theta = theta0."""
    _check_theta(theta)
    _check_theta(theta0)
    m0 = std_moments(*theta0.std_bounds)
    m = std_moments(*theta.std_bounds)
    cross = _cross_moment(theta, theta0, quad_tol)
    return SystemValue(
        eq_mu=theta0.mu + theta0.sigma * m0.alpha1 - theta.mu - theta.sigma * m.alpha1,
        eq_sigma=cross - theta.mu * m.alpha1 - theta.sigma * m.alpha2,
        eq_tau_l=theta0.tau_l - theta.tau_l,
        eq_tau_u=theta0.tau_u - theta.tau_u,
    )


def bound_limit_cdf(x: float, side: str):
    """CDF of the limit of n f(tau) (tau_hat - tau) for the named bound.

    Upper: W + 1 with W the unit-rate lower-extreme law, F(x) = exp(x - 1)
    on x <= 1. Lower: the reflection -(W + 1), F(x) = 1 - exp(-(x + 1)) on
    x >= -1.
    """
    if side not in ("lower", "upper"):
        raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")
    x = np.asarray(x, dtype=float)
    if not np.isfinite(x).all():
        raise ValueError("bound_limit_cdf requires finite x")
    if side == "upper":
        out = np.where(x <= 1.0, np.exp(np.minimum(x, 1.0) - 1.0), 1.0)
    else:
        out = np.where(x >= -1.0, 1.0 - np.exp(-(np.maximum(x, -1.0) + 1.0)), 0.0)
    return float(out) if out.ndim == 0 else out


def sigma_matrix(theta0: TnParams) -> np.ndarray:
    """Limit covariance of the first two system components at the truth:

        s11 = sigma0^2 (a2 - a1^2)
        s12 = sigma0^2 / 2 (a3 - a1 a2)
        s22 = sigma0^2 / 4 (a4 - a2^2)

    the moment reduction of the L-statistic double integrals.
    """
    _check_theta(theta0)
    m = std_moments(*theta0.std_bounds)
    s2 = theta0.sigma**2
    s11 = s2 * (m.alpha2 - m.alpha1**2)
    s12 = 0.5 * s2 * (m.alpha3 - m.alpha1 * m.alpha2)
    s22 = 0.25 * s2 * (m.alpha4 - m.alpha2**2)
    return np.array([[s11, s12], [s12, s22]])


def _phi_derivs(z: float) -> tuple[float, float, float]:
    """(phi, phi', phi'') at z."""
    phi = math.exp(-0.5 * z * z) / SQRT_2PI
    return phi, std_normal_pdf_deriv(z, 1), std_normal_pdf_deriv(z, 2)


def jacobian(theta0: TnParams, quad_tol: float = 1e-8) -> np.ndarray:
    """d(limiting system)/d(theta) at theta = theta0, in closed block form.

    Rows 3-4 are (0 | -I) exactly. The upper-left 2x2 block is the
    negated moment matrix

        [[a2 - a1^2,        a3 - a1 a2      ]
         [(a3 - a1 a2) / 2, (a4 - a2^2) / 2 ]]

    and the upper-right block is A12 / sigma0, where A12 collects the
    partials with respect to the standardized bounds (columns tau_l*,
    tau_u*):

        A12[0, :] = -sigma0 * d a1 / d tau*
        A12[1, 0] =  sigma0/2 * ( phi''(l)/D - phi(l) (phi'(u)-phi'(l))/D^2 )
        A12[1, 1] =  sigma0/2 * (-phi''(u)/D + phi(u) (phi'(u)-phi'(l))/D^2 )

    No quadrature is needed at the truth; ``quad_tol`` is accepted for
    interface symmetry with ``limiting_system``.
    """
    del quad_tol
    _check_theta(theta0)
    lo, hi = theta0.std_bounds
    sig = theta0.sigma
    m = std_moments(lo, hi)
    mass = float(normal_interval_mass(lo, hi))

    phi_l, dphi_l, d2phi_l = _phi_derivs(lo)
    phi_u, dphi_u, d2phi_u = _phi_derivs(hi)
    phi_diff = phi_u - phi_l
    dphi_diff = dphi_u - dphi_l

    # quotient-rule partials of alpha1 = -(phi(u) - phi(l)) / D
    da1_dl = (dphi_l * mass - phi_diff * phi_l) / mass**2
    da1_du = (-dphi_u * mass + phi_diff * phi_u) / mass**2

    a12 = np.array(
        [
            [-sig * da1_dl, -sig * da1_du],
            [
                0.5 * sig * (d2phi_l / mass - phi_l * dphi_diff / mass**2),
                0.5 * sig * (-d2phi_u / mass + phi_u * dphi_diff / mass**2),
            ],
        ]
    )

    v = m.alpha2 - m.alpha1**2
    w = m.alpha3 - m.alpha1 * m.alpha2
    u = m.alpha4 - m.alpha2**2
    upper_left = -np.array([[v, w], [0.5 * w, 0.5 * u]])

    out = np.zeros((4, 4))
    out[:2, :2] = upper_left
    out[:2, 2:] = a12 / sig
    out[2:, 2:] = -np.eye(2)
    return out


def musigma_limit_cov(theta0: TnParams) -> LimitCov:
    """Gamma = (moment matrix)^{-1} and the limit covariance
    Gamma Sigma Gamma^t of sqrt(n) (mu_hat - mu0, sigma_hat - sigma0)."""
    _check_theta(theta0)
    m = std_moments(*theta0.std_bounds)
    v = m.alpha2 - m.alpha1**2
    w = m.alpha3 - m.alpha1 * m.alpha2
    u = m.alpha4 - m.alpha2**2
    det = 0.5 * (v * u - w**2)
    if det <= 0:
        raise RuntimeError(f"moment matrix is singular at {theta0}; det = {det}")
    gamma = np.array([[0.5 * u, -w], [-0.5 * w, v]]) / det
    sig = sigma_matrix(theta0)
    cov = gamma @ sig @ gamma.T
    cov = 0.5 * (cov + cov.T)
    return LimitCov(sigma_mat=sig, gamma_mat=gamma, musigma_cov=cov)
