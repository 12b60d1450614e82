"""Estimating-equation layer: sufficient statistics, residual evaluators,
and the closed-form Student-t estimator.

The residual evaluators measure how far a parameter vector is from solving
the estimating equations: the plain score equation for exponential families
and its reweighted generalization for alpha-power-law families.  For regular
families both collapse to moment matching, which the closed-form Student-t
estimator solves exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .core import (
    ALPHA_BELOW_THRESHOLD,
    ALPHA_NOT_BELOW_ONE,
    DegenerateStatisticsError,
    DimensionMismatchError,
    EIGENVALUE_RTOL,
    ExpFamilyDescriptor,
    ParameterError,
    SampleBatch,
    StudentTParams,
    SufficientStats,
    SupportDescriptor,
)
from . import studentt

__all__ = [
    "PopulationMoments",
    "ResidualReport",
    "StudentTEstimate",
    "sufficient_stats",
    "residual_regular_malpha",
    "residual_general_malpha",
    "residual_exponential",
    "estimate_student_t",
    "student_t_population_moments",
    "student_t_population_moments_quadrature",
    "gaussian_exp_family",
    "gaussian_population_moments",
]


@dataclass(frozen=True)
class PopulationMoments:
    """Population-side moments E_theta[f] and E_theta[q^(alpha-1)]."""

    mean_f: np.ndarray
    mean_q_pow: float = 1.0


@dataclass(frozen=True)
class ResidualReport:
    """Residual vector of an estimating equation together with its norm.

    ``equation`` tags which form was evaluated: "general-exponential",
    "general-malpha", "regular-exponential", or "regular-malpha".
    """

    residuals: np.ndarray
    norm: float
    equation: str


def _report(residuals: np.ndarray, equation: str) -> ResidualReport:
    residuals = np.asarray(residuals, dtype=float)
    return ResidualReport(residuals=residuals, norm=float(np.linalg.norm(residuals)), equation=equation)


def sufficient_stats(batch: SampleBatch, desc, alpha: float) -> SufficientStats:
    """Arithmetic means X-bar, XX^T-bar, f-bar, and q^(alpha-1)-bar."""
    data = batch.data
    mean_x = data.mean(axis=0)
    mean_xxT = np.einsum("ni,nj->ij", data, data) / batch.n
    mean_xxT = 0.5 * (mean_xxT + mean_xxT.T)
    mean_f = np.mean([np.atleast_1d(desc.f_fn(row)) for row in data], axis=0)
    q_vals = np.array([desc.q_fn(row) for row in data], dtype=float)
    with np.errstate(divide="ignore"):
        mean_q_pow = float(np.mean(q_vals ** (alpha - 1.0)))
    return SufficientStats(
        mean_x=mean_x, mean_xxT=mean_xxT, mean_f=np.asarray(mean_f, dtype=float), mean_q_pow=mean_q_pow
    )


def residual_regular_malpha(desc, theta, stats: SufficientStats, pop: PopulationMoments) -> ResidualReport:
    """Componentwise moment-matching residual for a regular family.

    residual_i = E_theta[f_i]/E_theta[q^(alpha-1)] - fbar_i/qbar, where the
    population moments must be computed at ``theta``.
    """
    if desc.s != desc.k:
        raise DimensionMismatchError(f"regular residual requires s = k, got s={desc.s}, k={desc.k}")
    if pop.mean_q_pow == 0.0 or stats.mean_q_pow == 0.0:
        raise DegenerateStatisticsError("zero q^(alpha-1) mean")
    res = pop.mean_f / pop.mean_q_pow - stats.mean_f / stats.mean_q_pow
    return _report(res, "regular-malpha")


def residual_general_malpha(desc, theta, stats: SufficientStats, pop: PopulationMoments) -> ResidualReport:
    """Jacobian-weighted residual of the general estimating equation.

    residual_r = dw_r^T E[f] / E[q^(alpha-1) + w0 + w^T f]
               - dw_r^T fbar / (qbar + w0 + w^T fbar),
    with the constant-statistic offset (if any) folded into both the
    numerators (through its gradient) and the denominators.
    """
    theta = np.asarray(theta, dtype=float)
    w = np.asarray(desc.w_fn(theta), dtype=float)
    jac = np.asarray(desc.w_jacobian(theta), dtype=float)
    w0 = desc.w0_fn(theta) if desc.w0_fn is not None else 0.0
    g0 = (
        np.asarray(desc.w0_grad(theta), dtype=float)
        if desc.w0_grad is not None
        else np.zeros(desc.k)
    )
    den_pop = pop.mean_q_pow + w0 + float(w @ pop.mean_f)
    den_samp = stats.mean_q_pow + w0 + float(w @ stats.mean_f)
    if den_pop == 0.0 or den_samp == 0.0:
        raise DegenerateStatisticsError("zero bracket mean")
    res = (jac.T @ pop.mean_f + g0) / den_pop - (jac.T @ stats.mean_f + g0) / den_samp
    return _report(res, "general-malpha")


def residual_exponential(
    desc: ExpFamilyDescriptor, theta, stats: SufficientStats, pop: PopulationMoments, regular: bool = True
) -> ResidualReport:
    """Score-equation residual for an exponential family.

    Regular form: E_theta[f] - fbar.  General form: the Jacobian-weighted
    version dw_r^T (E_theta[f] - fbar).
    """
    gap = pop.mean_f - stats.mean_f
    if regular:
        if desc.s != desc.k:
            raise DimensionMismatchError(
                f"regular residual requires s = k, got s={desc.s}, k={desc.k}"
            )
        return _report(gap, "regular-exponential")
    jac = np.asarray(desc.w_jacobian(np.asarray(theta, dtype=float)), dtype=float)
    return _report(jac.T @ gap, "general-exponential")


@dataclass(frozen=True)
class StudentTEstimate:
    """Closed-form estimate: sample mean and 1/n sample covariance.

    ``singular`` flags a covariance without full rank (n <= d, constant
    batches, or data in an affine subspace); downstream Sigma^{-1} uses
    must be skipped when it is set.
    """

    mu_hat: np.ndarray
    sigma_hat: np.ndarray
    alpha: float
    singular: bool


def estimate_student_t(batch: SampleBatch, alpha: float) -> StudentTEstimate:
    """Closed-form estimator for the mean and covariance, alpha < 1.

    The formulas contain no alpha, so the result is identical across the
    whole valid range (d/(d+2), 1); alpha is validated and recorded only.
    The covariance divisor is 1/n.
    """
    d = batch.dim
    threshold = d / (d + 2.0)
    if alpha >= 1.0:
        raise ParameterError(ALPHA_NOT_BELOW_ONE, f"estimator requires alpha < 1, got {alpha}")
    if alpha <= threshold:
        raise ParameterError(
            ALPHA_BELOW_THRESHOLD,
            f"alpha must exceed d/(d+2) = {threshold} for d = {d}, got {alpha}",
        )
    mu_hat = batch.data.mean(axis=0)
    centered = batch.data - mu_hat
    sigma_hat = (centered.T @ centered) / batch.n
    sigma_hat = 0.5 * (sigma_hat + sigma_hat.T)
    eigvals = np.linalg.eigvalsh(sigma_hat)
    singular = (
        batch.n <= d
        or eigvals[-1] <= 0.0
        or eigvals[0] <= EIGENVALUE_RTOL * eigvals[-1]
    )
    return StudentTEstimate(mu_hat=mu_hat, sigma_hat=sigma_hat, alpha=alpha, singular=bool(singular))


def student_t_population_moments(params: StudentTParams) -> PopulationMoments:
    """Analytic E[f] for f = (x, Vec(xx^T)): E[X] = mu, E[XX^T] = Sigma + mu mu^T."""
    second = params.sigma + np.outer(params.mu, params.mu)
    return PopulationMoments(
        mean_f=np.concatenate([params.mu, second.ravel()]), mean_q_pow=1.0
    )


def student_t_population_moments_quadrature(
    params: StudentTParams, epsabs: float = 1e-10, epsrel: float = 1e-8
) -> PopulationMoments:
    """Quadrature cross-check of the analytic moments (d = 1 only)."""
    if params.dim != 1:
        raise DimensionMismatchError("quadrature moments are implemented for d = 1 only")
    if params.alpha < 1.0:
        lo, hi = -np.inf, np.inf
    else:
        radius = math.sqrt(params.support.radius_sq * params.sigma[0, 0])
        lo, hi = params.mu[0] - radius, params.mu[0] + radius

    def pdf(x: float) -> float:
        return studentt.density(params, [x])

    m1 = quad(lambda x: x * pdf(x), lo, hi, epsabs=epsabs, epsrel=epsrel)[0]
    m2 = quad(lambda x: x * x * pdf(x), lo, hi, epsabs=epsabs, epsrel=epsrel)[0]
    mass = quad(pdf, lo, hi, epsabs=epsabs, epsrel=epsrel)[0]
    return PopulationMoments(mean_f=np.array([m1, m2]), mean_q_pow=mass)


def gaussian_exp_family(dim: int) -> ExpFamilyDescriptor:
    """Gaussian as the built-in exponential-family instance.

    Uses theta = (mu, Vec(Sigma^{-1})) and f = (x, Vec(xx^T)):
    w(theta) = (Sigma^{-1} mu, -Vec(Sigma^{-1})/2), q = 0, and Z(theta)
    collecting the normalizer.  Shares the statistic layout with the
    Student-t family, which is what makes the alpha -> 1 continuity story
    visible in the estimators.
    """
    d = dim
    k = d + d * d

    def w_fn(theta: np.ndarray) -> np.ndarray:
        from .core import unpack_theta

        m, l = unpack_theta(theta, d)
        return np.concatenate([l @ m, -0.5 * l.ravel()])

    def w_jacobian(theta: np.ndarray) -> np.ndarray:
        from .core import unpack_theta

        m, l = unpack_theta(theta, d)
        jac = np.zeros((k, k))
        jac[:d, :d] = l
        for row in range(d):
            jac[row, d + row * d : d + (row + 1) * d] = m
        jac[d:, d:] = -0.5 * np.eye(d * d)
        return jac

    def z_fn(theta: np.ndarray) -> float:
        from .core import unpack_theta

        m, l = unpack_theta(theta, d)
        sign, logdet = np.linalg.slogdet(l)
        return -0.5 * (d * math.log(2.0 * math.pi) - logdet + float(m @ l @ m))

    def f_fn(x: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.concatenate([x, np.outer(x, x).ravel()])

    return ExpFamilyDescriptor(
        k=k,
        s=k,
        q_fn=lambda x: 0.0,
        w_fn=w_fn,
        f_fn=f_fn,
        z_fn=z_fn,
        support=SupportDescriptor(kind="all-space"),
        w_jacobian=w_jacobian,
    )


def gaussian_population_moments(mu, sigma) -> PopulationMoments:
    """E[f] for the Gaussian with f = (x, Vec(xx^T))."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    second = sigma + np.outer(mu, mu)
    return PopulationMoments(mean_f=np.concatenate([mu, second.ravel()]), mean_q_pow=1.0)
