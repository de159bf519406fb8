"""Chi-squared, F, Student-t and normal laws with densities, tails and alpha-points.

Tails are evaluated through the regularized incomplete beta/gamma functions in
:mod:`qlanova.specfun`. Alpha-points (upper-tail quantiles) are found by
geometric bracketing followed by bisection-safeguarded Newton steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConvergenceError, DomainError, PoleError
from .specfun import betainc, gammainc, gammaincc, log_beta, log_gamma

TAIL_TOL = 1e-13
WIDTH_TOL = 1e-12
MAX_NEWTON = 200


def _check_df(**dfs):
    for name, value in dfs.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise DomainError(f"{name} must be a positive finite number, got {value!r}")


def _check_x(x):
    if isinstance(x, (bool, np.bool_)) or not isinstance(x, (int, float, np.floating, np.integer)):
        raise DomainError(f"expected a real number, got {x!r}")
    if math.isnan(x):
        raise DomainError("x is NaN")
    return float(x)


@dataclass(frozen=True)
class ChiSquared:
    df: float

    lower = 0.0

    def __post_init__(self):
        _check_df(df=self.df)

    def pdf(self, x):
        return chi2_pdf(self, x)

    def sf(self, x):
        x = _check_x(x)
        if x < 0:
            raise DomainError(f"chi-squared support is [0, inf), got x={x}")
        return gammaincc(self.df / 2.0, x / 2.0)

    def cdf(self, x):
        x = _check_x(x)
        if x < 0:
            raise DomainError(f"chi-squared support is [0, inf), got x={x}")
        return gammainc(self.df / 2.0, x / 2.0)

    def label(self):
        return f"chi2({self.df:g})"


@dataclass(frozen=True)
class FDist:
    d1: float
    d2: float

    lower = 0.0

    def __post_init__(self):
        _check_df(d1=self.d1, d2=self.d2)

    def pdf(self, t):
        return f_pdf(self, t)

    def sf(self, t):
        t = _check_x(t)
        if t < 0:
            raise DomainError(f"F support is [0, inf), got t={t}")
        if math.isinf(t):
            return 0.0
        return betainc(self.d2 / 2.0, self.d1 / 2.0, self.d2 / (self.d2 + self.d1 * t))

    def cdf(self, t):
        t = _check_x(t)
        if t < 0:
            raise DomainError(f"F support is [0, inf), got t={t}")
        if math.isinf(t):
            return 1.0
        return betainc(self.d1 / 2.0, self.d2 / 2.0, self.d1 * t / (self.d1 * t + self.d2))

    def label(self):
        return f"F({self.d1:g},{self.d2:g})"


@dataclass(frozen=True)
class StudentT:
    df: float

    lower = -math.inf

    def __post_init__(self):
        _check_df(df=self.df)

    def pdf(self, x):
        return t_pdf(self, x)

    def sf(self, x):
        x = _check_x(x)
        if math.isinf(x):
            return 0.0 if x > 0 else 1.0
        k = self.df
        half = 0.5 * betainc(k / 2.0, 0.5, k / (k + x * x))
        return half if x >= 0 else 1.0 - half

    def cdf(self, x):
        return self.sf(-_check_x(x))

    def label(self):
        return f"t({self.df:g})"


@dataclass(frozen=True)
class Normal:
    """Normal law; used for the image of the sample mean."""

    mean: float = 0.0
    sd: float = 1.0

    lower = -math.inf

    def __post_init__(self):
        _check_df(sd=self.sd)

    def pdf(self, x):
        z = (_check_x(x) - self.mean) / self.sd
        return math.exp(-0.5 * z * z) / (self.sd * math.sqrt(2.0 * math.pi))

    def sf(self, x):
        return 0.5 * math.erfc((_check_x(x) - self.mean) / (self.sd * math.sqrt(2.0)))

    def cdf(self, x):
        return 0.5 * math.erfc((self.mean - _check_x(x)) / (self.sd * math.sqrt(2.0)))

    def label(self):
        return f"N({self.mean:g},{self.sd:g}^2)"


DistributionModel = Union[ChiSquared, FDist, StudentT, Normal]


@dataclass(frozen=True)
class AlphaPoint:
    value: float
    alpha: float
    dist: DistributionModel

    def __float__(self):
        return self.value


def chi2_pdf(dist: ChiSquared, x) -> float:
    x = _check_x(x)
    k = dist.df
    if x < 0:
        raise DomainError(f"chi-squared density undefined for x={x} < 0")
    if math.isinf(x):
        return 0.0
    if x == 0.0:
        if k < 2:
            raise PoleError(f"chi-squared density with df={k} has a pole at 0")
        return 0.5 if k == 2 else 0.0
    log_p = (k / 2.0 - 1.0) * math.log(x) - x / 2.0 - (k / 2.0) * math.log(2.0) - log_gamma(k / 2.0)
    return math.exp(log_p)


def f_pdf(dist: FDist, t) -> float:
    t = _check_x(t)
    d1, d2 = dist.d1, dist.d2
    if t < 0:
        raise DomainError(f"F density undefined for t={t} < 0")
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        if d1 < 2:
            raise PoleError(f"F density with d1={d1} has a pole at 0")
        return 1.0 if d1 == 2 else 0.0
    log_p = (
        -log_beta(d1 / 2.0, d2 / 2.0)
        + (d1 / 2.0) * math.log(d1 / d2)
        + ((d1 - 2.0) / 2.0) * math.log(t)
        - ((d1 + d2) / 2.0) * math.log1p(d1 * t / d2)
    )
    return math.exp(log_p)


def t_pdf(dist: StudentT, x) -> float:
    x = _check_x(x)
    k = dist.df
    if math.isinf(x):
        return 0.0
    log_p = (
        log_gamma((k + 1.0) / 2.0)
        - log_gamma(k / 2.0)
        - 0.5 * math.log(k * math.pi)
        - ((k + 1.0) / 2.0) * math.log1p(x * x / k)
    )
    return math.exp(log_p)


def upper_tail(dist: DistributionModel, x) -> float:
    """Mass of ``dist`` on ``[x, inf)``."""
    return dist.sf(x)


def _center(dist):
    if isinstance(dist, Normal):
        return dist.mean
    return 0.0


def alpha_point(dist: DistributionModel, alpha: float) -> AlphaPoint:
    """Point whose upper-tail mass under ``dist`` equals ``alpha``."""
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if isinstance(dist, (StudentT, Normal)) and alpha == 0.5:
        return AlphaPoint(_center(dist), alpha, dist)
    if isinstance(dist, (StudentT, Normal)) and alpha > 0.5:
        c = _center(dist)
        mirrored = _solve_upper(dist, 1.0 - alpha, c)
        return AlphaPoint(2.0 * c - mirrored, alpha, dist)
    return AlphaPoint(_solve_upper(dist, alpha, _center(dist)), alpha, dist)


def _solve_upper(dist, alpha, lo):
    # sf(lo) >= alpha holds at the support minimum or at the center of a symmetric law.
    step = 1.0
    if isinstance(dist, Normal):
        step = dist.sd
    hi = lo + step
    expansions = 0
    while dist.sf(hi) > alpha:
        lo = hi
        step *= 2.0
        hi = lo + step
        expansions += 1
        if expansions > 1100 or math.isinf(hi):
            raise ConvergenceError(
                f"could not bracket the alpha-point of {dist.label()} at alpha={alpha}: "
                f"tail at {lo!r} still exceeds alpha"
            )

    x = 0.5 * (lo + hi)
    for _ in range(MAX_NEWTON):
        f = dist.sf(x) - alpha
        if abs(f) <= TAIL_TOL * alpha:
            return x
        if f > 0:
            lo = x
        else:
            hi = x
        if hi - lo <= WIDTH_TOL * max(1.0, abs(x)):
            return x
        density = dist.pdf(x)
        candidate = x + f / density if density > 0 else math.nan
        if not (lo < candidate < hi):
            candidate = 0.5 * (lo + hi)
        x = candidate
    raise ConvergenceError(
        f"alpha-point of {dist.label()} at alpha={alpha} did not converge; "
        f"final bracket [{lo!r}, {hi!r}], tail error {dist.sf(x) - alpha:.3e}"
    )
