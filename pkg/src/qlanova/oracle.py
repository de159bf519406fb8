"""Monte-Carlo and quadrature checks of the distributional reductions.

Simulated datasets come from Philox streams (a counter-based generator) keyed
by ``(seed, chunk index)``; Gaussian variates use numpy's ziggurat sampler.
Chunks are independent, so they can be drawn on several threads and the
result is identical to the sequential run.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from . import anova
from .distributions import ChiSquared, DistributionModel, FDist, Normal, alpha_point
from .errors import ConvergenceError, DegenerateDataError, DomainError, HypothesisMismatch
from .measurement import Layout, State, TestKind, check_kind, degrees_of_freedom, satisfies_null

RNG_NAME = "philox4x64/ziggurat"
DEFAULT_CHUNK = 20_000


def stream(seed: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(chunk)])
    return np.random.Generator(np.random.Philox(ss))


def _chunks(replicates, chunk_size):
    full, rest = divmod(replicates, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def _run_chunks(draw, replicates, chunk_size, workers):
    sizes = _chunks(replicates, chunk_size)
    jobs = list(enumerate(sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: draw(*job), jobs))
    else:
        parts = [draw(i, m) for i, m in jobs]
    return np.concatenate(parts)


@dataclass(frozen=True)
class SimPlan:
    state: State
    layout: Layout
    replicates: int
    seed: int
    statistic: TestKind
    alpha: float = 0.05
    mu0: Optional[float] = None
    chunk_size: int = DEFAULT_CHUNK
    workers: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise DomainError(f"replicates must be positive, got {self.replicates}")
        if self.chunk_size < 1 or self.workers < 1:
            raise DomainError("chunk_size and workers must be positive")
        check_kind(self.statistic, self.layout)
        self.state.check(self.layout)

    @property
    def target_law(self) -> FDist:
        return FDist(*degrees_of_freedom(self.statistic, self.layout))

    @property
    def null_mu0(self) -> float:
        if self.statistic is TestKind.MEAN_EQUALS_MU0:
            return self.state.means[0] if self.mu0 is None else self.mu0
        return 0.0


@dataclass(frozen=True)
class SimResult:
    empirical_tail: float
    ks_distance: float
    replicates: int
    target_law: DistributionModel
    alpha: float
    alpha_point: float
    seed: int


def ks_distance(sample, law: DistributionModel) -> float:
    """Kolmogorov-Smirnov distance between the empirical law of ``sample`` and ``law``."""
    x = np.sort(np.asarray(sample, dtype=float))
    m = x.size
    if m == 0:
        raise DomainError("empty sample")
    cdf = np.fromiter((law.cdf(v) for v in x), dtype=float, count=m)
    ranks = np.arange(1, m + 1, dtype=float)
    return float(max(np.max(ranks / m - cdf), np.max(cdf - (ranks - 1) / m)))


def simulate_values(plan: SimPlan) -> np.ndarray:
    """Statistic of every simulated dataset, in replicate order."""
    mu0 = plan.null_mu0
    if not satisfies_null(plan.statistic, plan.state, plan.layout, mu0):
        raise HypothesisMismatch(f"state {plan.state} does not satisfy the null hypothesis of {plan.statistic.value!r}")
    centre = plan.state.expanded(plan.layout)
    n = plan.layout.n_total

    def draw(chunk, m):
        z = stream(plan.seed, chunk).standard_normal((m, n))
        return anova.f_statistic_batch(plan.statistic, centre + plan.state.sigma * z, plan.layout, mu0)

    stats = _run_chunks(draw, plan.replicates, plan.chunk_size, plan.workers)
    if np.isnan(stats).any():
        raise DegenerateDataError("a simulated dataset had zero residual sum of squares")
    return stats


def simulate_statistic(plan: SimPlan) -> SimResult:
    stats = simulate_values(plan)
    law = plan.target_law
    point = alpha_point(law, plan.alpha).value
    return SimResult(
        empirical_tail=float(np.count_nonzero(stats >= point)) / stats.size,
        ks_distance=ks_distance(stats, law),
        replicates=plan.replicates,
        target_law=law,
        alpha=plan.alpha,
        alpha_point=point,
        seed=plan.seed,
    )


def quadrature_tail(law: DistributionModel, x: float) -> float:
    """Upper tail of ``law`` at ``x`` by adaptive Gauss-Kronrod quadrature of its density."""
    x = float(x)
    if math.isnan(x) or x < law.lower:
        raise DomainError(f"x={x} outside the support of {law.label()}")
    if math.isinf(x):
        return 0.0 if x > 0 else 1.0
    total = 0.0
    # split once so the peak and the far tail are integrated separately
    edge = max(x, 0.0) + 1.0
    pieces = [(x, edge), (edge, math.inf)] if x < edge else [(x, math.inf)]
    for lo, hi in pieces:
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                value, err = integrate.quad(law.pdf, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=500)
            except integrate.IntegrationWarning as exc:
                raise ConvergenceError(f"quadrature of {law.label()} on [{lo}, {hi}] failed: {exc}") from exc
        if err > 1e-10:
            raise ConvergenceError(f"quadrature of {law.label()} on [{lo}, {hi}] has error estimate {err:.2e}")
        total += value
    return total


@dataclass(frozen=True)
class ImageCheck:
    """Simulated laws of the sample mean and of ``n * sigma_bar**2 / sigma**2``."""

    mean: SimResult
    scale: Optional[SimResult]
    correlation: Optional[float]
    mean_of_means: float


def mean_image_check(n: int, mu: float, sigma: float, seed: int, replicates: int = 100_000, alpha: float = 0.05) -> ImageCheck:
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")

    def draw(chunk, m):
        x = mu + sigma * stream(seed, chunk).standard_normal((m, n))
        mean = x.mean(axis=1)
        resid = x - mean[:, None]
        return np.stack([mean, np.sum(resid * resid, axis=1)], axis=1)

    out = _run_chunks(draw, replicates, DEFAULT_CHUNK, 1)
    means, ss = out[:, 0], out[:, 1]

    mean_law = Normal(mu, sigma / math.sqrt(n))
    mean_point = alpha_point(mean_law, alpha).value
    mean_result = SimResult(
        float(np.count_nonzero(means >= mean_point)) / replicates,
        ks_distance(means, mean_law),
        replicates,
        mean_law,
        alpha,
        mean_point,
        seed,
    )
    if n < 2:
        return ImageCheck(mean_result, None, None, float(means.mean()))

    scaled = ss / sigma**2
    scale_law = ChiSquared(n - 1)
    scale_point = alpha_point(scale_law, alpha).value
    scale_result = SimResult(
        float(np.count_nonzero(scaled >= scale_point)) / replicates,
        ks_distance(scaled, scale_law),
        replicates,
        scale_law,
        alpha,
        scale_point,
        seed,
    )
    corr = float(np.corrcoef(means, ss / n)[0, 1])
    return ImageCheck(mean_result, scale_result, corr, float(means.mean()))
