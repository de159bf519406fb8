"""Test drivers: mean test, one-way ANOVA, two-way main effects and interaction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import ChiSquared, FDist, upper_tail
from .errors import DegenerateDataError, DomainError, HypothesisMismatch
from .measurement import (
    ConfidenceInterval,
    Layout,
    LayoutKind,
    TestKind,
    as_values,
    check_kind,
    confidence_interval,
    degrees_of_freedom,
    eta_threshold,
    statistic_batch,
    summarize,
)


@dataclass(frozen=True)
class TestSpec:
    __test__ = False

    kind: TestKind
    layout: Layout
    alpha: float = 0.05
    mu0: Optional[float] = None

    def __post_init__(self):
        if not (isinstance(self.alpha, (int, float)) and 0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        check_kind(self.kind, self.layout)
        if self.kind is TestKind.MEAN_EQUALS_MU0:
            if self.mu0 is None or not math.isfinite(self.mu0):
                raise HypothesisMismatch("the mean test needs a finite mu0")
        elif self.mu0 is not None:
            raise HypothesisMismatch(f"mu0 only applies to the mean test, not {self.kind.value!r}")


@dataclass(frozen=True)
class SSRow:
    source: str
    ss: float
    df: int


@dataclass(frozen=True)
class TestReport:
    __test__ = False

    kind: TestKind
    alpha: float
    statistic: float
    df: tuple
    alpha_point: float
    reject: bool
    eta: float
    p_value: float
    ss_table: tuple
    confidence_interval: Optional[ConfidenceInterval] = None


def f_statistic_batch(kind: TestKind, values, layout: Layout, mu0: float = 0.0) -> np.ndarray:
    """Statistic for each row of ``values`` (shape ``(reps, N)``); NaN for degenerate rows."""
    return statistic_batch(kind, values, layout, mu0)


def f_statistic(kind: TestKind, x, layout: Layout, mu0: float = 0.0):
    """Return ``(statistic, (df1, df2))`` for one dataset."""
    v = as_values(x, layout)
    stat = float(f_statistic_batch(kind, v[None, :], layout, mu0)[0])
    if math.isnan(stat):
        raise DegenerateDataError("residual sum of squares is zero; statistic undefined")
    return stat, degrees_of_freedom(kind, layout)


def ss_table(x, layout: Layout, mu0: float = 0.0) -> tuple:
    """Sums-of-squares decomposition rows ending with the total."""
    v = as_values(x, layout)
    s = summarize(v, layout)
    n = layout.n_total
    if layout.kind is LayoutKind.SINGLE:
        rows = [
            SSRow("mean", n * (s.mu_bar - mu0) ** 2, 1),
            SSRow("residual", s.ss_bar, n - 1),
            SSRow("total", float(np.sum((v - mu0) ** 2)), n),
        ]
    elif layout.kind is LayoutKind.ONE_WAY:
        sizes = np.asarray(layout.group_sizes, dtype=float)
        a = layout.n_groups
        rows = [
            SSRow("between", float(np.sum(sizes * (s.group_means - s.mu_bar) ** 2)), a - 1),
            SSRow("within", s.ss_bar, n - a),
            SSRow("total", float(np.sum((v - s.mu_bar) ** 2)), n - 1),
        ]
    else:
        a, b = layout.levels
        c = layout.cell_size
        inter = s.group_means - s.row_means[:, None] - s.col_means[None, :] + s.mu_bar
        rows = [
            SSRow("factor_a", float(b * c * np.sum((s.row_means - s.mu_bar) ** 2)), a - 1),
            SSRow("factor_b", float(a * c * np.sum((s.col_means - s.mu_bar) ** 2)), b - 1),
            SSRow("interaction", float(c * np.sum(inter**2)), (a - 1) * (b - 1)),
            SSRow("residual", s.ss_bar, a * b * (c - 1)),
            SSRow("total", float(np.sum((v - s.mu_bar) ** 2)), n - 1),
        ]
    return tuple(rows)


def run_test(spec: TestSpec, x) -> TestReport:
    mu0 = spec.mu0 if spec.mu0 is not None else 0.0
    stat, df = f_statistic(spec.kind, x, spec.layout, mu0)
    eta = eta_threshold(spec.kind, spec.layout, spec.alpha)
    point = eta.alpha_point.value
    ci = None
    if spec.kind is TestKind.MEAN_EQUALS_MU0:
        ci = confidence_interval(as_values(x, spec.layout), spec.alpha)
    return TestReport(
        kind=spec.kind,
        alpha=spec.alpha,
        statistic=stat,
        df=df,
        alpha_point=point,
        reject=stat >= point,
        eta=eta.value,
        # not part of the rejection construction; reported for convenience
        p_value=upper_tail(FDist(*df), stat),
        ss_table=ss_table(x, spec.layout, mu0),
        confidence_interval=ci,
    )


def sigma_bar_cdf(n: int, sigma: float, eta: float) -> float:
    """Probability that the root-mean-square deviation of ``n`` normal draws is at most ``eta``."""
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    if not (sigma > 0 and math.isfinite(sigma)):
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    if not eta > 0:
        raise DomainError(f"eta must be positive, got {eta!r}")
    if math.isinf(eta):
        return 1.0
    return ChiSquared(n - 1).cdf(n * eta * eta / (sigma * sigma))
