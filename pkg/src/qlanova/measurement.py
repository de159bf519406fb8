"""States, layouts, estimators, semi-distances and the rejection machinery.

A dataset is stored as a flat float vector ordered group by group (one-way) or
cell by cell in row-major ``(i, j)`` order with replicates innermost
(two-way). The statistic kernels accept arrays whose last axis holds one such
vector, so a whole batch of simulated datasets is processed in one call.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import AlphaPoint, FDist, alpha_point
from .errors import DegenerateDataError, DomainError, HypothesisMismatch, LayoutError


class LayoutKind(enum.Enum):
    SINGLE = "single"
    ONE_WAY = "oneway"
    TWO_WAY = "twoway"


class TestKind(enum.Enum):
    __test__ = False

    MEAN_EQUALS_MU0 = "t"
    ONE_WAY_EQUAL_MEANS = "oneway"
    TWO_WAY_MAIN_A = "twoway-a"
    TWO_WAY_MAIN_B = "twoway-b"
    TWO_WAY_INTERACTION = "interaction"

    @property
    def layout_kind(self) -> LayoutKind:
        if self is TestKind.MEAN_EQUALS_MU0:
            return LayoutKind.SINGLE
        if self is TestKind.ONE_WAY_EQUAL_MEANS:
            return LayoutKind.ONE_WAY
        return LayoutKind.TWO_WAY


@dataclass(frozen=True)
class Layout:
    """Group structure of a dataset.

    ``group_sizes`` is ``(n,)`` for a single sample, ``(n_1, ..., n_a)`` for a
    one-way layout and ``(n,) * (a * b)`` for a balanced two-way layout, whose
    factor level counts are kept in ``levels``.
    """

    kind: LayoutKind
    group_sizes: tuple
    levels: Optional[tuple] = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.group_sizes)
        object.__setattr__(self, "group_sizes", sizes)
        if any(s < 1 for s in sizes):
            raise LayoutError(f"every group needs at least one observation, got sizes {sizes}")
        if self.kind is LayoutKind.SINGLE:
            if len(sizes) != 1:
                raise LayoutError("a single-sample layout has exactly one group")
        elif self.kind is LayoutKind.ONE_WAY:
            if len(sizes) < 2:
                raise LayoutError(f"one-way layout needs a >= 2 groups, got {len(sizes)}")
            if any(s < 2 for s in sizes):
                raise LayoutError(f"one-way layout needs n_i >= 2 in every group, got {sizes}")
        else:
            if self.levels is None or len(self.levels) != 2:
                raise LayoutError("two-way layout needs levels=(a, b)")
            a, b = (int(v) for v in self.levels)
            object.__setattr__(self, "levels", (a, b))
            if a < 2 or b < 2:
                raise LayoutError(f"two-way layout needs a >= 2 and b >= 2, got a={a}, b={b}")
            if len(sizes) != a * b:
                raise LayoutError(f"two-way layout with a={a}, b={b} needs {a * b} cells, got {len(sizes)}")
            if len(set(sizes)) != 1:
                raise LayoutError(f"two-way layout must be balanced, got cell sizes {sizes}")
            if sizes[0] < 2:
                raise LayoutError(f"two-way layout needs cell size n >= 2, got {sizes[0]}")

    @classmethod
    def single(cls, n):
        return cls(LayoutKind.SINGLE, (n,))

    @classmethod
    def one_way(cls, sizes):
        return cls(LayoutKind.ONE_WAY, tuple(sizes))

    @classmethod
    def two_way(cls, a, b, n):
        return cls(LayoutKind.TWO_WAY, (n,) * (a * b), (a, b))

    @property
    def n_total(self) -> int:
        return sum(self.group_sizes)

    @property
    def n_groups(self) -> int:
        return len(self.group_sizes)

    @property
    def cell_size(self) -> int:
        return self.group_sizes[0]

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.group_sizes)[:-1]))

    def transposed(self) -> "Layout":
        a, b = self.levels
        return Layout.two_way(b, a, self.cell_size)


@dataclass(frozen=True)
class State:
    """Parameter point: one mean per group or cell plus the common sigma."""

    means: tuple
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "means", tuple(float(m) for m in np.ravel(self.means)))
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError(f"sigma must be positive and finite, got {self.sigma!r}")
        if not all(math.isfinite(m) for m in self.means):
            raise DomainError("state means must be finite")

    def check(self, layout: Layout):
        if len(self.means) != layout.n_groups:
            raise LayoutError(f"state has {len(self.means)} means but layout has {layout.n_groups} groups")

    def expanded(self, layout: Layout) -> np.ndarray:
        """Mean of every observation, in dataset order."""
        self.check(layout)
        return np.repeat(np.asarray(self.means), layout.group_sizes)


def as_values(x, layout: Layout) -> np.ndarray:
    """Flatten ``x`` into the canonical observation order and validate it."""
    if layout.kind is LayoutKind.ONE_WAY and not isinstance(x, np.ndarray):
        parts = list(x)
        if parts and all(np.ndim(p) == 1 for p in parts):
            sizes = tuple(len(p) for p in parts)
            if sizes != layout.group_sizes:
                raise LayoutError(f"group sizes {sizes} do not match layout {layout.group_sizes}")
            x = np.concatenate([np.asarray(p, dtype=float) for p in parts]) if parts else np.array([])
    values = np.asarray(x, dtype=float)
    if layout.kind is LayoutKind.TWO_WAY and values.ndim == 3:
        expected = (*layout.levels, layout.cell_size)
        if values.shape != expected:
            raise LayoutError(f"two-way data shape {values.shape} does not match {expected}")
    values = values.ravel()
    if values.size != layout.n_total:
        raise LayoutError(f"dataset has {values.size} observations, layout expects {layout.n_total}")
    if not np.all(np.isfinite(values)):
        raise DomainError("dataset contains NaN or infinite values")
    values = values.copy()
    values.setflags(write=False)
    return values


def check_kind(kind: TestKind, layout: Layout):
    if kind.layout_kind is not layout.kind:
        raise LayoutError(f"test {kind.value!r} needs a {kind.layout_kind.value} layout, got {layout.kind.value}")


# -- batch kernels: arrays of shape (..., N) ---------------------------------


def _cells(v, layout):
    a, b = layout.levels
    return v.reshape(v.shape[:-1] + (a, b, layout.cell_size))


def _group_means(v, layout):
    sizes = np.asarray(layout.group_sizes, dtype=float)
    return np.add.reduceat(v, layout.offsets, axis=-1) / sizes


def _one_way_residual_ss(v, layout):
    means = _group_means(v, layout)
    resid = v - np.repeat(means, layout.group_sizes, axis=-1)
    return np.sum(resid * resid, axis=-1), means


def _cell_residual_ss(cells):
    cell = cells.mean(axis=-1)
    resid = cells - cell[..., None]
    return np.sum(resid * resid, axis=(-3, -2, -1)), cell


def residual_ss(v, layout: Layout) -> np.ndarray:
    """Sum of squares about the fitted group (or cell) means, for a batch."""
    if layout.kind is LayoutKind.SINGLE:
        resid = v - v.mean(axis=-1, keepdims=True)
        return np.sum(resid * resid, axis=-1)
    if layout.kind is LayoutKind.ONE_WAY:
        return _one_way_residual_ss(v, layout)[0]
    return _cell_residual_ss(_cells(v, layout))[0]


def degrees_of_freedom(kind: TestKind, layout: Layout) -> tuple:
    check_kind(kind, layout)
    if kind is TestKind.MEAN_EQUALS_MU0:
        n = layout.n_total
        return 1, n - 1
    if kind is TestKind.ONE_WAY_EQUAL_MEANS:
        return layout.n_groups - 1, layout.n_total - layout.n_groups
    a, b = layout.levels
    resid = a * b * (layout.cell_size - 1)
    if kind is TestKind.TWO_WAY_MAIN_A:
        return a - 1, resid
    if kind is TestKind.TWO_WAY_MAIN_B:
        return b - 1, resid
    return (a - 1) * (b - 1), resid


def contrast_and_ss(kind: TestKind, v, layout: Layout, mu0: float = 0.0):
    """Squared weighted effect norm and residual SS for each dataset in ``v``.

    The statistic is ``(contrast / df1) / (ss / df2)``.
    """
    v = np.asarray(v, dtype=float)
    check_kind(kind, layout)
    if kind is TestKind.MEAN_EQUALS_MU0:
        n = layout.n_total
        mean = v.mean(axis=-1)
        resid = v - mean[..., None]
        return n * (mean - mu0) ** 2, np.sum(resid * resid, axis=-1)
    if kind is TestKind.ONE_WAY_EQUAL_MEANS:
        ss, means = _one_way_residual_ss(v, layout)
        sizes = np.asarray(layout.group_sizes, dtype=float)
        grand = (means * sizes).sum(axis=-1) / layout.n_total
        dev = means - grand[..., None]
        return np.sum(sizes * dev * dev, axis=-1), ss
    cells = _cells(v, layout)
    if kind is TestKind.TWO_WAY_MAIN_B:
        cells = np.swapaxes(cells, -3, -2)
    ss, cell = _cell_residual_ss(cells)
    n = layout.cell_size
    rows = cell.mean(axis=-1)
    grand = rows.mean(axis=-1)
    if kind is TestKind.TWO_WAY_INTERACTION:
        cols = cell.mean(axis=-2)
        inter = cell - rows[..., :, None] - cols[..., None, :] + grand[..., None, None]
        return n * np.sum(inter * inter, axis=(-2, -1)), ss
    dev = rows - grand[..., None]
    return cell.shape[-1] * n * np.sum(dev * dev, axis=-1), ss


def statistic_batch(kind: TestKind, v, layout: Layout, mu0: float = 0.0) -> np.ndarray:
    """F-form statistic for every dataset in ``v``; NaN where the residual SS is zero."""
    contrast, ss = contrast_and_ss(kind, v, layout, mu0)
    df1, df2 = degrees_of_freedom(kind, layout)
    with np.errstate(divide="ignore", invalid="ignore"):
        stat = (contrast / df1) / (ss / df2)
    return np.where(ss > 0, stat, np.nan)


# -- single-dataset operations ------------------------------------------------


@dataclass(frozen=True)
class SummaryStats:
    mu_bar: float
    ss_bar: float
    sigma_bar: float
    n_total: int
    group_means: np.ndarray = field(repr=False)
    row_means: Optional[np.ndarray] = field(default=None, repr=False)
    col_means: Optional[np.ndarray] = field(default=None, repr=False)


def summarize(x, layout: Layout) -> SummaryStats:
    v = as_values(x, layout)
    n = layout.n_total
    if layout.kind is LayoutKind.SINGLE:
        ss = float(residual_ss(v, layout))
        mu = float(v.mean())
        return SummaryStats(mu, ss, math.sqrt(ss / n), n, np.array([mu]))
    if layout.kind is LayoutKind.ONE_WAY:
        ss, means = _one_way_residual_ss(v, layout)
        grand = float(np.dot(means, layout.group_sizes) / n)
        return SummaryStats(grand, float(ss), math.sqrt(ss / n), n, means)
    ss, cell = _cell_residual_ss(_cells(v, layout))
    rows = cell.mean(axis=1)
    cols = cell.mean(axis=0)
    return SummaryStats(float(cell.mean()), float(ss), math.sqrt(ss / n), n, cell, rows, cols)


def estimator_apply(x, layout: Layout, kind: TestKind) -> np.ndarray:
    """Point in the quantity space estimated from ``x``.

    Interaction estimates are returned flattened row-major over ``(i, j)``.
    """
    check_kind(kind, layout)
    s = summarize(x, layout)
    if kind is TestKind.MEAN_EQUALS_MU0:
        return np.array([s.mu_bar])
    if kind is TestKind.ONE_WAY_EQUAL_MEANS:
        return s.group_means - s.mu_bar
    if kind is TestKind.TWO_WAY_MAIN_A:
        return s.row_means - s.mu_bar
    if kind is TestKind.TWO_WAY_MAIN_B:
        return s.col_means - s.mu_bar
    inter = s.group_means - s.row_means[:, None] - s.col_means[None, :] + s.mu_bar
    return inter.ravel()


def quantity(kind: TestKind, state: State, layout: Layout) -> np.ndarray:
    """Image of a state in the quantity space (the effects a hypothesis constrains)."""
    check_kind(kind, layout)
    state.check(layout)
    mu = np.asarray(state.means)
    if kind is TestKind.MEAN_EQUALS_MU0:
        return mu.copy()
    if kind is TestKind.ONE_WAY_EQUAL_MEANS:
        return mu - mu.mean()
    a, b = layout.levels
    cell = mu.reshape(a, b)
    grand = cell.mean()
    rows, cols = cell.mean(axis=1), cell.mean(axis=0)
    if kind is TestKind.TWO_WAY_MAIN_A:
        return rows - grand
    if kind is TestKind.TWO_WAY_MAIN_B:
        return cols - grand
    return (cell - rows[:, None] - cols[None, :] + grand).ravel()


def null_point(kind: TestKind, layout: Layout, mu0: float = 0.0) -> np.ndarray:
    """The single point of the null hypothesis in the quantity space."""
    check_kind(kind, layout)
    if kind is TestKind.MEAN_EQUALS_MU0:
        return np.array([float(mu0)])
    if kind is TestKind.ONE_WAY_EQUAL_MEANS:
        return np.zeros(layout.n_groups)
    a, b = layout.levels
    return np.zeros({TestKind.TWO_WAY_MAIN_A: a, TestKind.TWO_WAY_MAIN_B: b}.get(kind, a * b))


def satisfies_null(kind: TestKind, state: State, layout: Layout, mu0: float = 0.0, rtol: float = 1e-12) -> bool:
    effect = quantity(kind, state, layout) - null_point(kind, layout, mu0)
    scale = max(1.0, float(np.max(np.abs(state.means))))
    return bool(np.all(np.abs(effect) <= rtol * scale))


def theta_weights(kind: TestKind, layout: Layout) -> np.ndarray:
    """Per-coordinate weights of the quantity-space norm."""
    check_kind(kind, layout)
    if kind is TestKind.MEAN_EQUALS_MU0:
        return np.ones(1)
    if kind is TestKind.ONE_WAY_EQUAL_MEANS:
        return np.asarray(layout.group_sizes, dtype=float)
    a, b = layout.levels
    n = layout.cell_size
    if kind is TestKind.TWO_WAY_MAIN_A:
        return np.full(a, float(b * n))
    if kind is TestKind.TWO_WAY_MAIN_B:
        return np.full(b, float(a * n))
    return np.full(a * b, float(n))


def theta_norm(kind: TestKind, layout: Layout, delta) -> float:
    delta = np.ravel(np.asarray(delta, dtype=float))
    w = theta_weights(kind, layout)
    if delta.shape != w.shape:
        raise LayoutError(f"quantity vector has {delta.size} coordinates, expected {w.size}")
    return math.sqrt(float(np.sum(w * delta * delta)))


def semi_distance(kind: TestKind, x, layout: Layout, theta1, theta2) -> float:
    """Data-dependent distance ``||theta1 - theta2|| / sqrt(SS(x))``."""
    ss = summarize(x, layout).ss_bar
    if ss <= 0:
        raise DegenerateDataError("residual sum of squares is zero; semi-distance undefined")
    delta = np.ravel(np.asarray(theta1, dtype=float)) - np.ravel(np.asarray(theta2, dtype=float))
    return theta_norm(kind, layout, delta) / math.sqrt(ss)


def _statistic_scale(kind, layout):
    # F = d^2 * df2 / df1 * scale, where d is the semi-distance to the null point.
    return layout.n_total if kind is TestKind.MEAN_EQUALS_MU0 else 1


@dataclass(frozen=True)
class EtaThreshold:
    value: float
    alpha: float
    alpha_point: AlphaPoint
    df: tuple


def eta_threshold(kind: TestKind, layout: Layout, alpha: float) -> EtaThreshold:
    """Smallest radius whose complementary ball carries mass at most alpha under the null."""
    df1, df2 = degrees_of_freedom(kind, layout)
    point = alpha_point(FDist(df1, df2), alpha)
    eta_sq = point.value * df1 / (df2 * _statistic_scale(kind, layout))
    return EtaThreshold(math.sqrt(eta_sq), alpha, point, (df1, df2))


@dataclass(frozen=True)
class RejectionRegion:
    """Datasets whose estimate lies at least eta from the null point.

    Membership is decided by comparing the F-form statistic with the
    alpha-point; :meth:`contains_estimate` is the equivalent test carried out
    in the quantity space.
    """

    kind: TestKind
    layout: Layout
    alpha: float
    alpha_point: float
    eta: float
    mu0: float = 0.0

    def statistic(self, x) -> float:
        v = as_values(x, self.layout)
        stat = float(statistic_batch(self.kind, v[None, :], self.layout, self.mu0)[0])
        if math.isnan(stat):
            raise DegenerateDataError("residual sum of squares is zero; statistic undefined")
        return stat

    def contains(self, x) -> bool:
        return self.statistic(x) >= self.alpha_point

    __contains__ = contains

    def contains_estimate(self, x) -> bool:
        theta = estimator_apply(x, self.layout, self.kind)
        h0 = null_point(self.kind, self.layout, self.mu0)
        return semi_distance(self.kind, x, self.layout, theta, h0) >= self.eta


def rejection_region(kind: TestKind, layout: Layout, alpha: float, mu0: Optional[float] = None) -> RejectionRegion:
    if kind is TestKind.MEAN_EQUALS_MU0:
        if mu0 is None or not math.isfinite(mu0):
            raise HypothesisMismatch("the mean test needs a finite mu0")
    elif mu0 is not None:
        raise HypothesisMismatch(f"mu0 only applies to the mean test, not {kind.value!r}")
    eta = eta_threshold(kind, layout, alpha)
    return RejectionRegion(kind, layout, alpha, eta.alpha_point.value, eta.value, float(mu0 or 0.0))


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float

    def __contains__(self, value) -> bool:
        return self.lower < value < self.upper


def interval_bounds(v, alpha: float):
    """Lower and upper interval ends for each single-sample dataset in ``v`` (shape ``(..., n)``)."""
    v = np.asarray(v, dtype=float)
    n = v.shape[-1]
    if n < 2:
        raise LayoutError("confidence interval needs at least two observations")
    mean = v.mean(axis=-1)
    resid = v - mean[..., None]
    sigma_bar = np.sqrt(np.sum(resid * resid, axis=-1) / n)
    half = sigma_bar * math.sqrt(alpha_point(FDist(1, n - 1), alpha).value / (n - 1))
    return mean - half, mean + half


def confidence_interval(x, alpha: float) -> ConfidenceInterval:
    """Level ``1 - alpha`` interval for the mean of a single sample."""
    v = as_values(x, Layout.single(np.size(x)))
    if summarize(v, Layout.single(v.size)).ss_bar <= 0:
        raise DegenerateDataError("residual sum of squares is zero; interval undefined")
    lower, upper = interval_bounds(v[None, :], alpha)
    return ConfidenceInterval(float(lower[0]), float(upper[0]), 1.0 - alpha)
