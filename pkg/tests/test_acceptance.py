"""Exit criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest
from conftest import record_criterion

from qlanova.anova import TestSpec, f_statistic, run_test, ss_table
from qlanova.distributions import ChiSquared, FDist, StudentT, alpha_point, upper_tail
from qlanova.measurement import (
    Layout,
    State,
    TestKind,
    confidence_interval,
    estimator_apply,
    interval_bounds,
    rejection_region,
)
from qlanova.oracle import SimPlan, mean_image_check, quadrature_tail, simulate_statistic

REPS = 100_000
ALPHA = 0.05
TAIL_TOL = 0.003
KS_TOL = 0.01
RUNTIME_BUDGET = 60.0

TWO_WAY = Layout.two_way(2, 3, 4)
ROW = np.array([-1.0, 2.0])
COL = np.array([0.5, -3.0, 1.0])


def null_plans():
    additive = (ROW[:, None] + COL[None, :]).ravel()
    return {
        "t(n=5)": SimPlan(State([1.5], 2.0), Layout.single(5), REPS, 101, TestKind.MEAN_EQUALS_MU0, ALPHA, mu0=1.5),
        "oneway(4,5,6)": SimPlan(State([3.0, 3.0, 3.0], 1.0), Layout.one_way([4, 5, 6]), REPS, 102, TestKind.ONE_WAY_EQUAL_MEANS, ALPHA),
        "twoway-a(2,3,4)": SimPlan(State(np.tile(COL, 2), 1.0), TWO_WAY, REPS, 103, TestKind.TWO_WAY_MAIN_A, ALPHA),
        "twoway-b(2,3,4)": SimPlan(State(np.repeat(ROW, 3), 1.0), TWO_WAY, REPS, 104, TestKind.TWO_WAY_MAIN_B, ALPHA),
        "interaction(2,3,4)": SimPlan(State(additive, 0.7), TWO_WAY, REPS, 105, TestKind.TWO_WAY_INTERACTION, ALPHA),
    }


@pytest.fixture(scope="module")
def null_runs():
    start = time.perf_counter()
    results = {name: simulate_statistic(plan) for name, plan in null_plans().items()}
    return results, time.perf_counter() - start


def test_criterion_1_type_one_error(null_runs):
    results, elapsed = null_runs
    misses = {name: r.empirical_tail for name, r in results.items() if abs(r.empirical_tail - ALPHA) > TAIL_TOL}
    ok = not misses and elapsed < RUNTIME_BUDGET
    rates = ", ".join(f"{name}={r.empirical_tail:.4f}" for name, r in results.items())
    record_criterion(1, "type-I error 0.05 +/- 0.003", ok, f"{rates}; {elapsed:.1f}s")
    assert not misses
    assert elapsed < RUNTIME_BUDGET


def test_criterion_2_null_law(null_runs):
    results, _ = null_runs
    expected = {
        "t(n=5)": FDist(1, 4),
        "oneway(4,5,6)": FDist(2, 12),
        "twoway-a(2,3,4)": FDist(1, 18),
        "twoway-b(2,3,4)": FDist(2, 18),
        "interaction(2,3,4)": FDist(2, 18),
    }
    laws_ok = all(results[name].target_law == law for name, law in expected.items())
    worst = max(r.ks_distance for r in results.values())
    detail = ", ".join(f"{name} {r.target_law.label()} KS={r.ks_distance:.4f}" for name, r in results.items())
    record_criterion(2, "KS to claimed F law < 0.01", laws_ok and worst < KS_TOL, detail)
    assert laws_ok
    assert worst < KS_TOL


def test_criterion_3_image_observables():
    checks = {(n, mu, sigma): mean_image_check(n, mu, sigma, seed=300 + n) for n, mu, sigma in [(5, 0.0, 1.0), (10, 3.0, 2.0)]}
    worst = max(max(c.mean.ks_distance, c.scale.ks_distance) for c in checks.values())
    laws_ok = all(
        c.mean.target_law.sd == pytest.approx(sigma / math.sqrt(n)) and c.scale.target_law == ChiSquared(n - 1)
        for (n, _, sigma), c in checks.items()
    )
    detail = ", ".join(f"{key}: mean KS={c.mean.ks_distance:.4f} scale KS={c.scale.ks_distance:.4f}" for key, c in checks.items())
    record_criterion(3, "image of mean and spread, KS < 0.01", laws_ok and worst < KS_TOL, detail)
    assert laws_ok
    assert worst < KS_TOL


def test_criterion_4_quantiles():
    grid = [(d1, d2) for d1 in (1, 2, 3, 5, 10) for d2 in (1, 4, 12, 60)]
    assert len(grid) == 20
    round_trip = max(
        abs(upper_tail(FDist(d1, d2), alpha_point(FDist(d1, d2), a).value) - a)
        for d1, d2 in grid
        for a in (0.01, 0.05, 0.1, 0.5)
    )
    closed = max(abs(alpha_point(FDist(2, 2), a).value - (1 / a - 1)) for a in (0.01, 0.05, 0.1, 0.25, 0.5))
    bridge = max(
        abs(alpha_point(StudentT(k), ALPHA / 2).value ** 2 - alpha_point(FDist(1, k), ALPHA).value) for k in (3, 10, 30)
    )
    ok = round_trip <= 1e-9 and closed <= 1e-10 and bridge <= 1e-8
    record_criterion(4, "quantile correctness", ok, f"round-trip {round_trip:.1e}, F(2,2) {closed:.1e}, t^2=F {bridge:.1e}")
    assert round_trip <= 1e-9
    assert closed <= 1e-10
    assert bridge <= 1e-8


def test_criterion_5_algebraic_identities():
    rng = np.random.default_rng(500)
    one_way = Layout.one_way([3, 6, 4, 5])
    identity_err = sum_zero = margins = 0.0
    for _ in range(1000):
        x = rng.normal(rng.normal(scale=5), rng.uniform(0.1, 10), size=one_way.n_total)
        between, within, total = (r.ss for r in ss_table(x, one_way))
        identity_err = max(identity_err, abs(between + within - total) / total)
        e = estimator_apply(x, one_way, TestKind.ONE_WAY_EQUAL_MEANS)
        sum_zero = max(sum_zero, abs(np.dot(one_way.group_sizes, e)) / np.max(np.abs(x)))
        y = rng.normal(size=TWO_WAY.n_total) * 4
        inter = estimator_apply(y, TWO_WAY, TestKind.TWO_WAY_INTERACTION).reshape(2, 3)
        margins = max(margins, np.max(np.abs(inter.sum(axis=0))), np.max(np.abs(inter.sum(axis=1))))

    t_err = 0.0
    for _ in range(100):
        n1, n2 = (int(v) for v in rng.integers(2, 15, size=2))
        g1, g2 = rng.normal(size=n1), rng.normal(0.3, size=n2)
        stat, _ = f_statistic(TestKind.ONE_WAY_EQUAL_MEANS, [g1, g2], Layout.one_way([n1, n2]))
        pooled = (np.sum((g1 - g1.mean()) ** 2) + np.sum((g2 - g2.mean()) ** 2)) / (n1 + n2 - 2)
        t = (g1.mean() - g2.mean()) / math.sqrt(pooled * (1 / n1 + 1 / n2))
        t_err = max(t_err, abs(stat - t * t) / max(t * t, 1e-300))

    # "exactly zero" is checked at floating-point resolution
    exact_tol = 1e-12
    ok = identity_err <= 1e-10 and sum_zero <= exact_tol and margins <= exact_tol and t_err <= 1e-10
    record_criterion(
        5,
        "algebraic identities",
        ok,
        f"SS identity {identity_err:.1e}, weighted sum {sum_zero:.1e}, margins {margins:.1e}, t^2 {t_err:.1e}",
    )
    assert identity_err <= 1e-10
    assert sum_zero <= exact_tol and margins <= exact_tol
    assert t_err <= 1e-10


def test_criterion_6_duality_and_coverage():
    rng = np.random.default_rng(600)
    disagreements = 0
    for _ in range(500):
        n = int(rng.integers(2, 25))
        x = rng.normal(rng.normal(scale=3), rng.uniform(0.2, 4), size=n)
        alpha = float(rng.uniform(0.005, 0.5))
        mu0 = float(x.mean() + rng.normal(scale=3 * x.std() / math.sqrt(n)))
        reject = run_test(TestSpec(TestKind.MEAN_EQUALS_MU0, Layout.single(n), alpha, mu0), x).reject
        inside = mu0 in confidence_interval(x, alpha)
        disagreements += reject == inside
        disagreements += rejection_region(TestKind.MEAN_EQUALS_MU0, Layout.single(n), alpha, mu0).contains(x) != reject

    mu0, sigma, n = 2.0, 1.5, 6
    draws = mu0 + sigma * np.random.Generator(np.random.Philox(601)).standard_normal((REPS, n))
    lower, upper = interval_bounds(draws, ALPHA)
    coverage = float(np.mean((lower < mu0) & (mu0 < upper)))
    ok = disagreements == 0 and abs(coverage - (1 - ALPHA)) <= TAIL_TOL
    record_criterion(6, "interval/test duality and coverage", ok, f"{disagreements} disagreements, coverage {coverage:.4f}")
    assert disagreements == 0
    assert abs(coverage - (1 - ALPHA)) <= TAIL_TOL


def test_criterion_7_cross_oracle():
    families = {
        "F(3,8)": (FDist(3, 8), np.linspace(0.02, 12, 50)),
        "chi2(4)": (ChiSquared(4), np.linspace(0.05, 20, 50)),
        "t(6)": (StudentT(6), np.linspace(-6, 6, 50)),
    }
    gaps = {name: max(abs(quadrature_tail(law, x) - upper_tail(law, x)) for x in grid) for name, (law, grid) in families.items()}
    ok = all(g < 1e-8 for g in gaps.values())
    record_criterion(7, "quadrature vs incomplete-function tails", ok, ", ".join(f"{k} {v:.1e}" for k, v in gaps.items()))
    assert ok


def test_criterion_8_determinism(tmp_path):
    data = tmp_path / "data.csv"
    rng = np.random.default_rng(800)
    data.write_text("a,b,value\n" + "".join(f"{i},{j},{v:.6f}\n" for i in "pq" for j in "uvw" for v in rng.normal(size=4)))
    commands = [
        ["run", "--test", "interaction", "--input", str(data), "--format", "json"],
        ["verify", "--test", "oneway", "--seed", "42", "--reps", "20000", "--format", "json"],
    ]
    identical = True
    for argv in commands:
        outs = [subprocess.run([sys.executable, "-m", "qlanova", *argv], capture_output=True, check=False) for _ in range(2)]
        identical &= outs[0].returncode in (0, 1) and bool(outs[0].stdout) and outs[0].stdout == outs[1].stdout
    plan = null_plans()["interaction(2,3,4)"]
    identical &= simulate_statistic(plan) == simulate_statistic(plan)
    record_criterion(8, "byte-identical reruns", identical, "run + verify JSON and SimResult compared")
    assert identical
