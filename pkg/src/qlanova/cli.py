"""Command-line front end.

    anova run --test oneway --alpha 0.05 --input data.csv --format json
    anova verify --test oneway --sizes 5,5,5 --seed 42 --reps 100000

CSV input is long format with a header: ``value`` alone (single sample),
``group,value`` (one-way) or ``a,b,value`` (two-way). Exit status of ``run``
is 0 when the null hypothesis is kept, 1 when rejected and 2 on any error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import oracle
from .anova import TestReport, TestSpec, run_test
from .errors import AnovaError, IngestError, LayoutError
from .measurement import Layout, State, TestKind

FORMAT_ENV = "ANOVA_FORMAT"
EXIT_KEEP, EXIT_REJECT, EXIT_ERROR = 0, 1, 2
SIG_DIGITS = 12


@dataclass(frozen=True)
class InputTable:
    """Observations in long format; ``factors`` names the factor columns."""

    factors: tuple
    rows: tuple  # (factor_a or None, factor_b or None, value)

    def levels(self) -> tuple:
        return tuple(sorted({row[i] for row in self.rows}) for i in range(len(self.factors)))

    def layout(self) -> Layout:
        groups = self._groups()
        if not self.factors:
            return Layout.single(len(self.rows))
        if len(self.factors) == 1:
            return Layout.one_way([len(groups[(lvl, None)]) for lvl in self.levels()[0]])
        a_levels, b_levels = self.levels()
        sizes = {(i, j): len(groups.get((i, j), ())) for i in a_levels for j in b_levels}
        if len(set(sizes.values())) != 1:
            detail = ", ".join(f"({i},{j})={m}" for (i, j), m in sizes.items())
            raise LayoutError(f"two-way table is not balanced: {detail}")
        return Layout.two_way(len(a_levels), len(b_levels), next(iter(sizes.values())))

    def values(self) -> np.ndarray:
        """Observations in canonical order, each group sorted so row order never matters."""
        groups = self._groups()
        if not self.factors:
            keys = [(None, None)]
        elif len(self.factors) == 1:
            keys = [(lvl, None) for lvl in self.levels()[0]]
        else:
            a_levels, b_levels = self.levels()
            keys = [(i, j) for i in a_levels for j in b_levels]
        return np.concatenate([np.sort(np.asarray(groups[k], dtype=float)) for k in keys])

    def _groups(self):
        groups = defaultdict(list)
        for fa, fb, value in self.rows:
            groups[(fa, fb)].append(value)
        return groups


def ingest(path) -> tuple:
    """Read a CSV file; returns ``(InputTable, Layout)``."""
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot open {path}: {exc.strerror}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError("file is empty", line=1) from None
        except csv.Error as exc:
            raise IngestError(str(exc), line=1) from None
        header = [h.strip() for h in header]
        if "value" not in header:
            raise IngestError("header must contain a 'value' column", line=1)
        factors = tuple(h for h in header if h != "value")
        if len(factors) > 2:
            raise IngestError(f"at most two factor columns are supported, got {list(factors)}", line=1)
        if len(set(header)) != len(header) or any(not h for h in header):
            raise IngestError("header has empty or repeated column names", line=1)
        value_col = header.index("value")
        factor_cols = [header.index(f) for f in factors]

        rows = []
        try:
            for record in reader:
                line = reader.line_num
                if not record or all(not cell.strip() for cell in record):
                    continue
                if len(record) != len(header):
                    raise IngestError(f"expected {len(header)} fields, got {len(record)}", line=line)
                raw = record[value_col].strip()
                try:
                    value = float(raw)
                except ValueError:
                    raise IngestError(f"non-numeric value {raw!r}", line=line) from None
                if not math.isfinite(value):
                    raise IngestError(f"non-finite value {raw!r}", line=line)
                labels = [record[c].strip() for c in factor_cols]
                if any(not label for label in labels):
                    raise IngestError("empty factor label", line=line)
                labels += [None] * (2 - len(labels))
                rows.append((labels[0], labels[1], value))
        except csv.Error as exc:
            raise IngestError(str(exc), line=reader.line_num) from None

    if not rows:
        raise IngestError("no observations")
    table = InputTable(factors, tuple(rows))
    return table, table.layout()


def _num(value: float) -> float:
    return float(f"{value:.{SIG_DIGITS}g}")


def report_dict(report: TestReport, table: Optional[InputTable] = None) -> dict:
    out = {
        "test": report.kind.value,
        "alpha": _num(report.alpha),
        "statistic": _num(report.statistic),
        "df": [int(report.df[0]), int(report.df[1])],
        "alpha_point": _num(report.alpha_point),
        "reject": bool(report.reject),
        "eta": _num(report.eta),
        "ss_table": [{"source": r.source, "ss": _num(r.ss), "df": int(r.df)} for r in report.ss_table],
        "p_value": _num(report.p_value),
    }
    if report.confidence_interval is not None:
        ci = report.confidence_interval
        out["ci"] = {"lower": _num(ci.lower), "upper": _num(ci.upper), "level": _num(ci.level)}
    if table is not None and table.factors:
        out["levels"] = {name: list(lv) for name, lv in zip(table.factors, table.levels())}
    return out


def format_text(report: dict) -> str:
    d1, d2 = report["df"]
    lines = [
        f"test          {report['test']}",
        f"alpha         {report['alpha']!r}",
        f"statistic     {report['statistic']!r}  ~ F({d1}, {d2}) under the null",
        f"alpha_point   {report['alpha_point']!r}",
        f"eta           {report['eta']!r}",
        f"p_value       {report['p_value']!r}",
        f"reject        {'yes' if report['reject'] else 'no'}",
    ]
    if "ci" in report:
        ci = report["ci"]
        lines.append(f"ci            ({ci['lower']!r}, {ci['upper']!r})  level {ci['level']!r}")
    for name, lv in report.get("levels", {}).items():
        lines.append(f"levels[{name}]  {', '.join(lv)}")
    lines.append("")
    lines.append(f"{'source':<12} {'df':>6}  ss")
    for row in report["ss_table"]:
        lines.append(f"{row['source']:<12} {row['df']:>6}  {row['ss']!r}")
    return "\n".join(lines)


def _layout_for(kind: TestKind, args) -> Layout:
    if kind is TestKind.MEAN_EQUALS_MU0:
        return Layout.single(args.n)
    if kind is TestKind.ONE_WAY_EQUAL_MEANS:
        return Layout.one_way(args.sizes)
    a, b = args.levels
    return Layout.two_way(a, b, args.cell_size)


def verify_dict(plan: oracle.SimPlan, result: oracle.SimResult) -> dict:
    law = result.target_law
    return {
        "test": plan.statistic.value,
        "alpha": _num(plan.alpha),
        "df": [int(law.d1), int(law.d2)],
        "alpha_point": _num(result.alpha_point),
        "replicates": result.replicates,
        "seed": result.seed,
        "rng": oracle.RNG_NAME,
        "group_sizes": list(plan.layout.group_sizes),
        "sigma": _num(plan.state.sigma),
        "empirical_tail": _num(result.empirical_tail),
        "ks_distance": _num(result.ks_distance),
    }


def _int_list(text):
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _pair(text):
    values = _int_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected two integers a,b, got {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anova", description="ANOVA and mean tests with Monte-Carlo verification.")
    sub = parser.add_subparsers(dest="command", required=True)
    tests = [k.value for k in TestKind]

    run = sub.add_parser("run", help="run a test on a CSV dataset")
    run.add_argument("--test", required=True, choices=tests)
    run.add_argument("--alpha", type=float, default=0.05)
    run.add_argument("--mu0", type=float, default=None, help="hypothesised mean (t test only)")
    run.add_argument("--input", required=True)
    run.add_argument("--format", choices=["text", "json"], default=None)

    ver = sub.add_parser("verify", help="simulate the statistic under the null and compare with its F law")
    ver.add_argument("--test", required=True, choices=tests)
    ver.add_argument("--alpha", type=float, default=0.05)
    ver.add_argument("--seed", type=int, default=42)
    ver.add_argument("--reps", type=int, default=100_000)
    ver.add_argument("--sigma", type=float, default=1.0)
    ver.add_argument("--n", type=int, default=5, help="sample size (t test)")
    ver.add_argument("--sizes", type=_int_list, default=[4, 5, 6], help="group sizes (one-way)")
    ver.add_argument("--levels", type=_pair, default=[2, 3], help="factor levels a,b (two-way)")
    ver.add_argument("--cell-size", type=int, default=4, help="observations per cell (two-way)")
    ver.add_argument("--workers", type=int, default=1)
    ver.add_argument("--format", choices=["text", "json"], default=None)
    return parser


def _resolve_format(explicit):
    if explicit is not None:
        return explicit
    env = os.environ.get(FORMAT_ENV, "text").strip().lower()
    return env if env in ("text", "json") else "text"


def _cmd_run(args, fmt) -> int:
    kind = TestKind(args.test)
    table, layout = ingest(args.input)
    spec = TestSpec(kind, layout, args.alpha, args.mu0)
    report = report_dict(run_test(spec, table.values()), table)
    print(json.dumps(report, indent=2) if fmt == "json" else format_text(report))
    return EXIT_REJECT if report["reject"] else EXIT_KEEP


def _cmd_verify(args, fmt) -> int:
    kind = TestKind(args.test)
    layout = _layout_for(kind, args)
    state = State(np.zeros(layout.n_groups), args.sigma)
    mu0 = 0.0 if kind is TestKind.MEAN_EQUALS_MU0 else None
    plan = oracle.SimPlan(state, layout, args.reps, args.seed, kind, args.alpha, mu0, workers=args.workers)
    out = verify_dict(plan, oracle.simulate_statistic(plan))
    if fmt == "json":
        print(json.dumps(out, indent=2))
    else:
        width = max(len(k) for k in out)
        print("\n".join(f"{k:<{width}}  {v}" for k, v in out.items()))
    return EXIT_KEEP


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = _resolve_format(args.format)
    try:
        if args.command == "run":
            return _cmd_run(args, fmt)
        return _cmd_verify(args, fmt)
    except AnovaError as exc:
        if fmt == "json":
            print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        else:
            print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
