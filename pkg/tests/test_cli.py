import json
import subprocess
import sys

import numpy as np
import pytest

from qlanova.cli import ingest, main
from qlanova.errors import IngestError, LayoutError
from qlanova.measurement import LayoutKind


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(c) for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def oneway_csv(tmp_path):
    rows = [("b", 2.5), ("a", 1.0), ("c", 4.0), ("a", 1.7), ("b", 3.1), ("c", 5.2), ("a", 0.4), ("b", 2.2), ("c", 4.4)]
    return write_csv(tmp_path / "oneway.csv", ["group", "value"], rows)


@pytest.fixture
def twoway_csv(tmp_path):
    rng = np.random.default_rng(0)
    rows = [(i, j, round(float(v), 6)) for i in ("hi", "lo") for j in ("x", "y") for v in rng.normal(size=3)]
    return write_csv(tmp_path / "twoway.csv", ["a", "b", "value"], rows)


def run_json(capsys, *argv):
    code = main(list(argv) + ["--format", "json"])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


class TestIngest:
    def test_one_way(self, oneway_csv):
        table, layout = ingest(oneway_csv)
        assert layout.kind is LayoutKind.ONE_WAY and layout.n_groups == 3
        assert table.levels() == (["a", "b", "c"],)
        np.testing.assert_array_equal(table.values()[:3], [0.4, 1.0, 1.7])

    def test_two_way(self, twoway_csv):
        _, layout = ingest(twoway_csv)
        assert layout.kind is LayoutKind.TWO_WAY
        assert layout.levels == (2, 2) and layout.cell_size == 3

    def test_single(self, tmp_path):
        _, layout = ingest(write_csv(tmp_path / "s.csv", ["value"], [(1,), (2,), (3,)]))
        assert layout.kind is LayoutKind.SINGLE and layout.n_total == 3

    def test_unbalanced(self, tmp_path):
        rows = [(i, j, 1.0) for i in "pq" for j in "uv" for _ in range(3)][:-1]
        with pytest.raises(LayoutError, match="balanced"):
            ingest(write_csv(tmp_path / "u.csv", ["a", "b", "value"], rows))

    def test_non_numeric_reports_line(self, tmp_path):
        path = write_csv(tmp_path / "bad.csv", ["group", "value"], [("a", 1), ("a", "x1"), ("b", 2)])
        with pytest.raises(IngestError, match="line 3") as info:
            ingest(path)
        assert info.value.line == 3

    def test_field_count(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("group,value\na,1\nb,2,3\n")
        with pytest.raises(IngestError, match="line 3"):
            ingest(path)

    @pytest.mark.parametrize(
        "content", ["", "group,score\na,1\n", "group,value\n", "group,value\n,1\n", "value\ninf\n"]
    )
    def test_rejected_files(self, tmp_path, content):
        path = tmp_path / "f.csv"
        path.write_text(content)
        with pytest.raises(IngestError):
            ingest(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestError):
            ingest(tmp_path / "nope.csv")


class TestRun:
    def test_t_not_rejected(self, tmp_path, capsys):
        path = write_csv(tmp_path / "t.csv", ["value"], [(1,), (2,), (3,)])
        code, report = run_json(capsys, "run", "--test", "t", "--mu0", "2", "--input", str(path))
        assert code == 0 and report["reject"] is False
        assert report["statistic"] == 0.0

    def test_t_rejected(self, tmp_path, capsys):
        path = write_csv(tmp_path / "t.csv", ["value"], [(1,), (2,), (3,)])
        code, report = run_json(capsys, "run", "--test", "t", "--mu0", "100", "--alpha", "0.05", "--input", str(path))
        assert code == 1 and report["reject"] is True
        assert report["statistic"] == 28812.0
        assert report["df"] == [1, 2]
        assert set(report["ci"]) == {"lower", "upper", "level"}

    def test_schema(self, oneway_csv, capsys):
        code, report = run_json(capsys, "run", "--test", "oneway", "--input", str(oneway_csv))
        assert code in (0, 1)
        for key in ("test", "alpha", "statistic", "df", "alpha_point", "reject", "eta", "ss_table", "p_value"):
            assert key in report
        assert "ci" not in report
        assert report["levels"] == {"group": ["a", "b", "c"]}
        assert (report["statistic"] >= report["alpha_point"]) == report["reject"]

    @pytest.mark.parametrize("test", ["twoway-a", "twoway-b", "interaction"])
    def test_two_way_tests(self, twoway_csv, capsys, test):
        code, report = run_json(capsys, "run", "--test", test, "--input", str(twoway_csv))
        assert code == int(report["reject"])
        assert [row["source"] for row in report["ss_table"]] == ["factor_a", "factor_b", "interaction", "residual", "total"]

    def test_row_order_irrelevant(self, twoway_csv, tmp_path, capsys):
        lines = twoway_csv.read_text().splitlines()
        shuffled = [lines[0]] + [lines[i] for i in np.random.default_rng(9).permutation(range(1, len(lines)))]
        other = tmp_path / "shuffled.csv"
        other.write_text("\n".join(shuffled) + "\n")
        _, first = run_json(capsys, "run", "--test", "interaction", "--input", str(twoway_csv))
        _, second = run_json(capsys, "run", "--test", "interaction", "--input", str(other))
        assert first == second

    def test_text_and_json_agree(self, oneway_csv, capsys):
        _, report = run_json(capsys, "run", "--test", "oneway", "--input", str(oneway_csv))
        main(["run", "--test", "oneway", "--input", str(oneway_csv), "--format", "text"])
        text = capsys.readouterr().out
        for key in ("statistic", "alpha_point", "eta", "p_value"):
            assert repr(report[key]) in text
        for row in report["ss_table"]:
            assert repr(row["ss"]) in text

    def test_layout_mismatch_exit_2(self, oneway_csv, capsys):
        code = main(["run", "--test", "interaction", "--input", str(oneway_csv), "--format", "json"])
        err = json.loads(capsys.readouterr().err)
        assert code == 2 and err["error"] == "layout"

    def test_degenerate_exit_2(self, tmp_path, capsys):
        path = write_csv(tmp_path / "d.csv", ["group", "value"], [("a", 1), ("a", 1), ("b", 2), ("b", 2)])
        assert main(["run", "--test", "oneway", "--input", str(path)]) == 2
        assert "error[degenerate]" in capsys.readouterr().err

    def test_env_default_does_not_override_flag(self, oneway_csv, capsys, monkeypatch):
        monkeypatch.setenv("ANOVA_FORMAT", "json")
        main(["run", "--test", "oneway", "--input", str(oneway_csv)])
        json.loads(capsys.readouterr().out)
        main(["run", "--test", "oneway", "--input", str(oneway_csv), "--format", "text"])
        assert capsys.readouterr().out.startswith("test")

    def test_byte_identical_reruns(self, twoway_csv):
        cmd = [sys.executable, "-m", "qlanova", "run", "--test", "twoway-a", "--input", str(twoway_csv), "--format", "json"]
        first = subprocess.run(cmd, capture_output=True, check=False)
        second = subprocess.run(cmd, capture_output=True, check=False)
        assert first.returncode in (0, 1)
        assert first.stdout == second.stdout and first.stdout


class TestVerify:
    def test_oneway_acceptance_run(self, capsys):
        code, report = run_json(capsys, "verify", "--test", "oneway", "--sizes", "5,5,5", "--seed", "42", "--reps", "100000")
        assert code == 0
        assert 0.047 <= report["empirical_tail"] <= 0.053
        assert report["df"] == [2, 12] and report["replicates"] == 100000

    def test_deterministic(self, capsys):
        argv = ["verify", "--test", "interaction", "--seed", "3", "--reps", "4000", "--format", "json"]
        main(argv)
        first = capsys.readouterr().out
        main(argv + ["--workers", "3"])
        assert capsys.readouterr().out == first

    def test_bad_layout(self, capsys):
        assert main(["verify", "--test", "twoway-a", "--levels", "1,3", "--reps", "100"]) == 2
