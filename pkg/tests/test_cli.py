import csv
import io
import json

import pytest

from groupineq.cli import INTERVAL_FIELDS, main

from conftest import DATA


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestTrueValues:
    def test_exponential_row(self, capsys):
        code, out, _ = run(capsys, "true-values", "--dist", "exponential:1")
        assert code == 0
        assert out.splitlines()[1].endswith("0.500,0.423,0.215,0.702")

    def test_repeatable(self, capsys):
        _, out, _ = run(capsys, "true-values", "--dist", "exp", "--dist", "paretoii:1,2")
        assert [r["dist"] for r in rows(out)] == ["exponential:1", "paretoii:1,2"]

    def test_bad_family_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["true-values", "--dist", "cauchy"])
        assert exc.value.code == 2


class TestUsage:
    def test_help_lists_flags(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["interval", "--help"])
        assert exc.value.code == 0
        text = capsys.readouterr().out
        for flag in ("--input", "--model", "--method", "--ci", "--B", "--seed", "--level"):
            assert flag in text

    def test_percentile_table_needs_total(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["fit", "--input", str(DATA / "wa1997.csv"), "--format",
                  "percentile-table", "--method", "gld"])
        assert exc.value.code == 2
        assert "--total-n" in capsys.readouterr().err

    def test_li_needs_means(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["fit", "--input", str(DATA / "wa1997.csv"), "--format",
                  "percentile-table", "--total-n", "5000", "--method", "li"])
        assert exc.value.code == 2

    def test_bad_data_exits_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("lower,upper,count\n0,10,5\n20,30,5\n")
        code, _, err = run(capsys, "fit", "--input", str(bad), "--method", "gld")
        assert code == 1 and err.startswith("error [read:")

    def test_missing_file_exits_1(self, tmp_path, capsys):
        code, _, err = run(capsys, "estimate", "--input", str(tmp_path / "nope.csv"),
                           "--method", "li")
        assert code == 1 and "read" in err


class TestPipeline:
    def test_fit_then_interval(self, tmp_path, capsys):
        model = tmp_path / "m.json"
        code, _, _ = run(capsys, "fit", "--input", str(DATA / "table5.csv"),
                         "--method", "li", "--out", str(model))
        assert code == 0
        doc = json.loads(model.read_text())
        assert doc["method"] == "li" and doc["n"] == 5440
        args = ["--measures", "gini,qri", "--B", "60", "--seed", "5"]
        _, a, _ = run(capsys, "interval", "--model", str(model), *args)
        _, b, _ = run(capsys, "interval", "--input", str(DATA / "table5.csv"),
                      "--method", "li", *args)
        assert a == b
        got = rows(a)
        assert list(got[0]) == list(INTERVAL_FIELDS)
        assert {(r["measure"], r["method"]) for r in got} == {
            ("gini", "bootstrap"), ("qri", "bootstrap"), ("qri", "wald")}
        wald = next(r for r in got if r["method"] == "wald")
        assert float(wald["lower"]) == pytest.approx(0.502, abs=0.01)
        assert wald["B"] == "" and wald["seed"] == ""

    def test_seed_is_echoed(self, capsys):
        code, _, err = run(capsys, "interval", "--input", str(DATA / "table5.csv"),
                           "--method", "li", "--B", "10", "--measures", "gini")
        assert code == 0 and err.startswith("seed: ")

    def test_estimate(self, capsys):
        _, out, _ = run(capsys, "estimate", "--input", str(DATA / "table5.csv"),
                        "--method", "li")
        pts = {r["measure"]: float(r["point"]) for r in rows(out)}
        assert pts["gini"] == pytest.approx(0.319, abs=0.01)

    def test_compare_has_difference_block(self, capsys):
        code, out, _ = run(capsys, "compare", "--input1", str(DATA / "wa1997.csv"),
                           "--input2", str(DATA / "wa2010.csv"), "--format",
                           "percentile-table", "--total-n", "5000", "--top", "5000",
                           "--method", "gld", "--measures", "qri", "--B", "50",
                           "--seed", "1")
        assert code == 0
        got = rows(out)
        assert {r["group"] for r in got} == {"1", "2", "difference"}
        diff = [r for r in got if r["group"] == "difference"]
        assert {r["method"] for r in diff} == {"bootstrap", "wald"}
        assert all(float(r["lower"]) > 0 for r in diff)

    def test_pretty(self, capsys):
        _, out, _ = run(capsys, "estimate", "--input", str(DATA / "table5.csv"),
                        "--method", "gld", "--pretty")
        assert "," not in out and "gini" in out

    def test_simulate_coverage(self, capsys):
        code, out, _ = run(capsys, "simulate", "--dist", "exp", "--n", "60", "--reps", "2",
                           "--B", "10", "--seed", "3", "--measures", "qri")
        assert code == 0
        assert {r["method"] for r in rows(out)} == {"bootstrap", "wald"}

    def test_simulate_centered(self, capsys):
        code, out, _ = run(capsys, "simulate", "--mode", "centered", "--sigmas", "0.5",
                           "--reps", "2", "--seed", "3")
        assert code == 0
        assert len(rows(out)) == 6
