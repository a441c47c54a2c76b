import csv
import io
import json

import numpy as np
import pytest

from vcrsci.cli import main
from vcrsci.io import load_panel, write_canonical
from vcrsci.model import Measure
from vcrsci.report import report_table, trend_table
from vcrsci.trend import fit_linear
from vcrsci.indices import vcr_series
from vcrsci.validation import SyntheticSpec, generate_values

from panels import FIXTURES, FOCAL, engineered_rows

BIG_AREAS = str(FIXTURES / "big_area_reference.csv")
DISCIPLINES = str(FIXTURES / "discipline_reference.csv")
ENG = str(FIXTURES / "engineered.csv")


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestValidate:
    def test_clean(self):
        code, out, _ = run("validate", BIG_AREAS)
        assert code == 0
        assert out == "30 rows, 2 entities, 5 nodes, 3 years (2017-2019)\n"

    def test_duplicate(self, tmp_path):
        path = tmp_path / "dup.csv"
        text = (FIXTURES / "big_area_reference.csv").read_text()
        path.write_text(text + text.splitlines()[3] + "\n")
        code, _, err = run("validate", path)
        assert code == 2
        assert "DuplicateCell" in err and "lines 4 and 32" in err

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("country,year,docs\nUruguay,2019,1910\n")
        code, _, err = run("validate", path)
        assert code == 2
        assert "SchemaError" in err and "entity,level,big_area" in err

    def test_missing_file(self, tmp_path):
        code, _, err = run("validate", tmp_path / "nope.csv")
        assert code == 3 and "I/O" in err


class TestIndices:
    def test_documents_display(self):
        code, out, _ = run("indices", BIG_AREAS, "--format", "text")
        assert code == 0
        shown = [line.split()[-2] for line in out.splitlines()[1:]]
        assert shown[0] == "1.2"
        rows = csv_rows(run("indices", BIG_AREAS, "--format", "csv")[1])
        assert [f"{float(r['vcr']):.1f}" for r in rows] == ["1.2", "1.8", "0.7", "1.1"]

    def test_citations_display(self):
        rows = csv_rows(run("indices", BIG_AREAS, "--measure", "citations", "--format", "csv")[1])
        assert [f"{float(r['vcr']):.1f}" for r in rows] == ["1.6", "1.7", "0.6", "0.8"]

    def test_self_comparison(self):
        rows = csv_rows(run("indices", BIG_AREAS, "--entity", "World", "--format", "csv")[1])
        assert {float(r["vcr"]) for r in rows} == {1.0}

    def test_annual_period(self):
        code, out, _ = run("indices", BIG_AREAS, "--window", "annual", "--period", "2018", "--format", "csv")
        assert code == 0 and {r["period"] for r in csv_rows(out)} == {"2018"}

    @pytest.mark.parametrize("argv", [
        ("--entity", "Chile"), ("--level", "galaxy"), ("--period", "1990-1992"), ("--measure", "patents"),
        ("--format", "xml"),
    ])
    def test_usage_errors(self, argv):
        assert run("indices", BIG_AREAS, *argv)[0] == 2

    def test_unwritable_output(self, tmp_path):
        code, _, err = run("indices", BIG_AREAS, "--out", tmp_path / "missing-dir" / "x.txt")
        assert code == 3

    def test_metadata_line_only_in_text(self):
        _, text, _ = run("indices", BIG_AREAS, "--metadata")
        _, plain, _ = run("indices", BIG_AREAS)
        assert text.startswith("# vcrsci ") and text.split("\n", 1)[1] == plain
        assert run("indices", BIG_AREAS, "--metadata", "--format", "csv")[1] == run("indices", BIG_AREAS, "--format", "csv")[1]


def engineered_line_panel(tmp_path, noise=None):
    years = range(1996, 2020)
    t = np.arange(len(years), dtype=float)
    docs = 1.5 + 0.02 * t if noise is None else noise
    rows = engineered_rows({"Lineal": (docs, docs)}, years, world_share=0.05)
    path = tmp_path / "line.csv"
    write_canonical(rows, path)
    return path


class TestTrend:
    def test_noiseless_projection_equals_line(self, tmp_path):
        path = engineered_line_panel(tmp_path)
        code, out, _ = run("trend", path, "--level", "area", "--project-to", 2025, "--format", "csv")
        assert code == 0
        (row,) = csv_rows(out)
        assert float(row["projection"]) == pytest.approx(1.5 + 0.02 * 29, abs=1e-9)

    def test_cli_equals_library(self, tmp_path):
        spec = SyntheticSpec(first_year=1996, noise_sd=0.1, beta0=1.2 - 0.01 * 1996, beta1=0.01)
        values = generate_values(spec, 42)
        path = engineered_line_panel(tmp_path, noise=values)
        panel = load_panel(path)
        expected = fit_linear(vcr_series(panel, FOCAL, "area:Lineal", Measure.DOCUMENTS), 2019)
        _, out, _ = run("trend", path, "--level", "area", "--format", "json")
        (row,) = json.loads(out)
        for name in ("projection", "ci_low", "ci_high", "p_value_vs_1"):
            assert row[name] == getattr(expected, name)
        assert row["stars"] == expected.stars

    def test_alpha_nesting(self):
        lo = csv_rows(run("trend", ENG, "--level", "area", "--alpha", "0.05", "--format", "csv")[1])
        hi = csv_rows(run("trend", ENG, "--level", "area", "--alpha", "0.01", "--format", "csv")[1])
        checked = 0
        for a, b in zip(lo, hi):
            if a["ci_low"] and a["ci_low"] != a["ci_high"]:
                assert float(b["ci_low"]) < float(a["ci_low"]) and float(a["ci_high"]) < float(b["ci_high"])
                checked += 1
        assert checked >= 4

    def test_plot_data(self, tmp_path):
        plot = tmp_path / "band.csv"
        code, _, _ = run("trend", ENG, "--level", "area", "--plot-data", plot)
        assert code == 0
        rows = csv_rows(plot.read_text())
        assert set(rows[0]) == {"node", "measure", "period", "year", "vcr", "fitted", "ci_low", "ci_high"}
        fuerte = [r for r in rows if r["node"] == "area:Fuerte"]
        assert len(fuerte) == 24
        assert all(float(r["ci_low"]) <= float(r["fitted"]) <= float(r["ci_high"]) for r in fuerte)

    def test_sparse_node_flagged_not_dropped(self):
        rows = csv_rows(run("trend", ENG, "--level", "area", "--format", "csv")[1])
        (sparse,) = [r for r in rows if r["path"].endswith("Escasa")]
        assert "insufficient_data" in sparse["flag"] and sparse["significance"] == "inconclusive"
        assert sparse["stars"] == ""

    def test_all_nodes_insufficient_exit_4(self):
        assert run("trend", BIG_AREAS)[0] == 4

    def test_bad_alpha(self):
        assert run("trend", ENG, "--alpha", "1.5")[0] == 2


class TestClassify:
    def test_buckets(self):
        code, out, _ = run("classify", ENG, "--format", "csv")
        assert code == 0
        rows = csv_rows(out)
        by_node = {r["path"].split(" / ")[-1]: r for r in rows}
        assert [n for n, r in by_node.items() if r["bucket"] == "both_advantage"] == ["Fuerte"]
        assert by_node["Contraria"]["bucket"] == "contradictory"
        assert {by_node["Contraria"]["docs_outcome"], by_node["Contraria"]["cites_outcome"]} == {"above", "below"}
        assert by_node["Escasa"]["bucket"] == "inconclusive"
        assert "insufficient_data" in by_node["Escasa"]["flags"]
        assert by_node["Débil"]["bucket"] == "both_disadvantage"
        assert by_node["Mixta"]["bucket"] == "advantage_leaning"

    def test_ordering(self):
        rows = csv_rows(run("classify", ENG, "--format", "csv")[1])
        order = ["both_advantage", "advantage_leaning", "inconclusive", "contradictory",
                 "disadvantage_leaning", "both_disadvantage"]
        ranks = [order.index(r["bucket"]) for r in rows]
        assert ranks == sorted(ranks)
        same = [r for r in rows if r["bucket"] == "inconclusive" and r["docs_projection"]]
        projections = [float(r["docs_projection"]) for r in same]
        assert projections == sorted(projections, reverse=True)

    def test_grid_markers(self):
        _, out, _ = run("classify", ENG)
        line = next(ln for ln in out.splitlines() if ln.startswith("Contraria"))
        cells = line[len("Contraria"):line.rindex("contradictory")]
        assert cells.split() == ["D", "C"]
        assert cells.index("D") < cells.index("C")

    def test_json_and_csv_agree(self):
        rows = csv_rows(run("classify", ENG, "--format", "csv")[1])
        data = json.loads(run("classify", ENG, "--format", "json")[1])
        assert len(rows) == len(data)
        for r, d in zip(rows, data):
            for key, value in d.items():
                assert r[key] == ("" if value is None else repr(value) if isinstance(value, float) else str(value))


class TestReport:
    def test_golden_engineered(self):
        code, out, _ = run("report", ENG, "--format", "csv")
        assert code == 0
        assert out == (FIXTURES / "golden_report_engineered.csv").read_text(encoding="utf-8")

    def test_golden_discipline_reference(self, tmp_path):
        target = tmp_path / "report.md"
        code, _, _ = run("report", DISCIPLINES, "--format", "markdown", "--out", target)
        assert code == 4  # three years: no regression verdicts, point estimates still reported
        assert target.read_bytes() == (FIXTURES / "golden_report_discipline_reference.md").read_bytes()

    def test_repeated_runs_identical(self, tmp_path):
        outputs = []
        for k in range(3):
            target = tmp_path / f"r{k}.json"
            run("report", ENG, "--format", "json", "--out", target)
            outputs.append(target.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]

    def test_json_and_csv_agree(self):
        rows = csv_rows(run("report", ENG, "--format", "csv")[1])
        data = json.loads(run("report", ENG, "--format", "json")[1])
        assert [r["node"] for r in rows] == [d["node"] for d in data]
        for r, d in zip(rows, data):
            for key, value in d.items():
                if isinstance(value, float):
                    assert float(r[key]) == value
                else:
                    assert r[key] == ("" if value is None else str(value))

    def test_equals_library(self):
        panel = load_panel(ENG)
        data = json.loads(run("report", ENG, "--format", "json")[1])
        expected = report_table(panel, FOCAL)
        assert [d["vcr_regression_docs"] for d in data] == [r.vcr_regression_docs for r in expected]
        rows, _ = trend_table(panel, FOCAL, "documents", "area")
        fuerte = next(r for r in rows if r.node == "area:Fuerte")
        assert next(d for d in data if d["node"] == "area:Fuerte")["vcr_regression_docs"] == fuerte.projection

    def test_unwritable(self, tmp_path):
        assert run("report", ENG, "--out", tmp_path)[0] == 3


class TestConfigAndSimulate:
    def test_config_defaults_and_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# trend options\nalpha = 0.01\nlevel = area\nformat = csv\n")
        via_config = run("trend", ENG, "--config", cfg)[1]
        explicit = run("trend", ENG, "--alpha", "0.01", "--level", "area", "--format", "csv")[1]
        assert via_config == explicit
        overridden = run("trend", ENG, "--config", cfg, "--alpha", "0.05")[1]
        assert overridden == run("trend", ENG, "--level", "area", "--format", "csv")[1]

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("colour = blue\n")
        assert run("trend", ENG, "--config", cfg)[0] == 2
        cfg.write_text("not a pair\n")
        assert run("trend", ENG, "--config", cfg)[0] == 2

    def test_simulate_thread_independent(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        code1, out1, _ = run("simulate", "--replications", 300, "--seed", 9, "--per-replication", a)
        code2, out2, _ = run("simulate", "--replications", 300, "--seed", 9, "--threads", 3,
                             "--per-replication", b)
        assert code1 == code2 == 0
        assert out1 == out2 and a.read_bytes() == b.read_bytes()
        assert out1.startswith("coverage=")

    def test_simulate_power(self):
        _, out, _ = run("simulate", "--replications", 200, "--power", "1.0,1.5")
        assert out.count("power ") == 2

    def test_simulate_bad_spec(self):
        assert run("simulate", "--n", 2)[0] == 2
        assert run("simulate", "--threads", 0)[0] == 2

    def test_no_command(self):
        assert run()[0] == 2
