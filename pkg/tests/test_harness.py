import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agslm.cli import main
from agslm.harness import (
    ExperimentSpec,
    ccdf_table,
    fig7_compare,
    kcurve_rows,
    render,
    reproduce_table,
    run_experiment,
    write_rows,
)
from agslm.report import ComplexityReport
from agslm.schemes import ConfigError, Scheme, SlmConfig


def small(scheme=Scheme.CONVENTIONAL, U=8, ag=True, **kw):
    return SlmConfig(32, 2, U, scheme, ag=ag, **kw)


class TestExperimentSpec:
    def test_rejects_empty(self):
        with pytest.raises(ConfigError):
            ExperimentSpec((), 10)

    def test_rejects_zero_trials(self):
        with pytest.raises(ConfigError):
            ExperimentSpec((small(),), 0)

    def test_rejects_format(self):
        with pytest.raises(ConfigError):
            ExperimentSpec((small(),), 1, format="xml")

    def test_rejects_non_config(self):
        with pytest.raises(ConfigError):
            ExperimentSpec(({"U": 4},), 1)


class TestRunExperiment:
    def test_deterministic(self):
        spec = ExperimentSpec((small(), small(ag=False)), 50, master_seed=4)
        a, b = run_experiment(spec), run_experiment(spec)
        assert render(a.rows()) == render(b.rows())
        np.testing.assert_array_equal(a.paprs[0], b.paprs[0])

    def test_trial_count_does_not_perturb_trials(self):
        a = run_experiment(ExperimentSpec((small(),), 30, 9))
        b = run_experiment(ExperimentSpec((small(),), 60, 9))
        np.testing.assert_array_equal(a.reports[0].raw, b.reports[0].raw[:30])

    @pytest.mark.parametrize("scheme,kw,Us", [
        (Scheme.CONVENTIONAL, {}, (2, 5, 8)),
        (Scheme.LIM, {"r": 3}, (4, 16)),
        (Scheme.WANG, {}, (4, 8, 12)),
    ])
    def test_prefix_sharing_is_exact(self, scheme, kw, Us):
        cfgs = tuple(small(scheme, U, **kw) for U in Us)
        shared = run_experiment(ExperimentSpec(cfgs, 40, 1))
        for i, cfg in enumerate(cfgs):
            alone = run_experiment(ExperimentSpec((cfg,), 40, 1))
            np.testing.assert_array_equal(shared.reports[i].raw, alone.reports[0].raw)
            np.testing.assert_array_equal(shared.paprs[i], alone.paprs[0])
            np.testing.assert_array_equal(shared.selected[i], alone.selected[0])
            np.testing.assert_array_equal(shared.reports[i].a_hist, alone.reports[0].a_hist)

    def test_baseline_has_zero_stderr(self):
        res = run_experiment(ExperimentSpec((small(ag=False),), 20))
        assert res.reports[0].stderr == 0.0 and res.reports[0].mean == 8.0

    def test_ratio(self):
        res = run_experiment(ExperimentSpec((small(), small(ag=False)), 20))
        rows = res.rows()
        assert rows[1].ratio_percent == 100.0
        assert rows[0].ratio_percent == pytest.approx(100 * res.reports[0].mean / 8.0)

    @pytest.mark.parametrize("scheme,kw", [
        (Scheme.CONVENTIONAL, {}),
        (Scheme.LIM, {"r": 3}),
        (Scheme.WANG, {}),
        (Scheme.BAXLEY, {"gamma0_db": 6.0}),
    ])
    def test_verify_mode(self, scheme, kw):
        res = run_experiment(ExperimentSpec((small(scheme, 8 if scheme is not Scheme.WANG else 4, **kw),), 50, verify=True))
        assert res.violations == 0

    def test_ag_and_baseline_select_identically(self):
        cfgs = (small(), small(ag=False))
        res = run_experiment(ExperimentSpec(cfgs, 100, 3))
        np.testing.assert_array_equal(res.selected[0], res.selected[1])
        np.testing.assert_array_equal(res.paprs[0], res.paprs[1])

    def test_abort_counts_and_histogram(self):
        res = run_experiment(ExperimentSpec((small(),), 100))
        rep = res.reports[0]
        assert rep.aborts[0] == 0
        assert rep.a_hist.sum() == 100 * 7


class TestOutput:
    def test_csv_schema(self, tmp_path):
        out = tmp_path / "r.csv"
        run_experiment(ExperimentSpec((small(), small(ag=False)), 10, output=str(out)))
        rows = list(csv.DictReader(io.StringIO(out.read_text(encoding="utf-8"))))
        assert len(rows) == 2
        for col in ("scheme", "U", "metric", "paper_value", "measured", "stderr", "ratio_percent"):
            assert col in rows[0]
        assert float(rows[1]["measured"]) == 8.0

    def test_json_schema(self, tmp_path):
        out = tmp_path / "r.json"
        run_experiment(ExperimentSpec((small(),), 10, output=str(out), format="json"))
        doc = json.loads(out.read_text())
        assert set(doc) == {"spec", "results", "version"}
        assert doc["spec"]["trials"] == 10
        assert doc["results"][0]["scheme"] == "conventional"

    def test_output_is_byte_identical(self, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for p in paths:
            run_experiment(ExperimentSpec((small(Scheme.BAXLEY, gamma0_db=7.0),), 20, 2, str(p), "json"))
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_io_error_names_path(self, tmp_path):
        bad = tmp_path / "missing" / "r.csv"
        with pytest.raises(OSError) as exc:
            write_rows([{"a": 1}], str(bad))
        assert str(bad) in str(exc.value)


class TestReport:
    def make(self, costs, start):
        return ComplexityReport("T", 10, costs, np.arange(start, start + len(costs)), [1, 0], [0, 2])

    @settings(max_examples=30)
    @given(st.lists(st.integers(0, 100), min_size=1, max_size=20), st.lists(st.integers(0, 100), min_size=1, max_size=20))
    def test_merge_commutative(self, a, b):
        x, y = self.make(a, 0), self.make(b, len(a))
        xy, yx = x.merge(y), y.merge(x)
        np.testing.assert_array_equal(xy.raw, yx.raw)
        assert xy.mean == pytest.approx((sum(a) + sum(b)) / (len(a) + len(b)) / 10)
        np.testing.assert_array_equal(xy.aborts, [2, 0])

    def test_merge_associative(self):
        x, y, z = self.make([1, 2], 0), self.make([3], 2), self.make([4, 5, 6], 3)
        left, right = x.merge(y).merge(z), x.merge(y.merge(z))
        np.testing.assert_array_equal(left.raw, right.raw)
        np.testing.assert_array_equal(left.a_hist, right.a_hist)

    def test_unit_mismatch(self):
        with pytest.raises(ValueError):
            self.make([1], 0).merge(ComplexityReport("complex_additions", 1, [1], [1]))


class TestTablesAndCurves:
    def test_table_deterministic_rows(self):
        tab = reproduce_table("III", trials=30)
        base = [r for r in tab.rows if r.form == "baseline"]
        assert [r.measured for r in base] == [9216.0, 21504.0, 33792.0]
        assert all(r.within for r in base)
        assert "Table III" in tab.to_text()

    def test_quick_widens_tolerance(self, monkeypatch):
        import agslm.harness as h

        monkeypatch.setattr(h, "QUICK_TRIALS", 20)
        tab = h.reproduce_table("II", quick=True)
        ag = [r for r in tab.rows if r.form == "ag" and r.metric.startswith("cost")]
        assert ag[0].tolerance == pytest.approx(0.08 * np.sqrt(10))
        assert tab.trials == 20

    def test_unknown_table(self):
        with pytest.raises(ConfigError):
            reproduce_table("V", trials=1)

    def test_fig7_small(self):
        res = fig7_compare(16, range(2, 6), trials=300)
        assert np.all(res.analytic < 1) and np.all(res.simulated < 1)
        assert np.all(np.diff(res.analytic) < 0)
        assert len(res.rows()) == 4

    def test_fig7_refuses_oversampling(self):
        with pytest.raises(ConfigError):
            fig7_compare(64, range(2, 4), trials=10, L=4)

    def test_kcurve(self):
        rows = kcurve_rows(8)
        assert [r["K"] for r in rows] == [7, 8, 11, 12, 19, 20, 23, 24]
        assert rows[-1]["K_over_T"] == 1.0

    def test_ccdf_table(self):
        p = 10 ** (np.array([5.0, 6.0, 7.0, 8.0]) / 10)
        np.testing.assert_allclose(ccdf_table(p, [4.0, 6.0, 7.5, 9.0]), [1.0, 0.5, 0.25, 0.0])


class TestCli:
    def test_kcurve(self, capsys):
        assert main(["kcurve", "--n", "8"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("a,K") and lines[3].startswith("3,11,")

    def test_simulate_json(self, tmp_path):
        out = tmp_path / "s.json"
        rc = main(["simulate", "--n", "32", "--oversample", "2", "--u", "4,8", "--trials", "20", "--out", str(out), "--format", "json", "--verify"])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert len(doc["results"]) == 4

    def test_simulate_no_ag(self, capsys):
        assert main(["simulate", "--n", "32", "--u", "4", "--trials", "5", "--no-ag"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert [r["form"] for r in rows] == ["baseline"]

    def test_analyze(self, capsys):
        assert main(["analyze", "--n", "64", "--u", "2"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert float(rows[0]["expected_cost_T"]) == 1.0

    def test_analyze_refuses_oversampling(self, capsys):
        assert main(["analyze", "--oversample", "4"]) == 2
        assert "oversampling" in capsys.readouterr().err

    def test_bad_config(self, capsys):
        assert main(["simulate", "--scheme", "wang", "--u", "5", "--trials", "1"]) == 2

    def test_ccdf(self, capsys):
        assert main(["ccdf", "--n", "32", "--oversample", "1", "--u", "4", "--trials", "50", "--grid", "5:8:1"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 4 and "model U=4" in rows[0]

    def test_fig7(self, capsys):
        assert main(["fig7", "--n", "16", "--u", "3", "--trials", "50"]) == 0
        assert "analytic" in capsys.readouterr().out

    def test_table(self, capsys):
        assert main(["table", "III", "--trials", "10"]) == 0
        assert "wang" in capsys.readouterr().out

    def test_io_error(self, tmp_path, capsys):
        assert main(["kcurve", "--n", "8", "--out", str(tmp_path / "no" / "x.csv")]) == 3
