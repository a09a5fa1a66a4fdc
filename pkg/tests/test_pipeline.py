import csv
import json
import math

import numpy as np
import pytest

from gptwin.config import validate_config
from gptwin.errors import PipelineError
from gptwin.pipeline import emit_report, held_out_seed, prediction_grid, run_matrix, run_scenario

FAST = {"pool": {"means": ["constant", "linear"], "kernels": ["matern52", "squared_exponential"]}}


def cfg(**kw):
    return validate_config({**FAST, **kw})


def rows(path):
    with open(path) as f:
        return list(csv.DictReader(f))


def artifact_bytes(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.is_file()}


class TestPredictionGrid:
    def test_covers_horizon_plus_extension(self):
        c = cfg(horizon=100.0)
        t, extrap = prediction_grid(c)
        assert (~extrap).sum() >= 500
        step = 100.0 / 499
        assert t[0] == 0.0 and t[-1] == pytest.approx(110.0, abs=step)
        np.testing.assert_allclose(np.diff(t), step, rtol=1e-9)
        assert np.all(t[extrap] > 100.0) and np.all(t[~extrap] <= 100.0)

    def test_held_out_seed_differs(self):
        assert held_out_seed(3) != 3 and held_out_seed(3) == held_out_seed(3)


@pytest.fixture(scope="module")
def noisy(tmp_path_factory):
    out = tmp_path_factory.mktemp("noisy")
    return run_scenario(cfg(case="stiffness", n_points=20, noise_sigma=0.01, seed=2), out)


class TestRunScenario:
    def test_writes_all_artifacts(self, noisy):
        names = {p.name for p in noisy.out_dir.iterdir()}
        assert {
            "config.json", "measurements.csv", "measurements.json", "deltas.csv", "deltas.json",
            "selection.json", "selection.txt", "emulator_stiffness.json",
            "predictions_stiffness.csv", "metrics.json", "report.md",
        } <= names
        assert "FAILED" not in names

    def test_prediction_columns_and_bands(self, noisy):
        table = rows(noisy.out_dir / "predictions_stiffness.csv")
        assert list(table[0]) == [
            "t_s_over_T0", "true_delta", "posterior_mean", "lower95", "upper95",
            "obs_lower95", "obs_upper95", "extrapolated",
        ]
        for r in table:
            lo, mu, hi = float(r["lower95"]), float(r["posterior_mean"]), float(r["upper95"])
            assert lo <= mu <= hi
            assert float(r["obs_lower95"]) <= lo and hi <= float(r["obs_upper95"])
        assert table[-1]["extrapolated"] == "1" and table[0]["extrapolated"] == "0"

    def test_metrics(self, noisy):
        m = json.loads((noisy.out_dir / "metrics.json").read_text())
        ch = m["channels"]["stiffness"]
        assert 0 <= ch["coverage95"] <= 1 and ch["rmse"] < 0.05
        assert m["winner"] == noisy.selection.winner.spec.name

    def test_config_echo(self, noisy):
        doc = json.loads((noisy.out_dir / "config.json").read_text())
        assert doc["seed"] == 2 and doc["n_points"] == 20 and len(doc["pool"]) == 4

    def test_report_references_every_file(self, noisy):
        text = (noisy.out_dir / "report.md").read_text()
        for p in noisy.out_dir.iterdir():
            if p.name != "report.md":
                assert f"({p.name})" in text
        assert "Status: ok" in text and noisy.selection.winner.spec.name in text

    def test_clean_stiffness_accuracy(self, tmp_path):
        art = run_scenario(cfg(case="stiffness", n_points=30), tmp_path)
        ch = art.metrics["channels"]["stiffness"]
        assert ch["rmse"] <= 1e-3 and ch["coverage95"] is None

    def test_joint_writes_two_channels(self, tmp_path):
        art = run_scenario(cfg(case="joint", n_points=30, noise_sigma=0.005), tmp_path)
        assert set(art.metrics["channels"]) == {"mass", "stiffness"}
        assert (tmp_path / "predictions_mass.csv").exists()
        assert (tmp_path / "emulator_stiffness.json").exists()

    def test_byte_identical_reruns(self, tmp_path):
        c = cfg(case="mass", n_points=25, noise_sigma=0.01, seed=5)
        run_scenario(c, tmp_path / "a")
        run_scenario(c, tmp_path / "b")
        a, b = artifact_bytes(tmp_path / "a"), artifact_bytes(tmp_path / "b")
        assert a.keys() == b.keys()
        for name in a:
            assert a[name] == b[name], name

    def test_different_seed_changes_measurements(self, tmp_path):
        run_scenario(cfg(n_points=10, noise_sigma=0.01, seed=1), tmp_path / "a")
        run_scenario(cfg(n_points=10, noise_sigma=0.01, seed=2), tmp_path / "b")
        assert (tmp_path / "a/measurements.csv").read_bytes() != (tmp_path / "b/measurements.csv").read_bytes()

    def test_failure_leaves_marker_and_report(self, tmp_path, monkeypatch):
        import gptwin.pipeline as pipeline
        from gptwin.errors import SelectionFailedError

        def boom(*a, **k):
            raise SelectionFailedError("every candidate failed")

        monkeypatch.setattr(pipeline, "select_model", boom)
        with pytest.raises(PipelineError) as err:
            run_scenario(cfg(n_points=6), tmp_path)
        assert err.value.stage == "select"
        assert (tmp_path / "FAILED").read_text().startswith("stage: select")
        assert (tmp_path / "deltas.csv").exists()
        report = (tmp_path / "report.md").read_text()
        assert "FAILED" in report and "select" in report

    def test_rerun_clears_stale_marker(self, tmp_path):
        (tmp_path / "FAILED").write_text("stage: select\n")
        run_scenario(cfg(n_points=6), tmp_path)
        assert not (tmp_path / "FAILED").exists()


class TestMatrix:
    def test_summary(self, tmp_path):
        base = cfg(case="stiffness")
        got = run_matrix(base, [8, 10], [0.0, 0.01], seeds=[0], out_dir=tmp_path)
        assert len(got) == 4 and all(r["status"] == "ok" for r in got)
        table = rows(tmp_path / "summary.csv")
        assert [r["n_points"] for r in table] == ["8", "8", "10", "10"]
        assert table[0]["coverage95_stiffness"] == "n/a"
        assert 0 <= float(table[1]["coverage95_stiffness"]) <= 1
        assert (tmp_path / "n8_sigma0.01_seed0" / "report.md").exists()

    def test_failed_cell_is_recorded(self, tmp_path, monkeypatch):
        import gptwin.pipeline as pipeline

        real = pipeline.select_model
        from gptwin.errors import SelectionFailedError

        def flaky(X, *a, **k):
            if len(X) == 8:
                raise SelectionFailedError("boom")
            return real(X, *a, **k)

        monkeypatch.setattr(pipeline, "select_model", flaky)
        got = run_matrix(cfg(), [8, 10], [0.01], out_dir=tmp_path)
        assert [r["status"] for r in got] == ["FAILED", "ok"]
        assert rows(tmp_path / "summary.csv")[0]["stage"] == "select"


def test_emit_report_is_deterministic(tmp_path):
    run_scenario(cfg(n_points=8, noise_sigma=0.01), tmp_path)
    first = (tmp_path / "report.md").read_text()
    assert emit_report(tmp_path) == first
