"""Tests for the experiment runner."""

import json

import pytest

from src.errors import ModelError, ValidationFailure
from src.model.config_io import dump_config
from src.presets import evp_comparison
from src.runner import ExperimentSpec, run, validate_model


def read_json(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def read_csv_lines(path):
    """Data lines of a CSV artifact and its provenance header."""
    lines = path.read_text(encoding="utf-8").splitlines()
    header = dict(line[2:].split("=", 1) for line in lines if line.startswith("# "))
    return [line for line in lines if not line.startswith("#")], header


class TestExperimentSpec:
    def test_needs_exactly_one_model_source(self, out_dir):
        with pytest.raises(ModelError, match="Exactly one"):
            ExperimentSpec("solve", out_dir)
        with pytest.raises(ModelError, match="Exactly one"):
            ExperimentSpec("solve", out_dir, config_path=out_dir / "m.json", preset="fig1")

    @pytest.mark.parametrize(
        "kwargs, message",
        [
            ({"command": "plot"}, "Unknown command"),
            ({"preset": "fig9"}, "Unknown preset"),
            ({"strategy": "greedy"}, "Unknown strategy"),
            ({"sweep_parameter": "sigma"}, "sweep parameter"),
            ({"grid": (2, 50)}, "at least 3"),
        ],
    )
    def test_invalid_settings(self, out_dir, kwargs, message):
        settings = {"command": "solve", "preset": "fig2", **kwargs}
        with pytest.raises(ModelError, match=message):
            ExperimentSpec(out_dir=out_dir, **settings)

    def test_missing_config_file(self, out_dir):
        with pytest.raises(ModelError, match="does not exist"):
            ExperimentSpec("solve", out_dir, config_path=out_dir / "missing.json")

    def test_config_file_source(self, tmp_path, out_dir):
        path = tmp_path / "model.json"
        path.write_text(dump_config(evp_comparison()), encoding="utf-8")
        spec = ExperimentSpec("compare", out_dir, config_path=path, seed=4, n_paths=500)
        assert spec.tag == "custom"
        assert spec.model().line2.claims.mean == pytest.approx(evp_comparison().line2.claims.mean)
        sim = spec.sim_config()
        assert (sim.n_paths, sim.seed) == (500, 4)


def test_bounded_preset_is_valid():
    assert validate_model(evp_comparison()).passed


class TestFigure:
    def test_reference_curves(self, out_dir):
        result = run(ExperimentSpec("figure", out_dir, preset="fig1"))
        names = {p.name for p in result.artifacts}
        assert names == {"figure1.csv", "figure1.json", "figure2.csv", "figure2.json"}
        first = read_json(out_dir / "figure1.json")
        assert first["roots_decrease_in_u"] is True
        assert max(first["residuals"].values()) < 1e-8
        second = read_json(out_dir / "figure2.json")
        assert second["increasing"] is True
        assert second["crossings"] == 1
        assert 0.0 < second["phi_star"] < 1.0
        manifest = read_json(result.manifest)
        assert manifest["status"] == "ok"
        assert manifest["preset"] == "fig1"


class TestValidationGate:
    def test_solve_refuses_invalid_model(self, out_dir):
        with pytest.raises(ValidationFailure) as excinfo:
            run(ExperimentSpec("solve", out_dir, preset="fig1"))
        assert not excinfo.value.report.check("exp_moment_line2").passed
        report = read_json(out_dir / "validation.json")
        assert report["passed"] is False
        manifest = read_json(out_dir / "manifest.json")
        assert manifest["status"].startswith("ValidationFailure")
        assert manifest["artifacts"] == ["validation.json"]


class TestAnalysisCommands:
    def test_compare(self, out_dir):
        result = run(ExperimentSpec("compare", out_dir, preset="evp-comparison"))
        assert result.exit_code == 0
        report = read_json(out_dir / "comparison.json")
        assert report["n_states"] == 45
        assert (out_dir / "comparison.csv").is_file()

    def test_sweep(self, out_dir):
        spec = ExperimentSpec(
            "sweep", out_dir, preset="evp-comparison", sweep_parameter="k", sweep_values=(0.0, 0.01, 0.02)
        )
        run(spec)
        summary = read_json(out_dir / "sweep.json")
        assert summary["parameter"] == "k"
        assert summary["passed"] is True
        lines, header = read_csv_lines(out_dir / "sweep.csv")
        assert len(lines) == 4
        assert header["command"] == "sweep"
        assert header["config_hash"] == read_json(out_dir / "manifest.json")["config_hash"]


class TestSimulate:
    def test_no_reinsurance(self, out_dir):
        spec = ExperimentSpec(
            "simulate", out_dir, preset="evp-comparison", strategy="no-reinsurance",
            n_paths=200, n_steps=20, seed=1, keep_paths=True, workers=1,
        )
        result = run(spec)
        utility = read_json(out_dir / "utility.json")
        assert utility["strategy"] == "no-reinsurance"
        assert utility["n_paths"] == 200
        assert 0.0 < utility["mean"]
        assert (out_dir / "full_paths.json").is_file()
        lines, header = read_csv_lines(out_dir / "paths.csv")
        assert len(lines) == 201
        assert header["seed"] == "1"
        assert read_json(result.manifest)["seed"] == 1

    def test_same_seed_same_estimate(self, tmp_path):
        estimates = []
        for name in ("a", "b"):
            spec = ExperimentSpec(
                "simulate", tmp_path / name, preset="evp-comparison", strategy="no-reinsurance",
                n_paths=100, n_steps=10, seed=2, workers=1,
            )
            run(spec)
            estimates.append(read_json(tmp_path / name / "utility.json"))
        assert estimates[0] == estimates[1]


@pytest.mark.slow
def test_verify_optimal_strategy_holds(out_dir):
    spec = ExperimentSpec("verify", out_dir, preset="evp-comparison", n_paths=4000, seed=5)
    result = run(spec)
    assert result.exit_code == 0
    report = read_json(out_dir / "verify.json")
    assert report["passed"] is True
    assert report["violations"] == []
    value = report["value"]["value"]
    assert isinstance(value, float)
    assert isinstance(report["value"]["certainty_equivalent"], float)
    estimate = report["estimate"]
    assert abs(value - estimate["mean"]) <= 3.0 * estimate["stderr"]
    assert len(report["comparisons"]) == 8
    for comparison in report["comparisons"]:
        assert comparison["difference"] >= -2.0 * comparison["stderr"]
