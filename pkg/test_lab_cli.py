"""
Tests for experiment configs, the registry, reports and the command line.
Run with pytest or directly: python test_lab_cli.py
"""

import os
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

import main as cli
from errors import ConfigError, DomainError
from experiments import Experiment, ExperimentRegistry, get_registry, run_experiment
from experiments.report import ExperimentReport, at_least, at_most, close_to, within, write_report
from lab_config import (ExperimentConfig, _reset_settings, get_settings, parse_config, parse_configs,
                        parse_value, serialize, with_params)
from rd_engine import make_grid, write_snapshots
from wave_profile import read_profile_csv

EXPECTED = ["exp_profile", "exp_planar_speed", "exp_fife_mcleod", "exp_spreading", "exp_spreading_upper",
            "exp_mean_speed", "exp_nonstandard", "exp_supersolution", "exp_terrace",
            "exp_planar_liouville", "exp_metastable", "exp_properties"]


def _stub_registry(runner) -> ExperimentRegistry:
    registry = ExperimentRegistry()
    registry.add(Experiment(name="exp_stub", runner=runner, claim="stub",
                            profiles={"smoke": {"level": 0.5}, "full": {"level": 0.25}}))
    return registry


def test_parse_value():
    assert parse_value("12") == 12 and isinstance(parse_value("12"), int)
    assert parse_value("0.08") == 0.08
    assert parse_value("[1, 2.5]") == [1, 2.5]
    assert parse_value("[]") == []
    assert parse_value("true") is True
    assert parse_value('"a \\"b\\""') == 'a "b"'
    assert parse_value("cubic(0.3)") == "cubic(0.3)"
    with pytest.raises(ConfigError):
        parse_value("[1, x]", line=4)


def test_config_round_trip():
    text = """
    # spreading at a larger radius
    f = cubic(0.3)
    seed = 7
    h = 0.25

    [exp_spreading]
    radius = 14     # overrides the profile
    eps = 0.05
    """
    cfg = parse_config("\n".join(line.strip() for line in text.splitlines()))
    assert cfg.name == "exp_spreading" and cfg.seed == 7 and cfg.h == 0.25
    assert cfg.params == {"radius": 14, "eps": 0.05}
    again = parse_config(serialize(cfg))
    assert again == cfg
    assert with_params(cfg, eps=0.02).params["eps"] == 0.02 and cfg.params["eps"] == 0.05


def test_precondition_errors_carry_the_line():
    text = "f = cubic(0.3)\n\n[exp_nonstandard]\nn = 60\nalpha = 0.5\n"
    with pytest.raises(ConfigError) as info:
        parse_configs(text)
    assert "pi/4" in str(info.value)
    assert info.value.line == 5
    assert str(info.value).startswith("line 5: ")


def test_structural_config_errors():
    with pytest.raises(ConfigError, match="missing required key f"):
        parse_configs("[exp_profile]\nthetas = [0.3]\n")
    with pytest.raises(ConfigError, match="unknown experiment"):
        parse_configs("f = cubic(0.3)\n[exp_nothing]\n")
    with pytest.raises(ConfigError, match="unknown key"):
        parse_configs("f = cubic(0.3)\n[exp_profile]\nradius = 3\n")
    with pytest.raises(ConfigError, match="no \\[experiment\\]"):
        parse_configs("f = cubic(0.3)\n")
    with pytest.raises(ConfigError):
        parse_configs("f = sine(1)\n[exp_profile]\n")
    with pytest.raises(ConfigError):
        parse_configs("f = cubic(0.3)\nh = -1\n[exp_profile]\n")
    with pytest.raises(ConfigError):
        parse_config("f = cubic(0.3)\n[exp_profile]\n[exp_terrace]\n")


def test_settings_come_from_the_environment():
    saved = os.environ.get("FRONTLAB_THREADS")
    os.environ["FRONTLAB_THREADS"] = "3"
    _reset_settings()
    try:
        assert get_settings().threads == 3
    finally:
        if saved is None:
            del os.environ["FRONTLAB_THREADS"]
        else:
            os.environ["FRONTLAB_THREADS"] = saved
        _reset_settings()


def test_registry_holds_every_experiment():
    registry = get_registry()
    assert registry.names() == EXPECTED
    for name in EXPECTED:
        assert set(registry.get(name).profiles) == {"smoke", "full"}
    with pytest.raises(ConfigError):
        registry.get("exp_nothing")
    with pytest.raises(DomainError):
        registry.add(registry.get("exp_profile"))


def test_criteria_helpers():
    assert at_most("a", 1.0, 2.0).passed and not at_most("a", 3.0, 2.0).passed
    assert at_least("b", 2.0, 2.0).passed
    assert within("c", 1.05, 1.0, 0.1).passed and not within("c", 1.2, 1.0, 0.1).passed
    assert close_to("d", 0.5 + 1e-9, 0.5, 1e-6).passed
    assert not at_most("e", float("nan"), 1.0).passed
    assert not ExperimentReport(name="empty").passed


def test_report_files():
    report = ExperimentReport(name="exp_stub", claim="stub", config_text="f = \"cubic(0.3)\"\n")
    report.add(at_most("small", 0.1, 1.0))
    report.measure("c_f", 0.2828)
    report.table("rows", pd.DataFrame({"t": [0.0, 1.0], "x": [0.5, 0.75]}))
    with tempfile.TemporaryDirectory() as tmp:
        names = {p.name for p in write_report(report, tmp)}
        assert {"report.txt", "criteria.csv", "measurements.csv", "rows.csv"} <= names
        text = (Path(tmp) / "report.txt").read_text()
        assert "Verdict: PASS" in text and "Config:" in text
        frame = pd.read_csv(Path(tmp) / "criteria.csv")
        assert list(frame.columns) == ["criterion", "status", "measured", "target", "comparison"]
        assert list(frame["status"]) == ["PASS"]


def test_run_records_domain_errors():
    def runner(ctx):
        ctx.report.add(at_least("level", ctx["level"], 0.0))
        raise DomainError("no front here")

    registry = _stub_registry(runner)
    with tempfile.TemporaryDirectory() as tmp:
        cfg = ExperimentConfig(name="exp_stub", f="cubic(0.3)", out_dir=tmp)
        report = run_experiment(cfg, registry=registry, workers=1)
        assert not report.passed
        assert [c.name for c in report.criteria] == ["level", "error"]
        assert "no front here" in report.criteria[-1].detail
        assert (Path(tmp) / "exp_stub" / "report.txt").exists()


def test_profile_experiment_is_reproducible():
    with tempfile.TemporaryDirectory() as tmp:
        outputs = []
        for run in ("a", "b"):
            cfg = ExperimentConfig(name="exp_profile", f="cubic(0.3)", out_dir=str(Path(tmp) / run),
                                   params={"thetas": [0.3]})
            report = run_experiment(cfg, workers=1)
            assert report.passed, report.summary()
            folder = Path(tmp) / run / "exp_profile"
            assert (folder / "profile.csv").exists()
            outputs.append((folder / "criteria.csv").read_bytes())
        assert outputs[0] == outputs[1]


def test_spreading_refuses_a_receding_front():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = ExperimentConfig(name="exp_spreading", f="cubic(0.7)", out_dir=tmp)
        report = run_experiment(cfg, workers=1)
        assert not report.passed
        assert report.criteria[-1].name == "error"


def test_command_line():
    assert cli.main(["list"]) == cli.EXIT_OK
    assert cli.main(["nonstandard", "--alpha", "0.5"]) == cli.EXIT_USAGE
    with tempfile.TemporaryDirectory() as tmp:
        bad = Path(tmp) / "bad.toml"
        bad.write_text("f = cubic(0.3)\n[exp_nothing]\n")
        assert cli.main(["run", "--config", str(bad)]) == cli.EXIT_USAGE
        good = Path(tmp) / "good.toml"
        good.write_text(f'f = cubic(0.3)\nout_dir = "{tmp}"\n[exp_profile]\nthetas = [0.3]\n')
        assert cli.main(["run", "--config", str(good)]) == cli.EXIT_OK
    with pytest.raises(SystemExit):
        cli.main(["profile", "--resolution", "huge"])


def test_grid_keys_only_where_a_grid_is_configurable():
    text = "f = cubic(0.3)\n\n[exp_profile]\nthetas = [0.3]\nshape = [8, 6]\n"
    with pytest.raises(ConfigError) as info:
        parse_configs(text)
    assert info.value.line == 5
    assert "shape" in str(info.value)
    cfg = parse_config("f = cubic(0.3)\n[exp_properties]\nshape = [8, 6]\norigin = [-1.0, 2.0]\n")
    assert cfg.shape == (8, 6) and cfg.origin == (-1.0, 2.0)
    with pytest.raises(ConfigError, match="two entries"):
        parse_configs("f = cubic(0.3)\n[exp_properties]\nshape = [8, 6, 4]\n")


def test_metastable_needs_a_balanced_f():
    with pytest.raises(ConfigError) as info:
        parse_configs("f = cubic(0.3)\n[exp_metastable]\n")
    assert info.value.line == 1
    assert "not balanced" in str(info.value)
    cfg = parse_config("f = cubic(0.3)\n[exp_metastable]\nf = cubic(0.5)\n")
    assert cfg.f == "cubic(0.5)"


def test_speed_of_stored_snapshots():
    h, c = 0.25, 0.5
    grid = make_grid((241,), h, (-10.0,))
    x = grid.axis(0)
    # level 1/2 sits midway between two nodes at every snapshot
    snapshots = [grid.with_values(1.0 / (1.0 + np.exp(x - c * t - h / 2)), t=float(t))
                 for t in range(0, 21, 2)]
    with tempfile.TemporaryDirectory() as tmp:
        write_snapshots(snapshots, Path(tmp) / "snapshots")
        out = Path(tmp) / "speed.csv"
        code = cli.main(["speed", "--in", str(Path(tmp) / "snapshots"), "--kind", "inf", "--out", str(out)])
        assert code == cli.EXIT_OK
        with open(out, encoding="utf-8") as handle:
            header = handle.readline()
        assert header.startswith("# gamma_hat=")
        gamma = float(header.split()[1].split("=", 1)[1])
        assert abs(gamma - c) < 1e-9
        frame = pd.read_csv(out, comment="#")
        assert list(frame.columns) == ["tau", "distance"]
        assert np.allclose(frame["distance"], c * frame["tau"], atol=1e-9)
        assert cli.main(["speed", "--in", tmp, "--out", str(out)]) == cli.EXIT_USAGE


def test_profile_export():
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "profile.csv"
        code = cli.main(["profile", "--f", "cubic(0.3)", "--tol", "1e-10", "--out", str(out), "--out-dir", tmp])
        assert code == cli.EXIT_OK
        assert out.read_text(encoding="utf-8").startswith("# c_f=")
        p = read_profile_csv(out)
        assert abs(p.speed - 0.4 / np.sqrt(2.0)) < 1e-6


def test_nonstandard_report_folder():
    with tempfile.TemporaryDirectory() as tmp:
        folder = Path(tmp) / "run"
        code = cli.main(["nonstandard", "--f", "cubic(0.7)", "--out", str(folder), "--out-dir", tmp])
        assert code == cli.EXIT_FAILED
        assert (folder / "report.txt").exists()
        assert not (Path(tmp) / "exp_nonstandard").exists()


if __name__ == "__main__":
    tests = [
        test_parse_value,
        test_config_round_trip,
        test_precondition_errors_carry_the_line,
        test_structural_config_errors,
        test_settings_come_from_the_environment,
        test_registry_holds_every_experiment,
        test_criteria_helpers,
        test_report_files,
        test_run_records_domain_errors,
        test_profile_experiment_is_reproducible,
        test_spreading_refuses_a_receding_front,
        test_command_line,
        test_grid_keys_only_where_a_grid_is_configurable,
        test_metastable_needs_a_balanced_f,
        test_speed_of_stored_snapshots,
        test_profile_export,
        test_nonstandard_report_folder,
    ]
    print("=" * 60)
    print("TEST: CONFIG, REGISTRY AND CLI")
    print("=" * 60)
    for test in tests:
        print(f"[TEST] {test.__name__}")
        test()
        print("  [OK]")
    print(f"\n[OK] {len(tests)} tests passed")
