import csv
from pathlib import Path

import numpy as np
import pytest
import yaml

from phs import cli
from phs.config import ConfigError, parse_config, scenario_from_dict

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, cfg, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg) if isinstance(cfg, dict) else cfg)
    return path


def minimal_wave():
    return {"model": "wave_1d", "grid": {"half_steps": 11}, "time": {"dt_s": 1e-3, "t_end_s": 0.05}}


def test_minimal_wave_config(tmp_path):
    sc = parse_config(write(tmp_path, minimal_wave()))
    assert (sc.model_name, sc.resolution, sc.dt) == ("wave_1d", 11, 1e-3)
    sys, signals = sc.build()
    assert sys.n_states == 10 and len(signals) == 2


def test_shipped_configs_validate():
    for path in sorted(CONFIGS.glob("*.yaml")):
        parse_config(path)


def errors_of(cfg):
    with pytest.raises(ConfigError) as info:
        scenario_from_dict(cfg)
    return info.value.errors


def test_poisson_ratio_error():
    errs = errors_of({"model": "mindlin", "params": {"poisson_ratio": 0.7}})
    assert any("ν = 0.7 out of (0, 0.5)" in e for e in errs)


def test_edge_tagged_twice():
    errs = errors_of({"model": "mindlin", "params": {"clamped_edge": "left", "free_edges": ["left", "top"]}})
    assert any("tagged twice" in e for e in errs)


def test_unknown_keys_listed_together():
    errs = errors_of({"model": "timoshenko", "params": {"lenght_m": 1.0}, "colour": "red", "time": {"dt": 1}})
    assert "unknown key params.lenght_m" in errs
    assert "unknown key colour" in errs
    assert "unknown key time.dt" in errs


def test_unit_violations():
    errs = errors_of({"model": "wave_1d", "time": {"dt_s": -1.0}, "params": {"length_m": "long"}})
    assert any("time.dt_s must be positive" in e for e in errs)
    assert any("params.length_m must be a number" in e for e in errs)


def test_infeasible_grid_diagnosis():
    errs = errors_of({"model": "wave_2d", "boundary": {"left": "q", "right": "q"}, "grid": {"n1": 7, "n2": 8}})
    assert any("left=q and right=q need even N1" in e for e in errs)
    errs = errors_of({"model": "wave_1d", "boundary": {"a": "p", "b": "q"}, "grid": {"half_steps": 10}})
    assert any("tagged" in e for e in errs)


def test_other_schema_errors():
    assert errors_of({"model": "beam"})
    assert any("selected_states" in e for e in errors_of({**minimal_wave(), "output": {"selected_states": [99]}}))
    assert any("boundary section" in e for e in errors_of({"model": "timoshenko", "boundary": {"a": "p"}}))
    assert any("half_steps" in e for e in errors_of({"model": "mindlin", "grid": {"half_steps": 3}}))


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(OSError):
        parse_config(tmp_path / "nope.yaml")
    assert cli.main(["validate", str(tmp_path / "nope.yaml")]) == cli.EXIT_IO


def test_bad_yaml(tmp_path):
    with pytest.raises(ConfigError, match="YAML"):
        parse_config(write(tmp_path, "model: [unclosed"))


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_run_writes_bundle(tmp_path):
    cfg = {
        "model": "timoshenko",
        "params": {"release_time_s": 0.05},
        "time": {"dt_s": 1e-3, "t_end_s": 0.1},
        "output": {"snapshot_times_s": [0.0, 0.1], "selected_states": [0, 19], "record_every": 3},
    }
    out = tmp_path / "out"
    assert cli.main(["run", str(write(tmp_path, cfg)), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "energy.svg", "report.txt", "snapshots.csv", "snapshots.svg", "states.svg", "trajectory.csv"]
    header, data = read_csv(out / "trajectory.csv")
    assert header[:2] == ["t", "H"] and header[-2:] == ["x_0", "x_19"]
    assert "u_b_0" in header and "y_b_1" in header and "balance_residual" in header
    assert np.isfinite(data).all()
    assert np.all(np.diff(data[:, 0]) > 0)
    assert data[-1, 0] == pytest.approx(0.1)
    _, snaps = read_csv(out / "snapshots.csv")
    assert set(snaps[:, 0]) == {0.0, 0.1}
    assert not snaps[snaps[:, 0] == 0.0, 2].any()
    report = (out / "report.txt").read_text()
    assert "energy_window_start_t: 0.05" in report
    drift = float(report.split("energy_drift_rel: ")[1].split()[0])
    assert drift < 1e-9
    assert not list(tmp_path.glob(".out.*"))


def test_cli_overrides_and_rerun_replaces(tmp_path):
    path = write(tmp_path, minimal_wave())
    out = tmp_path / "run"
    assert cli.main(["run", str(path), "--out", str(out), "--t-end", "0.02"]) == 0
    first = (out / "trajectory.csv").read_bytes()
    assert cli.main(["run", str(path), "--out", str(out), "--t-end", "0.02"]) == 0
    assert (out / "trajectory.csv").read_bytes() == first
    _, data = read_csv(out / "trajectory.csv")
    assert data[-1, 0] == pytest.approx(0.02)
    assert "n/a" not in (out / "report.txt").read_text()


def test_constant_input_has_no_conservative_window(tmp_path):
    cfg = {**minimal_wave(), "boundary": {"a": "p", "b": "q", "signal_b": {"kind": "constant", "value": 0.2}}}
    out = tmp_path / "o"
    assert cli.main(["run", str(write(tmp_path, cfg)), "--out", str(out)]) == 0
    assert "energy_drift_rel: n/a" in (out / "report.txt").read_text()


def test_config_error_exit_code(tmp_path, capsys):
    path = write(tmp_path, {"model": "mindlin", "params": {"poisson_ratio": 0.7}})
    assert cli.main(["run", str(path), "--out", str(tmp_path / "x")]) == cli.EXIT_CONFIG
    assert "error [config]" in capsys.readouterr().err
    assert not (tmp_path / "x").exists()


def test_solver_failure_leaves_no_bundle(tmp_path):
    cfg = {"model": "wave_1d", "boundary": {"a": "q", "b": "q"}, "grid": {"half_steps": 10},
           "time": {"dt_s": 1e20, "t_end_s": 1e20}}
    out = tmp_path / "bundle"
    assert cli.main(["run", str(write(tmp_path, cfg)), "--out", str(out)]) == cli.EXIT_SOLVER
    assert not out.exists()
    assert not list(tmp_path.glob(".bundle.*"))


def test_assembly_error_exit_code(tmp_path, monkeypatch):
    from phs.config import Scenario
    from phs.staggered1d import GridError

    def broken(self):
        raise GridError("boom")

    path = write(tmp_path, minimal_wave())
    scenario = parse_config(path)
    monkeypatch.setattr(Scenario, "build", broken)
    monkeypatch.setattr(cli, "parse_config", lambda p: scenario)
    assert cli.main(["run", str(path), "--out", str(tmp_path / "a")]) == cli.EXIT_ASSEMBLY


def test_io_error_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    path = write(tmp_path, minimal_wave())
    assert cli.main(["run", str(path), "--out", str(blocker / "sub" / "out")]) == cli.EXIT_IO


def test_validate_and_sweep(tmp_path, capsys, monkeypatch):
    cfg = {"model": "wave_1d", "boundary": {"a": "p", "b": "p"}, "grid": {"half_steps": 10},
           "time": {"dt_s": 1e-3, "t_end_s": 0.3}, "initial": {"kind": "mode"}}
    path = write(tmp_path, cfg)
    assert cli.main(["validate", str(path)]) == 0
    assert "ok: wave_1d" in capsys.readouterr().out
    monkeypatch.setenv("PHS_THREADS", "2")
    out = tmp_path / "sweep"
    assert cli.main(["sweep", str(path), "--levels", "3", "--out", str(out)]) == 0
    header, data = read_csv_loose(out / "convergence.csv")
    assert header == ["level", "resolution", "h", "dt", "error", "order"]
    assert [r[1] for r in data] == ["10", "20", "40"]
    assert 1.8 <= float(data[-1][5]) <= 2.2


def read_csv_loose(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_sweep_without_reference(tmp_path):
    path = write(tmp_path, {"model": "timoshenko"})
    assert cli.main(["sweep", str(path), "--out", str(tmp_path / "s")]) == cli.EXIT_CONFIG


@pytest.mark.parametrize("kind", ["rest", "equilibrium", "mode", "random"])
def test_initial_kinds(tmp_path, kind):
    cfg = {**minimal_wave(), "initial": {"kind": kind, "seed": 3},
           "boundary": {"a": "p", "b": "q", "signal_b": {"kind": "constant", "value": 0.1}}}
    out = tmp_path / kind
    assert cli.main(["run", str(write(tmp_path, cfg)), "--out", str(out)]) == 0
    _, data = read_csv(out / "trajectory.csv")
    h0 = data[0, 1]
    assert (h0 == 0) == (kind == "rest")
