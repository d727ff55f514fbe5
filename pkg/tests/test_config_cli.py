"""Config parsing round-trips, CLI surface, persistence, reproducibility."""

import json

import numpy as np
import pytest

from cqnls.cli import main
from cqnls.config import ExperimentConfig, dump_ini, from_dict, load_config
from cqnls.errors import ConfigError
from cqnls.storage import read_snapshot, write_snapshot

from conftest import gaussian


def test_default_config_is_selftest():
    cfg = ExperimentConfig()
    assert cfg.experiment == "selftest"
    assert cfg.grid.r_max == 256.0
    assert cfg.stepper.dt == 1e-3


def test_json_roundtrip():
    cfg = ExperimentConfig(experiment="evolve", seed=7)
    cfg.stepper.morawetz_radius = 8.0
    cfg.initial.family = "gaussian-mix"
    cfg.initial.amplitudes = (0.5, 0.2)
    cfg.initial.widths = (1.0, 4.0)
    back = from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back == cfg


def test_ini_roundtrip(tmp_path):
    cfg = ExperimentConfig(experiment="dichotomy-sweep", workers=2)
    cfg.stepper.sponge = True
    cfg.sweep.amplitude_step = 0.25
    path = tmp_path / "cfg.ini"
    path.write_text(dump_ini(cfg))
    assert load_config(path) == cfg


def test_ini_example(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(
        "[run]\nexperiment = evolve\n\n"
        "[grid]\nr_max = 64.0\nn = 4095\n\n"
        "[initial]\nfamily = gaussian\namplitude = 0.3\n\n"
        "[stepper]\ndt = 2e-3\nt_end = 0.5\nsponge = true\nmorawetz_radius = none\n"
    )
    cfg = load_config(path)
    assert cfg.experiment == "evolve"
    assert cfg.grid.n == 4095
    assert cfg.stepper.sponge is True
    assert cfg.stepper.morawetz_radius is None


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[nosuch]\nx = 1\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    bad.write_text("[grid]\nbogus_key = 1\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    bad.write_text("[run]\nexperiment = not-an-experiment\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_bad_json_reports_location(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"experiment": }')
    with pytest.raises(ConfigError, match=r":\d+"):
        load_config(bad)


def test_snapshot_roundtrip(tmp_path, grid64):
    u = gaussian(grid64, amplitude=0.7)
    u.values *= np.exp(0.2j * grid64.nodes**2)
    path = tmp_path / "snap.csv"
    write_snapshot(path, u, t=1.5, label="test")
    back, meta = read_snapshot(path)
    assert back.grid == grid64
    assert meta["t"] == 1.5 and meta["label"] == "test"
    assert np.max(np.abs(back.values - u.values)) <= 1e-12
    header = path.read_text().splitlines()[0]
    assert header == "r,re_u,im_u"


def test_cli_thresholds(tmp_path):
    cfgfile = tmp_path / "th.ini"
    cfgfile.write_text("[run]\nexperiment = thresholds\n\n[grid]\nr_max = 512.0\nn = 16384\n")
    code = main(["thresholds", "--config", str(cfgfile), "--out", str(tmp_path / "o")])
    assert code == 0
    got = json.loads((tmp_path / "o" / "thresholds" / "thresholds.json").read_text())
    assert got["grad_w_sq"] == pytest.approx(12.7474, abs=0.01)
    assert (tmp_path / "o" / "thresholds" / "manifest.json").exists()


def test_cli_bad_config(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[grid]\nn = not_an_int\n")
    assert main(["thresholds", "--config", str(bad)]) == 1


def test_cli_numerical_failure_exit_code(tmp_path):
    # the bubble's tail needs r_max >= 100; smaller domains fail with an
    # accuracy diagnostic, surfaced as exit code 2
    cfgfile = tmp_path / "th.ini"
    cfgfile.write_text("[run]\nexperiment = thresholds\n\n[grid]\nr_max = 64.0\nn = 2047\n")
    assert main(["thresholds", "--config", str(cfgfile), "--out", str(tmp_path / "o")]) == 2


def test_free_decay_zero_data(tmp_path):
    cfgfile = tmp_path / "fd.json"
    cfgfile.write_text(json.dumps({
        "experiment": "free-decay",
        "grid": {"r_max": 64.0, "n": 1023},
        "initial": {"family": "gaussian", "amplitude": 0.0},
    }))
    out = tmp_path / "o"
    assert main(["free-decay", "--config", str(cfgfile), "--out", str(out)]) == 0
    got = json.loads((out / "free-decay" / "free_decay.json").read_text())
    assert got["degenerate"] is True
    assert all(v == 0.0 for v in got["norms"].values())


def test_cli_env_out_root(tmp_path, monkeypatch):
    monkeypatch.setenv("CQNLS_OUT_ROOT", str(tmp_path / "envout"))
    monkeypatch.chdir(tmp_path)
    cfgfile = tmp_path / "fd.ini"
    cfgfile.write_text(
        "[run]\nexperiment = free-decay\n\n[grid]\nr_max = 128.0\nn = 2047\n\n"
        "[initial]\nfamily = gaussian\namplitude = 1.0\n"
    )
    # --config sets out_dir from the file; env root applies when no config given
    code = main(["free-decay", "--config", str(cfgfile), "--out", str(tmp_path / "x")])
    assert code == 0
    assert (tmp_path / "x" / "free-decay" / "free_decay.json").exists()


def test_cli_selftest(tmp_path, capsys):
    assert main(["selftest", "--out", str(tmp_path)]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith("[")]
    assert len(lines) >= 10
    assert all(l.startswith("[PASS]") for l in lines)
    got = json.loads((tmp_path / "selftest" / "selftest.json").read_text())
    assert got["failures"] == []


def test_rerun_reproduces_artifacts(tmp_path):
    cfgfile = tmp_path / "ev.ini"
    cfgfile.write_text(
        "[run]\nexperiment = evolve\n\n[grid]\nr_max = 64.0\nn = 2047\n\n"
        "[initial]\nfamily = gaussian\namplitude = 0.3\n\n"
        "[stepper]\ndt = 1e-3\nt_end = 0.2\nsnapshot_stride = 100\n"
    )
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["evolve", "--config", str(cfgfile), "--out", str(out)]) == 0
        outs.append((out / "evolve" / "series.csv").read_bytes())
    assert outs[0] == outs[1]


def test_morawetz_experiment(tmp_path):
    cfgfile = tmp_path / "mw.json"
    cfgfile.write_text(json.dumps({
        "experiment": "morawetz",
        "grid": {"r_max": 64.0, "n": 2047},
        "initial": {"family": "gaussian", "amplitude": 0.5},
        "stepper": {"dt": 2e-3, "t_end": 2.0, "morawetz_radius": 8.0},
    }))
    out = tmp_path / "o"
    assert main(["morawetz", "--config", str(cfgfile), "--out", str(out)]) == 0
    got = json.loads((out / "morawetz" / "averaged_l6.json").read_text())
    assert got["identity_residual"] <= 1e-2
    assert len(got["rows"]) == 3
    series = (out / "morawetz" / "morawetz_series.csv").read_text().splitlines()
    assert series[0] == "t,M,main,err1,err2,fd_rate"
    assert len(series) == 1001 + 1  # per-step rows plus header


def test_sweep_workers_deterministic(tmp_path):
    from cqnls.config import SweepSpec
    from cqnls.dynamics import StepperConfig
    from cqnls.config import ExperimentConfig, GridSpec
    from cqnls.experiments import run_dichotomy

    base = dict(
        grid=GridSpec(r_max=64.0, n=1023),
        stepper=StepperConfig(dt=4e-3, t_end=2.0, sponge=True),
        sweep=SweepSpec(amplitude_start=0.2, amplitude_stop=0.6,
                        amplitude_step=0.2, include_bubble=False),
    )
    outs = []
    for name, workers in (("w1", 1), ("w2", 2)):
        out = tmp_path / name
        out.mkdir()
        cfg = ExperimentConfig(experiment="dichotomy-sweep", workers=workers, **base)
        run_dichotomy(cfg, out)
        outs.append((out / "sweep.csv").read_bytes())
    assert outs[0] == outs[1]


def test_classify_experiment(tmp_path):
    cfgfile = tmp_path / "cl.json"
    cfgfile.write_text(json.dumps({
        "experiment": "classify",
        "grid": {"r_max": 64.0, "n": 4095},
        "initial": {"family": "gaussian", "amplitude": 0.1},
    }))
    out = tmp_path / "o"
    assert main(["classify", "--config", str(cfgfile), "--out", str(out)]) == 0
    got = json.loads((out / "classify" / "classification.json").read_text())
    assert got["tag"] == "KPlus"
    ledger = (out / "classify" / "classifications.csv").read_text().splitlines()
    assert ledger[0].startswith("tag,")
    assert ledger[1].startswith("KPlus,")
