import json

import numpy as np
import pytest

from resetburgers.cli import dispatch
from resetburgers.config import build_initial_data, config_echo, parse_config
from resetburgers.errors import ParseError, ValidationError
from resetburgers.experiments import ExperimentSpec
from resetburgers.fields import make_grid
from resetburgers.output import verify_manifest, write_manifest
from resetburgers.particles import RunConfig

TINY_RUN = """
[grid]
m = 64
[time]
h = 1e-3
T = 0.02
delta_t = 0.01
[ensemble]
n_copies = 2
seed = 7
"""

TINY_EXP = """
[grid]
m = 64
[time]
h = 0.00048828125
T = 0.125
[ensemble]
n_copies = 4
seed = 7
[initial_data]
preset = sincos
[experiment]
kind = rate_dt
realizations = 16
delta_t_list = 0.015625, 0.03125, 0.0625
"""


# -- parse_config ----------------------------------------------------------------

def test_empty_document_gives_defaults():
    cfg = parse_config("")
    assert isinstance(cfg, RunConfig)
    assert cfg.m == 512 and cfg.h == 1e-4 and cfg.nu == 0.5
    assert cfg.eps_jac == 1e-3 and not cfg.reset_mode
    assert cfg.label.startswith("msin")


def test_parse_run_config():
    cfg = parse_config(TINY_RUN)
    assert cfg.n_copies == 2 and cfg.delta_t == 0.01 and cfg.seed == 7


def test_parse_experiment_spec():
    spec = parse_config(TINY_EXP)
    assert isinstance(spec, ExperimentSpec)
    assert spec.kind == "rate_dt" and spec.realizations == 16
    assert spec.delta_t_list == (0.015625, 0.03125, 0.0625)


def test_parse_rejects_unknown_sections_and_keys():
    with pytest.raises(ParseError):
        parse_config("[bogus]\nx = 1\n")
    with pytest.raises(ParseError):
        parse_config("[grid]\nn = 12\n")
    with pytest.raises(ParseError):
        parse_config("[grid]\nm = twelve\n")


def test_parse_validation_errors():
    with pytest.raises(ValidationError):
        parse_config("[grid]\nm = 100\n")       # not a power of two
    with pytest.raises(ValidationError):
        parse_config("[time]\nh = 1e-4\ndelta_t = 0.00033\nT = 0.00099\n")
    with pytest.raises(ValidationError):
        parse_config(TINY_RUN + "[experiment]\nkind = bogus\n")


def test_msin_preset():
    cfg = parse_config("[initial_data]\npreset = msin\namplitude = 1\n")
    g = cfg.u0.grid
    want = -np.sin(2 * np.pi * g.points)
    assert np.abs(cfg.u0.values - want).max() < 1e-15


def test_fourier_preset():
    g = make_grid(64)
    f = build_initial_data(g, "fourier", 1.0, "1:0,-0.5")
    # c(1) = -i/2 plus the conjugate mode gives sin(2 pi x)
    assert np.abs(f.values - np.sin(2 * np.pi * g.points)).max() < 1e-14


def test_seed_override():
    cfg = parse_config(TINY_RUN, seed_override=99)
    assert cfg.seed == 99


def test_config_echo_json_safe():
    echo = config_echo(parse_config(""))
    json.dumps(echo)
    assert echo["delta_t"] == "inf"


# -- dispatch -------------------------------------------------------------------

def _write(tmp_path, text):
    p = tmp_path / "cfg.ini"
    p.write_text(text)
    return p


def test_dispatch_run(tmp_path, capsys):
    cfg = _write(tmp_path, TINY_RUN)
    out = tmp_path / "out"
    code = dispatch(["run", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    assert (out / "diagnostics.csv").exists()
    assert (out / "final_u.csv").exists()
    man = json.loads((out / "manifest.json").read_text())
    assert man["job"]["seed"] == 7
    assert man["job"]["stop"] == "completed"
    ok, bad = verify_manifest(out)
    assert ok and not bad
    stdout = capsys.readouterr().out
    assert len(stdout.strip().splitlines()) == 1


def test_dispatch_refuses_overwrite_without_force(tmp_path):
    cfg = _write(tmp_path, TINY_RUN)
    out = tmp_path / "out"
    assert dispatch(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert dispatch(["run", "--config", str(cfg), "--out", str(out)]) == 1
    assert dispatch(["run", "--config", str(cfg), "--out", str(out),
                     "--force"]) == 0


def test_dispatch_rerun_hashes_stable(tmp_path):
    cfg = _write(tmp_path, TINY_RUN)
    out = tmp_path / "out"
    dispatch(["run", "--config", str(cfg), "--out", str(out)])
    h1 = {f["path"]: f["sha256"]
          for f in json.loads((out / "manifest.json").read_text())["files"]}
    dispatch(["run", "--config", str(cfg), "--out", str(out), "--force"])
    h2 = {f["path"]: f["sha256"]
          for f in json.loads((out / "manifest.json").read_text())["files"]}
    assert h1 == h2


def test_dispatch_unknown_subcommand(tmp_path, capsys):
    assert dispatch(["bogus"]) == 1
    err = capsys.readouterr().err
    assert "usage" in err.lower()


def test_dispatch_validation_error_exit_1(tmp_path):
    cfg = _write(tmp_path, "[grid]\nm = 100\n")
    assert dispatch(["run", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 1


def test_experiment_byte_identical_reruns(tmp_path):
    cfg = _write(tmp_path, TINY_EXP)
    out1, out2 = tmp_path / "e1", tmp_path / "e2"
    assert dispatch(["experiment", "rate_dt", "--config", str(cfg),
                     "--out", str(out1), "--seed", "7"]) == 0
    assert dispatch(["experiment", "rate_dt", "--config", str(cfg),
                     "--out", str(out2), "--seed", "7"]) == 0
    for name in ("rate_dt.csv", "realizations.csv", "summary.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_experiment_thread_count_does_not_change_output(tmp_path):
    cfg = _write(tmp_path, TINY_EXP)
    outs = []
    for i, threads in enumerate((1, 4)):
        out = tmp_path / f"t{i}"
        assert dispatch(["experiment", "--config", str(cfg), "--out", str(out),
                         "--threads", str(threads)]) == 0
        outs.append(out)
    for name in ("rate_dt.csv", "realizations.csv", "summary.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_run_subcommand_rejects_experiment_config(tmp_path):
    cfg = _write(tmp_path, TINY_EXP)
    assert dispatch(["run", "--config", str(cfg),
                     "--out", str(tmp_path / "x")]) == 1


def test_manifest_empty_outputs(tmp_path):
    p = write_manifest(tmp_path, {"subcommand": "x"}, [], 0.0)
    doc = json.loads(p.read_text())
    assert doc["files"] == []


def test_manifest_detects_tampering(tmp_path):
    cfg = _write(tmp_path, TINY_RUN)
    out = tmp_path / "out"
    dispatch(["run", "--config", str(cfg), "--out", str(out)])
    target = out / "diagnostics.csv"
    target.write_text(target.read_text().replace("0.01", "0.02", 1))
    ok, bad = verify_manifest(out)
    assert not ok and "diagnostics.csv" in bad


def test_oracle_check_passes(tmp_path):
    out = tmp_path / "oc"
    assert dispatch(["oracle-check", "--out", str(out), "--seed", "42"]) == 0
    doc = json.loads((out / "oracle_check.json").read_text())
    assert all(c["pass"] for c in doc["checks"])
