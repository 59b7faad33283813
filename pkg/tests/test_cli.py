import argparse
import json
import math

import pytest

from ellipticalou import cli
from ellipticalou.dataio import load_polar_snapshot, series_to_csv


@pytest.fixture
def left_params(tmp_path):
    p = tmp_path / "fig1-left.json"
    p.write_text(json.dumps({"alpha1": 0.02, "beta1": 1.0, "alpha2": -0.5, "beta2": -0.3, "sigma2": 2.0}))
    return str(p)


@pytest.fixture
def polar_csv(tmp_path):
    p = tmp_path / "polar.csv"
    p.write_text(series_to_csv(load_polar_snapshot()))
    return str(p)


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def test_every_flag_documented():
    parser = cli.build_parser()
    subs = _subparsers(parser)
    assert set(subs) == {"simulate", "spectrum", "fit", "bootstrap", "mc", "filter", "ingest", "reproduce"}
    for name, sp in subs.items():
        text = sp.format_help()
        for action in sp._actions:
            assert action.help, f"{name}: {action.option_strings or action.dest} has no help"
            for flag in action.option_strings:
                assert flag in text, f"{name}: {flag} missing from --help"


def test_help_exits_zero(capsys):
    assert cli.main(["--help"]) == 0
    assert cli.main(["fit", "--help"]) == 0
    out = capsys.readouterr().out
    assert "--bands" in out and "cpy" in out


def test_unknown_flag_is_usage_error(capsys):
    assert cli.main(["simulate", "--params", "x.json", "--n", "3", "--frobnicate"]) == 2
    assert cli.main([]) == 2


def test_simulate_example(left_params, tmp_path, capsys):
    out = tmp_path / "sim.csv"
    args = ["simulate", "--params", left_params, "--n", "1000", "--delta", "1", "--seed", "7", "--out", str(out)]
    assert cli.main(args) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,x,y" and len(lines) == 1001
    first = out.read_bytes()
    assert cli.main(args) == 0
    assert out.read_bytes() == first


def test_bad_parameters_are_data_errors(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"alpha1": -1, "beta1": 1, "alpha2": 0, "beta2": 0, "sigma2": 1}))
    assert cli.main(["simulate", "--params", str(p), "--n", "5"]) == 3
    assert "alpha1" in capsys.readouterr().err
    assert cli.main(["simulate", "--params", str(tmp_path / "missing.json"), "--n", "5"]) == 3


def test_chandler_fit_example(polar_csv, tmp_path):
    out = tmp_path / "fit.json"
    code = cli.main(["fit", "--model", "circular", "--likelihood", "marginal", "--bands=-0.97:-0.70cpy",
                     "--input", polar_csv, "--out", str(out)])
    assert code == 0
    res = json.loads(out.read_text())
    ell = res["ell"]
    assert {"alpha1", "beta1", "sigma2"} <= set(ell)
    # rates come back in radians per year
    assert ell["beta1"] / (2 * math.pi) == pytest.approx(-0.84, abs=0.01)
    assert res["converged"] is True


def test_empty_band_exit_3(polar_csv, capsys):
    code = cli.main(["fit", "--bands=2.0:2.001rad", "--input", polar_csv])
    assert code == 3
    assert "no Fourier frequency" in capsys.readouterr().err


def test_bad_band_syntax_is_usage_error(polar_csv, capsys):
    assert cli.main(["fit", "--bands=0.7:0.9", "--input", polar_csv]) == 2


def test_non_convergence_exit_4(polar_csv, tmp_path):
    out = tmp_path / "f.json"
    code = cli.main(["fit", "--bands=0.90:0.91cpy,-0.91:-0.90cpy", "--input", polar_csv, "--out", str(out), "--restarts", "0"])
    assert code == 4
    assert json.loads(out.read_text())["converged"] is False


def test_spectrum_columns(left_params, tmp_path, polar_csv):
    out = tmp_path / "s.csv"
    assert cli.main(["spectrum", "--params", left_params, "--n", "16", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "omega,s_pos,s_neg,r_re,r_im" and len(lines) == 17
    assert cli.main(["spectrum", "--input", polar_csv, "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "omega,I"
    assert cli.main(["spectrum"]) == 3


def test_ingest_and_filter(tmp_path, capsys):
    raw = tmp_path / "raw.txt"
    raw.write_text("# arcsec\n2000.0 0.1 0.2\n2000.1 0.3 0.4\n2000.2 0.5 0.6\n2000.3 0.7 0.8\n")
    out = tmp_path / "mas.csv"
    assert cli.main(["ingest", "--input", str(raw), "--unit", "arcsec", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[1] == "2000.0,100.0,200.0"
    filt = tmp_path / "f.csv"
    assert cli.main(["filter", "--input", str(out), "--bands=0:0rad", "--out", str(filt)]) == 0
    vals = [line.split(",") for line in filt.read_text().splitlines()[1:]]
    assert all(float(v[1]) == pytest.approx(400.0) for v in vals)
    bad = tmp_path / "gap.txt"
    bad.write_text("2000.0 1 1\n2000.1 1 1\n2000.3 1 1\n")
    assert cli.main(["ingest", "--input", str(bad)]) == 3
    assert "gap" in capsys.readouterr().err


def test_bootstrap_and_mc_small(polar_csv, left_params, tmp_path):
    out = tmp_path / "b.json"
    draws = tmp_path / "d.csv"
    code = cli.main(["bootstrap", "--model", "circular", "--bands=-0.97:-0.70cpy", "--input", polar_csv,
                     "--n-boot", "10", "--out", str(out), "--draws", str(draws)])
    assert code in (0, 4)
    body = json.loads(out.read_text())
    assert body["bootstrap"]["n_boot"] == 10
    assert draws.read_text().startswith("rep,alpha1")
    mc_out = tmp_path / "mc.json"
    code = cli.main(["mc", "--params", left_params, "--reps", "2", "--n", "256", "--substeps", "200",
                     "--method", "m=marginal@all", "--out", str(mc_out)])
    assert code == 0
    table = json.loads(mc_out.read_text())["table"]
    assert {r["parameter"] for r in table} == {"alpha1", "beta1", "alpha2", "beta2", "sigma2"}


def test_reproduce_fig1_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["reproduce", "fig1_spectra", "--out-dir", str(a)]) == 0
    assert cli.main(["reproduce", "fig1_spectra", "--out-dir", str(b)]) == 0
    for name in ("fig1_spectra.csv", "fig1_path_left.csv", "fig1_path_right.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_reproduce_without_bundled_data(tmp_path, monkeypatch):
    from ellipticalou import reproduce

    def missing():
        raise FileNotFoundError("bundled polar-motion snapshot is missing")

    monkeypatch.setattr(reproduce, "load_polar_snapshot", missing)
    assert cli.main(["reproduce", "annual", "--out-dir", str(tmp_path)]) == 3
