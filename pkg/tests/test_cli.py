import csv

import pytest

from kamprop.cli import main
from kamprop.config import ConfigError, ExperimentConfig, load_config, parse_config


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def run(tmp_path, command, config_text=None, *extra):
    args = [command, "--out", str(tmp_path / "out"), "--quiet", *extra]
    if config_text is not None:
        cfg = tmp_path / "run.cfg"
        cfg.write_text(config_text)
        args += ["--config", str(cfg)]
    return main(args)


# configuration -------------------------------------------------------------


def test_defaults_match_figure_setup():
    cfg = ExperimentConfig().validate()
    assert (cfg.area, cfg.epsilon, cfg.t_start, cfg.t_end) == (1.0, 0.5, 0.0, 1.0)
    assert cfg.kam_params(1)[0].resolved(cfg.problem()).t_lower == 0.0
    assert cfg.scan_points == 101


def test_parse_config_values_and_comments():
    cfg = parse_config(
        """
        # a comment
        epsilon = 0.25   # trailing comment
        methods = kam1, magnus2
        t1 = optimize
        t2 = 0.4
        epsilons = 0.1 0.2 0.4
        svg = yes
        """
    )
    assert cfg.epsilon == 0.25
    assert cfg.methods == ["KAM1", "MAGNUS2"]
    assert cfg.t1 == "optimize" and cfg.t2 == 0.4
    assert cfg.epsilons == [0.1, 0.2, 0.4]
    assert cfg.svg is True
    assert [p.t_free for p in cfg.kam_params(2)] == [None, 0.4]


@pytest.mark.parametrize("text", [
    "bogus = 1",
    "epsilon = 0.1\nepsilon = 0.2",
    "epsilon = abc",
    "epsilon 0.3",
    "methods = RK4",
    "quad_order = 5",
    "epsilons = 0.1 0.2",
    "scan_lo = 0.8\nscan_hi = 0.2",
    "epsilon = -1",
])
def test_parse_config_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")


# commands -------------------------------------------------------------------


def test_config_error_exit_code(tmp_path, capsys):
    assert run(tmp_path, "fig1", "bogus = 1") == 2
    assert "unknown key" in capsys.readouterr().err


def test_io_error_exit_code(tmp_path):
    blocker = tmp_path / "out"
    blocker.write_text("not a directory")
    assert run(tmp_path, "optimize", "epsilon = 0", "--points", "5") == 4


def test_numeric_error_exit_code(tmp_path, capsys):
    assert run(tmp_path, "optimize", "series_max_terms = 1", "--points", "5") == 3
    assert "numerical failure" in capsys.readouterr().err


def test_fig1_columns_and_constant_baselines(fig1_run):
    rows = read_csv(fig1_run["paths"][0])
    assert rows[0] == ["t1", "log10_delta_dyson1", "log10_delta_magnus1", "log10_delta_kam1", "lambda2", "status"]
    body = rows[1:]
    assert len(body) == 101
    assert len({r[1] for r in body}) == 1 and len({r[2] for r in body}) == 1
    assert all(r[5] == "ok" for r in body)


def test_fig1_zero_epsilon_blank_logs(tmp_path):
    assert run(tmp_path, "fig1", "epsilon = 0", "--points", "5") == 0
    body = read_csv(tmp_path / "out" / "fig1.csv")[1:]
    assert len(body) == 5
    assert all(r[1] == r[2] == r[3] == "" and float(r[4]) == 0.0 for r in body)


def test_fig1_svg_does_not_alter_csv(tmp_path):
    assert run(tmp_path, "fig1", "epsilon = 0.3", "--points", "5") == 0
    plain = (tmp_path / "out" / "fig1.csv").read_bytes()
    assert run(tmp_path, "fig1", "epsilon = 0.3", "--points", "5", "--svg") == 0
    assert (tmp_path / "out" / "fig1.csv").read_bytes() == plain
    svg = (tmp_path / "out" / "fig1.svg").read_text()
    assert svg.startswith("<?xml") and "<polyline" in svg


def test_optimize_default_and_narrow_range(tmp_path, capsys):
    assert main(["optimize", "--out", str(tmp_path / "a")]) == 0
    assert "t1* =" in capsys.readouterr().out
    rows = read_csv(tmp_path / "a" / "optimize.csv")
    assert rows[0] == ["kind", "parameter", "value", "lambda"]
    refined = float(rows[-1][2])
    assert rows[-1][0] == "refined"
    assert refined == pytest.approx(0.39, abs=0.03)
    narrow = tmp_path / "narrow"
    narrow.mkdir()
    assert run(narrow, "optimize", "scan_lo = 0.3\nscan_hi = 0.5\nscan_points = 201") == 0
    assert float(read_csv(narrow / "out" / "optimize.csv")[-1][2]) == pytest.approx(refined, abs=1e-3)


def test_optimize_zero_epsilon_warns(tmp_path, capsys):
    assert run(tmp_path, "optimize", "epsilon = 0", "--points", "11") == 0
    assert "degenerate" in capsys.readouterr().err
    assert float(read_csv(tmp_path / "out" / "optimize.csv")[-1][3]) == 0.0


def test_scaling_slopes(tmp_path):
    assert run(tmp_path, "scaling", "methods = KAM1, MAGNUS1, DYSON1") == 0
    rows = read_csv(tmp_path / "out" / "scaling.csv")
    assert rows[0] == ["method", "epsilon", "delta", "log10_delta"]
    assert len(rows) == 1 + 9
    slopes = {m: float(s) for m, s in read_csv(tmp_path / "out" / "scaling_slopes.csv")[1:]}
    assert abs(slopes["KAM1"] - 2) <= 0.3
    assert abs(slopes["MAGNUS1"] - 2) <= 0.4


def test_sweep(tmp_path):
    text = "methods = MAGNUS1, KAM1\nsweep_parameter = t1\nsweep_lo = 0\nsweep_hi = 1"
    assert run(tmp_path, "sweep", text, "--points", "3", "--svg") == 0
    rows = read_csv(tmp_path / "out" / "sweep.csv")
    assert rows[0] == ["t1", "delta_magnus1", "delta_kam1", "lambda_kam1", "status"]
    assert [r[0] for r in rows[1:]] == ["0", "0.5", "1"]
    assert len({r[1] for r in rows[1:]}) == 1
    assert (tmp_path / "out" / "sweep.svg").exists()
