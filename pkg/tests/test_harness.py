import io
import math

import numpy as np
import pytest

from hbode.csvio import (SWEEP_COLUMNS, float_column, read_table, write_table)
from hbode.errors import (ConfigError, ContractViolation,
                          DegenerateScheduleError, DivergenceError, SchemaError)
from hbode.harness import config, runner
from hbode.harness.baseline import run_gd_baseline
from hbode.harness.cli import main
from hbode.harness.config import RunConfig, load_config
from hbode.problems import cos_sum, quadratic


# config ----------------------------------------------------------------------

def test_parse_T_grid():
    assert config.parse_T_grid("100, 1000") == (100.0, 1000.0)
    grid = config.parse_T_grid("logspace:2:4:5")
    np.testing.assert_allclose(grid, [1e2, 10 ** 2.5, 1e3, 10 ** 3.5, 1e4])
    with pytest.raises(ConfigError):
        config.parse_T_grid("logspace:2:x:5")
    with pytest.raises(ConfigError):
        RunConfig(T_grid=(1000.0, 100.0))
    with pytest.raises(ConfigError):
        RunConfig(T_grid=(100.0, 100.0))


def test_parse_x0_random_reproducible():
    assert config.parse_x0("random:3:0.5") == ("random", 3, 0.5)
    cfg = RunConfig(x0_spec=("random", 3, 0.5), dim=4)
    a, b = cfg.build_problem(), cfg.build_problem()
    np.testing.assert_array_equal(a.x0, b.x0)
    assert np.all(np.abs(a.x0) <= 0.5)
    with pytest.raises(ConfigError):
        config.parse_x0("gaussian")


def test_config_file_with_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nproblem = rosenbrock\ndim = 2\n"
                    "T = 10, 20, 40   # horizons\nstride = 5\n")
    cfg = load_config(path, {"stride": "7", "dim": None})
    assert cfg.problem == "rosenbrock" and cfg.dim == 2
    assert cfg.T_grid == (10.0, 20.0, 40.0)
    assert cfg.checkpoint_stride == 7


@pytest.mark.parametrize("text", ["bogus = 1\n", "dim = two\n", "no equals sign\n",
                                  "method = Euler\n", "problem = sphere\n",
                                  "h = -1\n"])
def test_config_errors(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(path)


def test_sampling_seed(monkeypatch):
    monkeypatch.delenv("HBODE_SEED", raising=False)
    assert config.sampling_seed() == config.DEFAULT_SEED
    monkeypatch.setenv("HBODE_SEED", "17")
    assert config.sampling_seed() == 17
    monkeypatch.setenv("HBODE_SEED", "abc")
    with pytest.raises(ConfigError):
        config.sampling_seed()


def test_quadratic_needs_alpha():
    with pytest.raises(DegenerateScheduleError):
        RunConfig(problem="quadratic", dim=1).build_problem()
    RunConfig(problem="quadratic", dim=1, alpha_override=2.0).build_problem()


# run -------------------------------------------------------------------------

def test_cmd_run_quadratic(tmp_path):
    cfg = RunConfig(problem="quadratic", dim=1, T_grid=(10.0,), alpha_override=2.0,
                    h_rule=1e-3, output_dir=str(tmp_path))
    out = io.StringIO()
    assert runner.cmd_run(cfg, out) == 0
    fields = dict(tok.split("=", 1) for tok in out.getvalue().splitlines()[0].split())
    assert float(fields["energy_residual_max"]) <= 1e-8
    header, data = read_table(tmp_path / "run_T10.csv")
    assert float_column(data, "t")[-1] == 10.0


def test_cmd_run_cos_sum_satisfied(tmp_path):
    cfg = RunConfig(T_grid=(1000.0,), output_dir=str(tmp_path))
    out = io.StringIO()
    assert runner.cmd_run(cfg, out) == 0
    assert "satisfied=true" in out.getvalue()


def test_cmd_run_errors(tmp_path, capsys):
    cfg = RunConfig(problem="quadratic", dim=1, output_dir=str(tmp_path))
    assert runner.cmd_run(cfg) == 2
    assert "alpha" in capsys.readouterr().err
    # T below 3 / (2 alpha): bound vacuous
    assert runner.cmd_run(RunConfig(T_grid=(0.5,), output_dir=str(tmp_path))) == 2
    # unstable explicit step
    bad = RunConfig(problem="quadratic", dim=1, alpha_override=1.0, h_rule=10.0,
                    T_grid=(1e5,), output_dir=str(tmp_path))
    with np.errstate(over="ignore", invalid="ignore"):
        assert runner.cmd_run(bad) == 2
    assert "non-finite" in capsys.readouterr().err


# sweep -----------------------------------------------------------------------

def _small_sweep(tmp_path, **kw):
    return RunConfig(T_grid=(20.0, 40.0, 80.0), dim=4, output_dir=str(tmp_path), **kw)


def test_cmd_sweep_outputs(tmp_path):
    out = io.StringIO()
    assert runner.cmd_sweep(_small_sweep(tmp_path), out) == 0
    header, data = read_table(tmp_path / "sweep.csv")
    assert header == SWEEP_COLUMNS
    assert data["satisfied"] == ["true"] * 3
    text = out.getvalue()
    assert "reported only" in text and "-0.571429" in text


def test_sweep_deterministic_and_parallel(tmp_path):
    rows = []
    for sub, workers in (("a", 1), ("b", 1), ("c", 3)):
        d = tmp_path / sub
        assert runner.cmd_sweep(_small_sweep(d, workers=workers), io.StringIO()) == 0
        _, data = read_table(d / "sweep.csv")
        data.pop("wall_time_seconds")
        rows.append(data)
        assert (d / "rates.csv").read_text() == (tmp_path / "a" / "rates.csv").read_text()
    assert rows[0] == rows[1] == rows[2]


def test_sweep_records_short_horizon(tmp_path):
    cfg = RunConfig(T_grid=(0.5, 20.0, 40.0), dim=4, output_dir=str(tmp_path))
    assert runner.cmd_sweep(cfg, io.StringIO()) == 1
    _, data = read_table(tmp_path / "sweep.csv")
    assert data["satisfied"][0] == "false"
    assert data["error"][0] == "horizon too short"


def test_sweep_needs_three_horizons(tmp_path):
    cfg = RunConfig(T_grid=(20.0, 40.0), output_dir=str(tmp_path))
    assert runner.cmd_sweep(cfg, io.StringIO()) == 2


# verify ----------------------------------------------------------------------

def test_cmd_verify_default_passes(tmp_path):
    out = io.StringIO()
    assert runner.cmd_verify(RunConfig(output_dir=str(tmp_path)), out) == 0
    assert "FAIL" not in out.getvalue()


def test_cmd_verify_rosenbrock(tmp_path):
    # the stiff Hessian scale needs a finer step than auto for the
    # dissipation bound to hold at 1e-9 slack
    cfg = RunConfig(problem="rosenbrock", dim=2, T_grid=(300.0,), h_rule=2.5e-4,
                    checkpoint_stride=10, output_dir=str(tmp_path))
    out = io.StringIO()
    assert runner.cmd_verify(cfg, out) == 0, out.getvalue()


def test_cmd_verify_negative_control(tmp_path):
    out = io.StringIO()
    cfg = RunConfig(T_grid=(100.0,), output_dir=str(tmp_path))
    assert runner.cmd_verify(cfg, out, avg_alpha_scale=0.5) == 1
    failed = [ln for ln in out.getvalue().splitlines() if ln.startswith("FAIL")]
    assert failed and all("grad_avg" in ln for ln in failed)


def test_averaging_suite_margin():
    assert runner.lemma32_suite(cos_sum(2), n_paths=3, nodes=501, seed=1) <= 0


# bound and CLI ---------------------------------------------------------------

def test_cmd_bound_examples():
    out = io.StringIO()
    assert runner.cmd_bound(1 / 3, 1, 128, out) == 0
    text = out.getvalue()
    assert "alpha = 0.5\n" in text and "finite_T_bound = 0.07466666667" in text
    out = io.StringIO()
    runner.cmd_bound(1 / 3, 1, 1, out)
    assert "alpha = 1\n" in out.getvalue() and "vacuous" in out.getvalue()
    out = io.StringIO()
    runner.cmd_bound(1 / 3, 128, 1, out)
    assert out.getvalue().startswith("alpha = 2\n")


def test_cli_bound_fraction(capsys):
    assert main(["bound", "--L2", "1/3", "--delta-f", "1", "--T", "128"]) == 0
    assert "alpha = 0.5" in capsys.readouterr().out


def test_cli_run_and_plot(tmp_path, capsys):
    assert main(["run", "--problem", "cos_sum", "--dim", "3", "--T", "20",
                 "--stride", "10", "--out", str(tmp_path)]) == 0
    assert main(["sweep", "--dim", "3", "--T", "20,40,80", "--out", str(tmp_path)]) == 0
    assert main(["plot", str(tmp_path / "run_T20.csv"), str(tmp_path / "sweep.csv"),
                 "--out", str(tmp_path / "fig")]) == 0
    assert (tmp_path / "fig" / "sweep.svg").read_text().startswith("<?xml")
    assert (tmp_path / "fig" / "run_T20.svg").exists()


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"problem = cos_sum\ndim = 2\nT = 20\nout = {tmp_path}\n")
    assert main(["run", "--config", str(cfg)]) == 0
    assert (tmp_path / "run_T20.csv").exists()


def test_cli_errors(tmp_path, capsys):
    assert main(["run", "--problem", "sphere", "--out", str(tmp_path)]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["plot", str(empty)]) == 2
    assert "empty" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_plot_schema_errors(tmp_path):
    from hbode.harness.plotting import plot_csv
    path = tmp_path / "x.csv"
    write_table(path, ("a", "b"), [{"a": 1, "b": 2}])
    with pytest.raises(SchemaError):
        plot_csv(path)
    path.write_text(",".join(SWEEP_COLUMNS) + "\n")
    with pytest.raises(SchemaError):
        plot_csv(path)


# baseline --------------------------------------------------------------------

def test_gd_baseline_quadratic_one_step():
    xs, gn = run_gd_baseline(quadratic(3).with_x0([1.0, -2.0, 3.0]), 1, 1.0)
    np.testing.assert_array_equal(xs[1], 0.0)
    assert gn[1] == 0.0


def test_gd_baseline_diverges():
    with pytest.raises(DivergenceError):
        run_gd_baseline(quadratic(1), 200, 2.5)
    with pytest.raises(ContractViolation):
        run_gd_baseline(quadratic(1), 5, 0.0)


def test_gd_baseline_cos_sum():
    _, gn = run_gd_baseline(cos_sum(10), 10_000, 0.5)
    assert gn[-1] < 1e-3
    assert math.isclose(gn[0], np.linalg.norm(cos_sum(10).eval_grad(cos_sum(10).x0)))
