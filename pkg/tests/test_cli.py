import numpy as np
import pytest

from lipsolve import cli
from lipsolve.trace import CSV_COLUMNS


@pytest.fixture
def toy_csv(tmp_path):
    path = tmp_path / "x.csv"
    np.savetxt(path, np.array([1.0, 0.0]), delimiter=",")
    return str(path)


def _read_summary(out_dir):
    rows = (out_dir / "summary.csv").read_text().strip().splitlines()
    return dict(row.split(",") for row in rows[1:])


def test_solve_toy(tmp_path, toy_csv, capsys):
    out = tmp_path / "out"
    code = cli.main(["solve", "--x", toy_csv, "--eps", "0.5",
                     "--out-dir", str(out), "--no-figures"])
    assert code == 0
    assert "cost 0.500000" in capsys.readouterr().out
    summary = _read_summary(out)
    assert float(summary["cost"]) == pytest.approx(0.5, abs=1e-9)
    assert float(summary["residual"]) <= 0.5 + 1e-9
    f_star = np.loadtxt(out / "f_star.csv", delimiter=",")
    assert np.allclose(f_star, [0.5, 0.0], atol=1e-9)
    header = (out / "trace.csv").read_text().splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)


def test_solve_renders_figure(tmp_path, toy_csv):
    out = tmp_path / "out"
    code = cli.main(["solve", "--x", toy_csv, "--eps", "0.5",
                     "--out-dir", str(out)])
    assert code == 0
    assert (out / "trace.png").stat().st_size > 0


def test_solve_infeasible_exit_code(tmp_path, toy_csv):
    code = cli.main(["solve", "--x", toy_csv, "--eps", "2.0",
                     "--out-dir", str(tmp_path), "--no-figures"])
    assert code == 2


def test_solve_malformed_csv_exit_code(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("not,numeric,data\n")
    code = cli.main(["solve", "--x", str(bad), "--eps", "0.5",
                     "--out-dir", str(tmp_path), "--no-figures"])
    assert code == 1


def test_solve_missing_file_exit_code(tmp_path):
    code = cli.main(["solve", "--x", str(tmp_path / "absent.csv"),
                     "--eps", "0.5", "--out-dir", str(tmp_path),
                     "--no-figures"])
    assert code == 1


def test_solve_dense_operator(tmp_path):
    from lipsolve.operators import save_dense_csv

    x_path = tmp_path / "x.csv"
    np.savetxt(x_path, np.array([1.0, 0.2]), delimiter=",")
    op_path = tmp_path / "op.csv"
    save_dense_csv(op_path, np.eye(2))
    out = tmp_path / "out"
    code = cli.main(["solve", "--x", str(x_path), "--op", str(op_path),
                     "--eps", "0.5", "--out-dir", str(out), "--no-figures"])
    assert code == 0


@pytest.mark.parametrize("solver", ["cp", "csalsa", "acp"])
def test_solve_other_solvers(tmp_path, toy_csv, solver):
    out = tmp_path / solver
    code = cli.main(["solve", "--x", toy_csv, "--eps", "0.5",
                     "--solver", solver, "--max-iters", "400",
                     "--out-dir", str(out), "--no-figures"])
    assert code == 0
    assert float(_read_summary(out)["cost"]) == pytest.approx(0.5, abs=1e-3)


def _trace_rows(out_dir):
    return len((out_dir / "trace.csv").read_text().strip().splitlines()) - 1


def test_config_file_defaults_and_flag_precedence(tmp_path, toy_csv):
    cfg = tmp_path / "cfg.ini"
    cfg.write_text("max-iters = 5\noracle = accelerated-quadratic  # momentum\n")
    out_a = tmp_path / "a"
    code = cli.main(["--config", str(cfg), "solve", "--x", toy_csv,
                     "--eps", "0.5", "--out-dir", str(out_a), "--no-figures"])
    assert code == 0
    # the momentum oracle never stops early, so the budget is exact
    assert _trace_rows(out_a) == 6
    out_b = tmp_path / "b"
    code = cli.main(["--config", str(cfg), "solve", "--x", toy_csv,
                     "--eps", "0.5", "--max-iters", "9",
                     "--out-dir", str(out_b), "--no-figures"])
    assert code == 0
    assert _trace_rows(out_b) == 10


def test_config_file_missing(tmp_path, toy_csv):
    with pytest.raises(SystemExit):
        cli.main(["--config", str(tmp_path / "absent.ini"), "solve",
                  "--x", toy_csv, "--eps", "0.5"])


def test_denoise_outputs(tmp_path):
    out = tmp_path / "den"
    code = cli.main(["denoise", "--m", "8", "--stride", "8", "--seed", "1",
                     "--out-dir", str(out), "--no-figures"])
    assert code == 0
    for name in ("recovered.pgm", "noisy.pgm", "report.csv",
                 "efstar_hist.csv"):
        assert (out / name).exists()
    rows = dict(
        line.split(",")
        for line in (out / "report.csv").read_text().strip().splitlines()[1:]
    )
    assert float(rows["max_e_fstar"]) < float(rows["eps_squared"])


def test_verify_passes(tmp_path, capsys):
    code = cli.main(["verify", "--out-dir", str(tmp_path)])
    assert code == 0
    assert "passed" in capsys.readouterr().out
