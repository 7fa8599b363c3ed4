"""End-to-end CLI behavior and exit codes."""

import json
import pathlib
import subprocess
import sys

import numpy as np
import pytest

from sirmc import load_observed, rmse, save_matrix
from sirmc.cli import main

REPO = pathlib.Path(__file__).resolve().parent.parent
DEMO_OBS = REPO / "data" / "demo_rank1_obs.csv"
DEMO_FULL = REPO / "data" / "demo_rank1_full.csv"

FAST_SOLVER = ["--mu", "1.3", "--max-iters", "150"]


def _write_matrix(path, X, mask=None):
    X = np.asarray(X, dtype=float)
    body = np.where(mask, X, np.nan) if mask is not None else X
    save_matrix(body, path)
    return str(path)


class TestComplete:
    def test_fully_observed_identity(self, tmp_path, rng):
        X = rng.standard_normal((10, 8)) * 3.0
        inp = _write_matrix(tmp_path / "in.csv", X)
        out = tmp_path / "out.csv"
        code = main(["complete", inp, "--method", "nnm", "--out", str(out)])
        assert code == 0
        M = load_observed(str(out)).values
        assert np.linalg.norm(M - X) / np.linalg.norm(X) <= 1e-6
        trace_lines = (tmp_path / "out.csv.trace.csv").read_text().splitlines()
        assert trace_lines[0] == "k,rel_E,delta_M,feas,rho,wall_time_s"
        assert len(trace_lines) > 1

    def test_demo_fixture_recovers_ground_truth(self, tmp_path):
        out = tmp_path / "m.csv"
        code = main(["complete", str(DEMO_OBS), "--method", "how", "--out", str(out)])
        assert code == 0
        M = load_observed(str(out)).values
        X_full = load_observed(str(DEMO_FULL)).values
        assert rmse(X_full, M) < 1e-3

    def test_mask_file_variant(self, tmp_path, rng):
        X = rng.standard_normal((6, 5))
        inp = _write_matrix(tmp_path / "in.csv", X)
        coords = [(i, j) for i in range(6) for j in range(5) if (i + j) % 7 != 0]
        mask_file = tmp_path / "mask.csv"
        mask_file.write_text("".join(f"{i},{j}\n" for i, j in coords))
        out = tmp_path / "out.csv"
        code = main(["complete", inp, "--mask", str(mask_file), "--out", str(out),
                     *FAST_SOLVER])
        assert code == 0

    def test_missing_file_is_error(self, tmp_path):
        code = main(["complete", str(tmp_path / "nope.csv"), "--out",
                     str(tmp_path / "o.csv")])
        assert code == 1

    def test_iteration_cap_exit_code(self, tmp_path, rng):
        X = rng.standard_normal((8, 6)) * 5.0
        inp = _write_matrix(tmp_path / "in.csv", X)
        code = main(["complete", inp, "--max-iters", "2", "--out",
                     str(tmp_path / "o.csv")])
        assert code == 2


class TestSweep:
    def test_paper_grid_row_count(self, tmp_path):
        out = tmp_path / "grid.csv"
        code = main(["sweep", "--preset", "paper-grid", "--trials", "1",
                     "--methods", "how", "--m", "40", "--n", "30",
                     *FAST_SOLVER, "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + 3 * 3 * 1

    def test_zero_trials_usage_error(self, tmp_path):
        code = main(["sweep", "--preset", "paper-grid", "--trials", "0",
                     "--out", str(tmp_path / "g.csv")])
        assert code == 1

    def test_grid_required(self, tmp_path):
        code = main(["sweep", "--trials", "1", "--out", str(tmp_path / "g.csv")])
        assert code == 1

    def test_seeded_runs_are_byte_identical(self, tmp_path):
        args = ["sweep", "--fr-values", "0.1", "--fm-values", "0.2,0.4",
                "--trials", "2", "--methods", "how,nnm", "--m", "30", "--n", "20",
                "--seed", "7", "--deterministic", *FAST_SOLVER]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestBench:
    def test_small_bench(self, tmp_path):
        out = tmp_path / "rt.csv"
        code = main(["bench", "--ranks", "2,3", "--trials", "1",
                     "--methods", "nnm,how", "--m", "25", "--n", "20",
                     *FAST_SOLVER, "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "rank,method,mean_seconds,trials"
        assert len(lines) == 1 + 2 * 2

    def test_empty_ranks_header_only(self, tmp_path):
        out = tmp_path / "rt.csv"
        code = main(["bench", "--ranks", "", "--trials", "1", "--out", str(out)])
        assert code == 0
        assert out.read_text().splitlines() == ["rank,method,mean_seconds,trials"]


class TestProxCurve:
    def test_how_curve(self, tmp_path):
        out = tmp_path / "curve.csv"
        code = main(["prox-curve", "--method", "how", "--lam", "1", "--xmin", "-3",
                     "--xmax", "3", "--step", "0.01", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x,loss,prox,implicit_regularizer"
        assert len(lines) == 1 + 601
        rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        inside = np.abs(rows[:, 0]) <= 1.0
        assert np.all(rows[inside, 2] == 0.0)

    def test_nnm_prox_is_soft_threshold(self, tmp_path):
        out = tmp_path / "curve.csv"
        code = main(["prox-curve", "--method", "nnm", "--lam", "1", "--xmin", "-2",
                     "--xmax", "2", "--step", "0.5", "--out", str(out)])
        assert code == 0
        rows = np.array([[float(v) for v in line.split(",")]
                         for line in out.read_text().splitlines()[1:]])
        expected = np.sign(rows[:, 0]) * np.maximum(np.abs(rows[:, 0]) - 1.0, 0.0)
        assert np.allclose(rows[:, 2], expected, atol=1e-12)

    def test_nonpositive_step_usage_error(self, tmp_path):
        code = main(["prox-curve", "--step", "0", "--out", str(tmp_path / "c.csv")])
        assert code == 1


class TestSelftest:
    @pytest.mark.slow
    def test_passes_and_json(self, capsys):
        code = main(["selftest", "--json"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["all_passed"]
        assert {s["name"] for s in report["suites"]} >= {
            "prox_oddness", "prox_thresholding", "prox_monotone",
            "bias_dominance", "loss_smoothness", "moreau_oracle",
            "spectral_shrinkage"}

    @pytest.mark.slow
    def test_corrupted_prox_fails(self):
        code = main(["selftest", "--inject-prox-bias", "0.05"])
        assert code == 3


class TestParsing:
    def test_solver_flag_defaults(self):
        from sirmc.cli import build_parser
        args = build_parser().parse_args(["complete", "x.csv", "--out", "o.csv"])
        assert args.mu == 1.05
        assert args.xi == 1e-7
        assert args.max_iters == 1000

    def test_env_var_thread_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SIRMC_THREADS", "2")
        out = tmp_path / "g.csv"
        code = main(["sweep", "--fr-values", "0.1", "--fm-values", "0.2",
                     "--trials", "2", "--methods", "how", "--m", "20", "--n", "15",
                     *FAST_SOLVER, "--out", str(out)])
        assert code == 0
        monkeypatch.setenv("SIRMC_THREADS", "junk")
        code = main(["sweep", "--fr-values", "0.1", "--fm-values", "0.2",
                     "--trials", "1", "--methods", "how", "--m", "20", "--n", "15",
                     *FAST_SOLVER, "--out", str(out)])
        assert code == 1

    def test_unknown_flag_exit_one(self, tmp_path):
        assert main(["complete", "x.csv", "--bogus", "--out", "o.csv"]) == 1

    def test_unknown_method_exit_one(self, tmp_path):
        code = main(["sweep", "--preset", "paper-grid", "--trials", "1",
                     "--methods", "wnnm", "--out", str(tmp_path / "g.csv")])
        assert code == 1

    def test_module_entry_point(self, tmp_path):
        out = tmp_path / "c.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "sirmc", "prox-curve", "--method", "hoc",
             "--step", "0.1", "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert out.exists()
