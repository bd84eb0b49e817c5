import json

import pytest

from wml.scripts.bench import build_parser, main


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(workdir, *argv):
    return main([*argv, "--cache-dir", str(workdir / "cache")])


def write_config(path, **sections):
    path.write_text(json.dumps(sections), encoding="utf-8")
    return str(path)


class TestParser:
    def test_mode_accepts_dash(self):
        args = build_parser().parse_args(["simulate", "--mode", "monte-carlo"])
        assert args.mode == "monte_carlo"

    def test_compare_defaults(self):
        args = build_parser().parse_args(["compare-tomography"])
        assert args.d_values == [2, 4, 8, 16]
        assert args.eps == 0.1
        assert args.t == 1.0

    def test_bad_d_values(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["compare-tomography", "--d-values", "2,x"])


class TestCommands:
    def test_no_command_exits_2(self, workdir, capsys):
        assert main(["--cache-dir", str(workdir / "cache")]) == 2
        assert "usage" in capsys.readouterr().err

    def test_compare_tomography_csv(self, workdir, capsys):
        out = workdir / "compare.csv"
        assert run(workdir, "compare-tomography", "--d-values", "2,4", "--out", str(out)) == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "d,delta,tomography,wml,ratio"
        assert lines[1].split(",")[3] == "10"
        assert capsys.readouterr().out.startswith("Compare: OK (2 dimensions")

    def test_simulate_amplitude_damping(self, workdir, capsys):
        config = write_config(
            workdir / "ad.json",
            experiment={"n": 256},
            spec={"kind": "lindblad", "preset": "amplitude_damping"},
            rho=[[0, 0], [0, 1]],
        )
        assert run(workdir, "simulate", "--config", config, "--json") == 0
        data = json.loads(capsys.readouterr().out)
        assert data["error_vs_oracle"] < 0.02
        assert data["consumed"] == {"psi_1": 256}

    def test_simulate_zero_time(self, workdir, capsys):
        config = write_config(workdir / "c.json", experiment={"t": 0.0, "n": 4})
        assert run(workdir, "simulate", "--config", config, "--json") == 0
        data = json.loads(capsys.readouterr().out)
        assert data["error_vs_oracle"] == pytest.approx(0.0, abs=1e-12)

    def test_simulate_eps_estimates(self, workdir, capsys):
        config = write_config(workdir / "c.json", experiment={"algorithm": 2, "n": 8})
        assert run(workdir, "simulate", "--config", config, "--eps", "0.1", "--json") == 0
        data = json.loads(capsys.readouterr().out)
        assert data["copies_needed"]["n"] == 8
        assert data["copies_needed"]["total"] == 24

    def test_monte_carlo_output_reproducible(self, workdir):
        config = write_config(workdir / "c.json", experiment={"n": 32, "seed": 3})
        first, second = workdir / "a.json", workdir / "b.json"
        for out in (first, second):
            args = ("--config", config, "--mode", "monte-carlo", "--out", str(out))
            assert run(workdir, "simulate", *args) == 0
        assert first.read_bytes() == second.read_bytes()
        assert "wall_time" not in json.loads(first.read_text(encoding="utf-8"))

    def test_monte_carlo_rejected_for_algorithm_two(self, workdir, capsys):
        config = write_config(workdir / "c.json", experiment={"algorithm": 2, "n": 4})
        assert run(workdir, "simulate", "--config", config, "--mode", "monte_carlo") == 2
        err = capsys.readouterr().err
        assert err.startswith("Error: ")
        assert "--mode expectation" in err

    def test_invalid_config_exits_2(self, workdir, capsys):
        config = write_config(workdir / "c.json", experiment={"n_values": [16, 8, 32, 64]})
        assert run(workdir, "sweep", "--config", config) == 2
        assert "strictly increasing" in capsys.readouterr().err

    def test_bad_seed_exits_2(self, workdir, capsys):
        config = write_config(workdir / "c.json", experiment={"seed": "abc", "mode": "monte_carlo"})
        assert run(workdir, "simulate", "--config", config) == 2
        assert "seed must be a nonnegative integer" in capsys.readouterr().err

    def test_tol_loosens_density_check(self, workdir, capsys):
        # trace off by 5e-7: rejected at the default 1e-10, accepted at 1e-6
        config = write_config(workdir / "c.json", rho=[[0.5000005, 0.0], [0.0, 0.5]])
        assert run(workdir, "simulate", "--config", config) == 2
        assert "rho is not a density matrix" in capsys.readouterr().err
        assert run(workdir, "simulate", "--config", config, "--tol", "1e-6", "--json") == 0
        data = json.loads(capsys.readouterr().out)
        assert data["error_vs_oracle"] < 0.05

    def test_missing_config_hint(self, workdir, capsys):
        assert run(workdir, "simulate", "--config", str(workdir / "missing.json")) == 2
        assert "Omit --config" in capsys.readouterr().err

    def test_sweep_csv(self, workdir, capsys):
        config = write_config(
            workdir / "c.json", experiment={"algorithm": 2, "n_values": [4, 8, 16, 32]}
        )
        out = workdir / "sweep.csv"
        assert run(workdir, "sweep", "--config", config, "--out", str(out)) == 0
        text = out.read_text(encoding="utf-8")
        rows = [line for line in text.splitlines() if line and not line.startswith("#")]
        assert rows[0].split(",")[:4] == ["algorithm", "ordering", "n", "choi_proxy_error"]
        assert len(rows) == 9
        assert "# slope_palindromic=" in text
        assert "wall_ms" not in rows[0]
        assert capsys.readouterr().out.startswith("Sweep: OK (alg 2, 8 points")

    def test_verify_lemmas(self, workdir, capsys):
        assert run(workdir, "verify-lemmas", "--trials", "3") == 0
        assert capsys.readouterr().out.startswith("Lemmas: PASS (8/8 suites passed)")

    def test_verify_lemmas_corrupted(self, workdir, capsys):
        assert run(workdir, "verify-lemmas", "--trials", "3", "--corrupt-m") == 4
        assert capsys.readouterr().out.startswith("Lemmas: FAIL (7/8 suites passed)")

    def test_prep_state(self, workdir, capsys):
        config = write_config(
            workdir / "c.json",
            experiment={"algorithm": 3},
            spec={"kind": "linear", "preset": "linear_pair"},
        )
        assert run(workdir, "prep-state", "--config", config, "--json") == 0
        data = json.loads(capsys.readouterr().out)
        assert data["success_prob"] == pytest.approx(0.5)
        assert data["aa_rounds"] == 0
        assert data["fidelity"] == pytest.approx(1.0)

    def test_prep_state_needs_linear_or_poly(self, workdir, capsys):
        assert run(workdir, "prep-state") == 2
        assert "linear" in capsys.readouterr().err


class TestReports:
    def test_list_and_get(self, workdir, capsys):
        cache_dir = str(workdir / "cache")
        assert run(workdir, "compare-tomography", "--d-values", "2") == 0
        report_id = capsys.readouterr().out.strip().rsplit("[", 1)[1].rstrip("]")
        assert main(["--cache-dir", cache_dir, "--list-reports"]) == 0
        assert report_id in capsys.readouterr().out
        assert main(["--cache-dir", cache_dir, "--get-report", report_id]) == 0
        assert json.loads(capsys.readouterr().out)["rows"][0]["d"] == 2

    def test_unknown_report(self, workdir, capsys):
        assert main(["--cache-dir", str(workdir / "cache"), "--get-report", "sweep-0"]) == 1
        assert "Use --list-reports" in capsys.readouterr().err

    def test_empty_cache(self, workdir, capsys):
        assert main(["--cache-dir", str(workdir / "cache"), "--list-reports"]) == 0
        assert "No cached reports found" in capsys.readouterr().out
