import json

import numpy as np
import pytest

from locchain import cli, resonance_gap
from locchain.sequences import base, energy, mod6


@pytest.fixture(autouse=True)
def _workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("LOCCHAIN_JOBS", raising=False)
    return tmp_path


def read_csv(path):
    lines = open(path).read().splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    cols = body[0].split(",")
    rows = [r.split(",") for r in body[1:]]
    return header, cols, rows


def run(*argv):
    return cli.main(list(argv))


class TestSeq:
    def test_values_and_format(self):
        assert run("seq", "--variant", "base", "--alpha", "0.3", "--n", "1..50", "--out", "s.csv", "--jobs", "1") == 0
        header, cols, rows = read_csv("s.csv")
        assert cols == ["n", "eps_over_h"]
        assert header[0].startswith("# locchain seq")
        assert len(rows) == 50
        got = np.array([float(r[1]) for r in rows])
        np.testing.assert_allclose(got, energy(base(0.3), np.arange(1, 51)), rtol=1e-11)
        # 12 significant digits
        assert all(len(r[1].lstrip("-").replace(".", "").lstrip("0")) <= 12 for r in rows)

    def test_manifest(self):
        run("seq", "--alpha", "0.2", "--n", "1..5", "--out", "s.csv")
        m = json.load(open("s.csv.manifest.json"))
        assert m["command"] == "seq"
        assert m["parameters"]["alpha"] == 0.2
        assert m["outputs"] == ["s.csv"]
        assert {"code_version", "seed_registry", "backend"} <= set(m)

    def test_byte_identical_rerun(self):
        run("seq", "--variant", "random", "--W", "26", "--seed", "4", "--n", "1..30", "--out", "a.csv")
        run("seq", "--variant", "random", "--W", "26", "--seed", "4", "--n", "1..30", "--out", "b.csv")
        a = open("a.csv").read().replace("a.csv", "")
        b = open("b.csv").read().replace("b.csv", "")
        assert a == b
        header, cols, _ = read_csv("a.csv")
        assert cols[1] == "eps_over_j"
        assert any("random" in h and "4" in h for h in header if h.startswith("# seeds"))

    def test_polynomials(self):
        run("seq", "--n", "1..4", "--out", "s.csv", "--poly", "p.json")
        assert json.load(open("p.json"))["2"] == [1, 1, -1]

    def test_default_output_name(self):
        assert run("seq", "--n", "1..3") == 0
        assert open("seq.csv").read()


class TestExitCodes:
    def test_unknown_flag(self, capsys):
        assert run("seq", "--nope", "1") == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand(self):
        assert run("frobnicate") == 2

    def test_domain_error_names_condition(self, capsys):
        assert run("seq", "--alpha", "1.5") == 2
        assert "alpha must lie in (0, 1)" in capsys.readouterr().err

    def test_validation_before_work(self, tmp_path):
        assert run("ipr1", "--alpha-grid", "0.1:0.2:0.05", "--L", "1", "--out", "x.csv") == 2
        assert not (tmp_path / "x.csv").exists()

    def test_bad_grid(self):
        assert run("ipr1", "--alpha-grid", "0.3:0.1:0.1") == 2

    def test_internal_error(self, monkeypatch, capsys):
        def boom(args, jobs):
            raise RuntimeError("kaput")

        monkeypatch.setattr(cli, "cmd_seq", boom)
        # the parser binds the function when it is built, after the patch
        assert run("seq") == 1
        assert "internal error" in capsys.readouterr().err

    def test_help(self):
        assert run("--help") == 0


class TestJobs:
    def test_flag_env_default(self, monkeypatch):
        assert cli.resolve_jobs(3) == 3
        monkeypatch.setenv("LOCCHAIN_JOBS", "2")
        assert cli.resolve_jobs(None) == 2
        monkeypatch.setenv("LOCCHAIN_JOBS", "x")
        with pytest.raises(cli.UsageError):
            cli.resolve_jobs(None)
        monkeypatch.delenv("LOCCHAIN_JOBS")
        assert cli.resolve_jobs(None) >= 1
        with pytest.raises(cli.UsageError):
            cli.resolve_jobs(0)

    def test_order_independent_of_jobs(self):
        args = ["ipr1", "--alpha-grid", "0.1:0.3:0.05", "--L", "30"]
        run(*args, "--jobs", "1", "--out", "a.csv")
        run(*args, "--jobs", "2", "--out", "b.csv")
        assert read_csv("a.csv")[2] == read_csv("b.csv")[2]

    def test_hist_order_independent_of_jobs(self):
        args = ["hist", "--realizations", "4", "--L", "6", "--N", "3", "--bins", "10"]
        run(*args, "--jobs", "1", "--out", "a.json")
        run(*args, "--jobs", "3", "--out", "b.json")
        assert json.load(open("a.json")) == json.load(open("b.json"))


class TestSubcommands:
    def test_nu(self):
        assert run("nu", "--n", "1..3", "--m", "10,20", "--out", "nu.csv", "--hcounts", "h.json") == 0
        _, cols, rows = read_csv("nu.csv")
        assert cols == ["n", "m", "lowdeg", "nu"]
        assert len(rows) == 6
        assert "1,10" in json.load(open("h.json"))

    def test_ipr1_drops_zero_alpha(self):
        assert run("ipr1", "--alpha-grid", "0:0.2:0.1", "--L", "20", "--out", "i.csv") == 0
        header, cols, rows = read_csv("i.csv")
        assert cols == ["alpha", "mean_ipr", "max_ipr", "argmax_site"]
        assert [r[0] for r in rows] == ["0.1", "0.2"]
        assert any("dropped_grid_points = 1" in h for h in header)

    def test_iprN_with_report(self):
        assert run("iprN", "--L", "8", "--N", "4", "--alpha-grid", "0.05,0.3", "--report", "0.05", "--out", "n.csv") == 0
        _, cols, rows = read_csv("n.csv")
        assert cols == ["alpha", "mean_ipr", "max_ipr", "n_degenerate"]
        rep = json.load(open("n.csv.report.json"))
        assert rep and "registers" in rep[0]

    def test_gap_matches_library(self):
        assert run("gap", "--variant", "mod6", "--alpha", "0.25", "--alphap", "0.22", "--out", "g.csv") == 0
        header, cols, rows = read_csv("g.csv")
        assert cols == ["n", "k1", "k2", "k3", "k4", "kappa", "class", "deps_over_h"]
        want = resonance_gap.min_gap(mod6(0.25, 0.22)).min_gap_over_h
        assert min(float(r[-1]) for r in rows) == pytest.approx(want, rel=1e-11)

    def test_gap_noise(self):
        assert run("gap-noise", "--D-exp", "4,5", "--seeds", "2", "--nmax", "100", "--out", "r.csv") == 0
        _, cols, rows = read_csv("r.csv")
        assert cols == ["D_exp", "D", "seed", "R"] and len(rows) == 4

    def test_broadband_default_threshold(self):
        assert run("broadband", "--variant", "base", "--alpha", "0.25", "--nmax", "60", "--out", "b.csv") == 0
        header, cols, rows = read_csv("b.csv")
        assert cols == ["n", "deps_over_h", "n_mod6_is_5"]
        assert all(float(r[1]) < 0.25**4 for r in rows)

    def test_evolve(self):
        assert run("evolve", "--variant", "base", "--tmax", "100", "--ppd", "10", "--out", "e.csv") == 0
        _, cols, rows = read_csv("e.csv")
        assert cols == ["t", "amp_sq"]
        assert float(rows[0][1]) == pytest.approx(1.0)

    def test_evolve_register_outside(self):
        assert run("evolve", "--register", "400,416") == 2

    def test_hist(self):
        assert run("hist", "--realizations", "3", "--L", "6", "--N", "3", "--out", "h.json") == 0
        h = json.load(open("h.json"))
        assert {"bin_edges", "density", "log_tail"} <= set(h)
        assert len(h["bin_edges"]) == len(h["density"]) + 1

    def test_hist_needs_two_realisations(self):
        assert run("hist", "--realizations", "1") == 2

    def test_scaling_marks_unattainable(self):
        assert run("scaling", "--targets", "5,500", "--hoverj-grid", "20", "--L", "30", "--points", "40",
                   "--out", "sc.csv") == 0
        _, _, rows = read_csv("sc.csv")
        by_target = {r[0]: r for r in rows}
        assert by_target["500"][2] == "NA"
        assert by_target["5"][2] != "NA"

    def test_audit(self, capsys):
        assert run("audit", "--variant", "mod6", "--alpha", "0.25", "--alphap", "0.5", "--out", "a.csv") == 0
        assert "below floor" in capsys.readouterr().err
        _, cols, rows = read_csv("a.csv")
        assert cols == ["combination", "value", "ok"] and rows[0][2] == "0"

    def test_audit_needs_modified(self):
        assert run("audit", "--variant", "base") == 2


class TestCampaign:
    def test_run_file(self, tmp_path):
        (tmp_path / "c.toml").write_text(
            '[[job]]\ncommand = "seq"\nvariant = "mod6"\nalpha = 0.25\nalphap = 0.22\nn = "1..12"\nout = "m.csv"\n\n'
            '[[job]]\ncommand = "nu"\nn = "2..3"\nm = [10, 20]\nout = "nu.csv"\n'
        )
        assert run("run", "c.toml", "--jobs", "1") == 0
        _, _, rows = read_csv("m.csv")
        assert float(rows[5][1]) == pytest.approx(energy(mod6(0.25, 0.22), 6), rel=1e-11)
        assert len(read_csv("nu.csv")[2]) == 4

    def test_single_table(self, tmp_path):
        (tmp_path / "c.toml").write_text('command = "seq"\nn = "1..3"\nout = "x.csv"\n')
        assert run("run", "c.toml") == 0

    def test_bad_key(self, tmp_path):
        (tmp_path / "c.toml").write_text('[[job]]\ncommand = "seq"\nbogus = 1\n')
        assert run("run", "c.toml") == 2

    def test_missing_file(self):
        assert run("run", "nowhere.toml") == 2

    def test_no_jobs(self, tmp_path):
        (tmp_path / "c.toml").write_text("x = 1\n")
        assert run("run", "c.toml") == 2


def test_grid_parser():
    assert cli.parse_grid("0:0.5:0.25") == [0.0, 0.25, 0.5]
    assert len(cli.parse_grid("0:0.5:0.001")) == 501
    assert cli.parse_grid("1,2.5") == [1.0, 2.5]


def test_console_script_declared():
    from importlib.metadata import entry_points

    eps = [ep for ep in entry_points(group="console_scripts") if ep.name == "locchain"]
    assert eps and eps[0].value == "locchain.cli:main"
