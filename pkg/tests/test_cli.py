"""CLI surface: subcommands, exit codes, and output determinism."""

import json

import pytest

from birdcircuit.cli import main

SECTION6_CNF = "p cnf 3 3\n1 2 3 0\n-1 2 -3 0\n-1 -2 -3 0\n"
UNSAT_CNF = "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n"
FIG7_QDIMACS = "p cnf 4 3\ne 1 0\na 2 0\ne 3 0\na 4 0\n1 2 4 0\n2 -3 -4 0\n-1 -2 3 0\n"
FIG16_G2 = """player: x & !y & z | !x & y & w
opponent: x & y & !z | !x & y & !w
owns player: z w
owns opponent: x y
init: x=0 y=0 z=0 w=0
"""


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in (
        ("sat.cnf", SECTION6_CNF),
        ("unsat.cnf", UNSAT_CNF),
        ("fig7.qdimacs", FIG7_QDIMACS),
        ("fig16.g2", FIG16_G2),
    ):
        p = tmp_path / name
        p.write_text(text)
        paths[name] = str(p)
    paths["dir"] = str(tmp_path)
    return paths


class TestOracle:
    def test_qbf_true(self, files, capsys):
        assert main(["oracle", files["fig7.qdimacs"]]) == 0
        assert "true" in capsys.readouterr().out

    def test_cnf_satisfiable(self, files, capsys):
        assert main(["oracle", files["sat.cnf"]]) == 0
        assert "satisfiable" in capsys.readouterr().out

    def test_cnf_unsat_exits_1(self, files, capsys):
        assert main(["oracle", files["unsat.cnf"]]) == 1

    def test_g2(self, files, capsys):
        assert main(["oracle", files["fig16.g2"]]) == 1
        assert "cannot force" in capsys.readouterr().out


class TestSolve:
    def test_abed_solvable(self, files, capsys):
        assert main(["solve", "--variant", "abed", files["fig7.qdimacs"]]) == 0
        out = capsys.readouterr().out
        assert "solvable" in out and "witness" in out

    def test_abpd_unsolvable_exits_1(self, files):
        assert main(["solve", "--variant", "abpd", files["unsat.cnf"]]) == 1

    def test_structured_output(self, files, capsys):
        assert main(["solve", "--variant", "abed", "--format", "structured", files["fig7.qdimacs"]]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["solvable"] is True
        assert len(payload["witness"]) <= 52

    def test_cap_exit_code(self, files):
        assert main(["solve", "--variant", "abed", "--state-cap", "3", files["fig7.qdimacs"]]) == 3

    def test_abes_not_always_solvable(self, files):
        assert main(["solve", "--variant", "abes", files["fig16.g2"]]) == 1


class TestPlay:
    def test_oracle_policy_transcript(self, files, capsys):
        assert main(["play", "--variant", "abed", "--policy", "oracle", files["fig7.qdimacs"]]) == 0
        out = capsys.readouterr().out
        assert "win after 34 shots" in out
        assert "pig_killed" in out

    def test_strategy_file(self, files, tmp_path, capsys):
        strategy = tmp_path / "shots.txt"
        strategy.write_text("eq1.set_pos\neq1.check_pos\n")
        assert main(["play", "--variant", "abed", "--strategy", str(strategy), files["fig7.qdimacs"]]) == 1
        assert "ongoing" in capsys.readouterr().out

    def test_seeded_replay_identical(self, files, capsys):
        args = ["play", "--variant", "abps", "--policy", "oracle", "--seed", "5", files["fig7.qdimacs"]]
        main(args)
        first = capsys.readouterr().out
        main(args)
        assert capsys.readouterr().out == first

    def test_missing_strategy_is_usage_error(self, files):
        assert main(["play", "--variant", "abed", files["fig7.qdimacs"]]) == 2


class TestReduce:
    def test_text_output_contains_manifest(self, files, capsys):
        assert main(["reduce", "--variant", "abpd", files["sat.cnf"]]) == 0
        out = capsys.readouterr().out
        assert out.startswith("circuit v1")
        assert "bird_budget 9" in out
        assert "manifest" in out and "eq1.set_pos" in out

    def test_structured_report(self, files, capsys):
        assert main(["reduce", "--variant", "abes", "--format", "structured", files["fig16.g2"]]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["bird_budget"] == "128"

    def test_figure_written(self, files, tmp_path):
        figure = tmp_path / "level.png"
        out = tmp_path / "circuit.txt"
        assert main(["reduce", "--variant", "abed", files["fig7.qdimacs"],
                     "--figure", str(figure), "--out", str(out)]) == 0
        assert figure.stat().st_size > 2000
        assert out.read_text().startswith("circuit v1")


class TestVerify:
    def test_small_sweep_report(self, files, tmp_path, capsys):
        report = tmp_path / "report"
        assert main(["verify", "--variant", "abpd", "--max-vars", "1", "--max-clauses", "2",
                     "--out", str(report)]) == 0
        out = capsys.readouterr().out
        assert "0 mismatches" in out
        assert (report / "verify_abpd.csv").exists()
        assert (report / "verify_abpd.png").stat().st_size > 2000

    def test_abes_sweep(self, files, capsys):
        assert main(["verify", "--variant", "abes", "--limit", "60"]) == 0
        assert "0 mismatches" in capsys.readouterr().out


class TestExport:
    def test_dot(self, files, capsys):
        assert main(["export", "--variant", "abpd", "--format", "dot", files["sat.cnf"]]) == 0
        assert capsys.readouterr().out.startswith("digraph")

    def test_level(self, files, capsys):
        assert main(["export", "--variant", "abpd", "--format", "level", files["sat.cnf"]]) == 0
        assert capsys.readouterr().out.startswith("size ")

    def test_tables(self, files, capsys):
        assert main(["export", "--variant", "abpd", "--format", "tables", files["sat.cnf"]]) == 0
        out = capsys.readouterr().out
        assert "== eq" in out and "== clause_e" in out

    def test_png_needs_out(self, files, capsys):
        assert main(["export", "--variant", "abpd", "--format", "png", files["sat.cnf"]]) == 2

    def test_png_written(self, files, tmp_path):
        target = tmp_path / "c.png"
        assert main(["export", "--variant", "abpd", "--format", "png", "--out", str(target),
                     files["sat.cnf"]]) == 0
        assert target.stat().st_size > 2000


class TestUsage:
    def test_parse_error_exits_2(self, tmp_path):
        bad = tmp_path / "bad.cnf"
        bad.write_text("p cnf 1 1\n1 2 3 4 0\n")
        assert main(["oracle", str(bad)]) == 2

    def test_missing_file_exits_2(self):
        assert main(["oracle", "/nonexistent/x.cnf"]) == 2

    def test_bad_flags_exit_2(self):
        assert main(["solve", "--variant", "nope", "input"]) == 2

    def test_identical_runs_byte_identical(self, files, capsys):
        main(["reduce", "--variant", "abed", files["fig7.qdimacs"]])
        first = capsys.readouterr().out
        main(["reduce", "--variant", "abed", files["fig7.qdimacs"]])
        assert capsys.readouterr().out == first


class TestVerifyCap:
    def test_cap_hits_exit_3(self, files):
        assert main(["verify", "--variant", "abed", "--max-vars", "2", "--max-clauses", "1",
                     "--limit", "8", "--state-cap", "2"]) == 3
