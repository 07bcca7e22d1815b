"""Command-line behavior: exit codes, determinism, golden outputs."""

import json
import pathlib

from eidforge.cli import run

GOLDEN = pathlib.Path(__file__).parent / "golden"


def _run_capture(capsys, argv):
    code = run(argv)
    return code, capsys.readouterr().out


class TestGenerateCommand:
    def test_hyperbolic_latex_golden(self, capsys):
        code, out = _run_capture(capsys, [
            "generate", "--family", "hyperbolic", "--n", "1", "--a", "1",
            "--b", "0", "--m", "1", "--seed", "expon", "--format", "latex"])
        assert code == 0
        assert out == (GOLDEN / "example1_latex.txt").read_text()

    def test_rational_chain_golden(self, capsys):
        code, out = _run_capture(capsys, [
            "generate", "--family", "rational", "--n", "2", "--form", "chain",
            "--format", "text"])
        assert code == 0
        assert out == (GOLDEN / "example3_chain.txt").read_text()

    def test_trigonometric_golden(self, capsys):
        code, out = _run_capture(capsys, [
            "generate", "--family", "trigonometric", "--n", "2", "--a", "0",
            "--b", "1", "--m", "1", "--seed", "expon", "--format", "text"])
        assert code == 0
        assert out == (GOLDEN / "example4_text.txt").read_text()

    def test_euler_two_power_solution(self, capsys):
        code, out = _run_capture(capsys, [
            "generate", "--family", "rational", "--n", "2", "--l", "0"])
        assert code == 0
        assert "c1*x^3 + c2/x^2" in out
        assert "resonant: yes" in out

    def test_alias_names(self, capsys):
        code1, out1 = _run_capture(capsys, ["generate", "--family", "hyp"])
        code2, out2 = _run_capture(capsys, ["generate", "--family",
                                            "hyperbolic"])
        assert code1 == code2 == 0
        assert out1 == out2

    def test_byte_identical_across_runs(self, capsys):
        argv = ["generate", "--family", "exponential", "--n", "2", "--b", "1",
                "--format", "json", "--point-seed", "7"]
        _, out1 = _run_capture(capsys, argv)
        _, out2 = _run_capture(capsys, argv)
        assert out1 == out2

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "problem.json"
        code = run(["generate", "--family", "hyperbolic", "--format", "json",
                    "--output", str(target)])
        assert code == 0
        data = json.loads(target.read_text())
        assert data["version"] == "eid-1"
        assert data["verification"]["passed"] is True

    def test_usage_error_exit_code(self):
        assert run(["generate", "--family", "nosuch"]) == 2
        assert run(["generate", "--n", "notanint"]) == 2
        assert run([]) == 2

    def test_invalid_spec_reports_error(self, capsys):
        code = run(["generate", "--family", "trigonometric", "--l", "4",
                    "--seed", "trig"])
        assert code == 2


class TestVerifyCommand:
    def test_round_trip_verification(self, capsys, tmp_path):
        target = tmp_path / "problem.json"
        assert run(["generate", "--family", "hyperbolic", "--n", "2",
                    "--format", "json", "--output", str(target)]) == 0
        capsys.readouterr()
        code, out = _run_capture(capsys, ["verify", "--input", str(target)])
        assert code == 0
        assert "pass" in out

    def test_tampered_record_fails(self, capsys, tmp_path):
        target = tmp_path / "problem.json"
        run(["generate", "--family", "hyperbolic", "--n", "1",
             "--format", "json", "--output", str(target)])
        data = json.loads(target.read_text())
        # flip the sign of the potential term
        data["equation"]["prefix"] = data["equation"]["prefix"].replace(
            "(* 2 ", "(* -2 ")
        target.write_text(json.dumps(data))
        capsys.readouterr()
        code, out = _run_capture(capsys, ["verify", "--input", str(target)])
        assert code == 1
        assert "FAIL" in out

    def test_missing_file(self):
        assert run(["verify", "--input", "/nonexistent/problem.json"]) == 2


class TestChainCommand:
    def test_worked_two_step_chain(self, capsys, tmp_path):
        steps = {
            "ode": "(^ lambda 2)",
            "seed": "(+ (* c1 (cos (* lambda x))) (* c2 (sin (* lambda x))))",
            "spectral": "lambda",
            "steps": [
                {"eigenfunction": "x", "eigenvalue": "0"},
                {"eigenfunction": "(+ (cos x) (* -1 (sin x) (^ x -1)))",
                 "eigenvalue": "1"},
            ],
            "window": [0.5, 2.0],
        }
        src = tmp_path / "steps.json"
        src.write_text(json.dumps(steps))
        code, out = _run_capture(capsys, [
            "chain", "--input", str(src), "--format", "json"])
        assert code == 0
        rec = json.loads(out)
        assert rec["family"] == "chain"
        assert rec["n"] == 2
        assert rec["verification"]["passed"] is True

    def test_bad_eigenfunction_rejected(self, capsys, tmp_path):
        steps = {
            "ode": "(^ lambda 2)",
            "seed": "(cos (* lambda x))",
            "spectral": "lambda",
            "steps": [{"eigenfunction": "(^ x 2)", "eigenvalue": "0"}],
        }
        src = tmp_path / "steps.json"
        src.write_text(json.dumps(steps))
        assert run(["chain", "--input", str(src)]) == 2


class TestIdentitiesCommand:
    def test_families_pass(self, capsys):
        for family in ("rational", "hyperbolic"):
            code, out = _run_capture(capsys, [
                "identities", "--family", family, "--n-max", "3"])
            assert code == 0
            assert out.count("pass") == 4
