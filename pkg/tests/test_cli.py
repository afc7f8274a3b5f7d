import json
import math

import pytest

from funvol.cli import main


@pytest.fixture
def specs(tmp_path):
    paths = {}
    files = {
        "quad": {"type": "quadratic", "A": [[1.0, 0.0], [0.0, 1.0]],
                 "b": [0.0, 0.0], "c": 0.0},
        "aniso": {"type": "quadratic", "A": [[1.0, 0.0], [0.0, 4.0]],
                  "b": [0.0, 0.0], "c": 0.0},
        "cone": {"type": "cone", "n": 2, "t": 0.5, "r": 1.0},
        "ball_ind": {"type": "indicator",
                     "body": {"type": "ball", "r": 1.0, "center": [0.0, 0.0]}},
        "tent": {"type": "tent", "s0": 1.0},
        "abs1d": {"type": "max_affine", "slopes": [[1.0], [-1.0]],
                  "offsets": [0.0, 0.0]},
    }
    for name, spec in files.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(spec))
        paths[name] = str(p)
    return paths


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCompute:
    def test_smooth(self, capsys, specs):
        code, out, _ = run_cli(capsys, "compute", "--function", specs["quad"],
                               "--zeta", specs["tent"], "--j", "1",
                               "--method", "smooth")
        assert code == 0
        payload = json.loads(out)
        assert payload["value"] == pytest.approx(2 * math.pi / 3, rel=1e-6)
        assert payload["error"] <= 1e-6
        assert payload["method"] == "smooth"
        assert "counters" in payload

    def test_ck_cone(self, capsys, specs):
        code, out, _ = run_cli(capsys, "compute", "--function", specs["cone"],
                               "--zeta", specs["tent"], "--j", "1",
                               "--method", "ck", "--samples", "32")
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(0.75 * math.pi, rel=1e-6)

    def test_domain_gradient_ball(self, capsys, specs):
        code, out, _ = run_cli(capsys, "compute", "--function", specs["ball_ind"],
                               "--zeta", specs["tent"], "--j", "2",
                               "--method", "domain-gradient")
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(math.pi, rel=1e-10)

    def test_dual_paths_agree(self, capsys, specs):
        vals = []
        for path in ("integral", "conjugate"):
            code, out, _ = run_cli(capsys, "compute", "--function", specs["aniso"],
                                   "--zeta", specs["tent"], "--j", "1",
                                   "--method", "dual", "--dual-path", path)
            assert code == 0
            vals.append(json.loads(out)["value"])
        assert vals[0] == pytest.approx(vals[1], rel=1e-8)

    def test_schema_error_exit_2(self, capsys, specs, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, out, _ = run_cli(capsys, "compute", "--function", str(bad),
                               "--zeta", specs["tent"], "--j", "1",
                               "--method", "smooth")
        assert code == 2
        assert json.loads(out)["error"]["type"] == "SchemaError"

    def test_unsupported_variant_exit_3(self, capsys, specs):
        # the cone is not twice differentiable: smooth route must refuse
        code, out, _ = run_cli(capsys, "compute", "--function", specs["cone"],
                               "--zeta", specs["tent"], "--j", "1",
                               "--method", "smooth")
        assert code == 3
        assert json.loads(out)["error"]["type"] == "NotDifferentiable"

    def test_ck_general_requires_k(self, capsys, specs):
        code, out, _ = run_cli(capsys, "compute", "--function", specs["quad"],
                               "--zeta", specs["tent"], "--j", "1",
                               "--method", "ck-general")
        assert code == 2

    def test_stdout_stability(self, capsys, specs):
        argv = ("compute", "--function", specs["aniso"], "--zeta", specs["tent"],
                "--j", "1", "--method", "ck", "--samples", "16", "--seed", "5")
        _, out1, _ = run_cli(capsys, *argv)
        _, out2, _ = run_cli(capsys, *argv)
        assert out1 == out2


class TestTransform:
    def test_forward_row(self, capsys, specs):
        code, out, _ = run_cli(capsys, "transform", "--zeta", specs["tent"],
                               "--power", "1", "--grid", "0.5:0.5:1")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "s,R1"
        s, v = lines[1].split(",")
        assert float(v) == pytest.approx(0.375)

    def test_inverse_row(self, capsys, specs):
        code, out, _ = run_cli(capsys, "transform", "--zeta", specs["tent"],
                               "--power", "1", "--inverse", "--grid", "0.1:0.1:1")
        assert code == 0
        v = float(out.strip().split("\n")[1].split(",")[1])
        assert v == pytest.approx(-math.log(0.1), abs=1e-10)

    def test_identity_echo(self, capsys, specs):
        code, out, _ = run_cli(capsys, "transform", "--zeta", specs["tent"],
                               "--power", "0", "--grid", "0.25:0.75:3")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "s,identity"
        assert float(lines[1].split(",")[1]) == pytest.approx(0.75)

    def test_log_grid(self, capsys, specs):
        code, out, _ = run_cli(capsys, "transform", "--zeta", specs["tent"],
                               "--power", "1", "--grid", "0.01:1:5:log")
        assert code == 0
        assert len(out.strip().split("\n")) == 6

    def test_bad_grid(self, capsys, specs):
        code, out, _ = run_cli(capsys, "transform", "--zeta", specs["tent"],
                               "--power", "1", "--grid", "nope")
        assert code == 2


class TestConjugate:
    def test_ball_indicator_to_support(self, capsys, specs):
        code, out, _ = run_cli(capsys, "conjugate", "--function", specs["ball_ind"])
        assert code == 0
        payload = json.loads(out)
        assert payload["type"] == "support"
        assert payload["body"]["type"] == "ball"

    def test_quadratic_self_dual(self, capsys, specs):
        code, out, _ = run_cli(capsys, "conjugate", "--function", specs["quad"])
        assert code == 0
        payload = json.loads(out)
        assert payload["type"] == "quadratic"
        assert payload["A"] == [[1.0, 0.0], [0.0, 1.0]]

    def test_cone_encoding(self, capsys, specs):
        code, out, _ = run_cli(capsys, "conjugate", "--function", specs["cone"])
        assert code == 0
        payload = json.loads(out)
        assert payload["type"] == "radial_hinge"
        assert payload["t"] == 0.5

    def test_spec_round_trip(self, capsys, specs):
        # emitted specs re-parse to an equal function
        from funvol.convex import function_from_spec
        code, out, _ = run_cli(capsys, "conjugate", "--function", specs["cone"])
        v = function_from_spec(json.loads(out))
        assert v([2.0, 0.0]) == pytest.approx(1.5)

    def test_numeric_sampling(self, capsys, specs):
        code, out, err = run_cli(capsys, "conjugate", "--function", specs["abs1d"],
                                 "--numeric", "--grid=-4:4:201",
                                 "--dual-grid=-0.9:0.9:19")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "y1,numeric,analytic"
        numeric = [float(l.split(",")[1]) for l in lines[1:]]
        assert max(abs(v) for v in numeric) <= 1e-9
        assert "max_deviation=" in err


class TestVerify:
    def test_default_suite_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--default-suite",
                               "--samples", "16", "--seed", "7")
        assert code == 0
        payload = json.loads(out)
        assert payload["all_pass"] is True
        assert "wall_time" not in payload["cases"][0]

    def test_manifest_cone_case(self, capsys, tmp_path):
        manifest = [{"id": "cone",
                     "params": {"n": 2, "j": 1, "zeta": {"type": "tent", "s0": 1.0},
                                "t": 0.5, "samples": 16, "seed": 0},
                     "tolerance": {"absolute": 1e-6}}]
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(manifest))
        code, out, _ = run_cli(capsys, "verify", "--manifest", str(path))
        assert code == 0
        case = json.loads(out)["cases"][0]
        assert case["lhs"] == pytest.approx(0.75 * math.pi, rel=1e-9)

    def test_failing_manifest_exit_1(self, capsys, tmp_path):
        manifest = [{"id": "ck_classical",
                     "params": {"K": {"type": "box",
                                      "intervals": [[0, 1], [0, 1], [0, 1]]},
                                "j": 2, "k": 2, "samples": 64, "seed": 0},
                     "tolerance": {"absolute": 0.0, "relative": 0.0,
                                   "multiplier": 0.0}}]
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(manifest))
        code, _, _ = run_cli(capsys, "verify", "--manifest", str(path))
        assert code == 1

    def test_malformed_manifest_exit_2(self, capsys, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text('{"not": "a list"}')
        code, out, _ = run_cli(capsys, "verify", "--manifest", str(path))
        assert code == 2
        assert json.loads(out)["error"]["type"] == "SchemaError"

    def test_csv_format_and_out_file(self, capsys, tmp_path):
        out_path = tmp_path / "report.csv"
        code, out, _ = run_cli(capsys, "verify", "--default-suite",
                               "--samples", "8", "--format", "csv",
                               "--out", str(out_path))
        assert code == 0
        text = out_path.read_text()
        assert text.startswith("case,lhs,rhs,diff,verdict")

    def test_stdout_stability(self, capsys):
        argv = ("verify", "--default-suite", "--samples", "8", "--seed", "3")
        c1, out1, _ = run_cli(capsys, *argv)
        c2, out2, _ = run_cli(capsys, *argv)
        assert out1 == out2 and c1 == c2
