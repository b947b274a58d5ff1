import json
from fractions import Fraction as F

import pytest

from heisenlab.cli import LiteralError, main, parse_element, parse_group, sample_config_path
from heisenlab.algebra import AlgebraElement, GroupElement


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestLiterals:
    def test_group_forms(self):
        assert parse_group("(1/2,0)") == GroupElement([F(1, 2)], [0]) == parse_group("(1/2;0)")
        assert parse_group("(1,2;3,4)") == GroupElement([1, 2], [3, 4])
        assert parse_group("(1,2,3,4)") == GroupElement([1, 2], [3, 4])

    def test_element(self):
        a = parse_element("2*(1/2,0) - (0,1) + 3")
        assert a.coefficient(GroupElement([F(1, 2)], [0])) == 2
        assert a.coefficient(GroupElement([0], [1])) == -1
        assert a.coefficient(GroupElement.identity(1)) == 3

    def test_complex_and_negative_coordinates(self):
        a = parse_element("[1+2j]*(-1,-1/3)")
        assert a.coefficient(GroupElement([-1], [F(-1, 3)])) == 1 + 2j

    def test_roundtrip_through_json(self):
        a = parse_element("1+(1,0)")
        assert AlgebraElement.from_json(a.to_json()) == a

    @pytest.mark.parametrize("bad", ["(1,0", "(1,2,3)", "2*", "(a,b)", "(1;2,3)", ""])
    def test_malformed(self, bad):
        with pytest.raises(LiteralError):
            parse_element(bad)


class TestAlgebraCommands:
    def test_mul(self, capsys):
        code, out, _ = run(capsys, "algebra", "mul", "(1/2,0)", "(0,1)")
        data = json.loads(out)
        assert code == 0 and data["turn"] == "1/2" and data["element"] == "(1/2,1)"

    def test_reduce_replay(self, capsys):
        code, out, _ = run(capsys, "algebra", "reduce", "1+(1,0)", "--replay")
        data = json.loads(out)
        assert code == 0 and data["replay"]["verified"]

    def test_conj_and_trace(self, capsys):
        code, out, _ = run(capsys, "algebra", "conj", "(0,1/2)", "(1,0)")
        assert code == 0 and json.loads(out)["conjugate"]["terms"][0]["re"] == -1
        code, out, _ = run(capsys, "algebra", "trace", "3+2*(1/2,1)")
        assert code == 0 and json.loads(out)["trace"]["re"] == 3

    def test_malformed_literal(self, capsys):
        code, _, err = run(capsys, "algebra", "mul", "(1,0", "(0,1)")
        assert code == 2 and "unbalanced" in err

    def test_usage_error(self, capsys):
        assert run(capsys, "algebra")[0] == 2


class TestOtherCommands:
    def test_symplectic(self, capsys):
        code, out, _ = run(capsys, "symplectic", "solve", "--h", "(1,0)", "--x", "(0,1)", "--t", "1/4")
        assert code == 0 and json.loads(out)["y"] == "(1/4,0)"

    def test_poly(self, capsys):
        code, out, _ = run(capsys, "poly", "decompose", "--gen", "(0,1)", "--gen", "(1,0)", "--alpha", "(1,1)")
        data = json.loads(out)
        assert code == 0 and list(data["poly"]["coeffs"]) == ["1"] and data["roundtrip"]
        code, out, _ = run(capsys, "poly", "twist", "--gen", "(1,0)", "--gen", "(0,1)",
                           "--alpha", "1+2*(1,1)-(0,2)", "--t", "1/3")
        assert code == 0 and json.loads(out)["exact_match"]

    def test_metaplectic_build(self, capsys):
        code, out, _ = run(capsys, "metaplectic", "build", "--gen", "(1,0)", "--gen", "(0,1)", "--check-trace")
        data = json.loads(out)
        assert code == 0
        assert len(data["pipeline"]["factors"]) == 4 and data["factorization"] == "PASS"
        assert data["H"][2:] == ["(0,0;1,0)", "(0,0;0,1)"] and data["b"] == 2
        assert data["trace_commutator_max_deviation"] < 1e-10

    def test_metaplectic_dependent(self, capsys):
        assert run(capsys, "metaplectic", "build", "--gen", "(1,0)", "--gen", "(2,0)")[0] == 2

    def test_metaplectic_factor_and_trace(self, capsys):
        code, out, _ = run(capsys, "metaplectic", "factor", "--n", "2")
        assert code == 0 and json.loads(out)["factorization"] == "PASS"
        code, out, _ = run(capsys, "metaplectic", "trace", "--gen", "(1/2,0)", "--gen", "(0,1)",
                           "--alpha", "2+(1/2,1)")
        assert code == 0 and json.loads(out)["deviation"] < 1e-9

    def test_gauss(self, capsys):
        code, out, _ = run(capsys, "gauss", "ip", "--quadrature")
        data = json.loads(out)
        assert code == 0 and abs(data["closed_form"]["re"] - 2 ** -0.5) < 1e-15
        code, out, _ = run(capsys, "gauss", "fourier", "--d", "2")
        assert code == 0 and json.loads(out)[0]["d"] == 2


def write_config(tmp_path, **overrides):
    cfg = json.loads(sample_config_path().read_text())
    cfg.update(overrides)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


class TestIndependenceCommand:
    def test_sample_config(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code, _, _ = run(capsys, "independence", "certify", "--config", str(sample_config_path()), "--out", str(out))
        assert code == 0
        report = json.loads(out.with_suffix(".json").read_text())
        assert report["num_points"] == 25 and report["verdict"] == "certified-independent"
        assert all(c["error"] < 1e-6 for c in report["crosscheck"])

    def test_default_config_is_sample(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(capsys, "independence", "sweep", "--out", str(a))[0] == 0
        assert run(capsys, "independence", "sweep", "--config", str(sample_config_path()), "--out", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_radius_zero(self, tmp_path, capsys):
        cfg = write_config(tmp_path, enumeration={"mode": "ball", "radius": 0})
        out = tmp_path / "r.csv"
        assert run(capsys, "independence", "certify", "--config", str(cfg), "--out", str(out))[0] == 0
        assert out.read_text().splitlines()[1].split(",")[4] == "1"

    def test_inconclusive_exit(self, tmp_path, capsys):
        cfg = write_config(tmp_path, kappa=1e30)
        assert run(capsys, "independence", "certify", "--config", str(cfg), "--out", str(tmp_path / "r.csv"))[0] == 1

    def test_missing_config(self, tmp_path, capsys):
        assert run(capsys, "independence", "certify", "--config", str(tmp_path / "nope.json"))[0] == 2

    def test_invalid_config(self, tmp_path, capsys):
        cfg = write_config(tmp_path, enumeration={"mode": "spiral"})
        assert run(capsys, "independence", "certify", "--config", str(cfg))[0] == 2
        cfg = write_config(tmp_path, generators=["(1,0)", "(2,0)"])
        assert run(capsys, "independence", "certify", "--config", str(cfg))[0] == 2

    def test_sweep_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            code, _, _ = run(capsys, "independence", "sweep", "--config", str(sample_config_path()), "--out", str(out))
            assert code == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().startswith("a,b,offset_x,offset_y,num_points,lambda_min,cond,residual,verdict\n")
