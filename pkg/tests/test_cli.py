import json
import math

import pytest

from skewforms.cli import main


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def angular_form_doc():
    return {
        "n": 2, "vars": ["x1", "x2"], "degree": 1,
        "terms": [
            {"index": [1], "coeff": "-x2/(x1^2+x2^2)"},
            {"index": [2], "coeff": "x1/(x1^2+x2^2)"},
        ],
    }


def circle_loop_doc(sides=64, samples=16):
    return {
        "vertices": [[math.cos(2 * math.pi * k / sides),
                      math.sin(2 * math.pi * k / sides)] for k in range(sides)],
        "samples_per_edge": samples,
    }


def compression_pde_doc():
    return {"n": 2, "vars": ["x1", "x2"], "u": "u",
            "p": ["p1", "p2"], "F": "p1 + u*p2"}


class TestForms:
    def test_d_scalar(self, tmp_path, capsys):
        form = write_json(tmp_path / "f.json", {
            "n": 2, "vars": ["x1", "x2"], "degree": 1,
            "terms": [{"index": [1], "coeff": "x2"}]})
        code = main(["forms", "d", "--form", form,
                     "--out", str(tmp_path / "out")])
        assert code == 0
        assert capsys.readouterr().out == "closed: false\n"
        doc = json.loads((tmp_path / "out" / "derivative.json").read_text())
        assert doc["degree"] == 2
        assert doc["terms"] == [{"index": [1, 2], "coeff": "-1"}]
        diag = json.loads((tmp_path / "out" / "diagnostics.json").read_text())
        assert diag == {"closed": False}

    def test_closed_angular(self, tmp_path, capsys):
        form = write_json(tmp_path / "ang.json", angular_form_doc())
        code = main(["forms", "closed", "--form", form,
                     "--out", str(tmp_path / "out")])
        assert code == 0
        assert capsys.readouterr().out == "closed: true\n"

    def test_wedge(self, tmp_path):
        a = write_json(tmp_path / "a.json", {
            "n": 2, "vars": ["x1", "x2"], "degree": 1,
            "terms": [{"index": [1], "coeff": "x2"}]})
        b = write_json(tmp_path / "b.json", {
            "n": 2, "vars": ["x1", "x2"], "degree": 1,
            "terms": [{"index": [2], "coeff": "x1"}]})
        code = main(["forms", "wedge", "--a", a, "--b", b,
                     "--out", str(tmp_path / "out")])
        assert code == 0
        doc = json.loads((tmp_path / "out" / "wedge.json").read_text())
        assert doc["terms"] == [{"index": [1, 2], "coeff": "x1*x2"}]

    def test_loop_winding(self, tmp_path, capsys):
        form = write_json(tmp_path / "ang.json", angular_form_doc())
        loop = write_json(tmp_path / "loop.json", circle_loop_doc())
        code = main(["forms", "loop", "--form", form, "--loop", loop,
                     "--out", str(tmp_path / "out")])
        assert code == 0
        printed = float(capsys.readouterr().out)
        assert abs(printed - 2 * math.pi) < 1e-3
        doc = json.loads((tmp_path / "out" / "loop.json").read_text())
        assert doc["value"] == printed

    def test_bad_form_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code = main(["forms", "d", "--form", str(bad),
                     "--out", str(tmp_path / "out")])
        assert code == 2
        assert capsys.readouterr().err.startswith("E_VALIDATION")

    def test_dimension_mismatch_wedge(self, tmp_path, capsys):
        a = write_json(tmp_path / "a.json", {
            "n": 2, "vars": ["x1", "x2"], "degree": 1,
            "terms": [{"index": [1], "coeff": "1"}]})
        b = write_json(tmp_path / "b.json", {
            "n": 3, "vars": ["x1", "x2", "x3"], "degree": 1,
            "terms": [{"index": [1], "coeff": "1"}]})
        code = main(["forms", "wedge", "--a", a, "--b", b,
                     "--out", str(tmp_path / "out")])
        assert code == 2


class TestChars:
    def test_strip_run(self, tmp_path):
        pde = write_json(tmp_path / "pde.json", {
            "n": 1, "vars": ["x1"], "u": "u", "p": ["p1"], "F": "p1 + u"})
        strip = write_json(tmp_path / "strip.json",
                           {"x": [0.0], "u": -1.0, "p": [1.0]})
        out = tmp_path / "out"
        code = main(["chars", "--pde", pde, "--strip", strip,
                     "--out", str(out)])
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["max_f_residual"] < 1e-10
        assert summary["aborted"] is None
        lines = (out / "traj_0.csv").read_text().splitlines()
        assert lines[0] == "s,x1,u,p1,F_residual,strip_residual"
        last = lines[-1].split(",")
        assert abs(float(last[3]) - math.exp(-1)) < 1e-9

    def test_inadmissible_strip_exit_2(self, tmp_path, capsys):
        pde = write_json(tmp_path / "pde.json", {
            "n": 2, "vars": ["x1", "x2"], "u": "u", "p": ["p1", "p2"],
            "F": "p1^2 + p2^2 - 1"})
        strip = write_json(tmp_path / "strip.json",
                           {"x": [0.0, 0.0], "u": 0.0, "p": [0.6, 0.9]})
        code = main(["chars", "--pde", pde, "--strip", strip,
                     "--out", str(tmp_path / "out")])
        assert code == 2
        assert "E_VALIDATION" in capsys.readouterr().err

    def test_bundle_scan(self, tmp_path, capsys):
        pde = write_json(tmp_path / "pde.json", compression_pde_doc())
        labels = [-1.0 + 0.2 * k for k in range(11)]
        bundle = write_json(tmp_path / "bundle.json", {
            "labels": labels,
            "transverse": 2,
            "strips": [{"x": [0.0, x0], "u": -x0, "p": [-x0, -1.0]}
                       for x0 in labels],
        })
        out = tmp_path / "out"
        code = main(["chars", "--pde", pde, "--bundle", bundle,
                     "--scan-events", "--smax", "1.05", "--out", str(out)])
        assert code == 0
        assert capsys.readouterr().out == "events: 9\n"
        events = json.loads((out / "events.json").read_text())
        assert len(events) == 9
        for e in events:
            assert abs(e["s_star"] - 1.0) < 1e-3
            assert abs(e["conserved_u"] - (-e["label"])) < 1e-9
        summary = json.loads((out / "bundle.json").read_text())
        assert summary["errors"] == {}
        assert "jacobians" in summary

    def test_missing_strip_and_bundle(self, tmp_path):
        pde = write_json(tmp_path / "pde.json", compression_pde_doc())
        code = main(["chars", "--pde", pde, "--out", str(tmp_path / "out")])
        assert code == 2


class TestLegendre:
    def test_quadratic_flags(self, tmp_path):
        out = tmp_path / "out"
        code = main(["legendre", "--L", "v^2/2", "--domain=-1:1",
                     "--grid", "101", "--out", str(out)])
        assert code == 0
        diag = json.loads((out / "diagnostics.json").read_text())
        assert diag["hessian_det"] == "1"
        assert not diag["identically_degenerate"]
        assert diag["closed_form"] == "1/2*p^2"
        assert diag["involution_error"] < 1e-6
        lines = (out / "transform.csv").read_text().splitlines()
        assert lines[0] == "p,H"
        assert len(lines) == 102

    def test_request_file(self, tmp_path):
        req = write_json(tmp_path / "req.json", {
            "m": 1, "L": "v^4/4", "domain": [[0.1, 2.0]], "grid": 51})
        out = tmp_path / "out"
        code = main(["legendre", "--request", req, "--out", str(out)])
        assert code == 0
        diag = json.loads((out / "diagnostics.json").read_text())
        assert diag["closed_form"] is not None

    def test_degenerate_exit_3(self, tmp_path, capsys):
        code = main(["legendre", "--L", "v^3/3", "--domain=-1:1",
                     "--grid", "11", "--out", str(tmp_path / "out")])
        assert code == 3
        assert "E_DOMAIN" in capsys.readouterr().err

    def test_bad_domain_exit_2(self, tmp_path):
        code = main(["legendre", "--L", "v^2", "--domain", "oops",
                     "--grid", "5", "--out", str(tmp_path / "out")])
        assert code == 2


class TestEvolve:
    def test_symbolic_identical(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["evolve", "--a1", "2*xi1*xi2", "--a2", "xi1^2",
                     "--out", str(out)])
        assert code == 0
        assert capsys.readouterr().out.startswith("verdict: identical")
        doc = json.loads((out / "relation.json").read_text())
        assert doc["verdict"] == "identical"

    def test_symbolic_nonidentical(self, tmp_path):
        out = tmp_path / "out"
        code = main(["evolve", "--a1", "xi2", "--a2", "0", "--out", str(out)])
        assert code == 0
        doc = json.loads((out / "relation.json").read_text())
        assert doc["verdict"] == "non-identical"
        assert doc["max_abs_commutator"] == pytest.approx(1.0)

    def test_identity_residual_from_trajectory(self, tmp_path):
        # integrate a trajectory through the chars CLI, then feed its CSV back
        pde = write_json(tmp_path / "pde.json", {
            "n": 2, "vars": ["x1", "x2"], "u": "u", "p": ["p1", "p2"],
            "F": "p1 + 2*p2"})
        strip = write_json(tmp_path / "strip.json",
                           {"x": [0.0, 0.0], "u": 5.0, "p": [-2.0, 1.0]})
        chars_out = tmp_path / "chars"
        assert main(["chars", "--pde", pde, "--strip", strip,
                     "--out", str(chars_out)]) == 0
        out = tmp_path / "out"
        code = main(["evolve", "--a1", "0", "--a2", "0",
                     "--traj", str(chars_out / "traj_0.csv"),
                     "--out", str(out)])
        assert code == 0
        doc = json.loads((out / "relation.json").read_text())
        assert doc["identity_residual"] < 1e-10

    def test_requires_input(self, tmp_path):
        assert main(["evolve", "--out", str(tmp_path / "out")]) == 2


class TestDeterminism:
    def _run_all(self, base):
        base.mkdir()
        form = write_json(base / "ang.json", angular_form_doc())
        loop = write_json(base / "loop.json", circle_loop_doc())
        pde = write_json(base / "pde.json", compression_pde_doc())
        strip = write_json(base / "strip.json",
                           {"x": [0.0, 0.5], "u": -0.5, "p": [-0.5, -1.0]})
        outputs = {}
        for name, argv in (
            ("closed", ["forms", "closed", "--form", form, "--seed", "42",
                        "--out", str(base / "c")]),
            ("loop", ["forms", "loop", "--form", form, "--loop", loop,
                      "--out", str(base / "l")]),
            ("chars", ["chars", "--pde", pde, "--strip", strip,
                       "--out", str(base / "s")]),
            ("legendre", ["legendre", "--L", "v^2/2", "--domain=-1:1",
                          "--grid", "51", "--out", str(base / "g")]),
            ("evolve", ["evolve", "--a1", "xi2", "--a2", "0",
                        "--out", str(base / "e")]),
        ):
            assert main(argv) == 0
            outputs[name] = {}
            for sub in sorted(base.rglob("*")):
                if sub.is_file() and sub.suffix in (".json", ".csv"):
                    outputs[name][str(sub.relative_to(base))] = sub.read_bytes()
        return outputs

    def test_byte_identical_reruns(self, tmp_path):
        first = self._run_all(tmp_path / "run1")
        second = self._run_all(tmp_path / "run2")
        assert first == second
