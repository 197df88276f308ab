from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources

import pytest

from bispectral_aw import cli
from bispectral_aw.aw_core import make_aw_qdiff_op, make_recurrence_op
from bispectral_aw.cli import InputError, Perturbation, RunConfig, dumps, main
from bispectral_aw.operators import ShiftOp
from bispectral_aw.orthogonality import QuadratureConfig, two_sided_example
from bispectral_aw.wronskian_ext import ExtensionSpec

TAGS = ["2.5", "2.8", "2.11", "3.10a", "3.10b", "5.9", "5.16", "6.5c", "6.6"]


def bundled(name: str) -> str:
    return str(resources.files("bispectral_aw") / "data" / f"{name}.json")


def _run(cmd, spec, out, *extra):
    return main([cmd, "--spec", str(spec), "--out", str(out), *extra])


def _read(path):
    return json.loads(path.read_text())


# -- construct --------------------------------------------------------------------

def test_construct_baseline_recovers_classical_operators(tmp_path):
    assert _run("construct", bundled("baseline_k0"), tmp_path) == 0
    p = ExtensionSpec.load(bundled("baseline_k0")).params
    B = _read(tmp_path / "B_hat.json")["generators"]
    assert [g["order"] for g in B] == [2]
    assert ShiftOp.from_json(B[0]["operator"]) == make_aw_qdiff_op(p)
    L = _read(tmp_path / "L_hat.json")
    assert L["f"] == ["0", "1"]
    assert ShiftOp.from_json(L["operator"]) == make_recurrence_op(p)
    ph = _read(tmp_path / "p_hat.json")["p_hat"]
    assert sorted(ph, key=int) == [str(n) for n in range(7)]


def test_construct_one_mass_orders(tmp_path, capsys):
    assert _run("construct", bundled("one_mass"), tmp_path) == 0
    summary = _read(tmp_path / "construct.json")
    assert summary["generator_degrees"] == [2, 3]
    assert summary["B_hat_orders"] == [4, 6]
    assert summary["L_hat_support"] == [-1, 0, 1]
    assert "orders [4, 6]" in capsys.readouterr().out


# -- input errors -------------------------------------------------------------------

def test_malformed_json_is_an_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run("verify", bad, tmp_path / "out") == 2
    assert "malformed JSON" in capsys.readouterr().err


def test_missing_file_and_unknown_field(tmp_path):
    assert _run("construct", tmp_path / "nope.json", tmp_path) == 2
    raw = _read_bundled("baseline_k0")
    raw["colour"] = "red"
    f = tmp_path / "spec.json"
    f.write_text(json.dumps(raw))
    assert _run("construct", f, tmp_path) == 2


def _read_bundled(name):
    with open(bundled(name)) as fh:
        return json.load(fh)


def test_degenerate_spec_names_the_condition(tmp_path, capsys):
    spec = two_sided_example(alpha=1, beta=1, l=1, t=1)
    f = tmp_path / "degenerate.json"
    f.write_text(json.dumps(spec.to_json()))
    assert _run("construct", f, tmp_path / "out") == 2
    assert "3.6a fails at n=-1" in capsys.readouterr().err


def test_bad_arguments(tmp_path):
    assert _run("verify", bundled("baseline_k0"), tmp_path, "--n-max", "0") == 2
    assert _run("verify", bundled("baseline_k0"), tmp_path, "--tol", "2") == 2
    assert _run("verify", bundled("baseline_k0"), tmp_path, "--perturb", "9.9") == 2


def test_run_config_validation(tmp_path):
    with pytest.raises(InputError):
        RunConfig("verify", tmp_path, tmp_path, n_max=-1)
    with pytest.raises(InputError):
        RunConfig("explode", tmp_path, tmp_path)
    with pytest.raises(InputError):
        RunConfig("verify", tmp_path, tmp_path, seed=-3)
    with pytest.raises(InputError):
        RunConfig.from_dict({"command": "verify", "spec_path": "a", "output_path": "b", "speed": 1})
    cfg = RunConfig.from_dict({"command": "verify", "spec_path": "a", "output_path": "b",
                               "perturb": "2.8:-1:1/3"})
    assert cfg.perturb == Perturbation("2.8", -1, "1/3")


def test_perturbation_parsing():
    assert Perturbation.parse("3.10a") == Perturbation("3.10a", 0)
    with pytest.raises(InputError):
        Perturbation.parse("2.5:0:0")
    with pytest.raises(InputError):
        Perturbation.parse("5.9")


def test_numerical_error_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "QuadratureConfig", lambda: QuadratureConfig(nodes=(2, 3), tol=1e-14))
    assert _run("orthogonality", bundled("one_mass"), tmp_path) == 3


# -- verify ---------------------------------------------------------------------------

def test_verify_baseline(tmp_path, capsys):
    assert _run("verify", bundled("baseline_k0"), tmp_path) == 0
    rep = _read(tmp_path / "verify.json")
    rows = {r["tag"]: r for r in rep["checks"]}
    assert list(rows) == TAGS
    assert rows["6.5c"]["passed"] is None and rows["6.6"]["passed"] is None
    assert all(rows[t]["passed"] for t in TAGS if t not in ("6.5c", "6.6"))
    assert rep["passed"] and rep["failed"] == []
    out = capsys.readouterr().out
    assert "PASS 2.5" in out and "skip 6.6" in out


@pytest.mark.parametrize("name", ["one_mass", "one_sided_alpha2", "two_sided", "mixed"])
def test_verify_presets(name, tmp_path):
    assert _run("verify", bundled(name), tmp_path) == 0
    rep = _read(tmp_path / "verify.json")
    assert all(r["passed"] for r in rep["checks"])


def test_verify_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run("verify", bundled("one_mass"), a, "--seed", "5") == 0
    assert _run("verify", bundled("one_mass"), b, "--seed", "5") == 0
    assert (a / "verify.json").read_bytes() == (b / "verify.json").read_bytes()


def test_report_roundtrips(tmp_path):
    assert _run("verify", bundled("one_mass"), tmp_path) == 0
    text = (tmp_path / "verify.json").read_text()
    assert dumps(json.loads(text)) == text
    spec = ExtensionSpec.from_json(json.loads(text)["spec"])
    assert spec == ExtensionSpec.load(bundled("one_mass"))


@pytest.mark.parametrize("tag,name", [("2.5", "baseline_k0"), ("2.8", "baseline_k0"),
                                      ("2.11", "baseline_k0"), ("5.16", "baseline_k0"),
                                      ("3.10a", "one_mass"), ("3.10b", "one_mass"),
                                      ("6.6", "one_mass")])
def test_perturbation_fails_the_targeted_suite(tag, name, tmp_path):
    assert _run("verify", bundled(name), tmp_path, "--perturb", tag) == 1
    rep = _read(tmp_path / "verify.json")
    assert rep["failed"] == [tag]
    assert rep["perturbation"]["tag"] == tag


# -- orthogonality and algebra ----------------------------------------------------------

def test_orthogonality_one_mass(tmp_path):
    assert _run("orthogonality", bundled("one_mass"), tmp_path) == 0
    rep = _read(tmp_path / "orthogonality.json")
    assert rep["passed"] and rep["masses_outside_interval"]
    assert rep["orthogonality"]["max_rel_offdiag"] < 1e-8
    assert [m["x"] for m in rep["measure"]["masses"]] == ["5/4"]
    assert rep["divisor_identity"]["passed"]


def test_orthogonality_two_sided(tmp_path):
    assert _run("orthogonality", bundled("two_sided"), tmp_path) == 0
    xs = sorted(Fraction(m["x"]) for m in _read(tmp_path / "orthogonality.json")["measure"]["masses"])
    assert xs[0] < -1 < 1 < xs[1]


def test_orthogonality_k0_control(tmp_path):
    assert _run("orthogonality", bundled("baseline_k0"), tmp_path) == 0
    rep = _read(tmp_path / "orthogonality.json")
    assert rep["measure"]["masses"] == [] and rep["passed"]


def test_algebra_one_mass(tmp_path):
    assert _run("algebra", bundled("one_mass"), tmp_path) == 0
    rep = _read(tmp_path / "algebra.json")
    assert rep["n_algebra"]["generators"] == [2, 3]
    assert rep["n_algebra"]["orders"] == [4, 6]
    assert 1 not in rep["n_algebra"]["degrees"]
    assert rep["commute"] is True
