import json
import os
import subprocess
import sys

import pytest

from diracgb.cli import EXIT_INCONSISTENT, EXIT_OK, EXIT_PARSE, EXIT_RESOURCE, corpus_list, main
from diracgb.ingest import load_model

from conftest import GOLDEN


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def run_subprocess(argv, env=None):
    e = dict(os.environ)
    e.update(env or {})
    return subprocess.run([sys.executable, "-m", "diracgb", *argv], capture_output=True,
                          text=True, env=e, check=False)


@pytest.mark.parametrize("name", ["toy_a", "toy_c", "toy_regular", "toy_inconsistent"])
def test_golden_toys(name, capsys):
    code, out, _ = run(["analyze", name, "--format", "json"], capsys)
    assert code == (EXIT_INCONSISTENT if name == "toy_inconsistent" else EXIT_OK)
    assert out == (GOLDEN / f"{name}.json").read_text(encoding="utf-8")


def test_golden_su2(capsys):
    code, out, _ = run(["analyze", "su2_lightcone", "--format", "json"], capsys)
    assert code == EXIT_OK
    assert out == (GOLDEN / "su2_lightcone.json").read_text(encoding="utf-8")


def test_su2_separate_stage(capsys):
    code, out, _ = run(["analyze", "su2_lightcone", "--stage", "separate", "--format", "json"], capsys)
    rep = json.loads(out)
    assert code == EXIT_OK
    assert len(rep["constraints"]) == 12
    assert (rep["counts"]["s"], rep["counts"]["r"]) == (8, 4)
    assert "rho" not in rep or not rep["rho"]


def test_regular_text_report(capsys):
    code, out, _ = run(["analyze", "toy_regular"], capsys)
    assert code == EXIT_OK
    assert "regular system" in out
    assert "1/2*p_q1^2 + 1/2*p_q2^2 + 1/2*q1^2 + 1/2*q2^2" in out


def test_inconsistent_exit_and_trace(capsys):
    code, out, err = run(["analyze", "toy_inconsistent", "--format", "json"], capsys)
    assert code == EXIT_INCONSISTENT
    rep = json.loads(out)
    assert rep["status"] == "inconsistent"
    assert rep["trace"]
    assert "trivial" in err


def test_parse_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.model"
    bad.write_text('name = "b"\ncoordinates = [q]\nlagrangian = "dot(q)^2 +"\n')
    code, _, err = run(["analyze", str(bad)], capsys)
    assert code == EXIT_PARSE
    assert "bad.model:3:" in err


def test_missing_file_exit(tmp_path, capsys):
    code, _, _ = run(["analyze", str(tmp_path / "nope.model")], capsys)
    assert code == EXIT_PARSE


def test_resource_limit_exit(capsys):
    code, _, err = run(["analyze", "su2_lightcone", "--term-budget", "5"], capsys)
    assert code == EXIT_RESOURCE
    assert err


def test_iteration_cap_exit(capsys):
    code, _, _ = run(["analyze", "toy_a", "--max-iterations", "1"], capsys)
    assert code == EXIT_RESOURCE


def test_output_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, stdout, _ = run(["analyze", "toy_a", "--format", "json", "--output", str(out)], capsys)
    assert code == EXIT_OK and stdout == ""
    assert out.read_text(encoding="utf-8") == (GOLDEN / "toy_a.json").read_text(encoding="utf-8")


def test_timings_flag(capsys):
    _, out, _ = run(["analyze", "toy_a", "--format", "json", "--timings"], capsys)
    t = json.loads(out)["timings"]
    assert set(t) >= {"primary", "complete"}
    _, out, _ = run(["analyze", "toy_a", "--format", "json"], capsys)
    assert "timings" not in json.loads(out)


def test_lex_and_radical_flags(capsys):
    code, out, _ = run(["analyze", "toy_a", "--format", "json", "--order", "lex",
                        "--weak-equality", "radical"], capsys)
    rep = json.loads(out)
    assert code == EXIT_OK
    assert rep["generator"]["G"] == "p_q1*eps_2 + p_q2*deps_2"


def test_list(capsys):
    code, out, _ = run(["list"], capsys)
    assert code == EXIT_OK
    assert "su2_lightcone" in out
    names = [n for n, _, _ in corpus_list()]
    assert names == sorted(names) and "toy_a" in names


def test_corpus_descriptors_load():
    for name, path, _ in corpus_list():
        m = load_model(path)
        assert m.name == name
        if name == "su2_lightcone":
            assert list(m.params.names) == ["g"] and list(m.params.nonzero) == ["g"]


def test_determinism_across_processes():
    a = run_subprocess(["analyze", "toy_a", "--format", "json"])
    b = run_subprocess(["analyze", "toy_a", "--format", "json"])
    assert a.returncode == 0 and a.stdout == b.stdout


@pytest.mark.parametrize("argv", [
    ["analyze", "toy_a", "--format", "json"],
    ["analyze", "toy_c", "--format", "json"],
    ["analyze", "su2_lightcone", "--stage", "separate", "--format", "json"],
])
def test_backends_agree(argv):
    """gmpy2 and the pure-Python fractions backend give byte-identical reports."""
    fast = run_subprocess(argv, {"DIRACGB_RATIONAL": "gmpy2"})
    slow = run_subprocess(argv, {"DIRACGB_RATIONAL": "fraction"})
    assert fast.returncode == slow.returncode == 0
    assert fast.stdout == slow.stdout
