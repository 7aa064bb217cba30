import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from diracgb.analysis import Options, analyze
from diracgb.arith import ParamSpace
from diracgb.cli import corpus_dir
from diracgb.ingest import load_model, parse_expression
from diracgb.poly import MonomialOrder, Ring, VariableTable, make_field

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN = Path(__file__).parent / "golden"


def model_path(name):
    return corpus_dir() / f"{name}.model"


def make_ring(names, order="degrevlex", params=()):
    table = VariableTable(names, ["coordinate"] * len(names))
    n = len(names)
    o = MonomialOrder.lex(n) if order == "lex" else MonomialOrder.degrevlex(n)
    field = make_field(ParamSpace(params, params) if params else None)
    return Ring(table, o, field)


def P(ring, text):
    return parse_expression(text, ring)


@pytest.fixture(scope="session")
def su2_model():
    return load_model(model_path("su2_lightcone"))


@pytest.fixture(scope="session")
def su2(su2_model):
    """Full SU(2) analysis, shared by every test that only reads it."""
    return analyze(su2_model, "all", Options())


@pytest.fixture(scope="session")
def toy_a():
    return analyze(load_model(model_path("toy_a")))


@pytest.fixture(scope="session")
def toy_c():
    return analyze(load_model(model_path("toy_c")))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
