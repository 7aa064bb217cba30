import random

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from diracgb.analysis import analyze
from diracgb.groebner import normal_form
from diracgb.ingest import load_model, parse_expression
from diracgb.linalg import reduce_mod
from diracgb.mechanics import LocalizedExpression, PhaseSpace, hessian_rank, poisson_bracket
from diracgb.poly import make_field

from conftest import model_path

SPACE = PhaseSpace(["q1", "q2"], make_field(None), gauge=1)
RING = SPACE.ring
NAMES = ["p_q1", "p_q2", "q1", "q2", "eps_1"]


def _poly(ts):
    acc = RING.zero
    for exps, c in ts:
        m = [0] * len(RING.table)
        for name, e in zip(NAMES, exps):
            m[RING.table.index(name)] = e
        acc = acc + RING.monomial(tuple(m), c)
    return acc


polys = st.lists(st.tuples(st.tuples(*[st.integers(0, 2)] * 5), st.integers(-3, 3)),
                 max_size=4).map(_poly)


def pb(f, g):
    return poisson_bracket(f, g, SPACE)


@settings(max_examples=200)
@given(polys, polys, polys)
def test_bracket_laws(f, g, h):
    assert pb(f, g) == -pb(g, f)
    assert pb(f, g * h) == pb(f, g) * h + g * pb(f, h)
    jac = pb(f, pb(g, h)) + pb(g, pb(h, f)) + pb(h, pb(f, g))
    assert not jac


def test_canonical_pairs():
    q1, p1 = RING.var("q1"), RING.var("p_q1")
    assert pb(q1, p1) == RING.one
    assert not pb(q1, RING.var("p_q2"))
    # gauge symbols behave as constants
    assert not pb(RING.var("eps_1"), p1)


def test_time_derivative_of_gauge_symbols():
    e, d, dd = SPACE.gauge(1)
    assert SPACE.time_derivative(e * e) == 2 * e * d
    assert SPACE.time_derivative(d) == dd


@pytest.mark.parametrize("name,rank", [
    ("toy_a", 1), ("toy_regular", 2), ("toy_c", 0), ("toy_inconsistent", 0), ("su2_lightcone", 3),
])
def test_hessian_rank(name, rank):
    assert hessian_rank(load_model(model_path(name))) == rank


def test_canonical_hamiltonians(toy_a, toy_c):
    assert str(toy_a.H_C) == "1/2*p_q1^2 + p_q1*q2"
    assert str(toy_c.H_C) == "-q1"
    reg = analyze(load_model(model_path("toy_regular")))
    assert str(reg.H_C) == "1/2*p_q1^2 + 1/2*p_q2^2 + 1/2*q1^2 + 1/2*q2^2"


def _sympy_hamiltonian(model):
    """Independent Legendre transform: solve the invertible block, drop primaries."""
    qs = model.coordinates
    q = {c: sp.Symbol(c) for c in qs}
    v = {c: sp.Symbol(f"v_{c}") for c in qs}
    p = {c: sp.Symbol(f"p_{c}") for c in qs}
    g = sp.Symbol("g")
    text = str(model.lagrangian).replace("^", "**")
    for c in qs:
        text = text.replace(f"dot({c})", f"v_{c}")
    syms = {str(s): s for s in [*q.values(), *v.values(), g]}
    L = sp.sympify(text, locals=syms)
    hess = sp.hessian(L, [v[c] for c in qs])
    solvable = [c for c in qs if hess.col(qs.index(c)).norm() != 0]
    sol = sp.solve([p[c] - sp.diff(L, v[c]) for c in solvable], [v[c] for c in solvable], dict=True)[0]
    H = sum(p[c] * v[c] for c in qs) - L
    H = sp.expand(H.subs(sol))
    # what is left of the non-solvable velocities multiplies primary constraints
    H = H.subs({v[c]: 0 for c in qs if c not in solvable})
    return sp.expand(H)


def test_su2_canonical_hamiltonian_against_sympy(su2_model, su2):
    ref = _sympy_hamiltonian(su2_model)
    ring = su2.pq
    h = parse_expression(str(ref).replace("**", "^"), ring)
    diff = ring.convert(su2.H_C) - h
    assert not normal_form(diff, su2.primary_basis)[0]


def test_dirac_bracket_kills_second_class(toy_c):
    an = toy_c
    ring = an.space.ring
    rnd = random.Random(3)
    syms = [ring.var(s) for s in ("p_q1", "p_q2", "q1", "q2")]
    for _ in range(50):
        f = ring.zero
        for _ in range(3):
            t = ring.const(rnd.randint(-3, 3))
            for s in syms:
                t = t * s ** rnd.randint(0, 2)
            f = f + t
        for chi in an.second_class:
            le = an.dirac(f, chi.polynomial)
            assert not reduce_mod(an.pq.convert(le.numerator), an.basis)


def test_dirac_bracket_weakly_kills_su2_chi(su2):
    ring = su2.pq
    rnd = random.Random(11)
    names = ring.table.symbols[:24]
    for _ in range(10):
        f = ring.zero
        for _ in range(2):
            t = ring.const(rnd.randint(1, 3))
            for s in rnd.sample(names, 2):
                t = t * ring.var(s)
            f = f + t
        for chi in su2.second_class:
            le = su2.dirac(f, chi.polynomial)
            assert not reduce_mod(ring.convert(le.numerator), su2.basis)


def test_localized_simplification():
    x = RING.var("q1")
    le = LocalizedExpression(x * x - RING.one, x - RING.one).simplified()
    assert le.denominator == RING.one and le.numerator == x + RING.one
    le = LocalizedExpression(2 * x, RING.const(4)).simplified()
    assert str(le) == "1/2*q1"
    le = LocalizedExpression(x, -x - RING.one).simplified()
    assert le.numerator == -x
