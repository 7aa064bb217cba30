import json

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from diracgb.groebner import buchberger
from diracgb.linalg import (
    DependentInput,
    GenericityCertificate,
    QuotientMatrix,
    SingularMatrix,
    complement_space,
    determinant_mod,
    factor_split,
    matrix_inverse_mod,
    matrix_rank_mod,
    null_space_mod,
)

from conftest import P, make_ring

R = make_ring(["x", "y"], params=["g"])
X, Y = sp.symbols("x y")

entry = st.sampled_from(["0", "0", "1", "-2", "x", "y", "x*y", "x + 1", "y^2 - x", "3*x"])


def matrices(nr, nc):
    return st.lists(st.lists(entry, min_size=nc, max_size=nc), min_size=nr, max_size=nr)


def qm(rows, modulus=None):
    return QuotientMatrix([[P(R, e) for e in r] for r in rows], modulus, R)


def sym(rows):
    return sp.Matrix([[sp.sympify(e.replace("^", "**")) for e in r] for r in rows])


@settings(max_examples=60)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, 4)))
       .flatmap(lambda s: matrices(*s)))
def test_rank_matches_sympy(rows):
    rank, cert = matrix_rank_mod(qm(rows))
    assert rank == sym(rows).rank()
    for f in cert.polynomials():
        assert f


@settings(max_examples=60)
@given(st.integers(1, 4).flatmap(lambda n: matrices(n, n)))
def test_determinant_matches_sympy(rows):
    d = determinant_mod([[P(R, e) for e in r] for r in rows])
    assert sp.expand(sp.sympify(str(d).replace("^", "**")) - sym(rows).det()) == 0


@settings(max_examples=60)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(st.just(n), st.integers(2, 5)))
       .flatmap(lambda s: matrices(*s)))
def test_kernel_is_kernel_of_full_dimension(rows):
    M = qm(rows)
    K = null_space_mod(M)
    rank, _ = matrix_rank_mod(M)
    assert len(K) == M.ncols - rank
    for v in K:
        assert not any(M.apply(v))
    if K:
        assert matrix_rank_mod(QuotientMatrix(K, None, R))[0] == len(K)


@settings(max_examples=40)
@given(st.integers(2, 4).flatmap(lambda n: matrices(n, n)))
def test_inverse_identity(rows):
    M = qm(rows)
    if not determinant_mod(M.rows):
        with pytest.raises(SingularMatrix):
            matrix_inverse_mod(M)
        return
    inv = matrix_inverse_mod(M)
    n = len(rows)
    for i in range(n):
        for j in range(n):
            acc = sum((M[i, k] * inv.adjugate[k][j] for k in range(n)), R.zero)
            assert acc == (inv.det if i == j else R.zero)


@settings(max_examples=40)
@given(st.integers(2, 5).flatmap(lambda n: matrices(n, n)))
def test_skew_matrices_have_even_rank(rows):
    n = len(rows)
    S = [[P(R, rows[i][j]) - P(R, rows[j][i]) for j in range(n)] for i in range(n)]
    M = QuotientMatrix(S, None, R)
    assert M.is_skew()
    assert matrix_rank_mod(M)[0] % 2 == 0


def test_rank_modulo_ideal():
    # modulo <x - 1> the matrix [[x, 1], [1, x]] becomes singular
    G = buchberger([P(R, "x - 1")])
    M = qm([["x", "1"], ["1", "x"]], G)
    assert matrix_rank_mod(M)[0] == 1
    assert matrix_rank_mod(qm([["x", "1"], ["1", "x"]]))[0] == 2


def test_complement_space():
    vecs = [[P(R, "1"), P(R, "x"), P(R, "0")]]
    T = complement_space(vecs, 3)
    assert len(T) == 2
    for t in T:
        assert not sum((a * b for a, b in zip(vecs[0], t)), R.zero)
    with pytest.raises(DependentInput):
        complement_space(vecs + [[P(R, "2"), P(R, "2*x"), P(R, "0")]], 3)
    assert len(complement_space([], 2, ring=R)) == 2


def test_factor_split():
    f = factor_split(P(R, "g^2*x*(y + 1)^2*(x - y)"))
    strs = sorted(str(p) for p in f)
    assert "g" in strs and "x" in strs
    assert any("y^2" in s or "x*y" in s for s in strs)
    prod = R.one
    for p in f:
        prod = prod * p
    # same zero set: product is the squarefree part up to a unit
    assert prod.monic() == P(R, "g*x*(y + 1)*(x - y)").monic()
    assert factor_split(P(R, "3")) == []


def test_certificate_json_and_membership():
    G = buchberger([P(R, "x - y")])
    cert = GenericityCertificate(G)
    cert.add(P(R, "g*y"), "pivot")
    data = cert.to_json()
    assert json.loads(json.dumps(data)) == data
    assert data[0] == {"polynomial": "g", "justification": "parameter assumption: g != 0"}
    assert data[1]["justification"] == "pivot"
    with pytest.raises(SingularMatrix):
        cert.add(P(R, "x - y"))
