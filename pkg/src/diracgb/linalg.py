"""Exact linear algebra over a polynomial ring modulo a constraint ideal.

Zero tests are normal-form tests against the modulus; every division a
computation relies on is logged in a :class:`GenericityCertificate`.  Results
(kernels, inverses) are re-verified by normal form before they are returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .arith import (
    RationalFunction,
    pp_divexact,
    pp_gcd,
    pp_is_const,
    pp_monic,
    pp_mul,
    pp_squarefree,
)
from .groebner import normal_form
from .poly import Polynomial


class LinalgError(ArithmeticError):
    pass


class DependentInput(LinalgError):
    """Vectors handed to complement_space are linearly dependent mod the ideal."""


class SingularMatrix(LinalgError):
    """Determinant vanishes modulo the ideal."""


def reduce_mod(p, modulus):
    if modulus is None or not p:
        return p
    return normal_form(p, modulus)[0]


# ---------------------------------------------------------------------------
# factor splitting for certificates
# ---------------------------------------------------------------------------

def _flatten(p):
    """Polynomial with Q(params) coefficients -> dict over Q in (params + vars).

    Parameter denominators are cleared by their lcm; the result is primitive
    up to a rational scalar.
    """
    coeffs = [c for _, c in p.terms]
    if not coeffs or not isinstance(coeffs[0], RationalFunction):
        return dict(p.terms), 0
    npar = len(coeffs[0].space.names)
    lcm = None
    for c in coeffs:
        d = c.den
        if lcm is None:
            lcm = d
        elif d != lcm:
            g = pp_gcd(lcm, d)
            lcm = pp_mul(lcm, pp_divexact(d, g))
    out = {}
    for m, c in p.terms:
        num = pp_mul(c.num, pp_divexact(lcm, c.den))
        for pm, pc in num.items():
            key = pm + m
            out[key] = out.get(key, 0) + pc
    return {k: v for k, v in out.items() if v}, npar


def _unflatten(d, npar, ring):
    field_ = ring.field
    if npar == 0:
        return ring.from_dict(d)
    space = field_.params
    parts = {}
    for k, c in d.items():
        parts.setdefault(k[npar:], {})[k[:npar]] = c
    return ring.from_dict({m: RationalFunction(space, num) for m, num in parts.items()})


def factor_split(p):
    """Split p into simpler factors sharing its zero set.

    Returns a list of Polynomials: each parameter/variable dividing every term,
    the parameter-only content, and the squarefree part of the remainder.
    Their product vanishes exactly where p does.
    """
    if not p or p.is_constant() and _const_is_number(p):
        return []
    ring = p.ring
    flat, npar = _flatten(p)
    n = len(next(iter(flat)))
    mins = [min(m[i] for m in flat) for i in range(n)]
    factors = []
    for i, e in enumerate(mins):
        if e:
            mono = {tuple(1 if j == i else 0 for j in range(n)): 1}
            factors.append(mono)
    if any(mins):
        flat = {tuple(a - b for a, b in zip(m, mins)): c for m, c in flat.items()}
    if npar:
        parts = {}
        for k, c in flat.items():
            parts.setdefault(k[npar:], {})[k[:npar]] = c
        content = None
        for sub in parts.values():
            content = sub if content is None else pp_gcd(content, sub)
            if pp_is_const(content):
                break
        if content is not None and not pp_is_const(content):
            factors.append({k + (0,) * (n - npar): c for k, c in pp_squarefree(content).items()})
            padded = {k + (0,) * (n - npar): c for k, c in content.items()}
            flat = pp_divexact(flat, padded)
    if not pp_is_const(flat):
        factors.append(pp_squarefree(flat))
    out = []
    for f in factors:
        q = _unflatten(pp_monic(f), npar, ring)
        if q not in out:
            out.append(q)
    return out


def _const_is_number(p):
    c = p.terms[0][1]
    return not isinstance(c, RationalFunction) or c.is_constant()


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass
class CertificateEntry:
    polynomial: Polynomial
    justification: str

    def to_json(self):
        return {"polynomial": str(self.polynomial), "justification": self.justification}


@dataclass
class GenericityCertificate:
    """Polynomials assumed nonzero on the constraint set, with reasons."""

    modulus: object = None
    entries: list = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def polynomials(self):
        return [e.polynomial for e in self.entries]

    def __contains__(self, p):
        return any(e.polynomial == p for e in self.entries)

    def add(self, p, reason="nonzero at a generic point of the constraint set"):
        """Record the factors of p; raises SingularMatrix if any vanishes on Σ."""
        for f in factor_split(p):
            if f in self:
                continue
            if self.modulus is not None and not reduce_mod(f, self.modulus):
                raise SingularMatrix(f"certificate polynomial {f} lies in the constraint ideal")
            self.entries.append(CertificateEntry(f, self._justify(f, reason)))

    def merge(self, other):
        for e in other.entries:
            if e.polynomial not in self:
                if self.modulus is not None and not reduce_mod(e.polynomial, self.modulus):
                    raise SingularMatrix(
                        f"certificate polynomial {e.polynomial} lies in the constraint ideal")
                self.entries.append(e)
        return self

    @staticmethod
    def _justify(f, reason):
        if f.is_constant():
            c = f.terms[0][1]
            if c.space.is_unit(c.num):
                names = [n for n, e in zip(c.space.names, next(iter(c.num))) if e]
                return "parameter assumption: " + ", ".join(f"{n} != 0" for n in names)
            return "generic parameter value"
        return reason

    def sorted_entries(self):
        return sorted(self.entries, key=lambda e: (not e.polynomial.is_constant(),
                                                   len(e.polynomial), str(e.polynomial)))

    def to_json(self):
        return [e.to_json() for e in self.sorted_entries()]


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

class QuotientMatrix:
    """Polynomial matrix whose entries are kept as normal forms mod ``modulus``."""

    def __init__(self, rows, modulus=None, ring=None):
        rows = [list(r) for r in rows]
        self.modulus = modulus
        self.ring = ring or (rows[0][0].ring if rows and rows[0] else None)
        self.rows = [[reduce_mod(e, modulus) for e in r] for r in rows]
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def entries(self):
        return [list(r) for r in self.rows]

    def is_zero(self):
        return all(not e for r in self.rows for e in r)

    def is_skew(self):
        n = self.nrows
        if n != self.ncols:
            return False
        return all(not reduce_mod(self.rows[i][j] + self.rows[j][i], self.modulus)
                   for i in range(n) for j in range(i, n))

    def apply(self, v):
        """M·v reduced mod the modulus."""
        ring = self.ring
        out = []
        for r in self.rows:
            acc = ring.zero
            for a, b in zip(r, v):
                if a and b:
                    acc = acc + a * b
            out.append(reduce_mod(acc, self.modulus))
        return out

    def to_strings(self):
        return [[str(e) for e in r] for r in self.rows]


def _pivot_key(p, i, j):
    return (len(p), p.ring.key(p.lm), i, j)


@dataclass
class Elimination:
    rows: list
    pivots: list          # (row, col, pivot polynomial) in elimination order
    certificate: GenericityCertificate


def eliminate(M, certificate=None, columns=None):
    """Fraction-free Gauss-Jordan elimination mod the ideal.

    Pivot rule: among unused rows and allowed columns, the nonzero entry with
    fewest terms, then smallest leading monomial, then position.
    """
    modulus = M.modulus
    cert = certificate if certificate is not None else GenericityCertificate(modulus)
    A = [list(r) for r in M.rows]
    ncols = M.ncols
    allowed = list(range(ncols)) if columns is None else list(columns)
    used_rows, used_cols = set(), set()
    pivots = []
    while True:
        best = None
        for i, r in enumerate(A):
            if i in used_rows:
                continue
            for j in allowed:
                if j in used_cols:
                    continue
                e = r[j]
                if e:
                    k = _pivot_key(e, i, j)
                    if best is None or k < best[0]:
                        best = (k, i, j)
        if best is None:
            break
        _, pi, pj = best
        a = A[pi][pj]
        cert.add(a)
        used_rows.add(pi)
        used_cols.add(pj)
        pivots.append((pi, pj))
        prow = A[pi]
        for i, r in enumerate(A):
            if i == pi:
                continue
            b = r[pj]
            if not b:
                continue
            A[i] = [reduce_mod(a * x - b * y, modulus) if (x or y) else x
                    for x, y in zip(r, prow)]
    # pivot rows may have been rescaled by later pivots; read values at the end
    piv = [(i, j, A[i][j]) for i, j in pivots]
    return Elimination(A, piv, cert)


def matrix_rank_mod(M, certificate=None):
    """Generic rank of M over the quotient, with the pivots certified nonzero."""
    el = eliminate(M, certificate)
    return len(el.pivots), el.certificate


def _strip_content(v):
    """Divide a vector by its common monomial and scalar content."""
    nz = [e for e in v if e]
    if not nz:
        return v
    ring = nz[0].ring
    n = ring.nvars
    mins = [min(m[i] for e in nz for m, _ in e.terms) for i in range(n)]
    if any(mins):
        mins = tuple(mins)
        v = [Polynomial(ring, tuple((tuple(a - b for a, b in zip(m, mins)), c)
                                    for m, c in e.terms)) if e else e for e in v]
    lead = next(e for e in v if e).lc
    scal = _scalar_content([c for e in v if e for _, c in e.terms])
    if scal is not None:
        lead = scal if not ring.field.is_negative(lead) else -scal
    inv = ring.field.one / lead
    return [e * inv if e else e for e in v]


def _scalar_content(coeffs):
    """gcd-like positive scalar content of Q(params) coefficients (numeric part only)."""
    from math import gcd as igcd
    nums, dens = [], []
    for c in coeffs:
        if isinstance(c, RationalFunction):
            if not c.is_constant():
                return None
            c = c.constant_value()
        nums.append(abs(c.numerator))
        dens.append(c.denominator)
    g = 0
    for x in nums:
        g = igcd(g, int(x))
    lcm = 1
    for d in dens:
        d = int(d)
        lcm = lcm * d // igcd(lcm, d)
    from ._backend import Q
    return Q(g, lcm)


def _back_substitute(el, ncols, ring, modulus):
    pivcols = {j: (i, a) for i, j, a in el.pivots}
    free = [j for j in range(ncols) if j not in pivcols]
    basis = []
    for f in free:
        involved = [(j, i, a) for j, (i, a) in sorted(pivcols.items()) if el.rows[i][f]]
        dens = []
        for _, _, a in involved:
            if a not in dens:
                dens.append(a)
        v = [ring.zero] * ncols
        L = ring.one
        for d in dens:
            L = L * d
        v[f] = L
        for j, i, a in involved:
            others = ring.one
            for d in dens:
                if d != a:
                    others = others * d
            v[j] = reduce_mod(-(el.rows[i][f] * others), modulus)
        v[f] = reduce_mod(v[f], modulus)
        basis.append(v)
    return basis


def null_space_mod(M, certificate=None):
    """Polynomial basis of the generic right kernel of M, verified by normal form."""
    el = eliminate(M, certificate)
    ring = M.ring
    out = []
    for v in _back_substitute(el, M.ncols, ring, M.modulus):
        w = _strip_content(v)
        if any(M.apply(w)):
            w = v
            if any(M.apply(w)):
                raise LinalgError("kernel vector fails verification")
        out.append(w)
    return out


def complement_space(P, ambient_dim, modulus=None, certificate=None, ring=None):
    """Kernel of the matrix whose rows are the vectors in P.

    Raises DependentInput when P has rank below len(P).
    """
    if not P:
        if ring is None:
            raise ValueError("ring required for an empty vector list")
        return [[ring.one if i == j else ring.zero for j in range(ambient_dim)]
                for i in range(ambient_dim)]
    M = QuotientMatrix(P, modulus, ring)
    rank, _ = matrix_rank_mod(M, GenericityCertificate(modulus))
    if rank < len(P):
        raise DependentInput(f"{len(P)} vectors have rank {rank}")
    T = null_space_mod(M, certificate)
    assert len(T) == ambient_dim - len(P)
    return T


# ---------------------------------------------------------------------------
# determinant and inverse
# ---------------------------------------------------------------------------

def determinant_mod(rows, modulus=None):
    """Determinant by dynamic programming over column subsets (division free)."""
    n = len(rows)
    if n == 0:
        return None
    ring = rows[0][0].ring
    layer = {0: ring.one}
    for i in range(n):
        nxt = {}
        row = rows[i]
        for mask, val in layer.items():
            if not val:
                continue
            for j in range(n):
                bit = 1 << j
                if mask & bit or not row[j]:
                    continue
                # sign: number of already-used columns greater than j
                sign = bin(mask >> (j + 1)).count("1") & 1
                t = val * row[j]
                t = -t if sign else t
                prev = nxt.get(mask | bit)
                nxt[mask | bit] = t if prev is None else prev + t
        layer = {m: reduce_mod(v, modulus) for m, v in nxt.items()}
    return layer.get((1 << n) - 1, ring.zero)


@dataclass
class Inverse:
    adjugate: list
    det: Polynomial
    certificate: GenericityCertificate

    def entry(self, i, j):
        return self.adjugate[i][j], self.det


def matrix_inverse_mod(C, certificate=None,
                       reason="determinant of the second-class matrix, nonzero on the constraint set"):
    """Adjugate/determinant inverse of a square QuotientMatrix.

    Verifies C·adj ≡ det·I mod the ideal before returning.
    """
    n = C.nrows
    if n != C.ncols:
        raise ValueError("matrix must be square")
    ring = C.ring
    modulus = C.modulus
    cert = certificate if certificate is not None else GenericityCertificate(modulus)
    rows = C.rows
    det = determinant_mod(rows, modulus)
    if not det:
        raise SingularMatrix("determinant vanishes modulo the constraint ideal")
    if n == 1:
        adj = [[ring.one]]
    else:
        adj = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                minor = [[rows[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
                d = determinant_mod(minor, modulus)
                adj[i][j] = -d if (i + j) & 1 else d
    for i in range(n):
        for j in range(n):
            acc = ring.zero
            for k in range(n):
                if rows[i][k] and adj[k][j]:
                    acc = acc + rows[i][k] * adj[k][j]
            if i == j:
                acc = acc - det
            if reduce_mod(acc, modulus):
                raise LinalgError("adjugate identity failed")
    cert.add(det, reason)
    return Inverse(adj, det, cert)
