"""Phase space, Legendre ideal, Hamiltonians, Poisson and Dirac brackets.

Sign convention: time evolution is df/dt = {f, H}, with
{f, g} = sum_i (df/dq_i dg/dp_i - df/dp_i dg/dq_i).
"""

from __future__ import annotations

from dataclasses import dataclass

from .groebner import buchberger, elimination_ideal, normal_form
from .ingest import momentum_symbol, velocity_symbol
from .linalg import GenericityCertificate, QuotientMatrix, matrix_rank_mod, reduce_mod
from .poly import MonomialOrder, Ring, VariableTable

CONVENTION = "df/dt = {f, H_T}; {f, g} = sum_i (df/dq_i*dg/dp_i - df/dp_i*dg/dq_i)"


class OrderingBug(RuntimeError):
    """A normal form kept variables an elimination order should have removed."""


def multiplier_symbol(i):
    return f"U_{i}"


def gauge_symbols(i):
    return f"eps_{i}", f"deps_{i}", f"ddeps_{i}"


class PhaseSpace:
    """Canonical pairs (q_i, p_i) plus multiplier and gauge symbols.

    Table layout: momenta, coordinates, multipliers, gauge symbols; the
    order is a block order (p, q) >> multipliers >> gauge, each block using
    the chosen inner order.
    """

    def __init__(self, coordinates, field, inner="degrevlex", multipliers=0, gauge=0):
        self.coordinates = list(coordinates)
        self.field = field
        self.inner = inner
        self.n_multipliers = multipliers
        self.n_gauge = gauge
        n = len(self.coordinates)
        mom = [momentum_symbol(q) for q in self.coordinates]
        mult = [multiplier_symbol(i + 1) for i in range(multipliers)]
        gsyms, deriv = [], {}
        for i in range(gauge):
            e, d, dd = gauge_symbols(i + 1)
            gsyms += [e, d, dd]
            deriv[e] = d
            deriv[d] = dd
        table = VariableTable(mom + self.coordinates + mult + gsyms,
                              ["momentum"] * n + ["coordinate"] * n
                              + ["multiplier"] * len(mult) + ["gauge"] * len(gsyms), deriv)
        blocks = [(range(2 * n), inner)]
        if mult:
            blocks.append((range(2 * n, 2 * n + len(mult)), inner))
        if gsyms:
            start = 2 * n + len(mult)
            blocks.append((range(start, start + len(gsyms)), inner))
        self.ring = Ring(table, MonomialOrder.block(blocks, len(table)), field)
        self.pairs = [(n + i, i) for i in range(n)]   # (q index, p index)

    def extend(self, multipliers=None, gauge=None):
        return PhaseSpace(self.coordinates, self.field, self.inner,
                          self.n_multipliers if multipliers is None else multipliers,
                          self.n_gauge if gauge is None else gauge)

    @property
    def momenta(self):
        return [momentum_symbol(q) for q in self.coordinates]

    @property
    def multipliers(self):
        return [multiplier_symbol(i + 1) for i in range(self.n_multipliers)]

    def gauge(self, i):
        """(eps, deps, ddeps) Polynomials for gauge function i (1-based)."""
        return tuple(self.ring.var(s) for s in gauge_symbols(i))

    def pq_indices(self):
        return list(range(2 * len(self.coordinates)))

    def convert(self, p):
        return self.ring.convert(p)

    def bracket(self, f, g):
        return poisson_bracket(f, g, self)

    def time_derivative(self, f):
        """Explicit time derivative: each gauge symbol maps to its derivative symbol."""
        ring = self.ring
        table = ring.table
        out = ring.zero
        for name, dname in table.derivative.items():
            d = f.diff(name)
            if d:
                out = out + d * ring.var(dname)
        return out


def poisson_bracket(f, g, space):
    """{f, g}; multiplier and gauge symbols are constants."""
    ring = space.ring
    if f.ring is not ring:
        f = ring.convert(f)
    if g.ring is not ring:
        g = ring.convert(g)
    if not f or not g:
        return ring.zero
    fu, gu = f.used_indices(), g.used_indices()
    out = ring.zero
    for qi, pi in space.pairs:
        if qi in fu and pi in gu:
            out = out + f.diff_index(qi) * g.diff_index(pi)
        if pi in fu and qi in gu:
            out = out - f.diff_index(pi) * g.diff_index(qi)
    return out


# ---------------------------------------------------------------------------
# Legendre transform
# ---------------------------------------------------------------------------

@dataclass
class Legendre:
    model: object
    generators: list
    basis: object   # GroebnerBasis in the Legendre ring


def legendre_ideal(model):
    """Generators p_i - dL/d(dot q_i) in the ring ordered velocities >> (p, q)."""
    ring = model.ring
    L = model.lagrangian
    gens = []
    for q in model.coordinates:
        gens.append(ring.var(momentum_symbol(q)) - L.diff(velocity_symbol(q)))
    return gens


def legendre_basis(model, budget=None):
    gens = legendre_ideal(model)
    G = buchberger(gens, budget=budget, ring=model.ring)
    return Legendre(model, gens, G)


def legendre_constraints(legendre):
    """Gröbner basis elements free of velocities (elimination ideal)."""
    ring = legendre.model.ring
    keep = ring.table.indices("momentum", "coordinate")
    return elimination_ideal(legendre.basis, keep)


def canonical_hamiltonian(legendre, space):
    """NF(p_i dot(q_i) - L) modulo the Legendre basis, moved into phase space."""
    model = legendre.model
    ring = model.ring
    expr = -model.lagrangian
    for q in model.coordinates:
        expr = expr + ring.var(momentum_symbol(q)) * ring.var(velocity_symbol(q))
    h, _ = normal_form(expr, legendre.basis)
    vel = set(ring.table.indices("velocity"))
    if vel & h.used_indices():
        raise OrderingBug(f"velocity left in canonical Hamiltonian: {h}")
    return space.ring.convert(h)


def total_hamiltonian(H_C, primaries, space):
    """H_C + sum_a U_a * phi_a over the primary constraints."""
    ring = space.ring
    H = ring.convert(H_C)
    for i, phi in enumerate(primaries):
        H = H + ring.var(multiplier_symbol(i + 1)) * ring.convert(phi)
    return H


def hessian(model):
    L = model.lagrangian
    vel = model.velocities
    first = [L.diff(v) for v in vel]
    return [[d.diff(v) for v in vel] for d in first]


def hessian_rank(model):
    rows = hessian(model)
    M = QuotientMatrix(rows, None, model.ring)
    rank, _ = matrix_rank_mod(M, GenericityCertificate())
    return rank


# ---------------------------------------------------------------------------
# localized values and the Dirac bracket
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalizedExpression:
    """numerator / denominator with the denominator a unit on the constraint set."""

    numerator: object
    denominator: object

    def weak_zero(self, modulus):
        return not reduce_mod(self.numerator, modulus)

    def is_polynomial(self):
        return self.denominator.is_constant()

    def polynomial(self):
        """The value as a Polynomial when the denominator is a constant."""
        if not self.is_polynomial():
            raise ValueError("denominator is not constant")
        c = self.denominator.terms[0][1]
        return self.numerator * (self.numerator.ring.field.one / c)

    def reduced(self, modulus):
        return LocalizedExpression(reduce_mod(self.numerator, modulus), self.denominator)

    def simplified(self):
        """Cancel an exactly dividing denominator; otherwise make its leading sign positive."""
        one = self.numerator.ring.one
        if self.is_polynomial():
            if self.denominator == one:
                return self
            return LocalizedExpression(self.polynomial(), one)
        if not self.numerator:
            return LocalizedExpression(self.numerator, one)
        r, q = normal_form(self.numerator, [self.denominator], track=True)
        if not r:
            return LocalizedExpression(q[0], one)
        d = self.denominator
        if d.ring.field.is_negative(d.lc):
            return LocalizedExpression(-self.numerator, -d)
        return self

    def __str__(self):
        if self.is_polynomial():
            return str(self.polynomial())
        return f"({self.numerator})/({self.denominator})"


class DiracBracket:
    """{f, g}_D = {f, g} - {f, chi_a} C^-1_ab {chi_b, g}, kept as num/det.

    ``inverse`` is a linalg.Inverse of the second-class matrix C_ab = {chi_a, chi_b}.
    """

    def __init__(self, space, second_class, inverse=None, modulus=None):
        self.space = space
        ring = space.ring
        self.chi = [ring.convert(c) for c in second_class]
        self.inverse = inverse
        self.modulus = modulus
        if self.chi:
            self.adj = [[ring.convert(e) for e in row] for row in inverse.adjugate]
            self.det = ring.convert(inverse.det)
        else:
            self.adj = []
            self.det = ring.one

    def __call__(self, f, g, reduce=None):
        space = self.space
        ring = space.ring
        f = ring.convert(f)
        g = ring.convert(g)
        pb = poisson_bracket(f, g, space)
        if not self.chi:
            return LocalizedExpression(pb, ring.one)
        fc = [poisson_bracket(f, c, space) for c in self.chi]
        cg = [poisson_bracket(c, g, space) for c in self.chi]
        num = pb * self.det
        for a, x in enumerate(fc):
            if not x:
                continue
            acc = ring.zero
            for b, y in enumerate(cg):
                if y and self.adj[a][b]:
                    acc = acc + self.adj[a][b] * y
            if acc:
                num = num - x * acc
        if reduce is not None:
            num = reduce_mod(num, ring_modulus(reduce, ring))
        return LocalizedExpression(num, self.det)


def ring_modulus(G, ring):
    if G is None or G.ring is ring:
        return G
    raise ValueError("modulus lives in a different ring")


def dirac_bracket(f, g, second_class, inverse, space, modulus=None):
    return DiracBracket(space, second_class, inverse)(f, g, reduce=modulus)
