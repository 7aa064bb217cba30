"""Normal forms, Buchberger's algorithm (plain and cofactor-tracking), elimination,
ideal and radical membership.
"""

from __future__ import annotations

from dataclasses import dataclass
from heapq import heapify, heappop, heappush

from .poly import (
    MonomialOrder,
    Polynomial,
    Ring,
    TableMismatch,
    coprime,
    madd,
    mdivides,
    mlcm,
    msub,
)

SLACK = "_t"


class ResourceLimitExceeded(RuntimeError):
    """A Gröbner computation hit the configured polynomial or term budget."""


class OrderMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Budget:
    max_polys: int = 5000
    max_terms: int = 2_000_000

    def check(self, polys):
        if len(polys) > self.max_polys:
            raise ResourceLimitExceeded(
                f"basis size {len(polys)} exceeds budget of {self.max_polys} polynomials")
        total = sum(len(p) for p in polys)
        if total > self.max_terms:
            raise ResourceLimitExceeded(
                f"{total} terms in basis exceed budget of {self.max_terms}")


DEFAULT_BUDGET = Budget()


class GroebnerBasis:
    """Reduced Gröbner basis, optionally with cofactors over the generators.

    ``cofactors[i]`` maps generator index j to h_ij with basis[i] = sum_j h_ij * generators[j].
    """

    __slots__ = ("ring", "basis", "generators", "cofactors", "reduced", "_supports")

    def __init__(self, ring, basis, generators=(), cofactors=None, reduced=True):
        self.ring = ring
        self.basis = tuple(basis)
        self.generators = tuple(generators)
        self.cofactors = cofactors
        self.reduced = reduced
        self._supports = None

    def __len__(self):
        return len(self.basis)

    def __iter__(self):
        return iter(self.basis)

    def __getitem__(self, i):
        return self.basis[i]

    def __repr__(self):
        return f"GroebnerBasis([{', '.join(map(str, self.basis))}])"

    @property
    def order(self):
        return self.ring.order

    def is_trivial(self):
        return is_trivial(self)

    def reduce(self, f):
        return normal_form(f, self)[0]

    def contains(self, f):
        return ideal_membership(f, self)


def _as_list(G):
    if isinstance(G, GroebnerBasis):
        return G.basis
    return tuple(G)


def _support(m):
    return tuple((i, e) for i, e in enumerate(m) if e)


def normal_form(f, G, track=False):
    """Fully reduced remainder of f modulo G.

    Returns ``(remainder, quotients)``; with ``track`` the quotients satisfy
    f = sum(quotients[i] * G[i]) + remainder exactly, else quotients is None.
    """
    basis = _as_list(G)
    ring = f.ring
    if basis and basis[0].ring.table != ring.table:
        raise TableMismatch("normal form across variable tables")
    if basis and basis[0].ring is not ring:
        f = basis[0].ring.convert(f)
        ring = f.ring
    if not f.terms or not basis:
        quots = [ring.zero for _ in basis] if track else None
        return f, quots
    nkey = ring.order.nkey
    divs = []
    for g in basis:
        lm = g.lm
        divs.append((sum(lm), _support(lm), lm, g.lc, g.terms[1:]))
    p = dict(f.terms)
    heap = [(nkey(m), m) for m in p]
    heapify(heap)
    rem = []
    quot = [dict() for _ in basis] if track else None
    one = ring.field.one
    while heap:
        _, m = heappop(heap)
        c = p.pop(m, None)
        if c is None:
            continue
        dm = sum(m)
        for i, (dl, supp, lm, lc, tail) in enumerate(divs):
            if dl > dm:
                continue
            for j, e in supp:
                if m[j] < e:
                    break
            else:
                break
        else:
            rem.append((m, c))
            continue
        q = msub(m, lm)
        qc = c if lc == one else c / lc
        if track:
            qi = quot[i]
            v = qi.get(q)
            qi[q] = qc if v is None else v + qc
        nq = -qc
        for mm, cc in tail:
            t = madd(q, mm)
            v = p.get(t)
            if v is None:
                p[t] = nq * cc
                heappush(heap, (nkey(t), t))
            else:
                v = v + nq * cc
                if v:
                    p[t] = v
                else:
                    del p[t]
    r = Polynomial(ring, tuple(rem))
    if track:
        return r, [ring.from_dict(q) for q in quot]
    return r, None


def spoly(f, g):
    """S-polynomial of f and g (both nonzero)."""
    l = mlcm(f.lm, g.lm)
    one = f.ring.field.one
    return (f.mul_term(msub(l, f.lm), one / f.lc)
            - g.mul_term(msub(l, g.lm), one / g.lc))


def _lincomb(terms, ring):
    """sum of (Polynomial coefficient, cofactor dict) -> cofactor dict."""
    out = {}
    for coef, cof in terms:
        if not coef:
            continue
        for j, h in cof.items():
            v = out.get(j)
            t = coef * h
            out[j] = t if v is None else v + t
    return {j: h for j, h in out.items() if h}


def _update(G, B, h, lms):
    """Gebauer-Möller installation of index h into active set G and pair list B."""
    lh = lms[h]
    C = list(G)
    D = []
    while C:
        g1 = C.pop(0)
        l1 = mlcm(lh, lms[g1])
        if coprime(lh, lms[g1]):
            D.append(g1)
            continue
        redundant = False
        for g2 in C:
            if mdivides(mlcm(lh, lms[g2]), l1):
                redundant = True
                break
        if not redundant:
            for g2 in D:
                if mdivides(mlcm(lh, lms[g2]), l1):
                    redundant = True
                    break
        if not redundant:
            D.append(g1)
    E = [g for g in D if not coprime(lh, lms[g])]
    Bnew = []
    for (g1, g2, l) in B:
        if (not mdivides(lh, l) or mlcm(lms[g1], lh) == l or mlcm(lms[g2], lh) == l):
            Bnew.append((g1, g2, l))
    for g in E:
        Bnew.append((g, h, mlcm(lms[g], lh)))
    Gnew = [g for g in G if not mdivides(lh, lms[g])]
    Gnew.append(h)
    return Gnew, Bnew


def buchberger(generators, track_cofactors=False, budget=None, ring=None):
    """Reduced Gröbner basis of the ideal generated by ``generators``.

    Normal pair selection (smallest lcm first) with Buchberger's coprime and
    chain criteria in Gebauer-Möller form.  With ``track_cofactors`` the
    result carries h with basis[i] = sum_j h_ij * generators[j].
    """
    gens = list(generators)
    if ring is None:
        if not gens:
            raise ValueError("buchberger needs a ring or at least one generator")
        ring = gens[0].ring
    gens = [ring.convert(g) for g in gens]
    budget = budget or DEFAULT_BUDGET
    key = ring.key
    one = ring.field.one

    polys = []
    cofs = []
    lms = []
    G = []
    B = []

    def install(p, cof):
        lc = p.lc
        if lc != one:
            inv = one / lc
            p = p * inv
            if cof is not None:
                cof = {j: h * inv for j, h in cof.items()}
        polys.append(p)
        cofs.append(cof)
        lms.append(p.lm)
        return len(polys) - 1

    for j, g in enumerate(gens):
        if not g:
            continue
        cof = {j: ring.one} if track_cofactors else None
        h = install(g, cof)
        G, B = _update(G, B, h, lms)

    while B:
        # normal strategy: smallest lcm, ties by pair indices
        best = min(range(len(B)), key=lambda t: (key(B[t][2]), B[t][1], B[t][0]))
        i, j, l = B.pop(best)
        fi, fj = polys[i], polys[j]
        s = fi.mul_term(msub(l, fi.lm), one) - fj.mul_term(msub(l, fj.lm), one)
        active = [polys[k] for k in G]
        h, quot = normal_form(s, active, track=track_cofactors)
        if not h:
            continue
        cof = None
        if track_cofactors:
            t1 = Polynomial(ring, ((msub(l, fi.lm), one),))
            t2 = Polynomial(ring, ((msub(l, fj.lm), -one),))
            parts = [(t1, cofs[i]), (t2, cofs[j])]
            parts.extend((-q, cofs[k]) for q, k in zip(quot, G))
            cof = _lincomb(parts, ring)
        idx = install(h, cof)
        G, B = _update(G, B, idx, lms)
        budget.check([polys[k] for k in G])

    return _interreduce(ring, polys, cofs, G, gens, track_cofactors)


def _interreduce(ring, polys, cofs, G, gens, track):
    # minimal basis: drop elements whose leading monomial is divisible by another's
    active = sorted(G, key=lambda k: (ring.key(polys[k].lm), k))
    minimal = []
    for k in active:
        if not any(mdivides(polys[m].lm, polys[k].lm) for m in minimal):
            minimal.append(k)
    basis = []
    cof_out = [] if track else None
    for k in minimal:
        others = [polys[m] for m in minimal if m != k]
        others_idx = [m for m in minimal if m != k]
        r, quot = normal_form(polys[k], others, track=track)
        r = r.monic()
        basis.append(r)
        if track:
            lc0 = polys[k].lc
            # r(before monic) = polys[k] - sum q*others; polys are monic so lc is kept
            parts = [(ring.one, cofs[k])]
            parts.extend((-q, cofs[m]) for q, m in zip(quot, others_idx))
            cof = _lincomb(parts, ring)
            assert lc0 == ring.field.one
            cof_out.append(cof)
    order = sorted(range(len(basis)), key=lambda t: ring.key(basis[t].lm))
    basis = [basis[t] for t in order]
    if track:
        cof_out = [cof_out[t] for t in order]
    return GroebnerBasis(ring, basis, gens, cof_out, reduced=True)


def groebner(generators, ring=None, **kw):
    return buchberger(generators, ring=ring, **kw)


def is_groebner(G):
    """All S-polynomials reduce to zero."""
    basis = _as_list(G)
    for a in range(len(basis)):
        for b in range(a + 1, len(basis)):
            r, _ = normal_form(spoly(basis[a], basis[b]), basis)
            if r:
                return False
    return True


def is_reduced(G):
    basis = _as_list(G)
    for i, g in enumerate(basis):
        if g.lc != g.ring.field.one:
            return False
        for j, h in enumerate(basis):
            if i != j and any(mdivides(h.lm, m) for m, _ in g.terms):
                return False
    return True


def check_cofactors(G):
    """basis[i] - sum_j h_ij * generators[j] == 0 for every i."""
    if G.cofactors is None:
        return True
    ring = G.ring
    for g, cof in zip(G.basis, G.cofactors):
        acc = ring.zero
        for j, h in cof.items():
            acc = acc + h * ring.convert(G.generators[j])
        if acc != g:
            return False
    return True


def elimination_ideal(G, keep):
    """Basis elements involving only the ``keep`` variables (names or indices)."""
    ring = G.ring
    table = ring.table
    keep_idx = {table.index(k) if isinstance(k, str) else k for k in keep}
    elim = [i for i in range(len(table)) if i not in keep_idx]
    if not ring.order.eliminates(elim):
        raise OrderMismatch("monomial order does not eliminate the dropped variables")
    return [g for g in G.basis if g.used_indices() <= keep_idx]


def ideal_membership(f, G):
    r, _ = normal_form(f, G)
    return not r


def is_trivial(G):
    basis = _as_list(G)
    return len(basis) == 1 and basis[0].is_constant() and bool(basis[0])


def slack_ring(ring, name=SLACK):
    """Ring with one extra auxiliary variable placed in a leading block."""
    table = ring.table.extend([name], "auxiliary")
    n = len(ring.table)
    order = MonomialOrder.block([((n,), "lex")] + list(ring.order.blocks), n + 1)
    return Ring(table, order, ring.field)


def radical_membership(f, generators, budget=None):
    """f in sqrt(<generators>) via 1 in <generators, 1 - t f>."""
    gens = list(generators)
    ring = f.ring
    sring = slack_ring(ring)
    t = sring.var(SLACK)
    lifted = [sring.convert(g) for g in gens]
    lifted.append(sring.one - t * sring.convert(f))
    G = buchberger(lifted, budget=budget, ring=sring)
    return is_trivial(G)


def saturation_basis(generators, unit, budget=None):
    """Gröbner basis (in a slack ring) of <generators> localized at ``unit``.

    f lies in the saturation <generators> : unit^inf iff its normal form
    against the returned basis is zero.
    """
    ring = unit.ring
    sring = slack_ring(ring)
    t = sring.var(SLACK)
    lifted = [sring.convert(g) for g in generators]
    lifted.append(t * sring.convert(unit) - sring.one)
    return buchberger(lifted, budget=budget, ring=sring)


def saturated_membership(f, sat_basis):
    r, _ = normal_form(sat_basis.ring.convert(f), sat_basis)
    return not r


def ideals_equal(F, H, budget=None):
    """Mutual membership of two generator lists over the same ring."""
    F, H = list(F), list(H)
    if not F or not H:
        return not any(F) and not any(H)
    GF = buchberger(F, budget=budget)
    GH = buchberger(H, budget=budget)
    return GF.basis == GH.basis
