"""Constraint analysis pipeline.

primary constraints -> consistency completion -> first/second class
separation -> constraint algebra and rho coefficients -> gauge generator.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .groebner import (
    DEFAULT_BUDGET,
    Budget,
    buchberger,
    is_trivial,
    normal_form,
    radical_membership,
)
from .ingest import legendre_ring
from .linalg import (
    GenericityCertificate,
    QuotientMatrix,
    complement_space,
    eliminate,
    factor_split,
    matrix_inverse_mod,
    matrix_rank_mod,
    null_space_mod,
    reduce_mod,
)
from .mechanics import (
    CONVENTION,
    DiracBracket,
    LocalizedExpression,
    PhaseSpace,
    canonical_hamiltonian,
    hessian_rank,
    legendre_basis,
    legendre_constraints,
    poisson_bracket,
    total_hamiltonian,
)

STAGES = ("primary", "complete", "separate", "generator", "all")


class AnalysisError(RuntimeError):
    pass


class Inconsistent(AnalysisError):
    """The constraint ideal became trivial: no consistent motion exists."""


class IterationLimit(AnalysisError):
    pass


class FirstClassIncomplete(AnalysisError):
    pass


class GaugeSystemInconsistent(AnalysisError):
    pass


@dataclass
class Options:
    order: str = "degrevlex"
    weak_equality: str = "ideal"
    max_iterations: int = 32
    budget: Budget = DEFAULT_BUDGET


@dataclass
class Constraint:
    polynomial: object
    generation: int
    label: str
    provenance: str
    cls: str = "unresolved"

    def to_json(self):
        return {"label": self.label, "polynomial": str(self.polynomial),
                "generation": self.generation, "class": self.cls,
                "provenance": self.provenance}


@dataclass
class Combination:
    """A constraint built as sum_a coeffs[a] * Phi[a] (first/second class)."""

    polynomial: object
    coeffs: list
    label: str
    primary: bool

    def to_json(self, names):
        terms = [f"({c})*{n}" if len(c) > 1 else f"{c}*{n}"
                 for c, n in zip(self.coeffs, names) if c]
        return {"label": self.label, "polynomial": str(self.polynomial),
                "primary": self.primary, "combination": " + ".join(terms)}


@dataclass
class Sweep:
    index: int
    admitted: list
    rejected: int
    determined: list

    def to_json(self):
        return {"sweep": self.index, "admitted": self.admitted,
                "rejected_candidates": self.rejected, "determined_multipliers": self.determined}


@dataclass
class ConstraintAnalysis:
    model: object
    options: Options
    space: PhaseSpace          # phase space carrying the multipliers
    pq: object                 # ring over (p, q) only
    H_C: object
    constraints: list = field(default_factory=list)
    n_primary: int = 0
    H_T: object = None
    multipliers: dict = field(default_factory=dict)
    multiplier_relations: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    status: str = "consistent"
    warnings: list = field(default_factory=list)
    certificate: GenericityCertificate = None
    basis: object = None       # GB of all constraints in pq
    primary_basis: object = None
    hessian_rank: int = 0
    # separation
    M: QuotientMatrix = None
    rank: int = None
    first_class: list = None
    second_class: list = None
    k1: int = None
    C: QuotientMatrix = None
    C_inverse: object = None
    dirac: DiracBracket = None
    # generator
    rho: dict = None
    algebra: dict = None
    generator: object = None
    timings: dict = field(default_factory=dict)

    @property
    def k(self):
        return len(self.constraints)

    @property
    def primaries(self):
        return [c for c in self.constraints if c.generation == 1]

    def polys(self):
        return [c.polynomial for c in self.constraints]


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _complexity(p):
    return (p.total_degree(), len(p), p.ring.key(p.lm))


def _gb(polys, ring, options, track=False):
    return buchberger(polys, track_cofactors=track, budget=options.budget, ring=ring)


def _weak_member(f, G, gens, options):
    if not reduce_mod(f, G):
        return True
    if options.weak_equality == "radical":
        return radical_membership(f, gens, budget=options.budget)
    return False


def _squarefree_univariate(p):
    """Squarefree part of p when p involves a single variable, else p."""
    used = p.used_indices()
    if len(used) != 1:
        return p
    (i,) = used
    # Euclid over the coefficient field in one variable
    a = p.monic()
    b = p.diff_index(i)
    while b:
        _, r = _divmod_uni(a, b, i)
        a, b = b, r
    g = a.monic()
    if g.is_constant():
        return p.monic()
    q, r = _divmod_uni(p, g, i)
    assert not r
    return q.monic()


def _divmod_uni(a, b, i):
    ring = a.ring
    q = ring.zero
    r = a
    db = b.lm[i]
    lcb = b.lc
    while r and r.lm[i] >= db:
        m = tuple(r.lm[i] - db if j == i else 0 for j in range(ring.nvars))
        c = r.lc / lcb
        t = ring.monomial(m, c)
        q = q + t
        r = r - t * b
    return q, r


def _strip_row_content(p, cert):
    """Remove monomial and parameter content from a derived candidate constraint."""
    if not p:
        return p
    factors = factor_split(p)
    if len(factors) <= 1:
        return p.monic()
    ring = p.ring
    flat = p
    for f in factors[:-1]:
        if len(f) == 1:
            # monomial or parameter factor: divide it out as many times as it goes
            m, c = f.terms[0]
            while all(all(a >= b for a, b in zip(mm, m)) for mm, _ in flat.terms) and \
                    (any(m) or not c.is_constant() if hasattr(c, "is_constant") else any(m)):
                if any(m):
                    flat = type(p)(ring, tuple((tuple(a - b for a, b in zip(mm, m)), cc)
                                               for mm, cc in flat.terms))
                else:
                    flat = flat * (ring.field.one / c)
                cert.add(f, "factor removed from a derived constraint")
                if not any(m):
                    break
    return flat.monic()


# ---------------------------------------------------------------------------
# primary constraints
# ---------------------------------------------------------------------------

def primary_constraints(model, options=None, analysis=None):
    """Eliminate velocities, squarefree-adjust, then minimize by radical membership."""
    options = options or Options()
    t0 = time.perf_counter()
    lg = legendre_basis(model, budget=options.budget)
    cands = legendre_constraints(lg)
    space = PhaseSpace(model.coordinates, model.ring.field, options.order)
    pq = space.ring
    cands = [pq.convert(c) for c in cands]
    warnings = []
    adjusted = []
    for c in cands:
        s = _squarefree_univariate(c)
        if s != c.monic():
            warnings.append(f"squarefree part taken: {c} -> {s}")
        adjusted.append(s)
    # drop members implied by the others, most complex first
    keep = list(adjusted)
    for c in sorted(adjusted, key=_complexity, reverse=True):
        rest = [d for d in keep if d is not c]
        if not rest:
            continue
        G = _gb(rest, pq, options)
        if not reduce_mod(c, G) or radical_membership(c, rest, budget=options.budget):
            keep = rest
    keep.sort(key=lambda p: (p.total_degree(), pq.order.nkey(p.lm)))
    H_C = canonical_hamiltonian(lg, space)
    an = analysis or ConstraintAnalysis(model, options, space, pq, H_C)
    an.H_C = H_C
    an.hessian_rank = hessian_rank(model)
    an.warnings.extend(warnings)
    an.certificate = GenericityCertificate()
    for d in model.divisors:
        an.certificate.add(pq.const(d), "divisor in the Lagrangian")
    an.constraints = [Constraint(p, 1, f"phi_{i + 1}", "velocity elimination")
                      for i, p in enumerate(keep)]
    an.n_primary = len(keep)
    if model.n - an.hessian_rank != an.n_primary:
        an.warnings.append(
            f"primary constraint count {an.n_primary} differs from n - rank(Hessian) = "
            f"{model.n - an.hessian_rank}")
    an.primary_basis = _gb(an.polys(), pq, options) if keep else None
    an.basis = an.primary_basis
    an.timings["primary"] = time.perf_counter() - t0
    return an


# ---------------------------------------------------------------------------
# completion
# ---------------------------------------------------------------------------

def _split_multipliers(h, space, pq):
    """h = c0 + sum_a c_a U_a  ->  [c_1, ..., c_m, c0] over the (p, q) ring."""
    ring = space.ring
    uidx = ring.table.indices("multiplier")
    parts = h.coefficient_split(uidx)
    m = len(uidx)
    row = [pq.zero] * (m + 1)
    for key, poly in parts.items():
        deg = sum(key)
        if deg == 0:
            row[m] = pq.convert(poly)
        elif deg == 1:
            row[key.index(1)] = pq.convert(poly)
        else:
            raise AnalysisError("consistency condition is nonlinear in the multipliers")
    return row


def consistency_step(an, sweep_index):
    """One sweep: solve the accumulated multiplier system, return new constraints."""
    space = an.space
    pq = an.pq
    G = an.basis
    H_T = an.H_T
    m = an.n_primary
    rows = []
    for c in an.constraints:
        h = poisson_bracket(space.ring.convert(c.polynomial), H_T, space)
        row = _split_multipliers(h, space, pq)
        rows.append([reduce_mod(e, G) for e in row])
    M = QuotientMatrix(rows, G, pq)
    cert = GenericityCertificate(G)
    el = eliminate(M, cert, columns=range(m))
    pivot_rows = {i for i, _, _ in el.pivots}
    candidates = []
    for i, r in enumerate(el.rows):
        if i in pivot_rows:
            continue
        c0 = r[m]
        if c0:
            touched = any(a != b for a, b in zip(r, rows[i]))
            c0 = _strip_row_content(c0, cert) if touched else c0
            candidates.append((i, c0))
    determined = {}
    for i, j, a in el.pivots:
        r = el.rows[i]
        num = r[m]
        ring = space.ring
        num = ring.convert(num)
        for f in range(m):
            if f != j and r[f]:
                num = num + ring.convert(r[f]) * ring.var(space.multipliers[f])
        determined[space.multipliers[j]] = LocalizedExpression(-num, ring.convert(a)).simplified()
    return candidates, determined, cert


def complete_constraints(model, options=None, stop_after_primary=False):
    options = options or Options()
    an = primary_constraints(model, options)
    if stop_after_primary:
        return an
    t0 = time.perf_counter()
    m = an.n_primary
    an.space = an.space.extend(multipliers=m)
    an.H_T = total_hamiltonian(an.H_C, [c.polynomial for c in an.primaries], an.space)
    if m == 0:
        an.timings["complete"] = time.perf_counter() - t0
        an.trace.append(Sweep(1, [], 0, []))
        return an
    sweep = 0
    while True:
        sweep += 1
        if sweep > options.max_iterations:
            raise IterationLimit(f"no fixpoint after {options.max_iterations} sweeps")
        candidates, determined, cert = consistency_step(an, sweep)
        admitted, rejected = [], 0
        for i, c0 in candidates:
            polys = an.polys()
            if _weak_member(c0, an.basis, polys, options):
                rejected += 1
                continue
            r = reduce_mod(c0, an.basis).monic()
            label = f"phi_{len(an.constraints) + 1}"
            gen = an.constraints[i].generation + 1
            an.constraints.append(Constraint(
                r, gen, label, f"consistency of {an.constraints[i].label} (sweep {sweep})"))
            admitted.append(label)
            an.basis = _gb(an.polys(), an.pq, options)
            if is_trivial(an.basis):
                an.status = "inconsistent"
                an.trace.append(Sweep(sweep, admitted, rejected, []))
                an.timings["complete"] = time.perf_counter() - t0
                raise Inconsistent(an)
        an.trace.append(Sweep(sweep, admitted, rejected, sorted(determined)))
        if not admitted:
            an.multipliers = determined
            an.certificate.merge(cert)
            break
    _check_admission(an)
    _check_fixpoint(an)
    an.timings["complete"] = time.perf_counter() - t0
    return an


def _check_admission(an):
    """No constraint lies in the ideal generated by the others."""
    polys = an.polys()
    pq = an.pq
    # Enlarging the ideal by q_j - c_j can only add members, so non-membership
    # there settles the question; the full basis is the fallback.
    pins = [pq.var(pq.table.symbols[j]) - pq.const(j + 2)
            for j in pq.table.indices("coordinate")]
    for i, p in enumerate(polys):
        rest = polys[:i] + polys[i + 1:]
        if not rest:
            continue
        if reduce_mod(p, _gb(rest + pins, pq, an.options)):
            continue
        if not reduce_mod(p, _gb(rest, pq, an.options)):
            an.warnings.append(f"{an.constraints[i].label} lies in the ideal of the others")


def _check_fixpoint(an):
    """Every constraint is preserved once determined multipliers are substituted."""
    space = an.space
    ring = space.ring
    G = an.basis
    for c in an.constraints:
        h = poisson_bracket(ring.convert(c.polynomial), an.H_T, space)
        row = _split_multipliers(h, space, an.pq)
        m = an.n_primary
        # den * h with each determined U replaced by num/den
        dens = [an.multipliers[u].denominator for u in space.multipliers if u in an.multipliers]
        D = ring.one
        for d in dens:
            D = D * d
        acc = ring.convert(row[m]) * D
        for a, u in enumerate(space.multipliers):
            if not row[a]:
                continue
            if u in an.multipliers:
                le = an.multipliers[u]
                rest = ring.one
                for d in dens:
                    if d is not le.denominator:
                        rest = rest * d
                acc = acc + ring.convert(row[a]) * le.numerator * _drop_one(D, le.denominator, dens, ring)
            else:
                acc = acc + ring.convert(row[a]) * ring.var(u) * D
        split = _split_multipliers(acc, space, an.pq)
        if any(reduce_mod(e, G) for e in split):
            raise AnalysisError(f"fixpoint check failed for {c.label}")


def _drop_one(D, d, dens, ring):
    out = ring.one
    skipped = False
    for e in dens:
        if not skipped and e is d:
            skipped = True
            continue
        out = out * e
    return out


# ---------------------------------------------------------------------------
# separation
# ---------------------------------------------------------------------------

def poisson_matrix(an):
    pq = an.pq
    space = PhaseSpace(an.model.coordinates, pq.field, an.options.order)
    polys = an.polys()
    rows = [[poisson_bracket(a, b, space) for b in polys] for a in polys]
    return QuotientMatrix(rows, an.basis, pq)


def _combine(coeffs, polys, ring):
    acc = ring.zero
    for c, p in zip(coeffs, polys):
        if c:
            acc = acc + c * p
    return acc


def separate_constraints(an):
    t0 = time.perf_counter()
    pq = an.pq
    G = an.basis
    k = an.k
    cert = an.certificate
    cert.modulus = G
    if k == 0:
        an.M = QuotientMatrix([], G, pq)
        an.rank, an.first_class, an.second_class, an.k1 = 0, [], [], 0
        an.timings["separate"] = time.perf_counter() - t0
        return an
    M = poisson_matrix(an)
    if not M.is_skew():
        raise AnalysisError("Poisson matrix is not skew-symmetric")
    rank, _ = matrix_rank_mod(M, cert)
    if rank % 2:
        raise AnalysisError(f"skew-symmetric matrix with odd rank {rank}")
    kernel = null_space_mod(M, cert)
    gens = [c.generation for c in an.constraints]
    kernel.sort(key=lambda v: (max(g for g, e in zip(gens, v) if e), _first_nz(v)))
    polys = an.polys()
    first = []
    for v in kernel:
        p = _combine(v, polys, pq)
        primary = all(g == 1 for g, e in zip(gens, v) if e)
        first.append(Combination(p, v, "", primary))
    second = []
    if rank:
        T = complement_space(kernel, k, G, cert, ring=pq)
        for v in T:
            p = _combine(v, polys, pq)
            primary = all(g == 1 for g, e in zip(gens, v) if e)
            second.append(Combination(p, v, "", primary))
    for i, c in enumerate(first):
        c.label = f"psi_{i + 1}"
    for i, c in enumerate(second):
        c.label = f"chi_{i + 1}"
    an.M, an.rank = M, rank
    an.first_class, an.second_class = first, second
    an.k1 = sum(1 for c in first if c.primary)
    for a, c in enumerate(an.constraints):
        if not any(M.rows[a]):
            c.cls = "first"
        elif all(not v[a] for v in kernel):
            c.cls = "second"
        else:
            c.cls = "unresolved"
    # class soundness
    space = PhaseSpace(an.model.coordinates, pq.field, an.options.order)
    for psi in first:
        for phi in polys:
            if reduce_mod(poisson_bracket(psi.polynomial, phi, space), G):
                raise AnalysisError(f"{psi.label} is not first class")
    if second:
        C = QuotientMatrix([[poisson_bracket(a.polynomial, b.polynomial, space)
                             for b in second] for a in second], G, pq)
        an.C = C
        an.C_inverse = matrix_inverse_mod(C, cert)
    an.dirac = DiracBracket(space, [c.polynomial for c in second], an.C_inverse)
    an.timings["separate"] = time.perf_counter() - t0
    return an


def _first_nz(v):
    return next(i for i, e in enumerate(v) if e)


# ---------------------------------------------------------------------------
# structure coefficients
# ---------------------------------------------------------------------------

def _express(num_parts, EG, columns, ring):
    """Quotients of f mod the extended basis EG mapped onto generator ``columns``.

    Returns (coefficient per column, remainder).
    """
    f = num_parts
    r, quots = normal_form(f, EG, track=True)
    out = {j: ring.zero for j in columns}
    for q, cof in zip(quots, EG.cofactors):
        if not q:
            continue
        for j, h in cof.items():
            if j in out:
                out[j] = out[j] + q * h
    return out, r


def _structure(an, f_pb, f_chi, EG, columns, project):
    """Coefficients c_j of {f, X}_D on generator columns, projected.

    f_pb is the Poisson bracket {f, X}; f_chi[a] is {f, chi_a}.  The Dirac
    correction -sum {f, chi_a} (C^-1 {chi, X})_a is expanded through the
    representation of {f, chi_a} in the generators.  Returns
    {j: LocalizedExpression}.
    """
    ring = an.pq
    P, r = _express(f_pb, EG, range(len(EG.generators)), ring)
    if r:
        raise FirstClassIncomplete(f"bracket does not reduce to zero: remainder {r}")
    corr = {j: ring.zero for j in range(len(EG.generators))}
    y = an._y_cache
    for a, x in enumerate(f_chi):
        if not x:
            continue
        b, r = _express(x, EG, range(len(EG.generators)), ring)
        if r:
            raise FirstClassIncomplete(f"bracket with a second-class constraint leaves {r}")
        for j, bj in b.items():
            if bj and y[a]:
                corr[j] = corr[j] + bj * y[a]
    det = an.dirac.det if an.second_class else ring.one
    out = {}
    for j in columns:
        c = project(corr[j])
        if not c:
            out[j] = LocalizedExpression(project(P[j]), ring.one)
        else:
            out[j] = LocalizedExpression(project(det * P[j] - corr[j]), det).simplified()
    return out


def _prepare_y(an, X):
    """y_a = sum_b adj_ab {chi_b, X} for the Dirac correction."""
    ring = an.pq
    space = an.dirac.space
    if not an.second_class:
        return []
    cx = [poisson_bracket(c.polynomial, X, space) for c in an.second_class]
    y = []
    for a in range(len(cx)):
        acc = ring.zero
        for b, v in enumerate(cx):
            if v and an.C_inverse.adjugate[a][b]:
                acc = acc + an.C_inverse.adjugate[a][b] * v
        y.append(acc)
    return y


def rho_coefficients(an):
    """{psi_mu, H_C}_D = rho_mu,nu psi_nu with columns on the secondary first-class set,
    projected onto the primary surface."""
    ring = an.pq
    space = an.dirac.space
    first = an.first_class
    primaries = [c.polynomial for c in an.primaries]
    sec_first = [i for i, c in enumerate(first) if not c.primary]
    sec_second = [c for c in an.second_class if not c.primary]
    gens = primaries + [first[i].polynomial for i in sec_first] + [c.polynomial for c in sec_second]
    if not gens:
        return {}
    # the gauge-function equations need the secondary first-class
    # constraints not to vanish on the primary surface
    for i in sec_first:
        if not primaries or radical_membership(first[i].polynomial, primaries,
                                               budget=an.options.budget):
            an.warnings.append(f"{first[i].label} vanishes on the primary constraint surface")
    EG = buchberger(gens, track_cofactors=True, budget=an.options.budget, ring=ring)
    offset = len(primaries)
    columns = [offset + t for t in range(len(sec_first))]
    G1 = an.primary_basis

    def project(p):
        return reduce_mod(p, G1)

    an._y_cache = _prepare_y(an, an.H_C)
    rho = {}
    for mu, psi in enumerate(first):
        pb = poisson_bracket(psi.polynomial, an.H_C, space)
        fchi = [poisson_bracket(psi.polynomial, c.polynomial, space) for c in an.second_class]
        coeffs = _structure(an, pb, fchi, EG, columns, project)
        for t, j in enumerate(columns):
            rho[(mu, sec_first[t])] = coeffs[j]
        # secondary second-class columns must vanish on the primary surface
        for t in range(len(sec_second)):
            j = offset + len(sec_first) + t
            extra = _structure(an, pb, fchi, EG, [j], project)[j]
            if extra.numerator:
                an.warnings.append(
                    f"rho of {psi.label} has a component on a secondary second-class constraint")
    return rho


def constraint_algebra(an):
    """{psi_a, psi_b}_D = varrho_abc psi_c (second-class components dropped).

    Brackets are expanded over the original constraints, then mapped onto
    (psi, chi) through the inverse of the change-of-basis matrix S whose rows
    are the combination vectors.  Coefficients are taken mod the constraint
    ideal, where they are unique.
    """
    ring = an.pq
    first = an.first_class
    if not first:
        return {}
    combos = first + an.second_class
    G = an.basis
    S = QuotientMatrix([[reduce_mod(e, G) for e in c.coeffs] for c in combos], G, ring)
    inv = matrix_inverse_mod(S, an.certificate,
                             reason="change of basis to first/second-class constraints")
    EG = buchberger(an.polys(), track_cofactors=True, budget=an.options.budget, ring=ring)
    k = len(combos)
    out = {}
    for a in range(len(first)):
        for b in range(a + 1, len(first)):
            le = an.dirac(first[a].polynomial, first[b].polynomial)
            h, r = _express(le.numerator, EG, range(k), ring)
            if r:
                raise FirstClassIncomplete(
                    f"{{{first[a].label}, {first[b].label}}}_D leaves remainder {r}")
            for c in range(len(first)):
                acc = ring.zero
                for j in range(k):
                    if h[j] and inv.adjugate[j][c]:
                        acc = acc + h[j] * inv.adjugate[j][c]
                v = reduce_mod(acc, G)
                if v:
                    out[(a, b, c)] = LocalizedExpression(v, inv.det * le.denominator).simplified()
    return out


# ---------------------------------------------------------------------------
# gauge generator
# ---------------------------------------------------------------------------

@dataclass
class GaugeGenerator:
    space: PhaseSpace
    k1: int
    s: int
    numerator: object        # G * denominator, in the gauge ring
    denominator: object
    solved: dict             # eps symbol -> LocalizedExpression
    free: list               # undetermined eps^(1) symbols
    eps2: list               # eps^(2) symbols
    conserved: bool = False

    @property
    def polynomial(self):
        return LocalizedExpression(self.numerator, self.denominator).polynomial()

    def __str__(self):
        return str(LocalizedExpression(self.numerator, self.denominator))


def build_generator(an):
    """Solve the gauge-function system for eps^(1) and assemble G."""
    first = an.first_class
    s = len(first)
    k1 = an.k1
    space = PhaseSpace(an.model.coordinates, an.pq.field, an.options.order, gauge=s)
    ring = space.ring
    eps = [space.gauge(i + 1) for i in range(s)]
    prim_idx = [i for i, c in enumerate(first) if c.primary]
    sec_idx = [i for i, c in enumerate(first) if not c.primary]
    rho = an.rho
    G1 = an.primary_basis
    G1g = buchberger([ring.convert(p) for p in G1], ring=ring) if G1 is not None else None
    # rows gamma: sum_beta rho_beta,gamma eps_beta + (deps_gamma + sum_delta rho_delta,gamma eps_delta) = 0
    rows = []
    for gamma in sec_idx:
        entries = {mu: rho[(mu, gamma)] for mu in range(s)}
        D = ring.one
        dens = []
        for le in entries.values():
            d = le.denominator
            if not d.is_constant() and d not in dens:
                dens.append(d)
                D = D * ring.convert(d)
        def scaled(le):
            num = ring.convert(le.numerator)
            if le.denominator.is_constant():
                c = le.denominator.terms[0][1]
                return num * D * (ring.field.one / c)
            rest = ring.one
            for d in dens:
                if d != le.denominator:
                    rest = rest * ring.convert(d)
            return num * rest
        row = [scaled(entries[b]) for b in prim_idx]
        rhs = eps[gamma][1] * D
        for delta in sec_idx:
            rhs = rhs + scaled(entries[delta]) * eps[delta][0]
        rows.append(row + [rhs])
    solved, free = {}, []
    numer = ring.zero
    denom = ring.one
    if rows:
        Mq = QuotientMatrix(rows, G1g, ring)
        el = eliminate(Mq, GenericityCertificate(G1g), columns=range(len(prim_idx)))
        pivot_rows = {i for i, _, _ in el.pivots}
        for i, r in enumerate(el.rows):
            if i not in pivot_rows and r[-1]:
                raise GaugeSystemInconsistent(f"residual {r[-1]}")
        pivots = {j: (i, a) for i, j, a in el.pivots}
        dens = []
        for j, (i, a) in sorted(pivots.items()):
            if not a.is_constant() and a not in dens:
                dens.append(a)
        for a in dens:
            denom = denom * a
        for t, b in enumerate(prim_idx):
            e = eps[b][0]
            if t in pivots:
                i, a = pivots[t]
                num = -el.rows[i][-1]
                for f in range(len(prim_idx)):
                    if f != t and el.rows[i][f]:
                        num = num - el.rows[i][f] * eps[prim_idx[f]][0]
                num = reduce_mod(num, G1g)
                solved[str(e)] = LocalizedExpression(num, a).simplified()
                if a.is_constant():
                    coef = num * (ring.field.one / a.terms[0][1]) * denom
                else:
                    rest = ring.one
                    for d in dens:
                        if d != a:
                            rest = rest * d
                    coef = num * rest
            else:
                free.append(str(e))
                coef = e * denom
            numer = numer + coef * ring.convert(first[b].polynomial)
    else:
        for b in prim_idx:
            free.append(str(eps[b][0]))
            numer = numer + eps[b][0] * ring.convert(first[b].polynomial)
    for d in sec_idx:
        numer = numer + eps[d][0] * denom * ring.convert(first[d].polynomial)
    gen = GaugeGenerator(space, k1, s, numer, denom, solved, free,
                         [str(eps[d][0]) for d in sec_idx])
    gen.conserved = conservation_check(an, gen, G1g)
    if not gen.conserved:
        raise AnalysisError("generator is not conserved on the primary surface")
    return gen


def _dirac_in(an, space):
    return DiracBracket(space, [c.polynomial for c in an.second_class], an.C_inverse)


def conservation_check(an, gen, G1g):
    """NF of dG/dt = dG/dt(explicit) + {G, H_C}_D over the primary surface is 0."""
    space = gen.space
    ring = space.ring
    db = _dirac_in(an, space)
    Gn, D = gen.numerator, gen.denominator
    H = ring.convert(an.H_C)
    dGn = space.time_derivative(Gn)
    num_G = db(Gn, H).numerator
    det = db.det
    total = D * det * dGn + D * num_G
    if not D.is_constant():
        total = total - Gn * db(D, H).numerator
    if G1g is None:
        return not total
    return not reduce_mod(total, G1g)


def gauge_variation(an, gen, f):
    """delta f = {G, f}_D (weakly; exact when G has a constant denominator)."""
    space = gen.space
    db = _dirac_in(an, space)
    le = db(gen.numerator, space.ring.convert(f))
    return LocalizedExpression(le.numerator, le.denominator * gen.denominator)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def analyze(model, stage="all", options=None):
    """Run the pipeline up to ``stage``; Inconsistent carries the partial analysis."""
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    options = options or Options()
    an = complete_constraints(model, options, stop_after_primary=(stage == "primary"))
    if stage in ("primary", "complete"):
        return an
    separate_constraints(an)
    if stage == "separate" or not an.constraints:
        return an
    t0 = time.perf_counter()
    an.rho = rho_coefficients(an) if an.first_class else {}
    an.algebra = constraint_algebra(an)
    an.generator = build_generator(an) if an.first_class else None
    an.timings["generator"] = time.perf_counter() - t0
    return an


__all__ = [
    "CONVENTION", "STAGES", "Options", "Constraint", "ConstraintAnalysis", "GaugeGenerator",
    "AnalysisError", "Inconsistent", "IterationLimit", "FirstClassIncomplete",
    "GaugeSystemInconsistent", "primary_constraints", "consistency_step",
    "complete_constraints", "separate_constraints", "poisson_matrix", "rho_coefficients",
    "constraint_algebra", "build_generator", "conservation_check", "gauge_variation", "analyze",
    "legendre_ring",
]
