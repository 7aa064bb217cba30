"""Multivariate polynomials with dense exponent tuples and admissible orders."""

from __future__ import annotations

from operator import add, ge, itemgetter, sub

from .arith import Q, RATIONAL_TYPES, ParamSpace, RationalFunction, render_param_fraction

ROLES = ("velocity", "coordinate", "momentum", "multiplier", "gauge", "auxiliary")


class TableMismatch(ValueError):
    pass


class UnknownVariable(KeyError):
    pass


def madd(a, b):
    return tuple(map(add, a, b))


def msub(a, b):
    return tuple(map(sub, a, b))


def mdivides(a, b):
    """True if monomial a divides monomial b."""
    return all(map(ge, b, a))


def mlcm(a, b):
    return tuple(map(max, a, b))


def coprime(a, b):
    return not any(x and y for x, y in zip(a, b))


class VariableTable:
    """Ordered, role-tagged variable symbols; defines monomial indexing.

    ``derivative`` maps a gauge symbol to the symbol of its time derivative.
    """

    __slots__ = ("symbols", "roles", "derivative", "_index", "_hash")

    def __init__(self, symbols, roles, derivative=None):
        symbols = tuple(symbols)
        roles = tuple(roles)
        if len(symbols) != len(roles):
            raise ValueError("symbols and roles differ in length")
        if len(set(symbols)) != len(symbols):
            seen = set()
            dup = next(s for s in symbols if s in seen or seen.add(s))
            raise ValueError(f"duplicate symbol {dup!r}")
        for r in roles:
            if r not in ROLES:
                raise ValueError(f"unknown role {r!r}")
        self.symbols = symbols
        self.roles = roles
        self.derivative = dict(derivative or {})
        self._index = {s: i for i, s in enumerate(symbols)}
        self._hash = hash((symbols, roles))

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, name):
        return name in self._index

    def __eq__(self, other):
        return self is other or (isinstance(other, VariableTable)
                                 and self.symbols == other.symbols
                                 and self.roles == other.roles)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"VariableTable({list(self.symbols)!r})"

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(name) from None

    def role(self, name):
        return self.roles[self.index(name)]

    def with_role(self, *roles):
        return [s for s, r in zip(self.symbols, self.roles) if r in roles]

    def indices(self, *roles):
        return [i for i, r in enumerate(self.roles) if r in roles]

    def extend(self, symbols, role, derivative=None):
        der = dict(self.derivative)
        der.update(derivative or {})
        return VariableTable(self.symbols + tuple(symbols),
                             self.roles + (role,) * len(symbols), der)


# ---------------------------------------------------------------------------
# monomial orders
# ---------------------------------------------------------------------------

def _lex_key(m):
    return m


def _degrevlex_key(m):
    return (sum(m),) + tuple(-e for e in reversed(m))


_INNER = {"lex": _lex_key, "degrevlex": _degrevlex_key}


class MonomialOrder:
    """Admissible term order: lex, degrevlex, or a block product of those.

    ``key(m)`` returns a tuple whose natural ordering is the monomial order
    (larger key = larger monomial).
    """

    __slots__ = ("kind", "nvars", "blocks", "_cache", "_ncache", "_getters")

    def __init__(self, kind, nvars, blocks=None):
        if kind not in ("lex", "degrevlex", "block"):
            raise ValueError(f"unknown order kind {kind!r}")
        self.kind = kind
        self.nvars = nvars
        if kind == "block":
            flat = [i for idx, _ in blocks for i in idx]
            if sorted(flat) != list(range(nvars)):
                raise ValueError("block order must partition all variables")
            for _, inner in blocks:
                if inner not in _INNER:
                    raise ValueError(f"unknown inner order {inner!r}")
            self.blocks = tuple((tuple(idx), inner) for idx, inner in blocks if idx)
            self._getters = tuple((_getter(idx), _INNER[inner]) for idx, inner in self.blocks)
        else:
            self.blocks = ((tuple(range(nvars)), kind),)
            self._getters = None
        self._cache = {}
        self._ncache = {}

    @classmethod
    def lex(cls, nvars):
        return cls("lex", nvars)

    @classmethod
    def degrevlex(cls, nvars):
        return cls("degrevlex", nvars)

    @classmethod
    def block(cls, blocks, nvars=None):
        blocks = [(tuple(idx), inner) for idx, inner in blocks]
        n = nvars if nvars is not None else sum(len(b) for b, _ in blocks)
        return cls("block", n, blocks)

    def __eq__(self, other):
        return isinstance(other, MonomialOrder) and self.kind == other.kind \
            and self.nvars == other.nvars and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.kind, self.nvars, self.blocks))

    def __repr__(self):
        if self.kind == "block":
            return f"MonomialOrder.block({[(list(i), k) for i, k in self.blocks]})"
        return f"MonomialOrder.{self.kind}({self.nvars})"

    def key(self, m):
        k = self._cache.get(m)
        if k is None:
            if self.kind == "lex":
                k = m
            elif self.kind == "degrevlex":
                k = _degrevlex_key(m)
            else:
                k = ()
                for g, f in self._getters:
                    k += f(g(m))
            self._cache[m] = k
        return k

    def nkey(self, m):
        """Negated key: ascending nkey order is descending monomial order."""
        k = self._ncache.get(m)
        if k is None:
            k = tuple(-x for x in self.key(m))
            self._ncache[m] = k
        return k

    def compare(self, a, b):
        if len(a) != self.nvars or len(b) != self.nvars:
            raise TableMismatch("monomial length does not match the order")
        ka, kb = self.key(a), self.key(b)
        return (ka > kb) - (ka < kb)

    def eliminates(self, indices):
        """True if this order is an elimination order for the given variables."""
        idx = set(indices)
        if not idx:
            return True
        if self.kind == "lex":
            return set(range(len(idx))) == idx
        if self.kind == "degrevlex":
            return idx == set(range(self.nvars))
        covered = set()
        for b, _ in self.blocks:
            if covered == idx:
                return True
            if not set(b) <= idx:
                return False
            covered |= set(b)
        return covered == idx


def _getter(idx):
    if len(idx) == 1:
        i = idx[0]
        return lambda m: (m[i],)
    return itemgetter(*idx)


# ---------------------------------------------------------------------------
# coefficient fields
# ---------------------------------------------------------------------------

class RationalField:
    """Q."""

    params = ParamSpace(())

    def __init__(self):
        self.zero = Q(0)
        self.one = Q(1)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"

    def convert(self, c):
        if isinstance(c, RationalFunction):
            v = c.constant_value()
            if v is None:
                raise ValueError(f"parametric coefficient {c} over QQ")
            return v
        return Q(c)

    def render(self, c):
        return str(c)

    def is_negative(self, c):
        return c < 0

    def is_constant(self, c):
        return True

    def evaluate(self, c, point):
        return c


class FunctionField:
    """Q(params) for the declared parameters."""

    def __init__(self, params):
        self.params = params
        self.zero = params.const(0)
        self.one = params.const(1)

    def __eq__(self, other):
        return isinstance(other, FunctionField) and self.params == other.params

    def __hash__(self):
        return hash(self.params)

    def __repr__(self):
        return f"QQ({', '.join(self.params.names)})"

    def convert(self, c):
        if isinstance(c, RationalFunction):
            if c.space != self.params:
                raise ValueError("coefficient over a different parameter space")
            return c
        return self.params.const(c)

    def symbol(self, name):
        return self.params.symbol(name)

    def render(self, c):
        return render_param_fraction(c)

    def is_negative(self, c):
        if not c.num:
            return False
        return c.num[max(c.num)] < 0

    def is_constant(self, c):
        return c.is_constant()

    def evaluate(self, c, point):
        return c.evaluate(point)


def make_field(params):
    if params is None or len(params) == 0:
        return RationalField()
    return FunctionField(params)


# ---------------------------------------------------------------------------
# rings and polynomials
# ---------------------------------------------------------------------------

class Ring:
    """Polynomial ring: variable table + monomial order + coefficient field."""

    __slots__ = ("table", "order", "field", "key", "_zero_mon", "_gens")

    def __init__(self, table, order, field):
        if order.nvars != len(table):
            raise TableMismatch("order and table sizes differ")
        self.table = table
        self.order = order
        self.field = field
        self.key = order.key
        self._zero_mon = (0,) * len(table)
        self._gens = {}

    def __eq__(self, other):
        return self is other or (isinstance(other, Ring) and self.table == other.table
                                 and self.order == other.order and self.field == other.field)

    def __hash__(self):
        return hash((self.table, self.order))

    def __repr__(self):
        return f"Ring({list(self.table.symbols)}, {self.order!r}, {self.field!r})"

    @property
    def nvars(self):
        return len(self.table)

    @property
    def zero(self):
        return Polynomial(self, ())

    @property
    def one(self):
        return self.const(1)

    def const(self, c):
        c = self.field.convert(c)
        if not c:
            return Polynomial(self, ())
        return Polynomial(self, ((self._zero_mon, c),))

    def var(self, name):
        p = self._gens.get(name)
        if p is None:
            i = self.table.index(name)
            m = tuple(1 if j == i else 0 for j in range(self.nvars))
            p = Polynomial(self, ((m, self.field.one),))
            self._gens[name] = p
        return p

    def monomial(self, m, c=1):
        c = self.field.convert(c)
        return Polynomial(self, ((tuple(m), c),) if c else ())

    def param(self, name):
        return self.const(self.field.symbol(name))

    def from_dict(self, d):
        """Polynomial from {exponent tuple: coeff}; zero coefficients dropped."""
        key = self.key
        items = [(m, c) for m, c in d.items() if c]
        items.sort(key=lambda t: key(t[0]), reverse=True)
        return Polynomial(self, tuple(items))

    def convert(self, p):
        """Re-express p (from any ring) in this ring, matching variables by name."""
        if isinstance(p, Polynomial):
            if p.ring is self:
                return p
            if p.ring.table == self.table:
                f = self.field
                if p.ring.field == f:
                    if p.ring.order == self.order:
                        return Polynomial(self, p.terms)
                    return self.from_dict(dict(p.terms))
                return self.from_dict({m: f.convert(c) for m, c in p.terms})
            src = p.ring.table
            pos = []
            for i, s in enumerate(src.symbols):
                pos.append(self.table.index(s) if s in self.table else None)
            n = self.nvars
            out = {}
            for m, c in p.terms:
                new = [0] * n
                for i, e in enumerate(m):
                    if e:
                        j = pos[i]
                        if j is None:
                            raise UnknownVariable(src.symbols[i])
                        new[j] = e
                out[tuple(new)] = self.field.convert(c)
            return self.from_dict(out)
        return self.const(p)

    def with_order(self, order):
        return Ring(self.table, order, self.field)


class Polynomial:
    """Immutable polynomial: terms sorted strictly descending, no zero coefficients."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = terms
        self._hash = None

    # -- basic queries -------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __len__(self):
        return len(self.terms)

    @property
    def lm(self):
        return self.terms[0][0]

    @property
    def lc(self):
        return self.terms[0][1]

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and not any(self.terms[0][0]))

    def is_one(self):
        return self.is_constant() and bool(self.terms) and self.terms[0][1] == 1

    def constant_coeff(self):
        if self.terms and not any(self.terms[-1][0]):
            return self.terms[-1][1]
        return self.ring.field.zero

    def total_degree(self):
        return max((sum(m) for m, _ in self.terms), default=-1)

    def used_indices(self):
        s = set()
        for m, _ in self.terms:
            s.update(i for i, e in enumerate(m) if e)
        return s

    def variables(self):
        syms = self.ring.table.symbols
        return [syms[i] for i in sorted(self.used_indices())]

    def degree_in(self, name):
        i = self.ring.table.index(name)
        return max((m[i] for m, _ in self.terms), default=-1)

    def as_dict(self):
        return dict(self.terms)

    # -- equality ------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Polynomial):
            if self.ring is other.ring or self.ring.order == other.ring.order:
                if self.ring.table != other.ring.table:
                    return False
                return self.terms == other.terms
            if self.ring.table != other.ring.table:
                return False
            return dict(self.terms) == dict(other.terms)
        if isinstance(other, (RationalFunction,) + RATIONAL_TYPES):
            return self == self.ring.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms))
        return self._hash

    # -- arithmetic ----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.ring is self.ring:
                return other
            if other.ring.table != self.ring.table:
                raise TableMismatch("polynomials over different variable tables")
            return self.ring.convert(other)
        if isinstance(other, (RationalFunction,) + RATIONAL_TYPES):
            return self.ring.const(other)
        return NotImplemented

    def __neg__(self):
        return Polynomial(self.ring, tuple((m, -c) for m, c in self.terms))

    def __pos__(self):
        return self

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not o.terms:
            return self
        if not self.terms:
            return o
        d = dict(self.terms)
        get = d.get
        for m, c in o.terms:
            v = get(m)
            if v is None:
                d[m] = c
            else:
                v = v + c
                if v:
                    d[m] = v
                else:
                    del d[m]
        return self.ring.from_dict(d)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (RationalFunction,) + RATIONAL_TYPES):
            c = self.ring.field.convert(other)
            if not c:
                return self.ring.zero
            return Polynomial(self.ring, tuple((m, v * c) for m, v in self.terms))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not self.terms or not o.terms:
            return self.ring.zero
        a, b = (self.terms, o.terms) if len(self.terms) <= len(o.terms) else (o.terms, self.terms)
        if len(a) == 1:
            (ma, ca), = a
            return Polynomial(self.ring, tuple((madd(ma, mb), ca * cb) for mb, cb in b))
        d = {}
        get = d.get
        for ma, ca in a:
            for mb, cb in b:
                m = madd(ma, mb)
                v = get(m)
                if v is None:
                    d[m] = ca * cb
                else:
                    d[m] = v + ca * cb
        return self.ring.from_dict(d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (RationalFunction,) + RATIONAL_TYPES):
            c = self.ring.field.convert(other)
            return self * (self.ring.field.one / c)
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        r = self.ring.one
        b = self
        while k:
            if k & 1:
                r = r * b
            b = b * b
            k >>= 1
        return r

    def mul_term(self, m, c):
        """self * c*X^m."""
        if not c:
            return self.ring.zero
        return Polynomial(self.ring, tuple((madd(m, mm), c * cc) for mm, cc in self.terms))

    def monic(self):
        if not self.terms:
            return self
        lc = self.terms[0][1]
        if lc == 1:
            return self
        inv = self.ring.field.one / lc
        return Polynomial(self.ring, tuple((m, c * inv) for m, c in self.terms))

    # -- calculus and substitution --------------------------------------
    def diff(self, name):
        """Formal partial derivative with respect to the named variable."""
        i = self.ring.table.index(name)
        return self.diff_index(i)

    def diff_index(self, i):
        out = []
        for m, c in self.terms:
            e = m[i]
            if e:
                out.append((m[:i] + (e - 1,) + m[i + 1:], c * e))
        return Polynomial(self.ring, tuple(out))

    def subs(self, bindings):
        """Simultaneous substitution {name: Polynomial or scalar}, expanded."""
        if not bindings:
            return self
        ring = self.ring
        idx = {}
        for name, val in bindings.items():
            i = ring.table.index(name)
            idx[i] = val if isinstance(val, Polynomial) else ring.const(val)
            if idx[i].ring.table != ring.table:
                raise TableMismatch("substitution value over a different table")
        result = ring.zero
        powcache = {}
        for m, c in self.terms:
            base = list(m)
            factor = None
            for i, val in idx.items():
                e = m[i]
                if e:
                    base[i] = 0
                    pk = powcache.get((i, e))
                    if pk is None:
                        pk = val ** e
                        powcache[(i, e)] = pk
                    factor = pk if factor is None else factor * pk
            t = Polynomial(ring, ((tuple(base), c),))
            result = result + (t if factor is None else t * factor)
        return result

    def coefficient_split(self, indices):
        """Split by the exponents on ``indices``: {sub-monomial: Polynomial free of them}."""
        ring = self.ring
        parts = {}
        for m, c in self.terms:
            key = tuple(m[i] for i in indices)
            rest = list(m)
            for i in indices:
                rest[i] = 0
            parts.setdefault(key, {})[tuple(rest)] = c
        return {k: ring.from_dict(v) for k, v in parts.items()}

    def evaluate(self, point, params=None):
        """Evaluate at {name: rational} for ring variables (and parameters)."""
        syms = self.ring.table.symbols
        vals = [Q(point[s]) if s in point else None for s in syms]
        f = self.ring.field
        total = Q(0)
        for m, c in self.terms:
            t = f.evaluate(c, params or {}) if not isinstance(c, RATIONAL_TYPES) else c
            for v, e, s in zip(vals, m, syms):
                if e:
                    if v is None:
                        raise UnknownVariable(s)
                    t = t * v ** e
            total += t
        return total

    # -- rendering ------------------------------------------------------
    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"Polynomial({render(self)})"


def render_monomial(m, symbols):
    return "*".join(s if e == 1 else f"{s}^{e}" for s, e in zip(symbols, m) if e)


def render(p):
    """Canonical string: descending terms, explicit '*', '^' exponents, num/den coefficients."""
    if not p.terms:
        return "0"
    field = p.ring.field
    syms = p.ring.table.symbols
    parts = []
    for m, c in p.terms:
        neg = field.is_negative(c)
        a = -c if neg else c
        mon = render_monomial(m, syms)
        cs = field.render(a)
        if isinstance(a, RationalFunction) and not a.is_constant():
            if len(a.num) > 1 and a.is_polynomial:
                cs = f"({cs})"
        if mon:
            body = mon if a == 1 else f"{cs}*{mon}"
        else:
            body = cs
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)
