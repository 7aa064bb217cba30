"""Exact coefficient arithmetic: rationals and rational functions in parameters.

Multivariate polynomials used here are plain dicts mapping exponent tuples to
rationals; that keeps the parameter layer independent of the phase-space
polynomial ring built on top of it.
"""

from __future__ import annotations

from operator import add, ge, sub

from ._backend import BACKEND, Q, RATIONAL_TYPES

__all__ = [
    "BACKEND",
    "Q",
    "rational",
    "ParamSpace",
    "RationalFunction",
    "pp_gcd",
    "pp_divexact",
    "pp_mul",
    "pp_add",
    "pp_sub",
    "pp_squarefree",
    "NotExactDivision",
]


_ONE = Q(1)


class NotExactDivision(ArithmeticError):
    pass


def rational(num, den=1):
    """Canonical rational num/den; raises ZeroDivisionError on den == 0."""
    if den == 0:
        raise ZeroDivisionError("rational with zero denominator")
    if isinstance(num, str):
        return Q(num)
    return Q(num) / Q(den) if den != 1 else Q(num)


# ---------------------------------------------------------------------------
# dict polynomials over Q (exponent tuple -> coefficient)
# ---------------------------------------------------------------------------

def _madd(a, b):
    return tuple(map(add, a, b))


def _msub(a, b):
    return tuple(map(sub, a, b))


def _mdiv(a, b):
    return all(map(ge, a, b))


def pp_add(a, b):
    r = dict(a)
    for m, c in b.items():
        v = r.get(m, 0) + c
        if v:
            r[m] = v
        else:
            r.pop(m, None)
    return r


def pp_neg(a):
    return {m: -c for m, c in a.items()}


def pp_sub(a, b):
    return pp_add(a, pp_neg(b))


def pp_scale(a, c):
    if not c:
        return {}
    return {m: v * c for m, v in a.items()}


def pp_mul(a, b):
    if len(a) > len(b):
        a, b = b, a
    r = {}
    get = r.get
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = _madd(ma, mb)
            v = get(m, 0) + ca * cb
            if v:
                r[m] = v
            else:
                del r[m]
    return r


def pp_lead(a):
    """Leading (monomial, coeff) under lex on the exponent tuples."""
    m = max(a)
    return m, a[m]


def pp_is_const(a):
    return not a or (len(a) == 1 and not any(next(iter(a))))


def pp_const(c, n):
    return {(0,) * n: Q(c)} if c else {}


def pp_divexact(a, b):
    """Exact quotient a/b; raises NotExactDivision if b does not divide a."""
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    if len(b) == 1:
        (mb, cb), = b.items()
        out = {}
        for m, c in a.items():
            if not _mdiv(m, mb):
                raise NotExactDivision("monomial does not divide")
            out[_msub(m, mb)] = c / cb
        return out
    lm_b, lc_b = pp_lead(b)
    r = dict(a)
    q = {}
    while r:
        lm_r, lc_r = pp_lead(r)
        if not _mdiv(lm_r, lm_b):
            raise NotExactDivision("polynomial does not divide")
        qm = _msub(lm_r, lm_b)
        qc = lc_r / lc_b
        q[qm] = qc
        for m, c in b.items():
            mm = _madd(qm, m)
            v = r.get(mm, 0) - qc * c
            if v:
                r[mm] = v
            else:
                r.pop(mm, None)
    return q


def pp_monic(a):
    if not a:
        return a
    _, lc = pp_lead(a)
    if lc == 1:
        return a
    return {m: c / lc for m, c in a.items()}


def _split(a, k):
    """View a as a univariate polynomial in variable k: {degree: coeff-dict}."""
    out = {}
    for m, c in a.items():
        d = m[k]
        mm = m[:k] + (0,) + m[k + 1:]
        out.setdefault(d, {})[mm] = c
    return out


def _join(parts, k):
    out = {}
    for d, p in parts.items():
        for m, c in p.items():
            out[m[:k] + (d,) + m[k + 1:]] = c
    return out


def _first_var(*polys):
    n = None
    for p in polys:
        for m in p:
            for i, e in enumerate(m):
                if e and (n is None or i < n):
                    n = i
                    break
    return n


def _monomial_gcd(a, b):
    mons = list(a) + list(b)
    return tuple(min(col) for col in zip(*mons))


def pp_gcd(a, b):
    """Monic (lex) gcd of two dict polynomials over Q.

    Content/primitive-part recursion on the first occurring variable with a
    primitive pseudo-remainder sequence.
    """
    if not a:
        return pp_monic(b)
    if not b:
        return pp_monic(a)
    n = len(next(iter(a)))
    if len(a) == 1 or len(b) == 1:
        if len(a) == 1 and len(b) == 1:
            return {_monomial_gcd(a, b): Q(1)}
        # a monomial's divisors are monomials; common monomial factor suffices
        mono, other = (a, b) if len(a) == 1 else (b, a)
        m0 = next(iter(mono))
        g = tuple(min(e, min(col)) for e, col in zip(m0, zip(*other)))
        return {g: Q(1)}
    if pp_is_const(a) or pp_is_const(b):
        return {(0,) * n: Q(1)}
    return pp_monic(_gcd_rec(a, b))


def _content(parts):
    g = {}
    for p in parts.values():
        g = pp_gcd(g, p)
        if pp_is_const(g):
            break
    return g


def _prem(A, B):
    """Pseudo-remainder of univariate-split polys A by B (dicts deg -> coeff)."""
    dB = max(B)
    lcB = B[dB]
    R = {d: dict(c) for d, c in A.items()}
    while R and max(R) >= dB:
        dR = max(R)
        lcR = R[dR]
        shift = dR - dB
        # R := lcB*R - lcR*x^shift*B
        newR = {}
        for d, c in R.items():
            v = pp_mul(c, lcB)
            if v:
                newR[d] = v
        for d, c in B.items():
            t = pp_mul(lcR, c)
            dd = d + shift
            v = pp_sub(newR.get(dd, {}), t)
            if v:
                newR[dd] = v
            else:
                newR.pop(dd, None)
        R = newR
    return R


def _unit_lead(P):
    """Scale a split polynomial so its leading rational coefficient is 1.

    Without this the pseudo-remainders over Q grow without bound, since the
    content at the last variable is only ever a constant.
    """
    _, c = pp_lead(P[max(P)])
    if c == 1:
        return P
    inv = 1 / c
    return {d: pp_scale(p, inv) for d, p in P.items()}


def _gcd_rec(a, b):
    k = _first_var(a, b)
    if k is None:
        return pp_const(1, len(next(iter(a))))
    A, B = _split(a, k), _split(b, k)
    if max(A) == 0 or max(B) == 0:
        # one side independent of x_k: gcd divides its content
        ca = _content(A)
        cb = _content(B)
        return pp_gcd(ca, cb)
    ca, cb = _content(A), _content(B)
    c = pp_gcd(ca, cb)
    A = _unit_lead({d: pp_divexact(p, ca) for d, p in A.items()})
    B = _unit_lead({d: pp_divexact(p, cb) for d, p in B.items()})
    if max(A) < max(B):
        A, B = B, A
    while B:
        R = _prem(A, B)
        if not R:
            A = B
            break
        if max(R) == 0:
            B = {}
            A = {0: pp_const(1, len(next(iter(a))))}
            break
        cr = _content(R)
        A, B = B, _unit_lead({d: pp_divexact(p, cr) for d, p in R.items()})
    cA = _content(A)
    A = {d: pp_divexact(p, cA) for d, p in A.items()}
    return pp_mul(c, _join(A, k))


def pp_diff(a, k):
    out = {}
    for m, c in a.items():
        e = m[k]
        if e:
            out[m[:k] + (e - 1,) + m[k + 1:]] = c * e
    return out


def pp_squarefree(a):
    """Product of the distinct irreducible factors' squarefree part of a.

    Computed as a / gcd(a, da/dx_1, ..., da/dx_n) -- exact over Q.
    """
    if not a or pp_is_const(a):
        return pp_monic(a)
    g = a
    n = len(next(iter(a)))
    for k in range(n):
        d = pp_diff(a, k)
        if d:
            g = pp_gcd(g, d)
        if pp_is_const(g):
            return pp_monic(a)
    return pp_monic(pp_divexact(a, g))


# ---------------------------------------------------------------------------
# parameters and rational functions
# ---------------------------------------------------------------------------

class ParamSpace:
    """Ordered parameter symbols plus their declared nonzero assumptions."""

    __slots__ = ("names", "nonzero", "_index")

    def __init__(self, names, nonzero=()):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate parameter name")
        self.nonzero = frozenset(nonzero)
        unknown = self.nonzero - set(self.names)
        if unknown:
            raise ValueError(f"nonzero assumption on unknown parameter(s): {sorted(unknown)}")
        self._index = {n: i for i, n in enumerate(self.names)}

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        return (isinstance(other, ParamSpace) and self.names == other.names
                and self.nonzero == other.nonzero)

    def __hash__(self):
        return hash((self.names, self.nonzero))

    def __repr__(self):
        return f"ParamSpace({list(self.names)!r}, nonzero={sorted(self.nonzero)!r})"

    def index(self, name):
        return self._index[name]

    def symbol(self, name):
        i = self._index[name]
        m = tuple(1 if j == i else 0 for j in range(len(self.names)))
        return RationalFunction(self, {m: Q(1)})

    def const(self, c):
        return RationalFunction(self, pp_const(c, len(self.names)))

    def is_unit(self, poly):
        """True if the dict polynomial is c*monomial in nonzero-declared params."""
        if len(poly) != 1:
            return False
        (m, c), = poly.items()
        return bool(c) and all(e == 0 or self.names[i] in self.nonzero for i, e in enumerate(m))


class RationalFunction:
    """Element of Q(params), kept as a reduced fraction with monic denominator."""

    __slots__ = ("space", "num", "den", "_hash", "_dconst")

    def __init__(self, space, num, den=None, *, _normalized=False):
        self.space = space
        if den is None:
            den = {(0,) * len(space.names): _ONE}
        elif not den:
            raise ZeroDivisionError("rational function with zero denominator")
        if not _normalized:
            num, den = _normalize(num, den)
        self.num = num
        self.den = den
        self._hash = None
        self._dconst = len(den) == 1 and not any(next(iter(den)))

    def _new(self, num, den):
        return RationalFunction(self.space, num, den, _normalized=True)

    # -- coercion -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            if other.space is not self.space and other.space != self.space:
                raise ValueError("rational functions over different parameter spaces")
            return other
        if isinstance(other, RATIONAL_TYPES):
            return RationalFunction(self.space, pp_const(other, len(self.space.names)),
                                    _normalized=True)
        return NotImplemented

    @property
    def is_polynomial(self):
        return self._dconst

    def is_constant(self):
        return self._dconst and pp_is_const(self.num)

    def constant_value(self):
        """The rational value if this is a constant, else None."""
        if not self.is_constant():
            return None
        if not self.num:
            return Q(0)
        return next(iter(self.num.values()))

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, RationalFunction) else other
        if o is NotImplemented:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        if self._hash is None:
            cv = self.constant_value()
            if cv is not None:
                self._hash = hash(cv)
            else:
                self._hash = hash((frozenset(self.num.items()), frozenset(self.den.items())))
        return self._hash

    def __neg__(self):
        return self._new({m: -c for m, c in self.num.items()}, self.den)

    def __pos__(self):
        return self

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not o.num:
            return self
        if not self.num:
            return o
        if self._dconst and o._dconst:
            return self._new(pp_add(self.num, o.num), self.den)
        if self.den == o.den:
            return RationalFunction(self.space, pp_add(self.num, o.num), self.den)
        num = pp_add(pp_mul(self.num, o.den), pp_mul(o.num, self.den))
        return RationalFunction(self.space, num, pp_mul(self.den, o.den))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RATIONAL_TYPES):
            if not other:
                return self._new({}, self.den if self._dconst else _unit_den(self.den))
            return self._new(pp_scale(self.num, Q(other)), self.den)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a, b = self.num, o.num
        if not a or not b:
            return self._new({}, _unit_den(self.den))
        if self._dconst and o._dconst:
            return self._new(pp_mul(a, b), self.den)
        da, db = self.den, o.den
        if len(a) == 1 and len(b) == 1 and len(da) == 1 and len(db) == 1:
            # monomial fractions: exponent arithmetic only
            (ma, ca), = a.items()
            (mb, cb), = b.items()
            (na,) = da
            (nb,) = db
            e = tuple(x + y - u - v for x, y, u, v in zip(ma, mb, na, nb))
            top = tuple(x if x > 0 else 0 for x in e)
            bot = tuple(-x if x < 0 else 0 for x in e)
            return self._new({top: ca * cb}, {bot: _ONE})
        return RationalFunction(self.space, pp_mul(a, b), pp_mul(da, db))

    __rmul__ = __mul__

    def inverse(self):
        if not self.num:
            raise ZeroDivisionError("inverse of zero rational function")
        return RationalFunction(self.space, self.den, self.num)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        r = self.space.const(1)
        b = self
        while k:
            if k & 1:
                r = r * b
            b = b * b
            k >>= 1
        return r

    def evaluate(self, point):
        """Evaluate at a mapping name -> rational; raises ZeroDivisionError on a pole."""
        vals = [Q(point[n]) for n in self.space.names]

        def ev(p):
            s = Q(0)
            for m, c in p.items():
                t = c
                for v, e in zip(vals, m):
                    if e:
                        t *= v ** e
                s += t
            return s

        d = ev(self.den)
        if d == 0:
            raise ZeroDivisionError("evaluation at a pole")
        return ev(self.num) / d

    def __repr__(self):
        return f"RationalFunction({render_param_fraction(self)})"

    def __str__(self):
        return render_param_fraction(self)


def _unit_den(den):
    return {(0,) * len(next(iter(den))): _ONE}


def _normalize(num, den):
    if not num:
        n = len(next(iter(den)))
        return {}, {(0,) * n: Q(1)}
    if not pp_is_const(den):
        g = pp_gcd(num, den)
        if not pp_is_const(g):
            num = pp_divexact(num, g)
            den = pp_divexact(den, g)
    _, lc = pp_lead(den)
    if lc != 1:
        num = {m: c / lc for m, c in num.items()}
        den = {m: c / lc for m, c in den.items()}
    return num, den


def _render_coeff(c):
    return str(c)


def render_param_poly(p, names):
    """Render a dict polynomial in parameter names, lex-descending terms."""
    if not p:
        return "0"
    out = []
    for m in sorted(p, reverse=True):
        c = p[m]
        mon = "*".join(n if e == 1 else f"{n}^{e}" for n, e in zip(names, m) if e)
        neg = c < 0
        a = -c if neg else c
        if mon:
            body = mon if a == 1 else f"{_render_coeff(a)}*{mon}"
        else:
            body = _render_coeff(a)
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def render_param_fraction(rf):
    names = rf.space.names
    num = render_param_poly(rf.num, names)
    if pp_is_const(rf.den):
        return num
    den = render_param_poly(rf.den, names)
    if len(rf.num) > 1:
        num = f"({num})"
    if len(rf.den) > 1 or "*" in den:
        den = f"({den})"
    return f"{num}/{den}"
