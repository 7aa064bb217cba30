"""Expression parser and model-file loader.

Expression grammar (whitespace insensitive, no implicit multiplication)::

    expr     := term (('+'|'-') term)*
    term     := factor (('*'|'/') factor)*
    factor   := base ('^' uint)?
    base     := rational | ident | 'dot' '(' ident ')' | '(' expr ')' | '-' factor
    rational := uint ('/' uint)?

Unary minus takes a whole factor, so ``-x^2`` is ``-(x^2)``.
``rational`` is matched greedily, so ``x/2/3`` is ``x/(2/3)``.  A divisor
after '/' must be a nonzero element of Q(params); non-unit divisors (not a
monomial in nonzero-declared parameters) are recorded on the result.

Model files are line-oriented ``key = value`` with ``#`` comments::

    name = "toy_a"
    coordinates = [q1, q2]
    parameters = [g != 0]
    lagrangian = "1/2*(dot(q1) - q2)^2"

A quoted value may continue over several lines until its closing quote.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .arith import ParamSpace, Q
from .poly import MonomialOrder, Ring, VariableTable, make_field

IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
RESERVED = re.compile(r"^(p_.*|U_\d+|eps_\d+|deps_\d+|ddeps_\d+)$")


class ParseError(ValueError):
    """Lexical, syntactic or validation error with a 1-based location."""

    def __init__(self, message, line=1, col=1, source=None):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{col}: {message}")


class DuplicateSymbol(ParseError):
    pass


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<rat>\d+(?:\s*/\s*\d+)?)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text, line0=1, col0=1):
    tokens = []
    pos = 0
    line, col = line0, col0
    n = len(text)
    while pos < n:
        mt = _TOKEN.match(text, pos)
        if mt is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = mt.lastgroup
        s = mt.group()
        if kind == "rat" and "/" in s and tokens and tokens[-1].text == "^":
            # an exponent is a bare uint: x^2/3 means (x^2)/3
            mt = re.compile(r"\d+").match(text, pos)
            s = mt.group()
        if kind != "ws":
            tokens.append(Token(kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos += len(s)
    tokens.append(Token("end", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens, ring, source=None):
        self.toks = tokens
        self.i = 0
        self.ring = ring
        self.source = source
        self.divisors = []
        table = ring.table
        self.velocity_of = {}
        for s, r in zip(table.symbols, table.roles):
            if r == "velocity" and s.startswith("dot(") and s.endswith(")"):
                self.velocity_of[s[4:-1]] = s
        self.params = set(ring.field.params.names)

    def error(self, msg, tok=None):
        tok = tok or self.toks[self.i]
        return ParseError(msg, tok.line, tok.col, self.source)

    @property
    def tok(self):
        return self.toks[self.i]

    def advance(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.tok
        if t.kind != "op" or t.text != text:
            if t.kind == "end" and text == ")":
                raise self.error("unbalanced parentheses: missing ')'")
            raise self.error(f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.advance()

    def parse(self):
        if self.tok.kind == "end":
            raise self.error("empty expression")
        v = self.expr()
        if self.tok.kind != "end":
            t = self.tok
            if t.kind == "op" and t.text == ")":
                raise self.error("unbalanced parentheses: unexpected ')'")
            raise self.error(f"unexpected token {t.text!r}")
        return v

    def expr(self):
        v = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            at = self.tok
            w = self.factor()
            if op == "*":
                v = v * w
            else:
                v = v * self.invert(w, at)
        return v

    def invert(self, w, at):
        if not w.is_constant() or not w:
            if not w:
                raise self.error("division by zero", at)
            raise self.error("division by an expression in model variables", at)
        c = w.terms[0][1]
        if hasattr(c, "num") and not self.ring.field.params.is_unit(c.num):
            self.divisors.append(c)
        return self.ring.field.one / c

    def factor(self):
        v = self.base()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            t = self.tok
            if t.kind == "op" and t.text == "-":
                raise self.error("negative exponent")
            if t.kind != "rat":
                raise self.error("exponent must be a nonnegative integer")
            self.advance()
            k = int(t.text)
            v = v ** k
        return v

    def base(self):
        t = self.tok
        ring = self.ring
        if t.kind == "rat":
            self.advance()
            if "/" in t.text:
                a, b = (s.strip() for s in t.text.split("/"))
                if int(b) == 0:
                    raise self.error("zero denominator in rational", t)
                return ring.const(Q(int(a), int(b)))
            return ring.const(Q(int(t.text)))
        if t.kind == "ident":
            self.advance()
            if t.text == "dot" and self.tok.kind == "op" and self.tok.text == "(":
                self.advance()
                inner = self.tok
                if inner.kind != "ident":
                    raise self.error("dot() expects a coordinate name")
                self.advance()
                self.expect(")")
                sym = self.velocity_of.get(inner.text)
                if sym is None:
                    raise self.error(f"unknown coordinate {inner.text!r} in dot()", inner)
                return ring.var(sym)
            name = t.text
            if name in ring.table:
                return ring.var(name)
            if name in self.params:
                return ring.param(name)
            raise self.error(f"unknown identifier {name!r}", t)
        if t.kind == "op" and t.text == "(":
            self.advance()
            v = self.expr()
            self.expect(")")
            return v
        if t.kind == "op" and t.text == "-":
            self.advance()
            return -self.factor()
        if t.kind == "end":
            raise self.error("unexpected end of input")
        if t.kind == "op" and t.text == ")":
            raise self.error("unbalanced parentheses: unexpected ')'")
        raise self.error(f"unexpected token {t.text!r}")


def parse_expression(text, ring, source=None, line=1, col=1, divisors=None):
    """Parse text into a fully expanded Polynomial of ``ring``.

    Errors of any kind surface as ParseError with a line/column.
    """
    try:
        toks = tokenize(text, line, col)
        p = _Parser(toks, ring, source)
        result = p.parse()
    except ParseError as e:
        if e.source is None and source is not None:
            raise ParseError(e.message, e.line, e.col, source) from None
        raise
    except RecursionError:
        raise ParseError("expression nested too deeply", line, col, source) from None
    if divisors is not None:
        divisors.extend(p.divisors)
    return result


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------

def velocity_symbol(q):
    return f"dot({q})"


def momentum_symbol(q):
    return f"p_{q}"


@dataclass
class DegenerateModel:
    name: str
    coordinates: list
    params: ParamSpace
    lagrangian: object
    ring: Ring
    path: str | None = None
    divisors: list = field(default_factory=list)

    @property
    def n(self):
        return len(self.coordinates)

    @property
    def velocities(self):
        return [velocity_symbol(q) for q in self.coordinates]

    @property
    def momenta(self):
        return [momentum_symbol(q) for q in self.coordinates]


def legendre_ring(coordinates, params, inner="degrevlex"):
    """Ring over (velocities | momenta, coordinates), block order velocities >> rest."""
    vel = [velocity_symbol(q) for q in coordinates]
    mom = [momentum_symbol(q) for q in coordinates]
    table = VariableTable(vel + mom + list(coordinates),
                          ["velocity"] * len(vel) + ["momentum"] * len(mom)
                          + ["coordinate"] * len(coordinates))
    n = len(coordinates)
    order = MonomialOrder.block([(range(n), inner), (range(n, 3 * n), inner)], 3 * n)
    return Ring(table, order, make_field(params))


_LIST = re.compile(r"^\[(.*)\]$", re.S)


def _parse_list(value, line, col, source):
    mt = _LIST.match(value.strip())
    if not mt:
        raise ParseError("expected a bracketed list", line, col, source)
    body = mt.group(1).strip()
    if not body:
        return []
    return [item.strip() for item in body.split(",")]


def _unquote(value, line, col, source):
    v = value.strip()
    if len(v) < 2 or v[0] != '"' or v[-1] != '"':
        raise ParseError("expected a quoted string", line, col, source)
    return v[1:-1]


def _logical_lines(text, source):
    """Yield (key, value, line, value_col) with multi-line quoted values joined."""
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        raw = lines[i]
        lineno = i + 1
        i += 1
        stripped = _strip_comment(raw)
        if not stripped.strip():
            continue
        if "=" not in stripped:
            raise ParseError("expected 'key = value'", lineno, 1, source)
        k, v = stripped.split("=", 1)
        if k.strip() in ("parameters",) and "!" in k:
            raise ParseError("malformed key", lineno, 1, source)
        key = k.strip()
        vcol = len(k) + 2 + (len(v) - len(v.lstrip()))
        value = v.strip()
        if value.startswith('"') and (value.count('"') == 1):
            parts = [v.lstrip()]
            while i < len(lines):
                nxt = lines[i]
                i += 1
                parts.append(nxt)
                if '"' in nxt:
                    break
            else:
                raise ParseError("unterminated string", lineno, vcol, source)
            value = "\n".join(parts)
            tail = value[value.rfind('"') + 1:]
            if _strip_comment(tail).strip():
                raise ParseError("trailing characters after string", lineno, vcol, source)
            value = value[:value.rfind('"') + 1]
        yield key, value, lineno, vcol


def _strip_comment(s):
    out = []
    inq = False
    for ch in s:
        if ch == '"':
            inq = not inq
        if ch == "#" and not inq:
            break
        out.append(ch)
    return "".join(out)


def parse_model(text, source=None, inner="degrevlex"):
    entries = {}
    for key, value, line, col in _logical_lines(text, source):
        if key not in ("name", "coordinates", "parameters", "lagrangian"):
            raise ParseError(f"unknown key {key!r}", line, 1, source)
        if key in entries:
            raise ParseError(f"duplicate key {key!r}", line, 1, source)
        entries[key] = (value, line, col)
    for req in ("name", "coordinates", "lagrangian"):
        if req not in entries:
            raise ParseError(f"missing key {req!r}", 1, 1, source)

    value, line, col = entries["name"]
    name = _unquote(value, line, col, source)

    value, line, col = entries["coordinates"]
    coords = _parse_list(value, line, col, source)
    if not coords:
        raise ParseError("at least one coordinate is required", line, col, source)
    seen = set()
    for c in coords:
        if not IDENT.fullmatch(c):
            raise ParseError(f"invalid coordinate name {c!r}", line, col, source)
        if c in seen:
            raise DuplicateSymbol(f"duplicate symbol {c!r}", line, col, source)
        if RESERVED.match(c) or c == "dot":
            raise ParseError(f"reserved symbol name {c!r}", line, col, source)
        seen.add(c)

    pnames, nonzero = [], []
    if "parameters" in entries:
        value, line, col = entries["parameters"]
        for item in _parse_list(value, line, col, source):
            mt = re.fullmatch(r"([A-Za-z][A-Za-z0-9_]*)\s*(!=\s*0)?", item)
            if not mt:
                raise ParseError(f"invalid parameter declaration {item!r}", line, col, source)
            p = mt.group(1)
            if p in seen or p in pnames:
                raise DuplicateSymbol(f"duplicate symbol {p!r}", line, col, source)
            if RESERVED.match(p) or p == "dot":
                raise ParseError(f"reserved symbol name {p!r}", line, col, source)
            pnames.append(p)
            if mt.group(2):
                nonzero.append(p)
    params = ParamSpace(pnames, nonzero)
    ring = legendre_ring(coords, params, inner)
    for m in ring.table.symbols:
        if ring.table.role(m) == "momentum" and (m in seen or m in pnames):
            raise DuplicateSymbol(f"duplicate symbol {m!r}", 1, 1, source)

    value, line, col = entries["lagrangian"]
    text_l = _unquote(value, line, col, source)
    divisors = []
    lag = parse_expression(text_l, ring, source, line, col + 1, divisors)
    bad = [s for s in lag.variables() if ring.table.role(s) == "momentum"]
    if bad:
        raise ParseError(f"lagrangian may not reference momenta: {bad}", line, col, source)
    return DegenerateModel(name, coords, params, lag, ring, source, divisors)


def load_model(path, inner="degrevlex"):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"file is not valid UTF-8: {e.reason}", 1, 1, str(path)) from None
    return parse_model(text, str(path), inner)
