"""Expression text <-> PhasePoly.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' INT)?
    atom   := NUMBER | IDENT | '(' expr ')'

Identifiers are ``q p a abar hbar i``.  ``^`` takes a non-negative integer
literal only, so ``q^-1`` is a syntax error.  Division is allowed by numeric
constants only.  Juxtaposition (``2q``) is rejected.
"""

from __future__ import annotations

import re

from .errors import ParseError
from .poly import BASES, CANONICAL, HOLOMORPHIC, VARIABLES, PhasePoly, nice_fraction

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)
_IDENTS = {"q", "p", "a", "abar", "hbar", "i"}


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text, basis):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.basis = basis

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.text, tok[2])

    def parse(self):
        if self.peek()[0] == "end":
            self.error("empty expression")
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            if tok[0] in ("num", "id") or tok[1] == "(":
                self.error("implicit multiplication is not allowed; use '*'")
            self.error(f"unexpected {tok[1]!r}")
        return value

    def expr(self):
        value = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek()[1] in ("*", "/"):
            op_tok = self.take()
            rhs = self.unary()
            if op_tok[1] == "*":
                value = value * rhs
            else:
                keys = set(rhs.terms)
                if not keys or keys != {(0, 0, 0)}:
                    self.error("division is only allowed by a nonzero numeric constant", op_tok)
                c = rhs.terms[(0, 0, 0)]
                value = _divide(value, c)
        return value

    def unary(self):
        tok = self.peek()
        if tok[1] in ("+", "-"):
            self.take()
            operand = self.unary()
            return -operand if tok[1] == "-" else operand
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            tok = self.peek()
            if tok[0] != "num" or not tok[1].isdigit():
                self.error("exponent must be a non-negative integer literal", tok)
            self.take()
            base = base ** int(tok[1])
        return base

    def atom(self):
        tok = self.take()
        kind, text, _ = tok
        if kind == "num":
            return PhasePoly.constant(float(text), self.basis)
        if kind == "id":
            if text not in _IDENTS:
                self.error(f"unknown identifier {text!r}", tok)
            if text == "i":
                return PhasePoly.constant(1j, self.basis)
            if text == "hbar":
                return PhasePoly.hbar(1, self.basis)
            if text not in VARIABLES[self.basis]:
                self.error(f"identifier {text!r} is not a {self.basis} variable", tok)
            return PhasePoly.var(text)
        if text == "(":
            value = self.expr()
            if self.peek()[1] != ")":
                self.error("expected ')'")
            self.take()
            return value
        if kind == "end":
            self.error("unexpected end of expression", tok)
        self.error(f"unexpected {text!r}", tok)


def _divide(value, c):
    if c == 0:
        raise ZeroDivisionError("division by zero in expression")
    if c.imag == 0:
        r = c.real
        return PhasePoly({k: complex(v.real / r, v.imag / r) for k, v in value.terms.items()}, value.basis)
    return PhasePoly({k: v / c for k, v in value.terms.items()}, value.basis)


def _infer_basis(text):
    names = set(re.findall(r"[A-Za-z_][A-Za-z_0-9]*", text))
    holo = names & {"a", "abar"}
    canon = names & {"q", "p"}
    if holo and canon:
        # let the parser report the first offending identifier
        return CANONICAL
    return HOLOMORPHIC if holo else CANONICAL


def parse_expr(text: str, basis: str = "auto") -> PhasePoly:
    """Parse ``text`` into a normalized :class:`PhasePoly`.

    With ``basis="auto"`` the basis is holomorphic iff ``a``/``abar`` occur.
    """
    if basis == "auto":
        basis = _infer_basis(text)
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}")
    return _Parser(text, basis).parse()


# -- pretty printing ------------------------------------------------------------


def _fmt_real(x):
    fr = nice_fraction(x)
    if fr is not None:
        n, d = fr
        return str(n) if d == 1 else f"{n}/{d}"
    return repr(float(x))


def _fmt_imag(y):
    """Positive imaginary magnitude y -> text for y*i."""
    if y == 1:
        return "i"
    fr = nice_fraction(y)
    if fr is not None:
        n, d = fr
        if d == 1:
            return f"{n}*i"
        return f"i/{d}" if n == 1 else f"{n}*i/{d}"
    return f"{repr(float(y))}*i"


def _split_coefficient(c: complex):
    """(negative, text, needs_parens) for a nonzero coefficient."""
    re_, im = c.real, c.imag
    if im == 0:
        neg = re_ < 0
        body = _fmt_real(abs(re_))
        return neg, body, "/" in body
    if re_ == 0:
        neg = im < 0
        body = _fmt_imag(abs(im))
        return neg, body, body != "i"
    sign = "+" if im > 0 else "-"
    return False, f"{_fmt_real(re_)} {sign} {_fmt_imag(abs(im))}", True


def _monomial_text(i, j, k, names):
    parts = []
    for name, e in ((names[0], i), (names[1], j), ("hbar", k)):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
        elif e < 0:
            parts.append(f"{name}^({e})")
    return "*".join(parts)


def term_order(key):
    i, j, k = key
    return (-(i + j), -i, k)


def format_poly(f: PhasePoly) -> str:
    """Canonical text: descending total degree, then lexicographic, hbar last."""
    if f.is_zero():
        return "0"
    names = VARIABLES[f.basis]
    pieces = []
    for key in sorted(f.terms, key=term_order):
        c = f.terms[key]
        mono = _monomial_text(*key, names)
        neg, body, parens = _split_coefficient(c)
        if mono:
            if body == "1":
                text = mono
            else:
                text = f"({body})*{mono}" if parens else f"{body}*{mono}"
        else:
            text = f"({body})" if parens and " " in body else body
        pieces.append((neg, text))
    out = ("-" if pieces[0][0] else "") + pieces[0][1]
    for neg, text in pieces[1:]:
        out += (" - " if neg else " + ") + text
    return out
