"""Exact scalar arithmetic for map parameters.

Exact values are `fractions.Fraction` (rationals) or `Surd` (a + b*sqrt(d) with
rational a, b and square-free d >= 2).  Every arithmetic result is kept in
canonical form: a Surd with zero irrational part collapses back to a Fraction,
so equal values always have equal canonical keys.  Anything given as a Python
float is *not* exact and stays a float; downstream code treats float parameters
as heuristic.

Quadratic fields cover every bundled system (golden ratio, sqrt(3) for the
equilateral gasket) without dragging in a CAS.
"""

from __future__ import annotations

import math
from fractions import Fraction

Rational = (int, Fraction)


def _square_free_split(n: int) -> tuple[int, int]:
    """n = s*s*d with d square-free; returns (s, d). n >= 1."""
    s, d = 1, 1
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            s *= p ** (e // 2)
            if e % 2:
                d *= p
        p += 1 if p == 2 else 2
    d *= m
    return s, d


class Surd:
    """a + b*sqrt(d) with Fraction a, b (b != 0) and square-free d >= 2.

    Construct through :func:`surd`, which canonicalizes; the raw constructor
    trusts its arguments.  Mixed arithmetic with ints and Fractions works;
    mixing two different radicals raises TypeError.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a: Fraction, b: Fraction, d: int):
        self.a = a
        self.b = b
        self.d = d

    # -- basic protocol ---------------------------------------------------

    def __repr__(self) -> str:
        return f"({self.a} + {self.b}*sqrt({self.d}))"

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __hash__(self):
        return hash(("surd", self.a, self.b, self.d))

    def __bool__(self) -> bool:
        return True  # b != 0 means the value is irrational, never zero

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Surd):
            if other.d != self.d:
                raise TypeError(
                    f"mixed radicals sqrt({self.d}) and sqrt({other.d}) are not supported"
                )
            return other.a, other.b
        if isinstance(other, Rational):
            return Fraction(other), Fraction(0)
        return None

    def __add__(self, other):
        co = self._coerce(other)
        if co is None:
            return NotImplemented
        oa, ob = co
        return surd(self.a + oa, self.b + ob, self.d)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b, self.d)

    def __sub__(self, other):
        co = self._coerce(other)
        if co is None:
            return NotImplemented
        oa, ob = co
        return surd(self.a - oa, self.b - ob, self.d)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        co = self._coerce(other)
        if co is None:
            return NotImplemented
        oa, ob = co
        return surd(self.a * oa + self.b * ob * self.d, self.a * ob + self.b * oa, self.d)

    __rmul__ = __mul__

    def _inverse(self):
        # (a + b sqrt d)^-1 = (a - b sqrt d) / (a^2 - b^2 d)
        den = self.a * self.a - self.b * self.b * self.d
        return surd(self.a / den, -self.b / den, self.d)

    def __truediv__(self, other):
        co = self._coerce(other)
        if co is None:
            return NotImplemented
        if isinstance(other, Rational):
            return surd(self.a / other, self.b / other, self.d)
        return self * Surd(co[0], co[1], self.d)._inverse()

    def __rtruediv__(self, other):
        inv = self._inverse()
        return inv * other

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = Fraction(1)
        base = self
        while n:
            if n & 1:
                out = base * out
            base = base * base
            n >>= 1
        return out

    # -- ordering ---------------------------------------------------------

    def sign(self) -> int:
        a, b = self.a, self.b
        if a == 0:
            return 1 if b > 0 else -1
        if b == 0:  # not canonical, but harmless
            return 1 if a > 0 else -1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        t = a * a - b * b * self.d
        s = 1 if t > 0 else (-1 if t < 0 else 0)
        return s if a > 0 else -s

    def _cmp(self, other) -> int:
        diff = self - other
        if isinstance(diff, Surd):
            return diff.sign()
        return 1 if diff > 0 else (-1 if diff < 0 else 0)

    def __eq__(self, other):
        if isinstance(other, Surd):
            return self.d == other.d and self.a == other.a and self.b == other.b
        if isinstance(other, Rational):
            return False  # canonical Surd is irrational
        return NotImplemented

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0


def surd(a, b, d: int):
    """Canonical a + b*sqrt(d): returns a Fraction when the radical vanishes."""
    a, b = Fraction(a), Fraction(b)
    if b == 0 or d == 0:
        return a
    if d < 0:
        raise ValueError("negative radicand")
    s, d0 = _square_free_split(d)
    if d0 == 1:
        return a + b * s
    return Surd(a, b * s, d0)


def exact_sqrt(x):
    """Exact square root of a nonnegative int/Fraction, as Fraction or Surd."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative radicand")
    if x == 0:
        return Fraction(0)
    # sqrt(p/q) = sqrt(p q) / q
    return surd(0, Fraction(1, x.denominator), x.numerator * x.denominator)


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, Surd))


def as_float(x) -> float:
    return float(x)


def scalar_key(x):
    """Canonical hashable key; equal exact values get equal keys."""
    if isinstance(x, Surd):
        return ("s", x.d, x.a.numerator, x.a.denominator, x.b.numerator, x.b.denominator)
    x = Fraction(x)
    return ("q", x.numerator, x.denominator)


# ---------------------------------------------------------------------------
# scalar expression parser: ints, p/q, decimals, sqrt(...), + - * / ( )
# ---------------------------------------------------------------------------


class ScalarSyntaxError(ValueError):
    pass


def _tokenize(text: str):
    out = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "+-*/()":
            out.append(c)
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] in ".eE" or
                             (text[j] in "+-" and text[j - 1] in "eE")):
                j += 1
            out.append(text[i:j])
            i = j
            continue
        if c.isalpha():
            j = i
            while j < n and text[j].isalpha():
                j += 1
            out.append(text[i:j])
            i = j
            continue
        raise ScalarSyntaxError(f"bad character {c!r} in scalar {text!r}")
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self):
        t = self.peek()
        self.pos += 1
        return t

    def expect(self, t):
        got = self.take()
        if got != t:
            raise ScalarSyntaxError(f"expected {t!r}, got {got!r}")

    def expr(self):
        v = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()
            w = self.factor()
            v = v * w if op == "*" else v / w
        return v

    def factor(self):
        t = self.peek()
        if t == "-":
            self.take()
            return -self.factor()
        if t == "+":
            self.take()
            return self.factor()
        if t == "(":
            self.take()
            v = self.expr()
            self.expect(")")
            return v
        if t == "sqrt":
            self.take()
            self.expect("(")
            v = self.expr()
            self.expect(")")
            if is_exact(v):
                return exact_sqrt(v)
            return math.sqrt(v)
        t = self.take()
        if t is None:
            raise ScalarSyntaxError("unexpected end of scalar expression")
        if any(ch in t for ch in ".eE"):
            return float(t)  # decimal literal: deliberately inexact
        try:
            return Fraction(int(t))
        except ValueError as e:
            raise ScalarSyntaxError(f"bad token {t!r}") from e


def parse_scalar(text: str):
    """Parse a scalar expression, exact where possible.

    '1/3' -> Fraction(1, 3); '(sqrt(5)-1)/2' -> Surd; '0.25' -> float 0.25
    (decimal literals are deliberately parsed as floats: exactness is a
    property of how the value was written).
    """
    toks = _tokenize(text)
    if not toks:
        raise ScalarSyntaxError("empty scalar")
    try:
        p = _Parser(toks)
        v = p.expr()
    except TypeError:
        # Surd mixed with float literal: re-evaluate in plain floats
        p = _Parser(toks)
        v = _float_eval(p)
    if p.peek() is not None:
        raise ScalarSyntaxError(f"trailing tokens in scalar {text!r}")
    return v


def _float_eval(parser: _Parser):
    # monkey-route: temporarily wrap factor() results in float
    orig_factor = parser.factor

    def float_factor():
        v = orig_factor()
        return float(v)

    parser.factor = float_factor  # type: ignore[method-assign]
    return parser.expr()


# ---------------------------------------------------------------------------
# small exact matrices (tuples of tuples), dimensions 1..3
# ---------------------------------------------------------------------------


def mat_identity(d: int):
    return tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    return tuple(
        tuple(sum((A[i][t] * B[t][j] for t in range(k)), Fraction(0)) for j in range(m))
        for i in range(n)
    )


def mat_vec(A, v):
    return tuple(sum((A[i][t] * v[t] for t in range(len(v))), Fraction(0))
                 for i in range(len(A)))


def mat_transpose(A):
    return tuple(tuple(A[i][j] for i in range(len(A))) for j in range(len(A[0])))


def mat_is_orthogonal(A) -> bool:
    d = len(A)
    return mat_mul(mat_transpose(A), A) == mat_identity(d)
