"""Exact arithmetic in real quadratic fields Q(sqrt d).

Values are ``a + b*sqrt(d)`` with rational ``a, b`` and squarefree ``d``.
Operations between surds of different (nontrivial) radicands raise
:class:`IncompatibleRadicands`; mixing with ``float`` degrades to ``float``.
Two-dimensional vectors are plain tuples of scalars (int, Fraction, surd
or float) and the helpers at the bottom of the module work on all of them.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Tuple, Union

from .errors import IncompatibleRadicands, RadicandTooLarge

MAX_RADICAND = 10**12  # trial division by p <= 10**6 settles squarefreeness

Rational = Union[int, Fraction]


@lru_cache(maxsize=4096)
def squarefree_split(n: int) -> Tuple[int, int]:
    """Return ``(s, d)`` with ``n == s*s*d`` and ``d`` squarefree."""
    if n < 0:
        raise ValueError("negative radicand")
    if n > MAX_RADICAND:
        raise RadicandTooLarge(f"radicand {n} exceeds {MAX_RADICAND}")
    if n == 0:
        return 0, 0
    s, d = 1, 1
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            d *= p
        p += 1 if p == 2 else 2
    return s, d * n


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not a rational: {x!r}")


@total_ordering
class QuadraticSurd:
    """Exact real number ``a + b*sqrt(d)``."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a: Rational = 0, b: Rational = 0, d: int = 0):
        a, b = _frac(a), _frac(b)
        if d < 0:
            raise ValueError("only real quadratic fields are supported")
        s, d = squarefree_split(int(d))
        b *= s
        if d == 1:
            a, b, d = a + b, Fraction(0), 0
        if b == 0 or d == 0:
            b, d = Fraction(0), 0
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("QuadraticSurd is immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def sqrt(cls, q: Rational) -> "QuadraticSurd":
        """Exact square root of a non-negative rational."""
        q = _frac(q)
        if q < 0:
            raise ValueError("square root of a negative rational")
        num, den = q.numerator, q.denominator
        # sqrt(num/den) = sqrt(num*den)/den
        return cls(0, Fraction(1, den), num * den)

    @classmethod
    def coerce(cls, x) -> "QuadraticSurd":
        if isinstance(x, QuadraticSurd):
            return x
        return cls(_frac(x))

    # -- predicates ---------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.d == 0

    def to_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is irrational")
        return self.a

    def conjugate(self) -> "QuadraticSurd":
        return QuadraticSurd(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 d
        diff = a * a - b * b * self.d
        return sa if diff > 0 else sb

    # -- arithmetic ---------------------------------------------------
    def _common(self, other):
        if isinstance(other, QuadraticSurd):
            o = other
        elif isinstance(other, (int, Fraction)):
            o = QuadraticSurd(other)
        else:
            return None
        if self.d and o.d and self.d != o.d:
            raise IncompatibleRadicands(f"sqrt({self.d}) vs sqrt({o.d})")
        return o

    def __add__(self, other):
        if isinstance(other, float):
            return float(self) + other
        o = self._common(other)
        if o is None:
            return NotImplemented
        return QuadraticSurd(self.a + o.a, self.b + o.b, self.d or o.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticSurd(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, float):
            return float(self) - other
        o = self._common(other)
        if o is None:
            return NotImplemented
        return QuadraticSurd(self.a - o.a, self.b - o.b, self.d or o.d)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, float):
            return float(self) * other
        o = self._common(other)
        if o is None:
            return NotImplemented
        d = self.d or o.d
        return QuadraticSurd(
            self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadraticSurd":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero surd")
        return QuadraticSurd(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        if isinstance(other, float):
            return float(self) / other
        o = self._common(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        if isinstance(other, float):
            return other / float(self)
        o = self._common(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        base = self if k >= 0 else self.inverse()
        result = QuadraticSurd(1)
        k = abs(k)
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- comparison ---------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, float):
            return float(self) == other
        try:
            o = self._common(other)
        except IncompatibleRadicands:
            return False
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b and self.d == o.d

    def __lt__(self, other):
        if isinstance(other, float):
            return float(self) < other
        o = self._common(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self):
        if self.d == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.sign() != 0

    # -- conversion ---------------------------------------------------
    def __float__(self):
        a, b, d = self.a, self.b, self.d
        if d == 0 or b == 0:
            return float(a)
        if a == 0 or (a > 0) == (b > 0):
            return float(a) + float(b) * math.sqrt(d)
        # opposite signs: use the conjugate to avoid cancellation
        return float(self.norm()) / (float(a) - float(b) * math.sqrt(d))

    def floor(self) -> int:
        n = math.floor(float(self))
        # float can be off by one near integers; fix exactly
        while QuadraticSurd(n) > self:
            n -= 1
        while QuadraticSurd(n + 1) <= self:
            n += 1
        return n

    def __repr__(self):
        return f"QuadraticSurd({str(self)!r})"

    def __str__(self):
        if self.d == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt({self.d})"
        sign = "+" if self.b > 0 else "-"
        return f"{self.a}{sign}{abs(self.b)}*sqrt({self.d})"

    _PATTERN = re.compile(
        r"^\s*(?:(?P<a>[+-]?\d+(?:/\d+)?)\s*(?=[+-]|$))?"
        r"(?:(?P<bs>[+-])?\s*(?:(?P<b>\d+(?:/\d+)?)\s*\*\s*)?sqrt\((?P<d>\d+)\))?\s*$"
    )

    @classmethod
    def parse(cls, text: str) -> "QuadraticSurd":
        """Parse the output of ``str``: ``"3/2+1/2*sqrt(5)"``, ``"sqrt(2)"``, ``"-7"``."""
        m = cls._PATTERN.match(text)
        if not m or (m.group("a") is None and m.group("d") is None):
            raise ValueError(f"cannot parse surd {text!r}")
        a = Fraction(m.group("a")) if m.group("a") else Fraction(0)
        if m.group("d") is None:
            return cls(a)
        b = Fraction(m.group("b")) if m.group("b") else Fraction(1)
        if m.group("bs") == "-":
            b = -b
        return cls(a, b, int(m.group("d")))


Scalar = Union[int, Fraction, QuadraticSurd, float]
Vec = Tuple[Scalar, Scalar]


def simplify(x: Scalar) -> Scalar:
    """Collapse rational surds to Fraction and integral Fractions stay Fractions."""
    if isinstance(x, QuadraticSurd) and x.is_rational:
        return x.a
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    return x


def parse_scalar(value) -> Scalar:
    """JSON scalar -> exact number when possible.

    Strings are rationals ``"p/q"`` or surds; JSON ints are exact; JSON
    floats stay floats.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        if "sqrt" in value:
            return simplify(QuadraticSurd.parse(value))
        return Fraction(value)
    if isinstance(value, (Fraction, QuadraticSurd)):
        return simplify(value)
    raise TypeError(f"unsupported scalar {value!r}")


def format_scalar(x: Scalar):
    x = simplify(x)
    if isinstance(x, float):
        return x
    return str(x)


def is_exact(x: Scalar) -> bool:
    return isinstance(x, (int, Fraction, QuadraticSurd))


def sgn(x: Scalar) -> int:
    if isinstance(x, QuadraticSurd):
        return x.sign()
    return int(x > 0) - int(x < 0)


def to_float(x: Scalar) -> float:
    return float(x)


# -- 2-vectors --------------------------------------------------------------

def vadd(u: Vec, v: Vec) -> Vec:
    return (simplify(u[0] + v[0]), simplify(u[1] + v[1]))


def vsub(u: Vec, v: Vec) -> Vec:
    return (simplify(u[0] - v[0]), simplify(u[1] - v[1]))


def vscale(c: Scalar, v: Vec) -> Vec:
    return (simplify(c * v[0]), simplify(c * v[1]))


def dot(u: Vec, v: Vec) -> Scalar:
    return simplify(u[0] * v[0] + u[1] * v[1])


def cross(u: Vec, v: Vec) -> Scalar:
    return simplify(u[0] * v[1] - u[1] * v[0])


def solve_basis(p: Vec, q: Vec, x: Vec) -> Tuple[Scalar, Scalar]:
    """Coordinates ``(t, s)`` with ``x == t*p + s*q``."""
    det = cross(p, q)
    if det == 0:
        raise ValueError("basis vectors are parallel")
    t = cross(x, q) / det
    s = cross(p, x) / det
    return simplify(t), simplify(s)


def vec_float(v: Vec) -> Tuple[float, float]:
    return (float(v[0]), float(v[1]))


def vec_is_zero(v: Vec) -> bool:
    return v[0] == 0 and v[1] == 0


def vec_exact(v: Vec) -> bool:
    return is_exact(v[0]) and is_exact(v[1])


class Direction2:
    """A ray direction in R^2 with an exact canonical representative.

    Rational directions become primitive integer vectors; irrational ones
    are scaled so the first nonzero coordinate is +-1.  The sign (i.e. the
    ray, not the line) is preserved.
    """

    __slots__ = ("x", "y")

    def __init__(self, x: Scalar, y: Scalar):
        x, y = simplify(x), simplify(y)
        if x == 0 and y == 0:
            raise ValueError("zero vector has no direction")
        if isinstance(x, float) or isinstance(y, float):
            raise TypeError("Direction2 requires exact coordinates")
        if not isinstance(x, QuadraticSurd) and not isinstance(y, QuadraticSurd):
            x, y = _primitive(Fraction(x), Fraction(y))
        else:
            scale = abs(QuadraticSurd.coerce(x if x != 0 else y))
            x, y = simplify(x / scale), simplify(y / scale)
            if not isinstance(x, QuadraticSurd) and not isinstance(y, QuadraticSurd):
                x, y = _primitive(Fraction(x), Fraction(y))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __setattr__(self, name, value):
        raise AttributeError("Direction2 is immutable")

    @classmethod
    def of(cls, v: Vec) -> "Direction2":
        return cls(v[0], v[1])

    @property
    def vec(self) -> Vec:
        return (self.x, self.y)

    def __neg__(self):
        return Direction2(-self.x, -self.y)

    def line(self) -> "Direction2":
        """Sign-normalised representative (first nonzero coordinate positive)."""
        first = self.x if self.x != 0 else self.y
        return self if sgn(first) > 0 else -self

    def slope(self) -> Scalar:
        if self.x == 0:
            raise ZeroDivisionError("vertical direction")
        return simplify(self.y / self.x)

    def __eq__(self, other):
        if not isinstance(other, Direction2):
            return NotImplemented
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __repr__(self):
        return f"Direction2({format_scalar(self.x)!s}, {format_scalar(self.y)!s})"

    def to_json(self):
        return [format_scalar(self.x), format_scalar(self.y)]


def _primitive(x: Fraction, y: Fraction) -> Tuple[Fraction, Fraction]:
    den = math.lcm(x.denominator, y.denominator)
    xi, yi = int(x * den), int(y * den)
    g = math.gcd(xi, yi)
    return Fraction(xi // g), Fraction(yi // g)
