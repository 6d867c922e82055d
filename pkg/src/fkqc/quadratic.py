"""Exact arithmetic in real quadratic fields.

Substrate coordinates are kept as exact elements ``a + b*lam`` where ``lam``
is a fixed quadratic irrational (the golden ratio for the standard two-tile
chain) and ``a``, ``b`` are rationals.  Exactness is what makes local-pattern
equality a decidable, tolerance-free predicate; floats are only shadows.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from typing import Union

Rational = Union[int, Fraction]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        # floats are dyadic rationals; the embedding is exact
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


class QuadraticField:
    """The field Q(lam) with lam the larger root of x^2 = p*x + q.

    ``p`` and ``q`` are rationals with p^2 + 4q > 0 and not a perfect square
    of a rational, so lam is irrational and every element has a unique
    representation a + b*lam.
    """

    __slots__ = ("p", "q", "_value")

    def __init__(self, p, q):
        self.p = _as_fraction(p)
        self.q = _as_fraction(q)
        disc = self.p * self.p + 4 * self.q
        if disc <= 0:
            raise ValueError("field requires a real irrational generator (p^2 + 4q > 0)")
        if _is_rational_square(disc):
            raise ValueError("p^2 + 4q is a perfect square; lam would be rational")
        self._value = (float(self.p) + math.sqrt(float(disc))) / 2.0

    @property
    def discriminant(self) -> Fraction:
        return self.p * self.p + 4 * self.q

    @property
    def value(self) -> float:
        """Float shadow of lam."""
        return self._value

    def element(self, a, b=0) -> QuadraticNumber:
        return QuadraticNumber(self, _as_fraction(a), _as_fraction(b))

    def zero(self) -> QuadraticNumber:
        return self.element(0)

    def one(self) -> QuadraticNumber:
        return self.element(1)

    def lam(self) -> QuadraticNumber:
        return self.element(0, 1)

    def coerce(self, x) -> QuadraticNumber:
        """Exact coercion of ints, Fractions, floats or own elements."""
        if isinstance(x, QuadraticNumber):
            if x.field != self:
                raise ValueError("element belongs to a different quadratic field")
            return x
        return self.element(_as_fraction(x))

    def exceeds(self, t: Fraction) -> bool:
        """Exact test lam > t for rational t."""
        # lam is the larger root of f(x) = x^2 - p x - q; lam > t iff t is
        # left of the vertex or f(t) < 0.
        if 2 * t <= self.p:
            return True
        return t * t - self.p * t - self.q < 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QuadraticField)
            and self.p == other.p
            and self.q == other.q
        )

    def __hash__(self) -> int:
        return hash(("QuadraticField", self.p, self.q))

    def __repr__(self) -> str:
        return f"QuadraticField(p={self.p}, q={self.q})"


def _is_rational_square(x: Fraction) -> bool:
    if x < 0:
        return False
    num, den = x.numerator, x.denominator
    rn = math.isqrt(num)
    rd = math.isqrt(den)
    return rn * rn == num and rd * rd == den


def golden_field() -> QuadraticField:
    """Q(phi) with phi^2 = phi + 1."""
    return QuadraticField(1, 1)


@total_ordering
class QuadraticNumber:
    """An exact element a + b*lam of a fixed quadratic field."""

    __slots__ = ("field", "a", "b")

    def __init__(self, field: QuadraticField, a: Fraction, b: Fraction = Fraction(0)):
        self.field = field
        self.a = a
        self.b = b

    # -- construction helpers -------------------------------------------------

    def _coerce(self, other) -> QuadraticNumber | None:
        if isinstance(other, QuadraticNumber):
            if other.field != self.field:
                return None
            return other
        if isinstance(other, (int, Fraction, float)):
            return QuadraticNumber(self.field, _as_fraction(other))
        return None

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def as_pair(self) -> tuple[Fraction, Fraction]:
        return (self.a, self.b)

    # -- ring operations ------------------------------------------------------

    def __add__(self, other) -> QuadraticNumber:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticNumber(self.field, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> QuadraticNumber:
        return QuadraticNumber(self.field, -self.a, -self.b)

    def __sub__(self, other) -> QuadraticNumber:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticNumber(self.field, self.a - o.a, self.b - o.b)

    def __rsub__(self, other) -> QuadraticNumber:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other) -> QuadraticNumber:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        # lam^2 = p*lam + q
        p, q = self.field.p, self.field.q
        a = self.a * o.a + q * self.b * o.b
        b = self.a * o.b + self.b * o.a + p * self.b * o.b
        return QuadraticNumber(self.field, a, b)

    __rmul__ = __mul__

    def conjugate(self) -> QuadraticNumber:
        """Image under lam -> p - lam (the other root)."""
        p = self.field.p
        return QuadraticNumber(self.field, self.a + self.b * p, -self.b)

    def norm(self) -> Fraction:
        """Rational norm (self * conjugate)."""
        p, q = self.field.p, self.field.q
        return self.a * self.a + p * self.a * self.b - q * self.b * self.b

    def inverse(self) -> QuadraticNumber:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero element of quadratic field")
        conj = self.conjugate()
        return QuadraticNumber(self.field, conj.a / n, conj.b / n)

    def __truediv__(self, other) -> QuadraticNumber:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other) -> QuadraticNumber:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int) -> QuadraticNumber:
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = QuadraticNumber(self.field, Fraction(1))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- order and equality (exact) -------------------------------------------

    def sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        # sign(a + b*lam) = sign(b) * sign(lam - (-a/b))
        t = -a / b
        s = 1 if self.field.exceeds(t) else -1
        return s if b > 0 else -s

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __lt__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.field.p, self.field.q))

    def __abs__(self) -> QuadraticNumber:
        return -self if self.sign() < 0 else self

    # -- shadows ---------------------------------------------------------------

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * self.field.value

    def __repr__(self) -> str:
        return f"({self.a} + {self.b}*lam)"
