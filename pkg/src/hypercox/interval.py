"""Outward-rounded float intervals for certified sign screening.

Every arithmetic result is widened by one ulp on each side with
math.nextafter, so a computed interval always encloses the true real
value regardless of rounding mode.  Used as the fast layer of sign
certification; ambiguous intervals (containing 0) are escalated to
higher precision or exact arithmetic by the caller.
"""

import math

_INF = math.inf


def _down(x):
    return math.nextafter(x, -_INF)


def _up(x):
    return math.nextafter(x, _INF)


class Interval:
    """A closed interval [lo, hi] guaranteed to contain the true value."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo = lo
        self.hi = hi

    @classmethod
    def exact(cls, x):
        """Interval for a float that is exact (e.g. small integers)."""
        return cls(x, x)

    @classmethod
    def from_rational(cls, q):
        """Enclose an exact rational (Fraction/mpq) by a 1-ulp interval."""
        x = float(q)
        return cls(_down(x), _up(x))

    def __add__(self, other):
        return Interval(_down(self.lo + other.lo), _up(self.hi + other.hi))

    def __sub__(self, other):
        return Interval(_down(self.lo - other.hi), _up(self.hi - other.lo))

    def __mul__(self, other):
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(_down(min(products)), _up(max(products)))

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __truediv__(self, other):
        if other.lo <= 0.0 <= other.hi:
            raise ZeroDivisionError("interval denominator contains zero")
        quotients = (
            self.lo / other.lo,
            self.lo / other.hi,
            self.hi / other.lo,
            self.hi / other.hi,
        )
        return Interval(_down(min(quotients)), _up(max(quotients)))

    def contains_zero(self):
        return self.lo <= 0.0 <= self.hi

    def sign(self):
        """Certified sign: -1, 0 is never certified, +1; None if ambiguous."""
        if self.lo > 0.0:
            return 1
        if self.hi < 0.0:
            return -1
        return None

    def width(self):
        return self.hi - self.lo

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"


ZERO = Interval(0.0, 0.0)
ONE = Interval(1.0, 1.0)
