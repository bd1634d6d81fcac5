"""Exact Gaussian-rational scalars (a + b*i with a, b rational)."""

from __future__ import annotations

from fractions import Fraction


class GaussianRational:
    """Immutable exact complex rational.

    All constants inside expression trees are of this type; floating point
    only ever appears when an expression is evaluated at a point.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def reciprocal(self):
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ZeroDivisionError("reciprocal of 0")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * _coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return _coerce(other) * self.reciprocal()

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("integer exponents only")
        if n < 0:
            return self.reciprocal() ** (-n)
        out = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    # -- predicates and conversions --------------------------------------

    @property
    def is_zero(self):
        return self.re == 0 and self.im == 0

    @property
    def is_real(self):
        return self.im == 0

    def __bool__(self):
        return not self.is_zero

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __eq__(self, other):
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def key(self):
        """Hashable frozen representation used inside canonical forms."""
        return (self.re, self.im)

    def sort_sign(self):
        """-1, 0 or +1 by (re, im) lexicographic order; used to orient atoms."""
        if self.re != 0:
            return 1 if self.re > 0 else -1
        if self.im != 0:
            return 1 if self.im > 0 else -1
        return 0

    def __repr__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def _coerce(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to GaussianRational")


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)
HALF = GaussianRational(Fraction(1, 2))
