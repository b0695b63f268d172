"""Double-double arithmetic: unevaluated pairs of 64-bit floats.

A value is stored as (hi, lo) with |lo| <= ulp(hi)/2, giving roughly
106 bits of significand.  Built from the classic error-free
transformations (two_sum, two_prod with Dekker splitting, since
math.fma is unavailable before 3.13).
"""

from __future__ import annotations

import math

_SPLITTER = 134217729.0  # 2^27 + 1, exact in double


def two_sum(a: float, b: float) -> tuple[float, float]:
    """s + err == a + b exactly, s = fl(a+b)."""
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a: float, b: float) -> tuple[float, float]:
    """Like two_sum but requires |a| >= |b|."""
    s = a + b
    err = b - (s - a)
    return s, err


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    abig = c - a
    ahi = c - abig
    return ahi, a - ahi


def two_prod(a: float, b: float) -> tuple[float, float]:
    """p + err == a * b exactly, p = fl(a*b)."""
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


class DD:
    """A double-double scalar.  Immutable."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi: float = 0.0, lo: float = 0.0):
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "lo", lo)

    def __setattr__(self, name, value):
        raise AttributeError("DD is immutable")

    @staticmethod
    def from_float(a: float) -> "DD":
        return DD(float(a), 0.0)

    def to_float(self) -> float:
        return self.hi + self.lo

    def __repr__(self) -> str:
        return f"DD({self.hi!r}, {self.lo!r})"

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.hi == other.hi and self.lo == other.lo

    def __hash__(self):
        return hash((self.hi, self.lo))

    def __neg__(self) -> "DD":
        return DD(-self.hi, -self.lo)

    def __abs__(self) -> "DD":
        return -self if self.hi < 0 or (self.hi == 0 and self.lo < 0) else self

    def __add__(self, other) -> "DD":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        s, e = two_sum(self.hi, other.hi)
        t, f = two_sum(self.lo, other.lo)
        e += t
        s, e = quick_two_sum(s, e)
        e += f
        hi, lo = quick_two_sum(s, e)
        return DD(hi, lo)

    __radd__ = __add__

    def __sub__(self, other) -> "DD":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "DD":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "DD":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p, e = two_prod(self.hi, other.hi)
        e += self.hi * other.lo + self.lo * other.hi
        hi, lo = quick_two_sum(p, e)
        return DD(hi, lo)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "DD":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        q1 = self.hi / other.hi
        r = self - other * DD(q1)
        q2 = r.hi / other.hi
        r = r - other * DD(q2)
        q3 = r.hi / other.hi
        s, e = quick_two_sum(q1, q2)
        e += q3
        hi, lo = quick_two_sum(s, e)
        return DD(hi, lo)

    def __rtruediv__(self, other) -> "DD":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __lt__(self, other) -> bool:
        other = _coerce(other)
        return (self.hi, self.lo) < (other.hi, other.lo)

    def __le__(self, other) -> bool:
        other = _coerce(other)
        return (self.hi, self.lo) <= (other.hi, other.lo)

    def sqrt(self) -> "DD":
        # One Newton step on 1/sqrt doubles the accuracy of the double seed.
        if self.hi == 0 and self.lo == 0:
            return DD(0.0)
        if self.hi < 0:
            raise ValueError("sqrt of negative double-double")
        x = math.sqrt(self.hi)
        xdd = DD(x)
        return xdd + (self - xdd * xdd) / (2.0 * x)


def _coerce(v):
    if isinstance(v, DD):
        return v
    if isinstance(v, (int, float)):
        return DD(float(v))
    return NotImplemented


ZERO = DD(0.0)
ONE = DD(1.0)


class CDD:
    """Complex number with double-double real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: DD | float = 0.0, im: DD | float = 0.0):
        object.__setattr__(self, "re", re if isinstance(re, DD) else DD(float(re)))
        object.__setattr__(self, "im", im if isinstance(im, DD) else DD(float(im)))

    def __setattr__(self, name, value):
        raise AttributeError("CDD is immutable")

    @staticmethod
    def from_complex(z: complex) -> "CDD":
        return CDD(z.real, z.imag)

    def to_complex(self) -> complex:
        return complex(self.re.to_float(), self.im.to_float())

    def __repr__(self) -> str:
        return f"CDD({self.re!r}, {self.im!r})"

    def __neg__(self) -> "CDD":
        return CDD(-self.re, -self.im)

    def __add__(self, other) -> "CDD":
        other = _coerce_c(other)
        if other is NotImplemented:
            return NotImplemented
        return CDD(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other) -> "CDD":
        other = _coerce_c(other)
        if other is NotImplemented:
            return NotImplemented
        return CDD(self.re - other.re, self.im - other.im)

    def __rsub__(self, other) -> "CDD":
        other = _coerce_c(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other) -> "CDD":
        other = _coerce_c(other)
        if other is NotImplemented:
            return NotImplemented
        return CDD(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "CDD":
        other = _coerce_c(other)
        if other is NotImplemented:
            return NotImplemented
        # Smith's formula avoids overflow on badly scaled denominators.
        ar, ai, br, bi = self.re, self.im, other.re, other.im
        if abs(br.hi) >= abs(bi.hi):
            r = bi / br
            den = br + bi * r
            return CDD((ar + ai * r) / den, (ai - ar * r) / den)
        r = br / bi
        den = bi + br * r
        return CDD((ar * r + ai) / den, (ai * r - ar) / den)

    def __rtruediv__(self, other) -> "CDD":
        other = _coerce_c(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def abs2(self) -> DD:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return math.hypot(self.re.to_float(), self.im.to_float())


def _coerce_c(v):
    if isinstance(v, CDD):
        return v
    if isinstance(v, complex):
        return CDD(v.real, v.imag)
    if isinstance(v, (int, float)):
        return CDD(float(v), 0.0)
    if isinstance(v, DD):
        return CDD(v, DD(0.0))
    return NotImplemented
