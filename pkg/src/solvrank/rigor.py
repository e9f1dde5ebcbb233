"""Exact rationals and outward-rounded interval arithmetic.

Endpoints are :class:`fractions.Fraction`.  Transcendentals (sin, cos, pi)
are produced as enclosures with explicit error bounds, computed in
fixed-point integer arithmetic and rounded outward to dyadic endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

Rational = Fraction
Number = Union[int, Fraction]


class IntervalError(ArithmeticError):
    pass


class Cancelled(RuntimeError):
    pass


class CancelToken:
    """Cooperative cancellation flag checked by long-running loops."""

    def __init__(self):
        self.cancelled = False

    def cancel(self):
        self.cancelled = True

    def check(self):
        if self.cancelled:
            raise Cancelled("operation cancelled")


def _check(token: Optional[CancelToken]):
    if token is not None:
        token.check()


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)
    raise TypeError(f"cannot convert {type(v).__name__} to Fraction")


def floor_dyadic(q: Fraction, bits: int) -> Fraction:
    return Fraction((q.numerator << bits) // q.denominator, 1 << bits)


def ceil_dyadic(q: Fraction, bits: int) -> Fraction:
    return Fraction(-((-q.numerator << bits) // q.denominator), 1 << bits)


@dataclass(frozen=True)
class RInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_fraction(self.lo), as_fraction(self.hi)
        if lo > hi:
            raise IntervalError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, v) -> "RInterval":
        v = as_fraction(v)
        return cls(v, v)

    @classmethod
    def hull_of(cls, *items: "RInterval | Number") -> "RInterval":
        ivs = [_iv(i) for i in items]
        return cls(min(i.lo for i in ivs), max(i.hi for i in ivs))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def mag(self) -> Fraction:
        return max(abs(self.lo), abs(self.hi))

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, v) -> bool:
        if isinstance(v, RInterval):
            return self.lo <= v.lo and v.hi <= self.hi
        v = as_fraction(v)
        return self.lo <= v <= self.hi

    __contains__ = contains

    def subset_of(self, other: "RInterval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def interior_contains(self, other: "RInterval") -> bool:
        return self.lo < other.lo and other.hi < self.hi

    def intersects(self, other: "RInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0

    def hull(self, other) -> "RInterval":
        other = _iv(other)
        return RInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def widen(self, r) -> "RInterval":
        r = as_fraction(r)
        return RInterval(self.lo - r, self.hi + r)

    def round_out(self, bits: int = 128) -> "RInterval":
        """Outward rounding to dyadic endpoints (controls denominator growth)."""
        lo = self.lo if self.lo.denominator == 1 else floor_dyadic(self.lo, bits)
        hi = self.hi if self.hi.denominator == 1 else ceil_dyadic(self.hi, bits)
        return RInterval(lo, hi)

    def __neg__(self):
        return RInterval(-self.hi, -self.lo)

    def __add__(self, other):
        other = _iv(other)
        return RInterval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __sub__(self, other):
        other = _iv(other)
        return RInterval(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other):
        return _iv(other) - self

    def __mul__(self, other):
        other = _iv(other)
        if self.is_point and other.is_point:
            return RInterval.point(self.lo * other.lo)
        ps = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return RInterval(min(ps), max(ps))

    __rmul__ = __mul__

    def reciprocal(self) -> "RInterval":
        if self.lo <= 0 <= self.hi:
            raise IntervalError(f"division by interval containing zero: {self}")
        return RInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * _iv(other).reciprocal()

    def __rtruediv__(self, other):
        return _iv(other) * self.reciprocal()

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise IntervalError("only non-negative integer powers are supported")
        if n == 0:
            return RInterval.point(1)
        a, b = self.lo ** n, self.hi ** n
        if n % 2 == 0 and self.lo <= 0 <= self.hi:
            return RInterval(Fraction(0), max(a, b))
        return RInterval(min(a, b), max(a, b))

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RInterval(Fraction(0), self.mag)

    def __repr__(self):
        return f"RInterval({float(self.lo):.17g}, {float(self.hi):.17g})"

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def _iv(v) -> RInterval:
    if isinstance(v, RInterval):
        return v
    return RInterval.point(v)


ZERO_IV = RInterval.point(0)


# ---------------------------------------------------------------------------
# pi

PI_BITS = 256


def _atan_inv_fixed(n: int, bits: int) -> tuple[int, int]:
    """atan(1/n) * 2^bits by series; returns (value, error bound in ulps)."""
    one = 1 << bits
    term = one // n
    total = term
    n2 = n * n
    k = 1
    sign = -1
    steps = 1
    while term:
        term //= n2
        total += sign * (term // (2 * k + 1))
        sign = -sign
        k += 1
        steps += 1
    return total, 2 * steps + 2


@lru_cache(maxsize=None)
def pi_interval() -> RInterval:
    """Machin's formula, width below 2^-(PI_BITS - 16)."""
    bits = PI_BITS + 16
    a, ea = _atan_inv_fixed(5, bits)
    b, eb = _atan_inv_fixed(239, bits)
    val = 16 * a - 4 * b
    err = 16 * ea + 4 * eb
    return RInterval(Fraction(val - err, 1 << bits), Fraction(val + err, 1 << bits))


# ---------------------------------------------------------------------------
# sin / cos at rational points

def _bits_for(eps: Fraction) -> int:
    if eps <= 0:
        raise IntervalError("precision must be positive")
    return max(64, (eps.denominator.bit_length() - eps.numerator.bit_length()) + 24)


def _sin_fixed(r: int, bits: int) -> tuple[int, int]:
    """sin(r / 2^bits) * 2^bits for |r| <= 2^bits * 1.6; (value, err ulps)."""
    x2 = (r * r) >> bits
    term = r
    total = r
    n = 1
    steps = 0
    while term:
        term = -((term * x2) >> bits) // ((n + 1) * (n + 2))
        total += term
        n += 2
        steps += 1
    return total, 3 * steps + 4


def _reduce(x: Fraction, bits: int) -> tuple[RInterval, int]:
    """x = r + k*pi with r in about [-pi/2, pi/2]; returns (r enclosure, k)."""
    pi = pi_interval()
    k = math.floor(x / pi.mid + Fraction(1, 2))
    r = RInterval.point(x) - pi * k
    return r, k


def sin_point(x, eps) -> RInterval:
    """Enclosure of sin(x) of width at most ``eps`` for rational ``x``."""
    x = as_fraction(x)
    eps = as_fraction(eps)
    if x == 0:
        return ZERO_IV
    bits = _bits_for(eps) + max(0, abs(x).numerator.bit_length() - abs(x).denominator.bit_length())
    r, k = _reduce(x, bits)
    scale = 1 << bits
    mid = r.mid
    rm = (mid.numerator * scale) // mid.denominator
    val, err_ulps = _sin_fixed(rm, bits)
    # |sin(a) - sin(b)| <= |a - b|: account for r's width and the floor of rm
    slack = r.width / 2 + Fraction(err_ulps + 1, scale)
    out = RInterval(Fraction(val, scale) - slack, Fraction(val, scale) + slack)
    if k % 2:
        out = -out
    out = RInterval(max(out.lo, Fraction(-1)), min(out.hi, Fraction(1)))
    return out.round_out(bits)


def cos_point(x, eps) -> RInterval:
    """cos(x) = sin(x + pi/2); the pi uncertainty is folded in explicitly."""
    x = as_fraction(x)
    eps = as_fraction(eps)
    half_pi = pi_interval() / 2
    s = sin_point(x + half_pi.mid, eps / 2)
    return s.widen(half_pi.width / 2).round_out(_bits_for(eps))


def _crit_in(iv: RInterval, offset: Fraction) -> tuple[bool, bool]:
    """Does [lo,hi] possibly contain a point offset + k*pi with k even / odd?"""
    pi = pi_interval()
    even = odd = False
    k_lo = math.floor((iv.lo - offset) / pi.hi) - 1
    k_hi = math.ceil((iv.hi - offset) / pi.lo) + 1
    if k_hi - k_lo > 4:
        return True, True
    for k in range(k_lo, k_hi + 1):
        c = RInterval.point(offset) + pi * k
        if c.intersects(iv):
            if k % 2:
                odd = True
            else:
                even = True
    return even, odd


def sin_enclosure(x: RInterval | Number, eps) -> RInterval:
    """Enclosure of sin over the interval ``x``.

    Width is at most ``eps`` plus the true variation of sin over ``x``.
    """
    x = _iv(x)
    eps = as_fraction(eps)
    if x.is_point:
        return sin_point(x.lo, eps)
    if x.width >= 7:
        return RInterval(Fraction(-1), Fraction(1))
    a, b = sin_point(x.lo, eps / 2), sin_point(x.hi, eps / 2)
    lo, hi = min(a.lo, b.lo), max(a.hi, b.hi)
    # maxima at pi/2 + 2k pi, minima at -pi/2 + 2k pi
    half_pi = pi_interval().mid / 2
    has_max, has_min = _crit_in(x, half_pi)
    if has_max:
        hi = Fraction(1)
    if has_min:
        lo = Fraction(-1)
    return RInterval(lo, hi)


def cos_enclosure(x: RInterval | Number, eps) -> RInterval:
    x = _iv(x)
    eps = as_fraction(eps)
    if x.is_point:
        return cos_point(x.lo, eps)
    if x.width >= 7:
        return RInterval(Fraction(-1), Fraction(1))
    a, b = cos_point(x.lo, eps / 2), cos_point(x.hi, eps / 2)
    lo, hi = min(a.lo, b.lo), max(a.hi, b.hi)
    has_max, has_min = _crit_in(x, Fraction(0))
    if has_max:
        hi = Fraction(1)
    if has_min:
        lo = Fraction(-1)
    return RInterval(lo, hi)


# ---------------------------------------------------------------------------
# The plateau knot of p: largest root of 2x sin(1/x) - cos(1/x) below 1/2.

def knot_fn(x: RInterval | Number, eps=Fraction(1, 1 << 80)) -> RInterval:
    """Interval enclosure of 2x sin(1/x) - cos(1/x) (x bounded away from 0)."""
    x = _iv(x)
    u = x.reciprocal()
    return 2 * x * sin_enclosure(u, eps) - cos_enclosure(u, eps)


def _sign(x: Fraction, token) -> int:
    eps = Fraction(1, 1 << 64)
    while True:
        _check(token)
        v = knot_fn(x, eps)
        if v.lo > 0:
            return 1
        if v.hi < 0:
            return -1
        if eps < Fraction(1, 1 << 4000):
            return 0
        eps = eps * eps


def _cell_root_free(lo: Fraction, hi: Fraction, depth: int = 0) -> bool:
    v = knot_fn(RInterval(lo, hi), Fraction(1, 1 << 64))
    if v.excludes_zero():
        return True
    if depth > 12:
        return False
    m = (lo + hi) / 2
    return _cell_root_free(lo, m, depth + 1) and _cell_root_free(m, hi, depth + 1)


@dataclass(frozen=True)
class XbarCertificate:
    bracket: RInterval
    scan_step: Fraction
    root_free_above: RInterval


@lru_cache(maxsize=1)
def _xbar_bracket() -> tuple[Fraction, Fraction, Fraction]:
    """Scan down from 1/2 until the first certified sign change."""
    step = Fraction(1, 64)
    hi = Fraction(1, 2)
    s_hi = _sign(hi, None)
    while hi - step > Fraction(1, 8):
        lo = hi - step
        s_lo = _sign(lo, None)
        if s_lo != s_hi and s_lo != 0:
            return lo, hi, step
        if not _cell_root_free(lo, hi):
            raise IntervalError(f"could not certify the cell [{lo}, {hi}] root free")
        hi, s_hi = lo, s_lo
    raise IntervalError("no sign change found scanning down from 1/2")


@lru_cache(maxsize=64)
def _xbar_cached(k: int) -> RInterval:
    lo, hi, _ = _xbar_bracket()
    s_hi = _sign(hi, None)
    target = Fraction(1, 1 << k)
    while hi - lo > target:
        m = (lo + hi) / 2
        s = _sign(m, None)
        if s == 0:
            break
        if s == s_hi:
            hi = m
        else:
            lo = m
    return RInterval(lo, hi)


def xbar(precision=Fraction(1, 1 << 60), token: Optional[CancelToken] = None) -> RInterval:
    """Enclosure of the plateau knot xbar ~ 0.23393 of width <= ``precision``.

    Bisection always starts from the same certified bracket, so enclosures
    at finer precision are nested inside coarser ones.
    """
    precision = as_fraction(precision)
    _check(token)
    k = max(1, precision.denominator.bit_length() - precision.numerator.bit_length())
    while Fraction(1, 1 << k) > precision:
        k += 1
    return _xbar_cached(k)


def xbar_certificate() -> XbarCertificate:
    lo, hi, step = _xbar_bracket()
    return XbarCertificate(RInterval(lo, hi), step, RInterval(hi, Fraction(1, 2)))


def to_decimal(q: Fraction, digits: int = 17) -> str:
    """Decimal rendering for humans; exact values live in the fraction text."""
    return f"{float(q):.{digits}g}"
