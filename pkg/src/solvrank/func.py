"""Structural function expressions on [0,1] and their rigorous evaluation.

Families:

* ``BaseP``: p = x^2 sin(1/x) up to the knot xbar, constant on [xbar, 1-xbar],
  mirrored near 1 so that p(1-x) = p(x).
* ``BaseR``: a C^1 bump with r(1/2) = 1/2, flat at 0 and 1.  The default
  variant is also constant on [1/4, 23/50], which holds every [a_n, b_n].
* ``TreeSumCantor(T)``: p + 1/4 * sum_n (sum for T_n)[I_n] over the removed
  middle-third intervals I_n.
* ``TreeSumWestrick(T)``: r + sum_n (sum for T_n)[a_n, b_n].
* ``Scaled``, ``Sum``, ``SinSqExample`` (x^2 sin(1/x)) and ``Poly``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from .rigor import (
    CancelToken,
    RInterval,
    ZERO_IV,
    as_fraction,
    cos_point,
    sin_point,
    xbar,
)
from .tree import EMPTY, Empty, Node, TreeSchema, parse_tree, render_tree


class UnsupportedStructure(ValueError):
    """No rule applies to the given expression; never guessed around."""


class DomainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# expression types

@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class BaseP:
    pass


@dataclass(frozen=True)
class BaseR:
    variant: str = "plateau"

    def __post_init__(self):
        if self.variant not in R_VARIANTS:
            raise DomainError(f"unknown r variant {self.variant!r}")


@dataclass(frozen=True)
class SinSqExample:
    pass


@dataclass(frozen=True)
class Poly:
    """Polynomial with exact coefficients, ascending powers."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(as_fraction(c) for c in self.coeffs))


@dataclass(frozen=True)
class Scaled:
    a: Fraction
    b: Fraction
    factor: Fraction
    inner: "FuncExpr"

    def __post_init__(self):
        a, b = as_fraction(self.a), as_fraction(self.b)
        if not (0 <= a < b <= 1):
            raise DomainError(f"invalid scaling interval [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "factor", as_fraction(self.factor))


@dataclass(frozen=True)
class TreeSumCantor:
    tree: TreeSchema


@dataclass(frozen=True)
class TreeSumWestrick:
    tree: TreeSchema
    r: str = "plateau"

    def __post_init__(self):
        if self.r not in R_VARIANTS:
            raise DomainError(f"unknown r variant {self.r!r}")


@dataclass(frozen=True)
class Sum:
    terms: tuple["FuncExpr", ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


FuncExpr = Union[Zero, BaseP, BaseR, SinSqExample, Poly, Scaled, TreeSumCantor, TreeSumWestrick, Sum]


def scale(f: FuncExpr, a, b, factor=1) -> Scaled:
    """``factor * f[a,b]``: (b-a) f((x-a)/(b-a)) on [a,b], zero elsewhere."""
    return Scaled(as_fraction(a), as_fraction(b), as_fraction(factor), f)


# ---------------------------------------------------------------------------
# intervals of the two tree encodings

def cantor_interval(n: int) -> tuple[Fraction, Fraction]:
    """n-th removed middle third, breadth first and left to right."""
    if n < 0:
        raise DomainError("negative interval index")
    level = (n + 1).bit_length() - 1
    j = n + 1 - (1 << level)
    s = Fraction(0)
    for i in range(level):
        if (j >> (level - 1 - i)) & 1:
            s += Fraction(2, 3 ** (i + 1))
    w = Fraction(1, 3 ** (level + 1))
    return s + w, s + 2 * w


@dataclass(frozen=True)
class CantorLocation:
    """Where a rational point sits relative to the middle-thirds construction."""

    in_gap: bool
    level: int = 0
    index: int = 0
    u: Fraction = Fraction(0)


def cantor_locate(x) -> CantorLocation:
    """Exact: either the open gap I_n containing x (and (x-a)/(b-a)) or C."""
    x = as_fraction(x)
    if not 0 <= x <= 1:
        raise DomainError(f"{x} outside [0,1]")
    # w = num / q stays in [0,1] with a fixed denominator, so the walk is periodic
    num, q = x.numerator, x.denominator
    level, j = 0, 0
    seen = set()
    while num not in seen:
        seen.add(num)
        t = 3 * num
        if q < t < 2 * q:
            return CantorLocation(True, level, (1 << level) - 1 + j, Fraction(t - q, q))
        if t <= q:
            num, j = t, 2 * j
        else:
            num, j = t - 2 * q, 2 * j + 1
        level += 1
    return CantorLocation(False)


def cantor_endpoint(x) -> Optional[tuple[int, int]]:
    """(n, side) if x is an endpoint of I_n (side 0 left, 1 right), else None."""
    x = as_fraction(x)
    num, q = x.numerator, x.denominator
    level, j = 0, 0
    seen = set()
    while num not in seen:
        seen.add(num)
        t = 3 * num
        if t == q:
            return (1 << level) - 1 + j, 0
        if t == 2 * q:
            return (1 << level) - 1 + j, 1
        if q < t < 2 * q:
            return None
        if t < q:
            num, j = t, 2 * j
        else:
            num, j = t - 2 * q, 2 * j + 1
        level += 1
    return None


def in_cantor_set(x) -> bool:
    return not cantor_locate(x).in_gap


def westrick_interval(n: int) -> tuple[Fraction, Fraction]:
    if n < 0:
        raise DomainError("negative interval index")
    a = Fraction(1, 4) + Fraction(1, 5 * 4 ** n)
    return a, a + (a - Fraction(1, 4)) ** 2 / 4


def westrick_locate(x) -> Optional[tuple[int, Fraction]]:
    """(n, (x-a_n)/(b_n-a_n)) if x lies in some [a_n, b_n], else None."""
    x = as_fraction(x)
    if x <= Fraction(1, 4) or x > westrick_interval(0)[1]:
        return None
    # a_n - 1/4 = 4^-n / 5 <= x - 1/4
    d = x - Fraction(1, 4)
    guess = max(0, int(math.floor(math.log(1 / (5 * float(d)), 4))) if float(d) > 0 else 0)
    for n in (guess - 1, guess, guess + 1, guess + 2):
        if n < 0:
            continue
        a, b = westrick_interval(n)
        if a <= x <= b:
            return n, (x - a) / (b - a)
    return None


# ---------------------------------------------------------------------------
# the bump r

POLY10_COEFFS: tuple[Fraction, ...] = (
    Fraction(0), Fraction(0),
    Fraction(31955, 2048), Fraction(129973, 2048), Fraction(-3409127, 2048),
    Fraction(37127709, 4096), Fraction(-98280791, 4096), Fraction(584131083, 16384),
    Fraction(-31151119, 1024), Fraction(228695523, 16384), Fraction(-21909391, 8192),
)
QUARTIC_COEFFS: tuple[Fraction, ...] = tuple(Fraction(c) for c in (0, 0, 8, -16, 8))

def poly_value(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    out = Fraction(0)
    for c in reversed(coeffs):
        out = out * x + c
    return out


def poly_deriv(coeffs: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(i * c for i, c in enumerate(coeffs))[1:] or (Fraction(0),)


def poly_shift(coeffs: Sequence[Fraction], m: Fraction) -> list[Fraction]:
    """Coefficients of q(t) = poly(m + t) (exact Taylor shift)."""
    out = list(coeffs)
    n = len(out)
    for i in range(n - 1):
        for k in range(n - 2, i - 1, -1):
            out[k] += m * out[k + 1]
    return out


def poly_interval(coeffs: Sequence[Fraction], x: RInterval) -> RInterval:
    """Exact Taylor shift about the midpoint, then |t| <= radius termwise."""
    m = x.mid
    h = x.width / 2
    c = poly_shift(coeffs, m)
    rad = sum((abs(v) * h ** k for k, v in enumerate(c) if k), Fraction(0))
    return RInterval(c[0] - rad, c[0] + rad)


@lru_cache(maxsize=8)
def poly_sup_bound(coeffs: tuple[Fraction, ...], pieces: int = 512) -> Fraction:
    """Certified upper bound on max |poly| over [0,1] by subdivision."""
    best = Fraction(0)
    for i in range(pieces):
        iv = poly_interval(coeffs, RInterval(Fraction(i, pieces), Fraction(i + 1, pieces)))
        best = max(best, iv.mag)
    return best


@dataclass(frozen=True)
class PiecewisePoly:
    """Piece i is a polynomial in x (ascending coefficients) on [breaks[i], breaks[i+1]]."""

    breaks: tuple[Fraction, ...]
    pieces: tuple[tuple[Fraction, ...], ...]

    def piece_at(self, x: Fraction) -> int:
        for i in range(len(self.pieces)):
            if x <= self.breaks[i + 1]:
                return i
        return len(self.pieces) - 1

    def value(self, x: Fraction) -> Fraction:
        return poly_value(self.pieces[self.piece_at(x)], x)

    def deriv(self, x: Fraction) -> Fraction:
        return poly_value(poly_deriv(self.pieces[self.piece_at(x)]), x)

    def sup_bounds(self, pieces_per: int = 256) -> tuple[Fraction, Fraction]:
        """Certified (max |r|, max |r'|) by subdividing every piece."""
        vb = db = Fraction(0)
        for i, c in enumerate(self.pieces):
            lo, hi = self.breaks[i], self.breaks[i + 1]
            dc = poly_deriv(c)
            for k in range(pieces_per):
                iv = RInterval(lo + (hi - lo) * k / pieces_per, lo + (hi - lo) * (k + 1) / pieces_per)
                vb = max(vb, poly_interval(c, iv).mag)
                db = max(db, poly_interval(dc, iv).mag)
        return vb, db


def _integrate_slopes(knots: Sequence[tuple[Fraction, Fraction]]) -> PiecewisePoly:
    """r(0) = 0 and r' piecewise linear through ``knots`` (x, slope)."""
    breaks = [knots[0][0]]
    pieces = []
    value = Fraction(0)
    for (x0, m0), (x1, m1) in zip(knots, knots[1:]):
        k = (m1 - m0) / (x1 - x0)
        # r(x) = value + m0 t + k t^2 / 2 with t = x - x0
        local = [value, m0, k / 2]
        pieces.append(tuple(poly_shift(local, -x0)))
        value += m0 * (x1 - x0) + k * (x1 - x0) ** 2 / 2
        breaks.append(x1)
    return PiecewisePoly(tuple(breaks), tuple(pieces))


def _q(text: str) -> Fraction:
    return Fraction(text)


# r' is a trapezoid on [0,1/4] (up to 9/20), zero on [1/4, 23/50], a trapezoid on
# [23/50, 1/2] (up to 1/2) and a negative trapezoid on [1/2, 1] (back to 0).
PLATEAU_R = _integrate_slopes([
    (_q("0"), _q("0")), (_q("1/100"), _q("15/8")), (_q("6/25"), _q("15/8")),
    (_q("1/4"), _q("0")), (_q("23/50"), _q("0")), (_q("93/200"), _q("10/7")),
    (_q("99/200"), _q("10/7")), (_q("1/2"), _q("0")), (_q("11/20"), _q("-10/9")),
    (_q("19/20"), _q("-10/9")), (_q("1"), _q("0")),
])

R_VARIANTS: dict[str, PiecewisePoly] = {
    "plateau": PLATEAU_R,
    "quartic": PiecewisePoly((Fraction(0), Fraction(1)), (QUARTIC_COEFFS,)),
    "poly10": PiecewisePoly((Fraction(0), Fraction(1)), (POLY10_COEFFS,)),
}


@lru_cache(maxsize=None)
def r_norm_bounds(variant: str = "plateau") -> tuple[Fraction, Fraction]:
    return R_VARIANTS[variant].sup_bounds()


def r_value(x: Fraction, variant: str = "plateau") -> Fraction:
    return R_VARIANTS[variant].value(x)


def r_deriv(x: Fraction, variant: str = "plateau") -> Fraction:
    return R_VARIANTS[variant].deriv(x)


# ---------------------------------------------------------------------------
# p and x^2 sin(1/x)

_XBAR_PREC = Fraction(1, 1 << 100)


def _xb(eps: Fraction) -> RInterval:
    return xbar(min(_XBAR_PREC, eps / 1024))


def sinsq_point(x: Fraction, eps: Fraction) -> RInterval:
    """x^2 sin(1/x) for rational x (0 at 0), any sign."""
    if x == 0:
        return ZERO_IV
    return (x * x) * sin_point(1 / x, eps)


def sinsq_deriv_point(x: Fraction, eps: Fraction) -> RInterval:
    """2x sin(1/x) - cos(1/x); at 0 the derivative of x^2 sin(1/x) is 0."""
    if x == 0:
        return ZERO_IV
    u = 1 / x
    return 2 * x * sin_point(u, eps / 4) - cos_point(u, eps / 2)


def _sinsq_over(x: RInterval, eps: Fraction) -> RInterval:
    """x^2 sin(1/x) over a small interval bounded away from 0 (for the plateau)."""
    from .rigor import sin_enclosure

    return (x * x) * sin_enclosure(x.reciprocal(), eps)


@lru_cache(maxsize=16)
def _plateau_value(k: int) -> RInterval:
    xb = _xb(Fraction(1, 1 << k))
    return _sinsq_over(xb, Fraction(1, 1 << (k + 8)))


def p_plateau(eps: Fraction) -> RInterval:
    k = max(60, eps.denominator.bit_length() - eps.numerator.bit_length() + 8)
    return _plateau_value(k)


def p_point(x: Fraction, eps: Fraction) -> RInterval:
    if x > Fraction(1, 2):
        return p_point(1 - x, eps)
    xb = _xb(eps)
    if x < xb.lo:
        return sinsq_point(x, eps)
    plateau = p_plateau(eps)
    if x > xb.hi:
        return plateau
    return plateau.hull(sinsq_point(x, eps))


def p_deriv_point(x: Fraction, eps: Fraction) -> RInterval:
    if x > Fraction(1, 2):
        return -p_deriv_point(1 - x, eps)
    xb = _xb(eps)
    if x < xb.lo:
        return sinsq_deriv_point(x, eps)
    if x > xb.hi:
        return ZERO_IV
    return ZERO_IV.hull(sinsq_deriv_point(x, eps))


def p_norm_bounds() -> tuple[Fraction, Fraction]:
    """|p| <= xbar^2 and |p'| <= 2 xbar + 1."""
    xb = _xb(_XBAR_PREC)
    return xb.hi ** 2, 2 * xb.hi + 1


# ---------------------------------------------------------------------------
# lazily described subtrees: (schema, number of wraps)

@dataclass(frozen=True)
class SubTree:
    schema: TreeSchema
    wraps: int = 0

    @property
    def is_empty(self) -> bool:
        return self.wraps == 0 and isinstance(self.schema, Empty)

    def child(self, n: int) -> "SubTree":
        if self.wraps:
            return SubTree(self.schema, self.wraps - 1)
        t = self.schema
        if isinstance(t, Empty):
            raise DomainError("the empty tree has no subtrees")
        k = len(t.children)
        if n < k:
            return SubTree(t.children[n])
        if t.ladder:
            return SubTree(t.tail, n - k)
        return SubTree(t.tail)

    def materialize(self) -> TreeSchema:
        out = self.schema
        for _ in range(self.wraps):
            out = Node((), out)
        return out


# ---------------------------------------------------------------------------
# norm certificates

def _cantor_bounds(t: TreeSchema, pn: Fraction, pd: Fraction) -> tuple[Fraction, Fraction]:
    if isinstance(t, Empty):
        return Fraction(0), Fraction(0)
    # fixed point of N = |p| + N/12, D = |p'| + D/4 dominates every tree
    fix = (pn * 12 / 11, pd * 4 / 3)
    if t.ladder:
        kids = [fix]
    else:
        kids = [_cantor_bounds(c, pn, pd) for c in (*t.children, t.tail)]
    n = pn + max(k[0] for k in kids) / 12
    d = pd + max(k[1] for k in kids) / 4
    return min(n, fix[0]), min(d, fix[1])


@lru_cache(maxsize=None)
def r_flat_on_intervals(variant: str = "plateau") -> bool:
    """r' vanishes identically on [1/4, b_0], which holds every [a_n, b_n]."""
    r = R_VARIANTS[variant]
    if not isinstance(r, PiecewisePoly):
        return False
    lo, hi = Fraction(1, 4), westrick_interval(0)[1]
    for i, c in enumerate(r.pieces):
        a, b = r.breaks[i], r.breaks[i + 1]
        if b <= lo or a >= hi:
            continue
        if any(v != 0 for v in poly_deriv(c)):
            return False
    return True


def _westrick_bounds(t: TreeSchema, rn: Fraction, rd: Fraction, flat: bool) -> tuple[Fraction, Fraction]:
    if isinstance(t, Empty):
        return Fraction(0), Fraction(0)
    if t.ladder:
        raise UnsupportedStructure("the Westrick derivative is unbounded for ladder tails")
    kids = [_westrick_bounds(c, rn, rd, flat) for c in (*t.children, t.tail)]
    j0 = westrick_interval(0)
    w = j0[1] - j0[0]
    kd = max(k[1] for k in kids)
    # where r is flat on the intervals, the derivative comes from one level only
    return rn + w * max(k[0] for k in kids), max(rd, kd) if flat else rd + kd


def norm_certificates(f: FuncExpr) -> tuple[Fraction, Fraction]:
    """Certified (sup |f|, sup |f'|) bounds for the tree-sum families."""
    if isinstance(f, TreeSumCantor):
        pn, pd = p_norm_bounds()
        return _cantor_bounds(f.tree, pn, pd)
    if isinstance(f, TreeSumWestrick):
        rn, rd = r_norm_bounds(f.r)
        return _westrick_bounds(f.tree, rn, rd, r_flat_on_intervals(f.r))
    if isinstance(f, BaseP):
        return p_norm_bounds()
    if isinstance(f, BaseR):
        return r_norm_bounds(f.variant)
    if isinstance(f, Zero):
        return Fraction(0), Fraction(0)
    if isinstance(f, Scaled):
        n, d = norm_certificates(f.inner)
        c = abs(f.factor)
        return c * (f.b - f.a) * n, c * d
    raise UnsupportedStructure(f"no norm certificate for {type(f).__name__}")


# ---------------------------------------------------------------------------
# rigorous evaluation

def _tree_value(sub: SubTree, x: Fraction, eps: Fraction) -> RInterval:
    pn, _ = p_norm_bounds()
    bound = pn * 12 / 11
    acc = ZERO_IV
    s = Fraction(1)
    terms = 0
    while not sub.is_empty:
        acc = acc + s * p_point(x, eps / 64)
        terms += 1
        loc = cantor_locate(x)
        if not loc.in_gap:
            break
        child = sub.child(loc.index)
        if child.is_empty:
            break
        lo, hi = cantor_interval(loc.index)
        s = s * (hi - lo) / 4
        if 2 * s * bound <= eps / 4:
            acc = acc + RInterval(-s * bound, s * bound)
            break
        sub, x = child, loc.u
    return acc.round_out(_bits(eps))


def _tree_deriv(sub: SubTree, x: Fraction, eps: Fraction) -> RInterval:
    _, pd = p_norm_bounds()
    bound = pd * 4 / 3
    acc = ZERO_IV
    s = Fraction(1)
    while not sub.is_empty:
        acc = acc + s * p_deriv_point(x, eps / 256)
        loc = cantor_locate(x)
        if not loc.in_gap:
            break
        child = sub.child(loc.index)
        if child.is_empty:
            break
        s = s / 4
        if 2 * s * bound <= eps / 4:
            acc = acc + RInterval(-s * bound, s * bound)
            break
        sub, x = child, loc.u
    return acc.round_out(_bits(eps))


def _westrick_value(t: TreeSchema, x: Fraction, deriv: bool, variant: str = "plateau") -> Fraction:
    """Exact: Westrick sums and their derivatives are piecewise polynomial with rational data."""
    sub = SubTree(t)
    acc = Fraction(0)
    s = Fraction(1)
    r = R_VARIANTS[variant]
    while not sub.is_empty:
        acc += s * (r.deriv(x) if deriv else r.value(x))
        loc = westrick_locate(x)
        if loc is None:
            break
        n, u = loc
        child = sub.child(n)
        if child.is_empty:
            break
        if not deriv:
            a, b = westrick_interval(n)
            s = s * (b - a)
        sub, x = child, u
    return acc


def _bits(eps: Fraction) -> int:
    return max(64, eps.denominator.bit_length() - eps.numerator.bit_length() + 16)


def _eval(f: FuncExpr, x: Fraction, eps: Fraction, deriv: bool) -> RInterval:
    if isinstance(f, Zero):
        return ZERO_IV
    if isinstance(f, BaseP):
        return p_deriv_point(x, eps) if deriv else p_point(x, eps)
    if isinstance(f, BaseR):
        r = R_VARIANTS[f.variant]
        return RInterval.point(r.deriv(x) if deriv else r.value(x))
    if isinstance(f, Poly):
        c = poly_deriv(f.coeffs) if deriv else f.coeffs
        return RInterval.point(poly_value(c, x))
    if isinstance(f, SinSqExample):
        return sinsq_deriv_point(x, eps) if deriv else sinsq_point(x, eps)
    if isinstance(f, Scaled):
        if not f.a <= x <= f.b:
            return ZERO_IV
        w = f.b - f.a
        u = (x - f.a) / w
        if f.factor == 0:
            return ZERO_IV
        c = abs(f.factor) * (1 if deriv else w)
        inner = _eval(f.inner, u, eps / c, deriv)
        return f.factor * (inner if deriv else w * inner)
    if isinstance(f, Sum):
        if not f.terms:
            return ZERO_IV
        k = len(f.terms)
        out = ZERO_IV
        for t in f.terms:
            out = out + _eval(t, x, eps / k, deriv)
        return out
    if isinstance(f, TreeSumCantor):
        sub = SubTree(f.tree)
        return _tree_deriv(sub, x, eps) if deriv else _tree_value(sub, x, eps)
    if isinstance(f, TreeSumWestrick):
        return RInterval.point(_westrick_value(f.tree, x, deriv, f.r))
    raise UnsupportedStructure(f"cannot evaluate {type(f).__name__}")


def _eval_checked(f, x, eps, deriv, token):
    x, eps = as_fraction(x), as_fraction(eps)
    if not 0 <= x <= 1:
        raise DomainError(f"x = {x} outside [0,1]")
    if eps <= 0:
        raise DomainError("eps must be positive")
    target = eps
    for _ in range(8):
        if token is not None:
            token.check()
        out = _eval(f, x, target / 4, deriv)
        if out.width <= eps:
            return out
        target /= 1 << 16
    raise ArithmeticError(f"could not reach width {eps} at x = {x}")


def eval(f: FuncExpr, x, eps, token: Optional[CancelToken] = None) -> RInterval:  # noqa: A001
    """Enclosure of f(x) of width at most eps."""
    return _eval_checked(f, x, eps, False, token)


def eval_deriv(f: FuncExpr, x, eps, token: Optional[CancelToken] = None) -> RInterval:
    """Enclosure of f'(x) of width at most eps."""
    return _eval_checked(f, x, eps, True, token)


# ---------------------------------------------------------------------------
# float screening (not rigorous; used to pick candidates before certifying)

_XBAR_F = 0.23393004286481
_PLATEAU_F = _XBAR_F ** 2 * math.sin(1 / _XBAR_F)


def _sinsq_f(x: float) -> float:
    return 0.0 if x == 0 else x * x * math.sin(1 / x)


def _p_f(x: float) -> float:
    if x > 0.5:
        x = 1 - x
    return _sinsq_f(x) if x < _XBAR_F else _PLATEAU_F


def _poly_f(c, x):
    out = 0.0
    for v in reversed(c):
        out = out * x + v
    return out


def _cantor_locate_f(x: float, max_level: int = 40):
    lo, w = 0.0, 1.0
    j = 0
    for level in range(max_level):
        t = (x - lo) / w * 3
        if 1 < t < 2:
            return (1 << level) - 1 + j, t - 1, w / 3
        if t <= 1:
            j = 2 * j
        else:
            lo += 2 * w / 3
            j = 2 * j + 1
        w /= 3
    return None


def _eval_float_point(f: FuncExpr, x: float) -> float:
    if isinstance(f, Zero):
        return 0.0
    if isinstance(f, BaseP):
        return _p_f(x)
    if isinstance(f, BaseR):
        return float(r_value(Fraction(x), f.variant))
    if isinstance(f, Poly):
        return _poly_f([float(c) for c in f.coeffs], x)
    if isinstance(f, SinSqExample):
        return _sinsq_f(x)
    if isinstance(f, Scaled):
        a, b = float(f.a), float(f.b)
        if not a <= x <= b:
            return 0.0
        return float(f.factor) * (b - a) * _eval_float_point(f.inner, (x - a) / (b - a))
    if isinstance(f, Sum):
        return sum(_eval_float_point(t, x) for t in f.terms)
    if isinstance(f, TreeSumCantor):
        sub, acc, s = SubTree(f.tree), 0.0, 1.0
        while not sub.is_empty and s > 1e-18:
            acc += s * _p_f(x)
            loc = _cantor_locate_f(x)
            if loc is None:
                break
            n, u, width = loc
            sub = sub.child(n)
            s *= width / 4
            x = u
        return acc
    if isinstance(f, TreeSumWestrick):
        return float(_westrick_value(f.tree, Fraction(x), False, f.r))
    raise UnsupportedStructure(f"cannot evaluate {type(f).__name__}")


def _sinsq_d_f(x: float) -> float:
    return 0.0 if x == 0 else 2 * x * math.sin(1 / x) - math.cos(1 / x)


def _p_d_f(x: float) -> float:
    if x > 0.5:
        return -_p_d_f(1 - x)
    return _sinsq_d_f(x) if x < _XBAR_F else 0.0


def _eval_deriv_float_point(f: FuncExpr, x: float) -> float:
    if isinstance(f, Zero):
        return 0.0
    if isinstance(f, BaseP):
        return _p_d_f(x)
    if isinstance(f, BaseR):
        return float(r_deriv(Fraction(x), f.variant))
    if isinstance(f, Poly):
        return _poly_f([float(c) for c in poly_deriv(f.coeffs)], x)
    if isinstance(f, SinSqExample):
        return _sinsq_d_f(x)
    if isinstance(f, Scaled):
        a, b = float(f.a), float(f.b)
        if not a <= x <= b:
            return 0.0
        return float(f.factor) * _eval_deriv_float_point(f.inner, (x - a) / (b - a))
    if isinstance(f, Sum):
        return sum(_eval_deriv_float_point(t, x) for t in f.terms)
    if isinstance(f, TreeSumCantor):
        sub, acc, s = SubTree(f.tree), 0.0, 1.0
        while not sub.is_empty and s > 1e-18:
            acc += s * _p_d_f(x)
            loc = _cantor_locate_f(x)
            if loc is None:
                break
            n, u, _ = loc
            sub = sub.child(n)
            s /= 4
            x = u
        return acc
    if isinstance(f, TreeSumWestrick):
        return float(_westrick_value(f.tree, Fraction(x), True, f.r))
    raise UnsupportedStructure(f"cannot evaluate {type(f).__name__}")


def eval_deriv_float(f: FuncExpr, xs) -> np.ndarray:
    """Double-precision derivative values; a screening heuristic only."""
    arr = np.asarray(xs, dtype=float)
    flat = [_eval_deriv_float_point(f, float(v)) for v in arr.ravel()]
    return np.asarray(flat, dtype=float).reshape(arr.shape)


def eval_float(f: FuncExpr, xs) -> np.ndarray:
    """Vectorized double-precision values; a screening heuristic only."""
    arr = np.asarray(xs, dtype=float)
    if isinstance(f, Poly):
        return np.polynomial.polynomial.polyval(arr, [float(c) for c in f.coeffs])
    if isinstance(f, SinSqExample):
        safe = np.where(arr == 0, 1.0, arr)
        return np.where(arr == 0, 0.0, safe * safe * np.sin(1 / safe))
    flat = [_eval_float_point(f, float(v)) for v in arr.ravel()]
    return np.asarray(flat, dtype=float).reshape(arr.shape)


# ---------------------------------------------------------------------------
# JSON

def _q(v: Fraction) -> str:
    return str(v)


def func_to_json(f: FuncExpr):
    if isinstance(f, BaseR):
        return {"type": "BaseR", "variant": f.variant}
    if isinstance(f, (Zero, BaseP, SinSqExample)):
        return {"type": type(f).__name__}
    if isinstance(f, Poly):
        return {"type": "Poly", "coeffs": [_q(c) for c in f.coeffs]}
    if isinstance(f, Scaled):
        return {"type": "Scaled", "a": _q(f.a), "b": _q(f.b), "factor": _q(f.factor),
                "inner": func_to_json(f.inner)}
    if isinstance(f, TreeSumCantor):
        return {"type": "TreeSumCantor", "tree": render_tree(f.tree)}
    if isinstance(f, TreeSumWestrick):
        return {"type": "TreeSumWestrick", "tree": render_tree(f.tree), "r": f.r}
    if isinstance(f, Sum):
        return {"type": "Sum", "terms": [func_to_json(t) for t in f.terms]}
    raise UnsupportedStructure(f"cannot serialize {type(f).__name__}")


_SIMPLE = {"Zero": Zero, "BaseP": BaseP, "SinSqExample": SinSqExample}


def func_from_json(obj) -> FuncExpr:
    if not isinstance(obj, dict) or "type" not in obj:
        raise DomainError("function JSON must be an object with a 'type' field")
    kind = obj["type"]
    try:
        if kind in _SIMPLE:
            return _SIMPLE[kind]()
        if kind == "BaseR":
            return BaseR(obj.get("variant", "plateau"))
        if kind == "Poly":
            return Poly(tuple(Fraction(c) for c in obj["coeffs"]))
        if kind == "Scaled":
            return Scaled(Fraction(obj["a"]), Fraction(obj["b"]),
                          Fraction(obj.get("factor", "1")), func_from_json(obj["inner"]))
        if kind == "TreeSumCantor":
            return TreeSumCantor(parse_tree(obj["tree"]))
        if kind == "TreeSumWestrick":
            return TreeSumWestrick(parse_tree(obj["tree"]), obj.get("r", "plateau"))
        if kind == "Sum":
            return Sum(tuple(func_from_json(t) for t in obj["terms"]))
    except (KeyError, TypeError, ZeroDivisionError) as exc:
        raise DomainError(f"malformed {kind} JSON: {exc}") from exc
    raise UnsupportedStructure(f"unknown function type {kind!r}")


__all__ = [
    "Zero", "BaseP", "BaseR", "SinSqExample", "Poly", "Scaled", "TreeSumCantor",
    "TreeSumWestrick", "Sum", "FuncExpr", "scale", "cantor_interval", "cantor_locate",
    "in_cantor_set", "cantor_endpoint", "westrick_interval", "westrick_locate", "R_VARIANTS", "r_flat_on_intervals", "r_value", "r_deriv", "r_norm_bounds", "eval",
    "eval_deriv", "eval_float", "eval_deriv_float", "norm_certificates", "func_to_json", "func_from_json",
    "UnsupportedStructure", "DomainError", "SubTree", "EMPTY",
]
