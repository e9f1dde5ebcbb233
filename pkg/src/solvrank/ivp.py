"""Validated enclosures for a stratified discontinuous IVP (the Monkeys scheme).

A tuple (X, h, B, C, Y) at step i and layer beta is valid when

1. B is empty, or cl(B) meets layer beta and misses layer beta+1;
2. f restricted to layer beta maps cl(B) into C;
3. X and Y lie in B;
4. X + hC lies in Y;
5. the Y boxes of step i lie in the union of the X boxes of step i+1;

and the initial point lies in a step-0 X box.  Boxes are open with rational
endpoints; every inclusion is checked exactly.

The worked system is x' = 1, z' = 2x sin(1/x) - cos(1/x) (and (1, 0) on x = 0)
on E = [-5,5] x [-15,15], whose solution from (-3, 9 sin(-1/3)) at t = -2 is
x = t - 1, z = x^2 sin(1/x).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .func import sinsq_point
from .ordinal import Ordinal, render_ordinal
from .rigor import (
    CancelToken,
    RInterval,
    as_fraction,
    ceil_dyadic,
    cos_enclosure,
    cos_point,
    floor_dyadic,
    sin_enclosure,
    sin_point,
)

FORMAT_VERSION = 1
BITS = 64


class StepFailure(RuntimeError):
    def __init__(self, message: str, step: int):
        super().__init__(f"step {step}: {message}")
        self.step = step


class EmptyIntersection(ValueError):
    pass


# ---------------------------------------------------------------------------
# boxes

@dataclass(frozen=True)
class Box:
    """Open box; ``empty`` is the empty box."""

    lo: tuple[Fraction, ...]
    hi: tuple[Fraction, ...]
    empty: bool = False

    def __post_init__(self):
        lo = tuple(as_fraction(v) for v in self.lo)
        hi = tuple(as_fraction(v) for v in self.hi)
        if len(lo) != len(hi):
            raise ValueError("dimension mismatch")
        if not self.empty and any(a >= b for a, b in zip(lo, hi)):
            raise ValueError(f"degenerate open box {lo} {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def make_empty(cls, dim: int) -> "Box":
        return cls((Fraction(0),) * dim, (Fraction(0),) * dim, True)

    @classmethod
    def around(cls, closed: Sequence[RInterval], pad: Fraction) -> "Box":
        """Smallest dyadic open box strictly containing the closed intervals."""
        return cls(tuple(floor_dyadic(iv.lo - pad, BITS) for iv in closed),
                   tuple(ceil_dyadic(iv.hi + pad, BITS) for iv in closed))

    @property
    def dim(self) -> int:
        return len(self.lo)

    def closure(self) -> tuple[RInterval, ...]:
        return tuple(RInterval(a, b) for a, b in zip(self.lo, self.hi))

    def widths(self) -> tuple[Fraction, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    def subset_of(self, other: "Box") -> bool:
        """Open-box inclusion: equivalent to componentwise endpoint inequalities."""
        if self.empty:
            return True
        if other.empty:
            return False
        return all(o_lo <= s_lo and s_hi <= o_hi
                   for s_lo, s_hi, o_lo, o_hi in zip(self.lo, self.hi, other.lo, other.hi))

    def contains_point(self, pt: Sequence) -> bool:
        return not self.empty and all(a < as_fraction(v) < b for v, a, b in zip(pt, self.lo, self.hi))

    def contains_closed(self, ivs: Sequence[RInterval]) -> bool:
        return not self.empty and all(a < iv.lo and iv.hi < b for iv, a, b in zip(ivs, self.lo, self.hi))

    def hull(self, other: "Box") -> "Box":
        if self.empty:
            return other
        if other.empty:
            return self
        return Box(tuple(map(min, self.lo, other.lo)), tuple(map(max, self.hi, other.hi)))

    def inflate(self, factor: Fraction) -> "Box":
        lo, hi = [], []
        for a, b in zip(self.lo, self.hi):
            c, r = (a + b) / 2, (b - a) / 2 * factor
            lo.append(floor_dyadic(c - r, BITS))
            hi.append(ceil_dyadic(c + r, BITS))
        return Box(tuple(lo), tuple(hi))

    def minkowski(self, h: Fraction, c: "Box") -> "Box":
        """X + hC, exact."""
        return Box(tuple(a + h * ca for a, ca in zip(self.lo, c.lo)),
                   tuple(b + h * cb for b, cb in zip(self.hi, c.hi)))

    def round_out(self) -> "Box":
        return Box(tuple(floor_dyadic(a, BITS) for a in self.lo),
                   tuple(ceil_dyadic(b, BITS) for b in self.hi))

    def to_json(self):
        if self.empty:
            return None
        return {"lo": [str(v) for v in self.lo], "hi": [str(v) for v in self.hi]}

    @classmethod
    def from_json(cls, obj, dim: int = 2) -> "Box":
        if obj is None:
            return cls.make_empty(dim)
        return cls(tuple(Fraction(v) for v in obj["lo"]), tuple(Fraction(v) for v in obj["hi"]))


@dataclass(frozen=True)
class MonkeyTuple:
    X: Box
    h: Fraction
    B: Box
    C: Box
    Y: Box
    i: int
    beta: Ordinal
    j: int = 0

    def __post_init__(self):
        if as_fraction(self.h) <= 0:
            raise ValueError("h must be a positive rational")

    def to_json(self):
        return {"i": self.i, "beta": render_ordinal(self.beta), "j": self.j, "h": str(self.h),
                "X": self.X.to_json(), "B": self.B.to_json(), "C": self.C.to_json(), "Y": self.Y.to_json()}


# ---------------------------------------------------------------------------
# the stratified right-hand side

@dataclass(frozen=True)
class StratifiedRHS:
    """Right-hand term on the closed box ``domain`` with layers E_0 ⊇ E_1 ⊇ ...

    ``meets(beta, closed_box)`` decides whether cl(B) meets layer beta and
    ``enclose(beta, closed_box)`` encloses f over that intersection.
    """

    domain: tuple[RInterval, ...]
    meets: Callable[[int, tuple[RInterval, ...]], bool]
    enclose: Callable[[int, tuple[RInterval, ...]], tuple[RInterval, ...]]
    point_value: Callable[[Sequence[Fraction]], tuple]
    layers: int
    name: str = ""

    def layer_of(self, closed: tuple[RInterval, ...]) -> int:
        """Largest beta whose layer meets cl(B)."""
        beta = -1
        for b in range(self.layers):
            if self.meets(b, closed):
                beta = b
        return beta


_E1 = (RInterval(Fraction(-5), Fraction(5)), RInterval(Fraction(-15), Fraction(15)))
RANGE_EPS = Fraction(1, 1 << 48)


def g_enclosure(x: RInterval) -> RInterval:
    """2x sin(1/x) - cos(1/x) over an interval; |g| <= 1 + 2|x| when 0 is inside."""
    if x.lo <= 0 <= x.hi:
        m = 1 + 2 * x.mag
        return RInterval(-m, m)
    u = x.reciprocal()
    out = 2 * x * sin_enclosure(u, RANGE_EPS) - cos_enclosure(u, RANGE_EPS)
    return out.round_out(BITS)


def _ex1_meets(beta: int, c: tuple[RInterval, ...]) -> bool:
    inside = all(a.intersects(d) for a, d in zip(c, _E1))
    if beta == 0:
        return inside
    if beta == 1:
        return inside and c[0].lo <= 0 <= c[0].hi
    return False


def _ex1_enclose(beta: int, c: tuple[RInterval, ...]) -> tuple[RInterval, ...]:
    if not _ex1_meets(beta, c):
        raise EmptyIntersection(f"cl(B) does not meet layer {beta}")
    if beta == 1:
        return (RInterval.point(1), RInterval.point(0))
    x = RInterval(max(c[0].lo, _E1[0].lo), min(c[0].hi, _E1[0].hi))
    g = g_enclosure(x)
    if x.lo <= 0 <= x.hi:
        g = g.hull(RInterval.point(0))
    return (RInterval.point(1), g)


def _ex1_point(pt):
    x = as_fraction(pt[0])
    if x == 0:
        return (Fraction(1), Fraction(0))
    u = 1 / x
    return (Fraction(1), 2 * x * sin_point(u, RANGE_EPS) - cos_point(u, RANGE_EPS))


def example1_rhs() -> StratifiedRHS:
    return StratifiedRHS(_E1, _ex1_meets, _ex1_enclose, _ex1_point, layers=2, name="example1")


def range_enclosure(rhs: StratifiedRHS, beta: int | Ordinal, B: Box) -> Box:
    """Open box C with f restricted to layer beta mapping cl(B) into C."""
    beta = int(beta)
    ivs = rhs.enclose(beta, B.closure())
    return Box.around(ivs, RANGE_EPS)


def example1_solution(t) -> tuple[Fraction, RInterval]:
    """(x(t), enclosure of z(t)) for the closed-form solution."""
    x = as_fraction(t) - 1
    return x, sinsq_point(x, Fraction(1, 1 << 60))


def example1_y0() -> tuple[Fraction, RInterval]:
    return example1_solution(Fraction(-2))


# ---------------------------------------------------------------------------
# validation

@dataclass
class ValidationReport:
    ok: bool
    initial: bool
    conditions: dict = field(default_factory=lambda: {k: True for k in range(1, 6)})
    first_failure: Optional[str] = None
    checked: int = 0

    def fail(self, cond: int, msg: str):
        if self.conditions.get(cond, True):
            self.conditions[cond] = False
        if self.first_failure is None:
            self.first_failure = f"condition {cond}: {msg}"
        self.ok = False

    def to_json(self):
        return {"ok": self.ok, "initial": self.initial,
                "conditions": {str(k): v for k, v in self.conditions.items()},
                "first_failure": self.first_failure, "checked": self.checked}


def validate_tuples(rhs: StratifiedRHS, y0: Sequence, tuples: Sequence[MonkeyTuple],
                    alpha: int | Ordinal = 2, token: Optional[CancelToken] = None) -> ValidationReport:
    """Check the five conditions plus the initial condition, exactly.

    ``y0`` entries may be rationals or closed intervals enclosing them.
    """
    alpha = int(alpha)
    steps: dict[int, list[MonkeyTuple]] = {}
    for tp in tuples:
        steps.setdefault(tp.i, []).append(tp)
    y0_iv = [v if isinstance(v, RInterval) else RInterval.point(v) for v in y0]
    first = min(steps) if steps else 0
    initial = any(tp.X.contains_closed(y0_iv) for tp in steps.get(first, []))
    rep = ValidationReport(ok=initial, initial=initial)
    if not initial:
        rep.first_failure = "initial point not in any step-0 X box"
    for i in sorted(steps):
        if token is not None:
            token.check()
        for tp in steps[i]:
            rep.checked += 1
            beta = int(tp.beta)
            tag = f"(i={tp.i}, beta={beta}, j={tp.j})"
            if beta >= alpha:
                rep.fail(1, f"{tag} layer beyond alpha")
                continue
            if not tp.B.empty:
                cl = tp.B.closure()
                if not (rhs.meets(beta, cl) and not rhs.meets(beta + 1, cl)):
                    rep.fail(1, f"{tag} cl(B) must meet layer beta and miss layer beta+1")
                else:
                    image = rhs.enclose(beta, cl)
                    if not tp.C.contains_closed(image):
                        rep.fail(2, f"{tag} f(cl B) not inside C")
            if not (tp.X.subset_of(tp.B) and tp.Y.subset_of(tp.B)):
                rep.fail(3, f"{tag} X or Y not inside B")
            if not tp.X.minkowski(tp.h, tp.C).subset_of(tp.Y):
                rep.fail(4, f"{tag} X + hC not inside Y")
        nxt = steps.get(i + 1)
        if nxt is not None:
            for tp in steps[i]:
                if not any(tp.Y.subset_of(q.X) for q in nxt):
                    rep.fail(5, f"(i={i}) Y not inside the next X cover")
    return rep


# ---------------------------------------------------------------------------
# construction

@dataclass
class Enclosure:
    tuples: list[MonkeyTuple]
    times: list[Fraction]
    covers: list[Box]

    def max_width(self) -> Fraction:
        return max(max(b.widths()) for b in self.covers)

    def final_width(self) -> Fraction:
        return max(self.covers[-1].widths())

    def to_json(self):
        return {"format_version": FORMAT_VERSION,
                "tuples": [t.to_json() for t in self.tuples],
                "covers": [{"t": str(t), "box": b.to_json()} for t, b in zip(self.times, self.covers)]}

    def covers_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["format_version", "t", "x_lo", "x_hi", "z_lo", "z_hi"])
        for t, b in zip(self.times, self.covers):
            w.writerow([FORMAT_VERSION, f"{float(t):.12g}", f"{float(b.lo[0]):.17g}",
                        f"{float(b.hi[0]):.17g}", f"{float(b.lo[1]):.17g}", f"{float(b.hi[1]):.17g}"])
        return buf.getvalue()


def _step_tuple(rhs, X: Box, h: Fraction, beta: int, inflation: Fraction, i: int,
                extra: Optional[Box] = None) -> Optional[MonkeyTuple]:
    """Inflate B until X u Y fits; None if that never settles."""
    guess = X.inflate(inflation)
    C = extra if extra is not None else range_enclosure(rhs, beta, guess)
    B = X.hull(X.minkowski(h, C)).inflate(inflation)
    for _ in range(12):
        cl = B.closure()
        if not rhs.meets(beta, cl) or rhs.meets(beta + 1, cl):
            return None
        if not all(d.contains(iv) for iv, d in zip(cl, rhs.domain)):
            return None
        C = extra if extra is not None else range_enclosure(rhs, beta, B)
        Y = X.minkowski(h, C).round_out()
        if X.subset_of(B) and Y.subset_of(B):
            return MonkeyTuple(X, h, B, C, Y, i, Ordinal.of(beta))
        B = X.hull(Y).inflate(inflation)
    return None


def construct_enclosure(rhs: StratifiedRHS, y0: Sequence, t_span: tuple, h,
                        inflation=Fraction(11, 10), crossing: Fraction = Fraction(1, 32),
                        rate: int = 8, max_halvings: int = 12,
                        token: Optional[CancelToken] = None) -> Enclosure:
    """Interval Euler with inflation, switching to a layer-1 tuple across x = 0.

    Each step uses h * 2^-k with the least k for which the z-range width of C
    stays below ``rate * h``.  Steps land exactly on x = -crossing and the end of
    the span.  The crossing tuple covers [-crossing, crossing]; its C adds an
    oscillation margin ``crossing`` in z from the envelope |z| <= x^2.
    """
    h = as_fraction(h)
    inflation = as_fraction(inflation)
    t0, t1 = (as_fraction(v) for v in t_span)
    if h <= 0 or inflation <= 1:
        raise ValueError("need h > 0 and inflation > 1")
    y0_iv = [v if isinstance(v, RInterval) else RInterval.point(v) for v in y0]
    X = Box.around(y0_iv, Fraction(1, 1 << 50))
    tuples: list[MonkeyTuple] = []
    times, covers = [t0], [X]
    t = t0
    x_nominal = y0_iv[0].mid
    i = 0
    k_prev = 0
    while t < t1:
        if token is not None:
            token.check()
        remaining = t1 - t
        if x_nominal == -crossing and remaining >= 2 * crossing:
            hc = 2 * crossing
            eta = Fraction(1, 1 << 40)
            C = Box((1 - eta, -crossing * (1 + Fraction(1, 16))), (1 + eta, crossing * (1 + Fraction(1, 16))))
            tp = _step_tuple(rhs, X, hc, 1, inflation, i, extra=C)
            if tp is None:
                raise StepFailure("no valid crossing tuple", i)
            step = hc
        else:
            cap = remaining
            if x_nominal < -crossing:
                cap = min(cap, -crossing - x_nominal)
            tp = None
            k = max(0, k_prev - 1)
            while k <= max_halvings:
                step = min(h / (1 << k), cap)
                cand = _step_tuple(rhs, X, step, 0, inflation, i)
                if cand is not None:
                    tp = cand
                    zw = cand.C.hi[1] - cand.C.lo[1]
                    if zw <= rate * h or step < h / (1 << k):
                        break
                k += 1
            if tp is None:
                raise StepFailure(f"no valid layer-0 tuple at t = {t}", i)
            k_prev = min(k, max_halvings)
            step = tp.h
        tuples.append(tp)
        X = tp.Y
        t += step
        x_nominal += step
        i += 1
        times.append(t)
        covers.append(X)
    return Enclosure(tuples, times, covers)


def example1_enclosure(h=Fraction(1, 1024), inflation=Fraction(11, 10),
                       t_span=(Fraction(-2), Fraction(2)), token=None) -> Enclosure:
    x0, z0 = example1_solution(t_span[0])
    return construct_enclosure(example1_rhs(), (RInterval.point(x0), z0), t_span, h, inflation,
                               token=token)


def containment_check(enc: Enclosure) -> tuple[bool, Optional[Fraction]]:
    """Does every cover contain the closed-form solution at its time?"""
    for t, box in zip(enc.times, enc.covers):
        x, z = example1_solution(t)
        if not box.contains_closed((RInterval.point(x), z)):
            return False, t
    return True, None


__all__ = [
    "Box", "MonkeyTuple", "StratifiedRHS", "ValidationReport", "Enclosure", "StepFailure",
    "EmptyIntersection", "example1_rhs", "range_enclosure", "validate_tuples",
    "construct_enclosure", "example1_enclosure", "example1_solution", "example1_y0",
    "containment_check", "g_enclosure",
]
