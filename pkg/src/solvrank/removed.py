"""Removed-set sequences and the solvable rank for the structural families.

For a differentiable y the stages are E_0 = [0,1], E_{a+1} = the points of
E_a where y' restricted to E_a is discontinuous, and intersections at limits.
The rules below are structural.  Each tree node gets threshold ordinals:

* Cantor tree sums: C lies in E_g for g <= g*, {0,1} for g <= g*+1, and
  inside a gap I_n the stage is an affine copy of the child's stage.  g* is
  the first stage where the tail subtree's stage carries no nonzero value of
  its derivative.
* Westrick tree sums: the same shape with {1/4} in place of C.

Anything outside these rules raises :class:`UnsupportedStructure`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from .func import (
    BaseP,
    BaseR,
    FuncExpr,
    Poly,
    Scaled,
    SinSqExample,
    SubTree,
    Sum,
    TreeSumCantor,
    TreeSumWestrick,
    UnsupportedStructure,
    Zero,
    _westrick_value,
    cantor_endpoint,
    cantor_interval,
    cantor_locate,
    eval_deriv,
    eval_deriv_float,
    func_to_json,
    in_cantor_set,
    poly_deriv,
    poly_value,
    r_flat_on_intervals,
    westrick_interval,
    westrick_locate,
    xbar,
)
from .ordinal import OMEGA, ZERO, Ordinal, omax, parse_ordinal, render_ordinal
from .rigor import as_fraction
from .tree import LEAF, Empty, TreeSchema, render_tree

FORMAT_VERSION = 1
DEFAULT_CAP = Ordinal.omega(1, 10)
ONE_QUARTER = Fraction(1, 4)


class CapExceeded(RuntimeError):
    pass


def ordinal_cap() -> Ordinal:
    """``SOLVRANK_ORDINAL_CAP`` (CNF text) or w*10."""
    text = os.environ.get("SOLVRANK_ORDINAL_CAP")
    return parse_ordinal(text) if text else DEFAULT_CAP


# ---------------------------------------------------------------------------
# symbolic sets

class SymbolicSet:
    def contains(self, x) -> bool:
        raise NotImplementedError

    @property
    def is_empty(self) -> bool:
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError

    def __contains__(self, x):
        return self.contains(x)


@dataclass(frozen=True)
class EmptySet(SymbolicSet):
    def contains(self, x) -> bool:
        return False

    @property
    def is_empty(self) -> bool:
        return True

    def to_json(self):
        return {"kind": "Empty"}


@dataclass(frozen=True)
class Segment(SymbolicSet):
    a: Fraction
    b: Fraction

    def contains(self, x) -> bool:
        return self.a <= as_fraction(x) <= self.b

    @property
    def is_empty(self) -> bool:
        return False

    def to_json(self):
        return {"kind": "Segment", "a": str(self.a), "b": str(self.b)}


@dataclass(frozen=True)
class Points(SymbolicSet):
    points: frozenset

    def contains(self, x) -> bool:
        return as_fraction(x) in self.points

    @property
    def is_empty(self) -> bool:
        return not self.points

    def to_json(self):
        return {"kind": "Points", "points": [str(p) for p in sorted(self.points)]}


@dataclass(frozen=True)
class CantorSet(SymbolicSet):
    """Affine image of the middle-thirds Cantor set onto [a, b]."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(1)

    def contains(self, x) -> bool:
        x = as_fraction(x)
        if not self.a <= x <= self.b:
            return False
        return in_cantor_set((x - self.a) / (self.b - self.a))

    @property
    def is_empty(self) -> bool:
        return False

    def to_json(self):
        return {"kind": "CantorSet", "a": str(self.a), "b": str(self.b)}


@dataclass(frozen=True)
class Union(SymbolicSet):
    parts: tuple[SymbolicSet, ...]

    def contains(self, x) -> bool:
        return any(p.contains(x) for p in self.parts)

    @property
    def is_empty(self) -> bool:
        return all(p.is_empty for p in self.parts)

    def to_json(self):
        return {"kind": "Union", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True)
class ScaledCopy(SymbolicSet):
    a: Fraction
    b: Fraction
    inner: SymbolicSet

    def contains(self, x) -> bool:
        x = as_fraction(x)
        if not self.a <= x <= self.b:
            return False
        return self.inner.contains((x - self.a) / (self.b - self.a))

    @property
    def is_empty(self) -> bool:
        return self.inner.is_empty

    def to_json(self):
        return {"kind": "ScaledCopy", "a": str(self.a), "b": str(self.b), "inner": self.inner.to_json()}


def make_union(parts: Iterable[SymbolicSet]) -> SymbolicSet:
    kept = tuple(p for p in parts if not p.is_empty)
    if not kept:
        return EmptySet()
    if len(kept) == 1:
        return kept[0]
    return Union(kept)


# ---------------------------------------------------------------------------
# Cantor encoding: thresholds

@dataclass(frozen=True)
class NodeInfo:
    """sv: solvable rank; gstar: last stage holding the whole C (or 1/4)."""

    sv: Ordinal
    gstar: Optional[Ordinal]
    last_nz: bool


EMPTY_INFO = NodeInfo(Ordinal.of(1), None, False)


def _bump(o: Ordinal, flag: bool) -> Ordinal:
    return o + 1 if flag else o


@lru_cache(maxsize=1 << 16)
def cantor_info(sub: SubTree) -> NodeInfo:
    if sub.is_empty:
        return EMPTY_INFO
    if sub.wraps:
        base = _cantor_schema_info(sub.schema)
        s1 = _bump(base.sv + 1, base.last_nz)
        sv = s1 + (sub.wraps - 1)
        return NodeInfo(sv, sv.predecessor().predecessor(), False)
    return _cantor_schema_info(sub.schema)


@lru_cache(maxsize=None)
def _cantor_schema_info(t: TreeSchema) -> NodeInfo:
    if isinstance(t, Empty):
        return EMPTY_INFO
    if t.ladder:
        gstar = _cantor_schema_info(t.tail).sv + OMEGA
        kid_svs = [_cantor_schema_info(c).sv for c in t.children]
    elif isinstance(t.tail, Empty):
        gstar = ZERO
        kid_svs = [_cantor_schema_info(c).sv for c in t.children]
    else:
        s = _cantor_schema_info(t.tail)
        gstar = _bump(s.sv.predecessor(), s.last_nz)
        kid_svs = [_cantor_schema_info(c).sv for c in t.children] + [s.sv]
    sv = omax([gstar + 2, *kid_svs])
    return NodeInfo(sv, gstar, _cantor_last_nz(t, sv, gstar))


def _cantor_last_points(t: TreeSchema) -> list[Fraction]:
    info = _cantor_schema_info(t)
    pts = []
    if info.gstar + 2 == info.sv:
        pts += [Fraction(0), Fraction(1)]
    for n, c in enumerate(t.children):
        if not isinstance(c, Empty) and _cantor_schema_info(c).sv == info.sv:
            a, b = cantor_interval(n)
            pts += [a + (b - a) * q for q in _cantor_last_points(c)]
    return pts


def _certified_zero_chain(t: TreeSchema, x: Fraction) -> bool:
    """True if every p' term of the tree-sum derivative at x is exactly zero (plateau or 0/1)."""
    xb = xbar()
    sub = SubTree(t)
    while not sub.is_empty:
        if x not in (0, 1) and not (xb.hi < x < 1 - xb.hi):
            return False
        loc = cantor_locate(x)
        if not loc.in_gap:
            return True
        sub = sub.child(loc.index)
        x = loc.u
    return True


def _cantor_last_nz(t: TreeSchema, sv: Ordinal, gstar: Ordinal) -> bool:
    pts = []
    if gstar + 2 == sv:
        pts += [Fraction(0), Fraction(1)]
    for n, c in enumerate(t.children):
        if not isinstance(c, Empty) and _cantor_schema_info(c).sv == sv:
            a, b = cantor_interval(n)
            pts += [a + (b - a) * q for q in _cantor_last_points(c)]
    f = TreeSumCantor(t)
    for x in pts:
        if _certified_zero_chain(t, x):
            continue
        d = eval_deriv(f, x, Fraction(1, 1 << 40))
        if d.excludes_zero():
            return True
        raise UnsupportedStructure(
            f"cannot decide the sign of the tree-sum derivative at {x} for T = {render_tree(t)}"
        )
    return False


def _finite_gap(a: Ordinal, b: Ordinal) -> Optional[int]:
    """b - a when b = a + k for a natural k, else None."""
    if b < a:
        return None
    ha = [t for t in a.terms if t[0] > 0]
    hb = [t for t in b.terms if t[0] > 0]
    if ha != hb:
        return None
    fa = a.terms[-1][1] if a.terms and a.terms[-1][0] == 0 else 0
    fb = b.terms[-1][1] if b.terms and b.terms[-1][0] == 0 else 0
    return fb - fa


def cantor_stage_member(sub: SubTree, gamma: Ordinal, x) -> bool:
    """Exact membership of the rational x in stage gamma of the Cantor tree sum."""
    x = as_fraction(x)
    history: dict[Fraction, int] = {}
    while True:
        if gamma.is_zero:
            return True
        if sub.is_empty:
            return False
        info = cantor_info(sub)
        if gamma >= info.sv:
            return False
        loc = cantor_locate(x)
        if not loc.in_gap:
            if gamma <= info.gstar:
                return True
            if x in (0, 1) and gamma <= info.gstar + 1:
                return True
            end = cantor_endpoint(x)
            if end is None:
                return False
            n, side = end
            sub, x = sub.child(n), Fraction(side)
            history.clear()
            continue
        if sub.wraps > 1 and gamma <= info.gstar:
            # inside a ladder; a repeated point means the chain never meets C
            if x in history:
                period = history[x] - sub.wraps
                g1 = cantor_info(SubTree(sub.schema, 1)).gstar
                k = _finite_gap(g1, gamma)
                j0 = 1 if gamma <= g1 else (1 + k if k is not None else None)
                if j0 is not None and period > 0 and sub.wraps - period >= j0:
                    jump = ((sub.wraps - j0) // period) * period
                    sub = SubTree(sub.schema, sub.wraps - jump)
                    history.clear()
                    continue
            history[x] = sub.wraps
        sub, x = sub.child(loc.index), loc.u


# ---------------------------------------------------------------------------
# Westrick encoding: thresholds

@lru_cache(maxsize=None)
def westrick_info(t: TreeSchema, variant: str = "plateau") -> NodeInfo:
    if isinstance(t, Empty):
        return EMPTY_INFO
    if t.ladder:
        raise UnsupportedStructure("ladder tails are not supported for Westrick sums (the derivative is unbounded)")
    if isinstance(t.tail, Empty):
        gstar = ZERO
        kid_svs = [westrick_info(c, variant).sv for c in t.children]
    else:
        s = westrick_info(t.tail, variant)
        gstar = _bump(s.sv.predecessor(), s.last_nz)
        kid_svs = [westrick_info(c, variant).sv for c in t.children] + [s.sv]
    sv = omax([gstar + 1, *kid_svs])
    if sv == 1:
        # last stage is [0,1] itself and the derivative r' + ... is not identically 0
        return NodeInfo(sv, gstar, True)
    pts, family = _westrick_last(t, variant, sv, gstar)
    vals = [_westrick_value(t, x, True, variant) for x in pts]
    if any(v != 0 for v in vals):
        return NodeInfo(sv, gstar, True)
    if family and not r_flat_on_intervals(variant):
        raise UnsupportedStructure(
            f"cannot decide the last stage of the Westrick sum for T = {render_tree(t)}"
        )
    return NodeInfo(sv, gstar, False)


def _westrick_last(t: TreeSchema, variant: str, sv: Ordinal, gstar: Ordinal,
                   samples: int = 6) -> tuple[list[Fraction], bool]:
    """Sample of the last nonempty stage, and whether it has infinitely many points."""
    pts: list[Fraction] = []
    family = False
    if gstar + 1 == sv and not gstar.is_zero:
        pts.append(ONE_QUARTER)
    kids = list(enumerate(t.children))
    if not isinstance(t.tail, Empty) and westrick_info(t.tail, variant).sv == sv:
        family = True
        k = len(t.children)
        kids += [(k + i, t.tail) for i in range(samples)]
    for n, c in kids:
        if isinstance(c, Empty):
            continue
        ci = westrick_info(c, variant)
        if ci.sv != sv:
            continue
        cp, cf = _westrick_last(c, variant, ci.sv, ci.gstar, samples)
        a, b = westrick_interval(n)
        pts += [a + (b - a) * q for q in cp]
        family = family or cf
    return pts, family


def westrick_stage_member(t: TreeSchema, gamma: Ordinal, x, variant: str = "plateau") -> bool:
    x = as_fraction(x)
    sub = SubTree(t)
    while True:
        if gamma.is_zero:
            return True
        if sub.is_empty:
            return False
        info = westrick_info(sub.materialize(), variant)
        if gamma >= info.sv:
            return False
        if x == ONE_QUARTER:
            return gamma <= info.gstar
        loc = westrick_locate(x)
        if loc is None:
            return False
        n, u = loc
        sub, x = sub.child(n), u


# ---------------------------------------------------------------------------
# lazy stage sets for the tree families

@dataclass(frozen=True)
class CantorTreeStage(SymbolicSet):
    tree: TreeSchema
    index: Ordinal

    def contains(self, x) -> bool:
        return cantor_stage_member(SubTree(self.tree), self.index, x)

    @property
    def is_empty(self) -> bool:
        return self.index >= cantor_info(SubTree(self.tree)).sv

    def to_json(self):
        out = {"kind": "CantorTreeStage", "tree": render_tree(self.tree),
               "index": render_ordinal(self.index)}
        if not self.is_empty and not self.index.is_zero:
            info = cantor_info(SubTree(self.tree))
            parts = []
            if self.index <= info.gstar:
                parts.append(CantorSet().to_json())
            elif self.index <= info.gstar + 1:
                parts.append(Points(frozenset({Fraction(0), Fraction(1)})).to_json())
            for n, c in enumerate(self.tree.children):
                st = CantorTreeStage(c, self.index)
                if not st.is_empty:
                    a, b = cantor_interval(n)
                    parts.append(ScaledCopy(a, b, st).to_json())
            if not isinstance(self.tree.tail, Empty):
                parts.append({"kind": "GapCopies", "from": len(self.tree.children),
                              "tail": render_tree(self.tree.tail), "ladder": self.tree.ladder})
            out["structure"] = parts
        return out


@dataclass(frozen=True)
class WestrickTreeStage(SymbolicSet):
    tree: TreeSchema
    index: Ordinal
    variant: str = "plateau"

    def contains(self, x) -> bool:
        return westrick_stage_member(self.tree, self.index, x, self.variant)

    @property
    def is_empty(self) -> bool:
        return self.index >= westrick_info(self.tree, self.variant).sv

    def to_json(self):
        out = {"kind": "WestrickTreeStage", "tree": render_tree(self.tree),
               "index": render_ordinal(self.index), "r": self.variant}
        if not self.is_empty and not self.index.is_zero:
            info = westrick_info(self.tree, self.variant)
            parts = []
            if self.index <= info.gstar:
                parts.append(Points(frozenset({ONE_QUARTER})).to_json())
            for n, c in enumerate(self.tree.children):
                st = WestrickTreeStage(c, self.index, self.variant)
                if not st.is_empty:
                    a, b = westrick_interval(n)
                    parts.append(ScaledCopy(a, b, st).to_json())
            if not isinstance(self.tree.tail, Empty):
                parts.append({"kind": "IntervalCopies", "from": len(self.tree.children),
                              "tail": render_tree(self.tree.tail)})
            out["structure"] = parts
        return out


# ---------------------------------------------------------------------------
# family dispatch

FULL = Segment(Fraction(0), Fraction(1))


def _flat_ends(f: FuncExpr) -> bool:
    """f(0) = f(1) = f'(0) = f'(1) = 0, decided structurally."""
    if isinstance(f, (Zero, BaseP, BaseR, TreeSumCantor, TreeSumWestrick)):
        return True
    if isinstance(f, Poly):
        d = poly_deriv(f.coeffs)
        return all(poly_value(c, x) == 0 for c in (f.coeffs, d) for x in (Fraction(0), Fraction(1)))
    if isinstance(f, Scaled):
        return f.factor == 0 or _flat_ends(f.inner)
    if isinstance(f, Sum):
        return all(_flat_ends(t) for t in f.terms)
    return False


def _normalize(f: FuncExpr) -> FuncExpr:
    if isinstance(f, BaseP):
        return TreeSumCantor(LEAF)
    if isinstance(f, Scaled) and f.factor == 0:
        return Zero()
    if isinstance(f, Sum):
        terms = [t for t in (_normalize(t) for t in f.terms) if not isinstance(t, Zero)]
        if not terms:
            return Zero()
        if len(terms) == 1:
            return terms[0]
        return Sum(tuple(terms))
    if isinstance(f, TreeSumCantor) and isinstance(f.tree, Empty):
        return Zero()
    if isinstance(f, TreeSumWestrick) and isinstance(f.tree, Empty):
        return Zero()
    return f


def _disjoint_supports(terms) -> bool:
    spans = []
    for t in terms:
        if not isinstance(t, Scaled):
            return False
        spans.append((t.a, t.b))
    spans.sort()
    return all(spans[i][1] < spans[i + 1][0] for i in range(len(spans) - 1))


def _sv(f: FuncExpr) -> Ordinal:
    f = _normalize(f)
    if isinstance(f, (Zero, Poly, BaseR)):
        return Ordinal.of(1)
    if isinstance(f, SinSqExample):
        return Ordinal.of(2)
    if isinstance(f, TreeSumCantor):
        return cantor_info(SubTree(f.tree)).sv
    if isinstance(f, TreeSumWestrick):
        return westrick_info(f.tree, f.r).sv
    if isinstance(f, Scaled):
        if not _flat_ends(f.inner):
            raise UnsupportedStructure("scaled copies need f(0)=f(1)=f'(0)=f'(1)=0")
        return _sv(f.inner)
    if isinstance(f, Sum):
        if not _disjoint_supports(f.terms):
            raise UnsupportedStructure("sums are supported for disjointly supported scaled copies only")
        return omax(_sv(t) for t in f.terms)
    raise UnsupportedStructure(f"no removed-set rule for {type(f).__name__}")


def stage(f: FuncExpr, gamma: Ordinal | int) -> SymbolicSet:
    """E_gamma of the removed sequence of f' on [0,1]."""
    if isinstance(gamma, int):
        gamma = Ordinal.of(gamma)
    if gamma.is_zero:
        return FULL
    f = _normalize(f)
    if gamma >= _sv(f):
        return EmptySet()
    if isinstance(f, SinSqExample):
        return Points(frozenset({Fraction(0)}))
    if isinstance(f, TreeSumCantor):
        return CantorTreeStage(f.tree, gamma)
    if isinstance(f, TreeSumWestrick):
        return WestrickTreeStage(f.tree, gamma, f.r)
    if isinstance(f, Scaled):
        return ScaledCopy(f.a, f.b, stage(f.inner, gamma))
    if isinstance(f, Sum):
        return make_union(stage(t, gamma) for t in f.terms)
    raise UnsupportedStructure(f"no removed-set rule for {type(f).__name__}")


@dataclass(frozen=True)
class RankedStage:
    index: Ordinal
    set: SymbolicSet

    def to_json(self):
        return {"index": render_ordinal(self.index), "set": self.set.to_json(),
                "empty": self.set.is_empty}


def discontinuity_set(f: FuncExpr, s: SymbolicSet) -> SymbolicSet:
    """Discontinuity points of f' restricted to a stage set of f."""
    if s == FULL:
        return stage(f, 1)
    if isinstance(s, EmptySet):
        return EmptySet()
    # recognise s as E_g of f and return E_{g+1}
    for g in _candidate_indices(f, s):
        if stage(f, g) == s:
            return stage(f, g + 1)
    raise UnsupportedStructure("the set is not a removed stage of this function")


def _candidate_indices(f: FuncExpr, s: SymbolicSet) -> list[Ordinal]:
    idx = getattr(s, "index", None)
    if idx is not None:
        return [idx]
    if isinstance(s, ScaledCopy):
        return _candidate_indices(getattr(f, "inner", f), s.inner)
    if isinstance(s, Union):
        out = []
        for p in s.parts:
            out += _candidate_indices(f, p)
        return out
    return [Ordinal.of(k) for k in range(1, 4)]


def stage_indices(sv: Ordinal, extra: int = 3) -> list[Ordinal]:
    """Indices up to sv: the first few after 0 and after each w*c, plus sv-1, sv."""
    out = set()
    blocks = sv.terms[0][1] if sv.degree == 1 else 0
    for c in range(blocks + 1):
        base = Ordinal.omega(1, c) if c else Ordinal()
        for m in range(extra + 1):
            o = base + m
            if o <= sv:
                out.add(o)
    if sv.is_successor:
        out.add(sv.predecessor())
    out.add(sv)
    return sorted(out)


def solvable_rank(y: FuncExpr, cap: Optional[Ordinal] = None) -> Ordinal:
    cap = ordinal_cap() if cap is None else cap
    sv = _sv(y)
    if sv > cap:
        raise CapExceeded(f"solvable rank {render_ordinal(sv)} exceeds the cap {render_ordinal(cap)}")
    return sv


def removed_sequence(y: FuncExpr, max_stage: Optional[Ordinal] = None) -> list[RankedStage]:
    """Stages at the structural breakpoints, ending with the first empty one."""
    cap = ordinal_cap() if max_stage is None else max_stage
    if cap.degree > 1:
        raise CapExceeded(f"stage caps at or above w^2 are not supported: {render_ordinal(cap)}")
    sv = _sv(y)
    if sv > cap:
        raise CapExceeded(
            f"no empty stage up to {render_ordinal(cap)} (solvable rank {render_ordinal(sv)})"
        )
    return [RankedStage(g, stage(y, g)) for g in stage_indices(sv)]


def stages_to_json(y: FuncExpr, stages: list[RankedStage]) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "function": func_to_json(y),
        "solvable_rank": render_ordinal(stages[-1].index),
        "stages": [s.to_json() for s in stages],
    }


# ---------------------------------------------------------------------------
# numeric cross-check

def numeric_discontinuity_probe(y: FuncExpr, s: SymbolicSet, grid_step, osc_threshold,
                                levels: int = 14) -> list[Fraction]:
    """Grid points of s where y' oscillates above the threshold at every window size.

    Float sampling only; corroborates the symbolic stages, never defines them.
    """
    step = as_fraction(grid_step)
    thr = float(as_fraction(osc_threshold))
    n = int(1 / step)
    out = []
    offsets = np.linspace(-1.0, 1.0, 9)
    for i in range(n + 1):
        x = step * i
        if not s.contains(x):
            continue
        hit = True
        for lvl in range(0, levels + 1, 2):
            w = float(step) / (1 << lvl)
            pts = [float(x) + w * o for o in offsets]
            pts = [p for p in pts if 0.0 <= p <= 1.0 and s.contains(Fraction(p))]
            if len(pts) < 2:
                hit = False
                break
            d = eval_deriv_float(y, pts)
            if float(d.max() - d.min()) <= thr:
                hit = False
                break
        if hit:
            out.append(x)
    return out


__all__ = [
    "SymbolicSet", "EmptySet", "Segment", "Points", "CantorSet", "Union", "ScaledCopy",
    "CantorTreeStage", "WestrickTreeStage", "RankedStage", "NodeInfo", "CapExceeded",
    "UnsupportedStructure", "ordinal_cap", "cantor_info", "westrick_info", "stage",
    "discontinuity_set", "removed_sequence", "solvable_rank", "stage_indices",
    "numeric_discontinuity_probe", "stages_to_json", "FULL", "FORMAT_VERSION",
]
