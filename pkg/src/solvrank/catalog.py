"""Named functions with expected ranks and where each expectation comes from."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .func import (
    BaseP,
    FuncExpr,
    Poly,
    SinSqExample,
    TreeSumCantor,
    TreeSumWestrick,
    Zero,
    scale,
)
from .ordinal import Ordinal, parse_ordinal, render_ordinal
from .tree import EMPTY, Empty, Node, TreeSchema, limsup_rank, parse_tree, render_tree, tree_of_rank

PROVENANCE = ("PAPER", "TRIVIAL", "DERIVED")


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    func: FuncExpr
    tree: Optional[TreeSchema]
    limsup: Optional[Ordinal]
    sv: Optional[Ordinal]
    kw: Optional[int]
    provenance: dict  # field name -> tag

    def __post_init__(self):
        for key, tag in self.provenance.items():
            if tag not in PROVENANCE:
                raise ValueError(f"{self.name}: bad provenance {tag!r} for {key}")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "tree": render_tree(self.tree) if self.tree is not None else None,
            "limsup": render_ordinal(self.limsup) if self.limsup is not None else None,
            "sv": render_ordinal(self.sv) if self.sv is not None else None,
            "kw": self.kw,
            "provenance": dict(self.provenance),
        }


def _cantor(name: str, text: str, sv: str, tag: str = "PAPER") -> CatalogEntry:
    t = parse_tree(text)
    return CatalogEntry(name, TreeSumCantor(t), t, limsup_rank(t), parse_ordinal(sv), None,
                        {"limsup": "TRIVIAL", "sv": tag})


def _westrick(name: str, text: str) -> CatalogEntry:
    t = parse_tree(text)
    return CatalogEntry(name, TreeSumWestrick(t), t, limsup_rank(t), Ordinal.of(2), None,
                        {"limsup": "TRIVIAL", "sv": "PAPER"})


def catalog() -> list[CatalogEntry]:
    one, two = Ordinal.of(1), Ordinal.of(2)
    return [
        CatalogEntry("zero", Zero(), EMPTY, Ordinal(), one, 1, {"sv": "TRIVIAL", "kw": "TRIVIAL"}),
        CatalogEntry("x^2", Poly((0, 0, 1)), None, None, one, 1, {"sv": "PAPER", "kw": "PAPER"}),
        CatalogEntry("x^2 sin(1/x)", SinSqExample(), None, None, two, 2, {"sv": "PAPER", "kw": "PAPER"}),
        CatalogEntry("p", BaseP(), None, None, two, None, {"sv": "DERIVED"}),
        _cantor("cantor-root", "()", "2"),
        _cantor("cantor-(~())", "(~())", "3"),
        _cantor("cantor-(~(~()))", "(~(~()))", "4"),
        _cantor("cantor-rank4", render_tree(tree_of_rank(4)), "5"),
        _cantor("cantor-(()()~())", "(()()~())", "3"),
        _cantor("cantor-(0~(~()))", "(0~(~()))", "4"),
        _cantor("cantor-w+1", "(~*())", "w+2"),
        _cantor("cantor-w+2", "(~(~*()))", "w+3"),
        _cantor("counterexample-(~(0()))", "(~(0()))", "4", tag="DERIVED"),
        _westrick("westrick-(~())", "(~())"),
        _westrick("westrick-(~(~()))", "(~(~()))"),
        _westrick("westrick-(()~(~()))", "(()~(~()))"),
        CatalogEntry("scaled-p", scale(BaseP(), "1/4", "3/4", "1/4"), None, None, two, None,
                     {"sv": "PAPER"}),
    ]


def catalog_trees() -> list[TreeSchema]:
    return [e.tree for e in catalog() if e.tree is not None and not isinstance(e.tree, Empty)]


# ---------------------------------------------------------------------------
# generated towers

TOWER_RANKS = ("0", "1", "2", "3", "4", "w+1", "w+2")


def decorate(t: TreeSchema, rng: random.Random, p: float = 0.6, max_extra: int = 3) -> TreeSchema:
    """Prefix some constant-tail nodes with subtrees ranked strictly below their tail.

    Such prefixes leave the limsup rank alone and keep the tower shape, for which
    solvable rank = limsup rank + 1 holds.
    """
    if isinstance(t, Empty):
        return t
    kids = tuple(decorate(c, rng, p, max_extra) for c in t.children)
    tail = decorate(t.tail, rng, p, max_extra)
    rt = limsup_rank(t.tail)
    if not t.ladder and not rt.is_zero and rng.random() < p:
        ranks = [Ordinal.of(k) for k in range(5) if Ordinal.of(k) < rt]
        extra = tuple(tree_of_rank(rng.choice(ranks)) for _ in range(rng.randint(1, max_extra)))
        kids = extra + kids
    return Node(kids, tail, t.ladder)


def tower_family(count: int, seed: int = 0, ranks=TOWER_RANKS) -> list[TreeSchema]:
    """Up to ``count`` distinct decorated towers cycling through ``ranks``.

    Deterministic in ``seed``.  Low ranks admit few decorations, so fewer than
    ``count`` trees come back when the ranks run out of variety.
    """
    rng = random.Random(seed)
    seen: dict[TreeSchema, None] = {}
    i = 0
    while len(seen) < count and i < 50 * count:
        base = tree_of_rank(parse_ordinal(ranks[i % len(ranks)]))
        seen.setdefault(base if i < len(ranks) else decorate(base, rng))
        i += 1
    return list(seen)


def tower_family_upto(max_rank: Ordinal, count: int, seed: int = 0) -> list[TreeSchema]:
    ranks = tuple(r for r in TOWER_RANKS if parse_ordinal(r) <= max_rank)
    return tower_family(count, seed, ranks)


__all__ = [
    "CatalogEntry", "catalog", "catalog_trees", "decorate", "tower_family", "tower_family_upto",
    "TOWER_RANKS", "PROVENANCE",
]
