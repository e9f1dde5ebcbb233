"""Finitely described well-founded trees and their limsup rank.

A schema is either :data:`EMPTY` or a :class:`Node`.  ``Node(children, tail)``
has subtrees ``children[0..k-1]`` followed by ``tail`` repeated for every
index ``n >= k``.  With ``ladder=True`` the repeated part grows instead:
subtree ``k + j`` is ``wrap^j(tail)`` where ``wrap(S)`` is a root whose
subtrees are all ``S``.  Ladders are the only way to reach limit-indexed
ranks such as ``w + 1`` with a finite description.

Text grammar::

    tree := "0" | "(" tree* [ ("~" | "~*") tree ] ")"
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from .ordinal import ZERO, Ordinal, OrdinalSeqSchema, sup_limsup


class TreeError(ValueError):
    pass


class SchemaSyntaxError(TreeError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class Empty:
    def __repr__(self):
        return "EMPTY"


EMPTY = Empty()


@dataclass(frozen=True)
class Node:
    children: tuple["TreeSchema", ...] = ()
    tail: "TreeSchema" = EMPTY
    ladder: bool = False

    def __post_init__(self):
        if not isinstance(self.children, tuple):
            object.__setattr__(self, "children", tuple(self.children))

    def __repr__(self):
        return f"Node({render_tree(self)!r})"


TreeSchema = Union[Empty, Node]

LEAF = Node()


def wrap(t: TreeSchema) -> Node:
    """Root whose every subtree is ``t``."""
    return Node((), t)


def nth_subtree(t: TreeSchema, n: int) -> TreeSchema:
    if isinstance(t, Empty):
        raise TreeError("the empty tree has no subtrees")
    if n < 0:
        raise TreeError("negative subtree index")
    k = len(t.children)
    if n < k:
        return t.children[n]
    if not t.ladder:
        return t.tail
    out = t.tail
    for _ in range(n - k):
        out = wrap(out)
    return out


@lru_cache(maxsize=None)
def limsup_rank(t: TreeSchema) -> Ordinal:
    if isinstance(t, Empty):
        return ZERO
    seq = OrdinalSeqSchema(
        tuple(limsup_rank(c) for c in t.children), limsup_rank(t.tail), t.ladder
    )
    sup, lim = sup_limsup(seq)
    return max(sup, lim + 1)


def tree_of_rank(alpha: Ordinal | int) -> TreeSchema:
    """A schema with limsup rank exactly ``alpha``.

    Supports 0 and every successor ``w*c + m`` (``m >= 1``).
    """
    if isinstance(alpha, int):
        alpha = Ordinal.of(alpha)
    if alpha.is_zero:
        return EMPTY
    if not alpha.is_successor:
        raise TreeError(f"limsup ranks of nonempty trees are successors, got {alpha}")
    if alpha.degree > 1:
        raise TreeError(f"tree_of_rank supports ranks below w^2, got {alpha}")
    m = alpha.terms[-1][1]
    c = alpha.terms[0][1] if alpha.degree == 1 else 0
    if c == 0:
        out: TreeSchema = LEAF
    else:
        base: TreeSchema = LEAF if c == 1 else tree_of_rank(Ordinal.omega(1, c - 1) + 1)
        out = Node((), base, ladder=True)
    for _ in range(m - 1):
        out = wrap(out)
    return out


def depth(t: TreeSchema) -> int:
    """Height of the finite description (ladders count their base only)."""
    if isinstance(t, Empty):
        return 0
    return 1 + max([depth(c) for c in t.children] + [depth(t.tail)])


def render_tree(t: TreeSchema) -> str:
    if isinstance(t, Empty):
        return "0"
    body = "".join(render_tree(c) for c in t.children)
    if t.ladder:
        body += "~*" + render_tree(t.tail)
    elif not isinstance(t.tail, Empty):
        body += "~" + render_tree(t.tail)
    return f"({body})"


def parse_tree(text: str) -> TreeSchema:
    pos = 0
    n = len(text)

    def skip():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def tree() -> TreeSchema:
        nonlocal pos
        skip()
        if pos >= n:
            raise SchemaSyntaxError("unexpected end of input", pos)
        ch = text[pos]
        if ch == "0":
            pos += 1
            return EMPTY
        if ch != "(":
            raise SchemaSyntaxError(f"unexpected {ch!r}", pos)
        pos += 1
        children = []
        tail: TreeSchema = EMPTY
        ladder = False
        while True:
            skip()
            if pos >= n:
                raise SchemaSyntaxError("unclosed '('", pos)
            ch = text[pos]
            if ch == ")":
                pos += 1
                return Node(tuple(children), tail, ladder)
            if ch == "~":
                pos += 1
                if pos < n and text[pos] == "*":
                    ladder = True
                    pos += 1
                tail = tree()
                skip()
                if pos >= n or text[pos] != ")":
                    raise SchemaSyntaxError("expected ')' after tail", pos)
                pos += 1
                return Node(tuple(children), tail, ladder)
            children.append(tree())

    out = tree()
    skip()
    if pos != n:
        raise SchemaSyntaxError("trailing input", pos)
    return out


def tree_to_json(t: TreeSchema):
    if isinstance(t, Empty):
        return None
    out = {"children": [tree_to_json(c) for c in t.children], "tail": tree_to_json(t.tail)}
    if t.ladder:
        out["ladder"] = True
    return out


def tree_from_json(obj) -> TreeSchema:
    if obj is None:
        return EMPTY
    if isinstance(obj, str):
        return parse_tree(obj)
    try:
        return Node(
            tuple(tree_from_json(c) for c in obj.get("children", [])),
            tree_from_json(obj.get("tail")),
            bool(obj.get("ladder", False)),
        )
    except AttributeError as exc:
        raise TreeError(f"bad tree JSON: {json.dumps(obj)[:80]}") from exc


def random_schema(rng: random.Random, max_depth: int = 4, max_children: int = 3,
                  p_tail: float = 0.5, p_empty: float = 0.25) -> TreeSchema:
    """Unrestricted random schema (constant tails only)."""
    if max_depth <= 0 or rng.random() < p_empty:
        return EMPTY
    kids = tuple(
        random_schema(rng, max_depth - 1, max_children, p_tail, p_empty)
        for _ in range(rng.randint(0, max_children))
    )
    tail = random_schema(rng, max_depth - 1, max_children, p_tail, p_empty) if rng.random() < p_tail else EMPTY
    return Node(kids, tail)


__all__ = [
    "EMPTY", "LEAF", "Empty", "Node", "TreeSchema", "TreeError", "SchemaSyntaxError",
    "wrap", "nth_subtree", "limsup_rank", "tree_of_rank", "depth", "render_tree",
    "parse_tree", "tree_to_json", "tree_from_json", "random_schema",
]
