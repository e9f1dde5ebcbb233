"""Partial sums of sum_i 2^-h(i) for injective enumerations h."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Optional, Sequence


class InjectivityError(ValueError):
    def __init__(self, i: int, j: int, value: int):
        super().__init__(f"h({i}) = h({j}) = {value}: enumeration is not one-to-one")
        self.indices = (i, j)
        self.value = value


class EnumeratorError(ValueError):
    pass


@dataclass(frozen=True)
class Enumerator:
    name: str
    fn: Callable[[int], int]
    length: Optional[int] = None  # None means total

    def __call__(self, i: int) -> int:
        if i < 0 or (self.length is not None and i >= self.length):
            raise EnumeratorError(f"{self.name} is undefined at {i}")
        v = self.fn(i)
        if not isinstance(v, int) or v < 1:
            raise EnumeratorError(f"{self.name}({i}) = {v!r} is not a positive natural")
        return v


def identity_successor() -> Enumerator:
    return Enumerator("identity-successor", lambda i: i + 1)


def table(values: Sequence[int], name: str = "table") -> Enumerator:
    vals = tuple(int(v) for v in values)
    return Enumerator(name, lambda i: vals[i], len(vals))


# ---------------------------------------------------------------------------
# toy halting enumerator over two-counter machines
#
# Instructions: ("inc", r, nxt), ("dec", r, nxt_if_positive, nxt_if_zero), ("halt",).

Program = tuple


def _prog_count_down(n: int) -> Program:
    # load n into r0, then empty it
    load = [("inc", 0, k + 1) for k in range(n)]
    return tuple(load + [("dec", 0, n, n + 1), ("halt",)])


def _prog_transfer(n: int) -> Program:
    # r0 = n, move r0 into r1 twice over, halt
    load = [("inc", 0, k + 1) for k in range(n)]
    b = n
    return tuple(load + [("dec", 0, b + 1, b + 3), ("inc", 1, b + 2), ("inc", 1, b), ("halt",)])


_LOOP_FOREVER: Program = (("inc", 0, 0),)
_PING_PONG: Program = (("inc", 0, 1), ("dec", 0, 0, 0))
_WAIT_ON_EMPTY: Program = (("dec", 1, 1, 0), ("halt",))

TOY_PROGRAMS: tuple[Program, ...] = (
    _prog_count_down(5),
    _LOOP_FOREVER,
    _prog_transfer(3),
    (("halt",),),
    _PING_PONG,
    _prog_count_down(1),
    _prog_transfer(12),
    _WAIT_ON_EMPTY,
    _prog_count_down(20),
    _LOOP_FOREVER,
    _prog_transfer(1),
    _prog_count_down(9),
    _PING_PONG,
    _prog_transfer(30),
    _prog_count_down(2),
    _WAIT_ON_EMPTY,
)


def run_program(prog: Program, budget: int) -> Optional[int]:
    """Steps to halt, or None if still running after ``budget`` steps."""
    regs = [0, 0]
    pc = 0
    for step in range(budget + 1):
        if pc >= len(prog):
            return step
        ins = prog[pc]
        if ins[0] == "halt":
            return step
        if ins[0] == "inc":
            regs[ins[1]] += 1
            pc = ins[2]
        else:
            if regs[ins[1]] > 0:
                regs[ins[1]] -= 1
                pc = ins[2]
            else:
                pc = ins[3]
    return None


@lru_cache(maxsize=16)
def halting_order(budget: int) -> tuple[int, ...]:
    """Indices of toy programs halting within the budget, by (steps, index)."""
    done = []
    for k, prog in enumerate(TOY_PROGRAMS):
        s = run_program(prog, budget)
        if s is not None:
            done.append((s, k))
    return tuple(k for _, k in sorted(done))


def toy_halting(budget: int = 1000) -> Enumerator:
    order = halting_order(budget)
    return Enumerator(f"toy-halting[{budget}]", lambda i: order[i] + 1, len(order))


def load_enumerator(spec: str) -> Enumerator:
    """Built-in name or a path to a JSON list / whitespace separated naturals."""
    if spec in ("identity-successor", "identity", "succ"):
        return identity_successor()
    if spec.startswith("toy-halting"):
        budget = 1000
        if "[" in spec:
            budget = int(spec[spec.index("[") + 1: spec.rindex("]")])
        return toy_halting(budget)
    path = Path(spec)
    if not path.exists():
        raise EnumeratorError(f"unknown enumerator {spec!r}")
    text = path.read_text(encoding="utf-8")
    try:
        vals = json.loads(text)
    except json.JSONDecodeError:
        vals = text.split()
    try:
        return table([int(v) for v in vals], name=path.name)
    except (TypeError, ValueError) as exc:
        raise EnumeratorError(f"{spec}: entries must be naturals") from exc


def mu_partial(h: Enumerator, n: int) -> Fraction:
    """Exact sum of 2^-h(i) for i < n, checking injectivity as it goes."""
    if n < 0:
        raise EnumeratorError("n must be non-negative")
    seen: dict[int, int] = {}
    total = Fraction(0)
    for i in range(n):
        v = h(i)
        if v in seen:
            raise InjectivityError(seen[v], i, v)
        seen[v] = i
        total += Fraction(1, 1 << v)
    return total


def decimal_text(q: Fraction, digits: int = 30) -> str:
    """Exact decimal when the denominator is a power of two (always the case here)."""
    whole, rem = divmod(q.numerator, q.denominator)
    out = []
    for _ in range(digits):
        if not rem:
            break
        rem *= 10
        d, rem = divmod(rem, q.denominator)
        out.append(str(d))
    return f"{whole}." + ("".join(out) or "0")


__all__ = [
    "Enumerator", "InjectivityError", "EnumeratorError", "identity_successor", "table",
    "toy_halting", "halting_order", "run_program", "load_enumerator", "mu_partial",
    "decimal_text", "TOY_PROGRAMS",
]
