"""Ordinals below omega^omega in Cantor normal form.

An :class:`Ordinal` is a finite descending sum ``w^e1*c1 + w^e2*c2 + ...``
with natural exponents and positive natural coefficients.  Zero is the empty
sum.  Text form round-trips through :func:`parse_ordinal`, e.g.
``"w^2*3 + w + 4"``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Sequence


class OrdinalError(ValueError):
    pass


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    terms: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        prev = None
        for exp, coef in self.terms:
            if not isinstance(exp, int) or not isinstance(coef, int):
                raise OrdinalError(f"non-integer term {(exp, coef)!r}")
            if exp < 0 or coef < 1:
                raise OrdinalError(f"invalid term {(exp, coef)!r}")
            if prev is not None and exp >= prev:
                raise OrdinalError("exponents must be strictly decreasing")
            prev = exp

    @classmethod
    def of(cls, n: int) -> "Ordinal":
        if n < 0:
            raise OrdinalError("negative ordinal")
        return cls(((0, n),)) if n else cls()

    @classmethod
    def omega(cls, exp: int = 1, coef: int = 1) -> "Ordinal":
        return cls(((exp, coef),))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0] == 0)

    @property
    def is_successor(self) -> bool:
        return bool(self.terms) and self.terms[-1][0] == 0

    @property
    def is_limit(self) -> bool:
        return bool(self.terms) and self.terms[-1][0] > 0

    @property
    def degree(self) -> int:
        """Leading exponent; -1 for zero."""
        return self.terms[0][0] if self.terms else -1

    def __int__(self) -> int:
        if not self.is_finite:
            raise OrdinalError(f"{self} is infinite")
        return self.terms[0][1] if self.terms else 0

    def _key(self):
        return self.terms

    def __eq__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other) if other >= 0 else None
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __lt__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        # lexicographic on (exp, coef), a proper prefix is smaller
        return self.terms < other.terms

    def __add__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        if other.is_zero:
            return self
        lead_exp, lead_coef = other.terms[0]
        kept = [t for t in self.terms if t[0] > lead_exp]
        same = [c for e, c in self.terms if e == lead_exp]
        head = (lead_exp, lead_coef + (same[0] if same else 0))
        return Ordinal(tuple(kept) + (head,) + other.terms[1:])

    def __radd__(self, other):
        if isinstance(other, int):
            return Ordinal.of(other) + self
        return NotImplemented

    def successor(self) -> "Ordinal":
        return self + 1

    def predecessor(self) -> "Ordinal":
        if not self.is_successor:
            raise OrdinalError(f"{self} has no predecessor")
        *head, (_, c) = self.terms
        return Ordinal(tuple(head) + (((0, c - 1),) if c > 1 else ()))

    def __str__(self) -> str:
        return render_ordinal(self)

    def __repr__(self) -> str:
        return f"Ordinal({render_ordinal(self)!r})"


ZERO = Ordinal()
ONE = Ordinal.of(1)
OMEGA = Ordinal.omega()


def compare(a: Ordinal, b: Ordinal) -> int:
    """-1, 0 or 1 as ``a`` is less than, equal to, or greater than ``b``."""
    return (a > b) - (a < b)


def successor(a: Ordinal) -> Ordinal:
    return a + 1


def omax(values: Iterable[Ordinal]) -> Ordinal:
    best = ZERO
    for v in values:
        if v > best:
            best = v
    return best


@dataclass(frozen=True)
class OrdinalSeqSchema:
    """Finite description of an omega-sequence of ordinals.

    ``prefix`` gives the first values.  With ``ladder`` false every later
    index takes the value ``tail``; with ``ladder`` true the later values are
    ``tail, tail+1, tail+2, ...``.
    """

    prefix: tuple[Ordinal, ...] = ()
    tail: Ordinal = ZERO
    ladder: bool = False

    def __getitem__(self, n: int) -> Ordinal:
        if n < len(self.prefix):
            return self.prefix[n]
        return self.tail + (n - len(self.prefix)) if self.ladder else self.tail


def sup_limsup(seq: OrdinalSeqSchema) -> tuple[Ordinal, Ordinal]:
    if seq.ladder:
        lim = seq.tail + OMEGA
        return omax([*seq.prefix, lim]), lim
    return omax([*seq.prefix, seq.tail]), seq.tail


_TERM = re.compile(r"^(?:(w)(?:\^(\d+))?(?:\*(\d+))?|(\d+))$")


def parse_ordinal(text: str) -> Ordinal:
    """Parse ``"w^2*3 + w + 4"`` style text (``ω`` is accepted for ``w``)."""
    src = text.replace("ω", "w").replace(" ", "")
    if not src:
        raise OrdinalError("empty ordinal text")
    terms: list[tuple[int, int]] = []
    for chunk in src.split("+"):
        m = _TERM.match(chunk)
        if not m:
            raise OrdinalError(f"cannot parse ordinal term {chunk!r} in {text!r}")
        if m.group(4) is not None:
            exp, coef = 0, int(m.group(4))
        else:
            exp = int(m.group(2)) if m.group(2) is not None else 1
            coef = int(m.group(3)) if m.group(3) is not None else 1
        if coef == 0:
            continue
        terms.append((exp, coef))
    out = ZERO
    for exp, coef in terms:
        out = out + Ordinal(((exp, coef),))
    # reject non-normal input such as "1 + w" silently absorbing a term
    if render_ordinal(out).replace(" ", "") != _normal_text(terms):
        raise OrdinalError(f"{text!r} is not in Cantor normal form")
    return out


def _normal_text(terms: Sequence[tuple[int, int]]) -> str:
    if not terms:
        return "0"
    return render_ordinal(Ordinal(tuple(terms))).replace(" ", "") if all(
        terms[i][0] > terms[i + 1][0] for i in range(len(terms) - 1)
    ) else "?"


def render_ordinal(a: Ordinal) -> str:
    if a.is_zero:
        return "0"
    parts = []
    for exp, coef in a.terms:
        if exp == 0:
            parts.append(str(coef))
            continue
        s = "w" if exp == 1 else f"w^{exp}"
        if coef != 1:
            s += f"*{coef}"
        parts.append(s)
    return " + ".join(parts)
