"""Grid estimator for the Kechris-Woodin epsilon-derivative stages.

P^0 is all of [0,1]; a point x survives into the next stage when, for every
delta in the schedule, there are rational p<q and r<s inside (x-delta, x+delta)
with [p,q] and [r,s] sharing a point of P and |D(p,q) - D(r,s)| >= eps, where
D is the difference quotient.  Candidate pairs are screened in floating point
and the chosen pair is then certified with interval arithmetic.  Grid truncation
only loses witnesses, so the stage count is a lower-bound estimate.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .func import (
    FuncExpr,
    SinSqExample,
    Scaled,
    Sum,
    TreeSumCantor,
    TreeSumWestrick,
    cantor_interval,
    eval,
    eval_float,
    westrick_interval,
)
from .rigor import CancelToken, RInterval, as_fraction

FORMAT_VERSION = 1


def _pow2(k: int) -> Fraction:
    return Fraction(1, 1 << k)


@dataclass(frozen=True)
class KWGridConfig:
    epsilons: tuple[Fraction, ...] = (Fraction(1, 2), Fraction(1, 4))
    delta_schedule: tuple[Fraction, ...] = tuple(_pow2(k) for k in range(3, 21))
    grid_step: Fraction = _pow2(8)
    max_stage: int = 4
    refine: int = 4
    centers: int = 64

    def __post_init__(self):
        eps = tuple(as_fraction(e) for e in self.epsilons)
        deltas = tuple(as_fraction(d) for d in self.delta_schedule)
        object.__setattr__(self, "epsilons", eps)
        object.__setattr__(self, "delta_schedule", deltas)
        object.__setattr__(self, "grid_step", as_fraction(self.grid_step))
        if not eps or any(e <= 0 for e in eps) or list(eps) != sorted(eps, reverse=True):
            raise ValueError("epsilons must be positive and descending")
        if not deltas or any(d <= 0 for d in deltas) or list(deltas) != sorted(deltas, reverse=True):
            raise ValueError("delta_schedule must be positive and descending")
        if self.grid_step <= 0 or (1 / self.grid_step).denominator != 1:
            raise ValueError("grid_step must be 1/N for a positive integer N")
        if self.max_stage < 1 or self.refine < 0 or self.centers < 1:
            raise ValueError("max_stage, refine and centers must be positive")

    @classmethod
    def from_json(cls, obj: dict) -> "KWGridConfig":
        kw = {}
        if "epsilons" in obj:
            kw["epsilons"] = tuple(Fraction(str(e)) for e in obj["epsilons"])
        if "delta_schedule" in obj:
            kw["delta_schedule"] = tuple(Fraction(str(d)) for d in obj["delta_schedule"])
        if "grid_step" in obj:
            kw["grid_step"] = Fraction(str(obj["grid_step"]))
        for key in ("max_stage", "refine", "centers"):
            if key in obj:
                kw[key] = int(obj[key])
        return cls(**kw)

    def to_json(self) -> dict:
        return {
            "epsilons": [str(e) for e in self.epsilons],
            "delta_schedule": [str(d) for d in self.delta_schedule],
            "grid_step": str(self.grid_step),
            "max_stage": self.max_stage,
            "refine": self.refine,
            "centers": self.centers,
        }


@dataclass(frozen=True)
class Witness:
    delta: Fraction
    p: Fraction
    q: Fraction
    r: Fraction
    s: Fraction
    gap: RInterval


@dataclass(frozen=True)
class GridSet:
    """Grid points present at a stage.  ``dense`` marks P^0 = [0,1]."""

    points: tuple[Fraction, ...]
    dense: bool = False
    witnesses: dict = field(default_factory=dict, compare=False, hash=False)

    @classmethod
    def full(cls, cfg: KWGridConfig) -> "GridSet":
        n = int(1 / cfg.grid_step)
        return cls(tuple(cfg.grid_step * i for i in range(n + 1)), dense=True)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, x):
        return as_fraction(x) in set(self.points)

    @property
    def is_empty(self) -> bool:
        return not self.points


class EqualPointsError(ValueError):
    pass


def diff_quotient(y: FuncExpr, x, z, eps=Fraction(1, 1 << 40)) -> RInterval:
    """Rigorous enclosure of (y(x) - y(z)) / (x - z)."""
    x, z, eps = as_fraction(x), as_fraction(z), as_fraction(eps)
    if x == z:
        raise EqualPointsError("difference quotient needs two distinct points")
    return (eval(y, x, eps) - eval(y, z, eps)) / (x - z)


# ---------------------------------------------------------------------------
# candidate generation

def _feature_scales(y: FuncExpr, lo: Fraction, hi: Fraction, limit: int) -> list[tuple[Fraction, Optional[Fraction]]]:
    """(center, local scale) pairs; the scale is None when the grid lattice is fine enough."""
    out: list[tuple[Fraction, Optional[Fraction]]] = []
    if isinstance(y, TreeSumCantor):
        for n in range(4095):
            a, b = cantor_interval(n)
            if b < lo or a > hi:
                continue
            w = b - a
            out += [(a + w / 64, None), (a + w / 16, None), (b - w / 16, None), (b - w / 64, None)]
            if len(out) >= limit:
                break
    elif isinstance(y, TreeSumWestrick):
        for n in range(60):
            a, b = westrick_interval(n)
            if b <= lo or a >= hi:
                continue
            w = b - a
            out += [(a + w * k / 16, w) for k in range(1, 16, 2)]
            if len(out) >= limit:
                break
    elif isinstance(y, SinSqExample):
        # cos(1/x) = +-1 at x = 1/(k pi); rational approximations suffice for screening
        k0 = max(1, int(1 / (3.1416 * float(hi))) if hi > 0 else 1)
        for k in range(k0, k0 + limit):
            c = Fraction(1) / (Fraction(355, 113) * k)
            if lo <= c <= hi:
                out.append((c.limit_denominator(1 << 40), None))
    elif isinstance(y, Scaled):
        w = y.b - y.a
        inner = _feature_scales(y.inner, max(Fraction(0), (lo - y.a) / w), min(Fraction(1), (hi - y.a) / w), limit)
        out = [(y.a + w * u, None if sc is None else w * sc) for u, sc in inner]
    elif isinstance(y, Sum):
        for t in y.terms:
            out += _feature_scales(t, lo, hi, limit // max(1, len(y.terms)))
    return [(c, sc) for c, sc in out if lo <= c <= hi][:limit]


def feature_points(y: FuncExpr, lo: Fraction, hi: Fraction, limit: int = 48) -> list[Fraction]:
    """Structural places where y' moves fast: gap ends, small intervals, peaks of cos(1/x)."""
    return [c for c, _ in _feature_scales(y, lo, hi, limit)]


def _clip(a: Fraction, b: Fraction) -> tuple[Fraction, Fraction]:
    return max(Fraction(0), a), min(Fraction(1), b)


def _pairs(y, x, delta, P: GridSet, cfg: KWGridConfig):
    """Candidate (long, short) interval pairs inside the open delta-ball at x."""
    inner = delta * (1 - Fraction(1, 64))
    ell = min(cfg.grid_step, delta * delta) / (1 << cfg.refine)
    longs, shorts = [], []
    if P.dense:
        for w in (inner, delta / 2, delta / 8):
            for a, b in (_clip(x - w, x + w), _clip(x, x + w), _clip(x - w, x)):
                if a < b:
                    longs.append((a, b))
        m = cfg.centers
        centers = [(x - inner + 2 * inner * Fraction(2 * i + 1, 2 * m), None) for i in range(m)]
        centers += _feature_scales(y, x - inner, x + inner, 48)
        for c, sc in centers:
            half = ell / 2 if sc is None else min(ell, sc / 16) / 2
            a, b = _clip(c - half, c + half)
            if a < b and a > x - delta and b < x + delta:
                shorts.append((a, b))
        return [(L, S) for L in longs for S in shorts if L[0] <= S[1] and S[0] <= L[1]]
    # finite P: both intervals must contain a common present point g
    pairs = []
    for g in P.points:
        if not abs(g - x) < delta:
            continue
        room_l, room_r = g - (x - delta), (x + delta) - g
        for w in (inner, delta / 2, delta / 8):
            for a, b in (_clip(g - min(w, room_l * 63 / 64), g + min(w, room_r * 63 / 64)),
                         _clip(g, g + min(w, room_r * 63 / 64)),
                         _clip(g - min(w, room_l * 63 / 64), g)):
                if a < b:
                    longs.append((a, b))
        for k in range(cfg.refine + 1):
            e = ell * (1 << k)
            for a, b in (_clip(g - e, g + e), _clip(g, g + e), _clip(g - e, g)):
                if a < b:
                    shorts.append((a, b))
        pairs += [(L, S) for L in longs for S in shorts]
        longs, shorts = [], []
    return pairs


def _find_witness(y, x, delta, P, cfg, eps_list, tries: int = 3) -> dict:
    """Best certified pair at (x, delta); returns {eps: Witness} for each eps it beats."""
    pairs = _pairs(y, x, delta, P, cfg)
    if not pairs:
        return {}
    ends = sorted({v for L, S in pairs for v in (*L, *S)})
    idx = {v: i for i, v in enumerate(ends)}
    vals = eval_float(y, [float(v) for v in ends])
    L0 = np.array([idx[L[0]] for L, _ in pairs])
    L1 = np.array([idx[L[1]] for L, _ in pairs])
    S0 = np.array([idx[S[0]] for _, S in pairs])
    S1 = np.array([idx[S[1]] for _, S in pairs])
    fe = np.array([float(v) for v in ends])
    with np.errstate(divide="ignore", invalid="ignore"):
        dl = (vals[L1] - vals[L0]) / (fe[L1] - fe[L0])
        ds = (vals[S1] - vals[S0]) / (fe[S1] - fe[S0])
        # float quotients are noise once cancellation eats the threshold; redo those exactly
        noise = 4 * np.finfo(float).eps * (np.abs(vals[S0]) + np.abs(vals[S1]) + 1e-300) / (fe[S1] - fe[S0])
    shaky = np.nonzero(~(noise < float(min(eps_list)) / 32))[0]
    exact: dict = {}
    for k in shaky:
        S = pairs[int(k)][1]
        if S not in exact:
            exact[S] = float(diff_quotient(y, S[0], S[1], (S[1] - S[0]) / (1 << 12)).mid)
        ds[k] = exact[S]
    with np.errstate(invalid="ignore"):
        score = np.abs(dl - ds)
    score = np.nan_to_num(score, nan=-1.0)
    order = np.argsort(-score, kind="stable")
    out: dict = {}
    for k in order[:tries]:
        if score[k] < float(min(eps_list)) * 0.9:
            break
        (p, q), (r, s) = pairs[int(k)]
        prec = min(q - p, s - r) / (1 << 16)
        gap = abs(diff_quotient(y, p, q, prec) - diff_quotient(y, r, s, prec))
        for e in eps_list:
            if e not in out and gap.lo >= e:
                out[e] = Witness(delta, p, q, r, s, gap)
        if len(out) == len(eps_list):
            break
    return out


def _point_task(args):
    y, x, P, eps_list, cfg = args
    kept = {e: [] for e in eps_list}
    alive = set(eps_list)
    for delta in sorted(cfg.delta_schedule):  # smallest first: it fails fastest
        found = _find_witness(y, x, delta, P, cfg, sorted(alive))
        for e in list(alive):
            if e in found:
                kept[e].append(found[e])
            else:
                alive.discard(e)
        if not alive:
            break
    return x, {e: kept[e] for e in alive}


def _run(tasks, n_jobs: int):
    if n_jobs and n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(_point_task, tasks))
    return [_point_task(t) for t in tasks]


def kw_step(y: FuncExpr, P: GridSet, eps, cfg: KWGridConfig = KWGridConfig(),
            n_jobs: int = 1, token: Optional[CancelToken] = None) -> GridSet:
    """One epsilon-derivative step on the grid.  Retained points carry witnesses."""
    eps = as_fraction(eps)
    return _step_many(y, P, (eps,), cfg, n_jobs, token)[eps]


def _step_many(y, P, eps_list, cfg, n_jobs=1, token=None) -> dict:
    if token is not None:
        token.check()
    results = _run([(y, x, P, tuple(eps_list), cfg) for x in P.points], n_jobs)
    out = {}
    for e in eps_list:
        pts, wit = [], {}
        for x, found in results:  # input order is sorted, so the merge is deterministic
            if e in found:
                pts.append(x)
                wit[x] = found[e]
        out[e] = GridSet(tuple(pts), False, wit)
    return out


@dataclass
class KWEstimate:
    lower_bound: int
    stages: dict  # eps -> list[GridSet]


def kw_estimate(y: FuncExpr, cfg: KWGridConfig = KWGridConfig(), n_jobs: int = 1,
                token: Optional[CancelToken] = None) -> KWEstimate:
    stages = {}
    best = 0
    for e in cfg.epsilons:
        seq = [GridSet.full(cfg)]
        while len(seq) < cfg.max_stage + 1 and not seq[-1].is_empty:
            seq.append(kw_step(y, seq[-1], e, cfg, n_jobs, token))
        nonempty = sum(1 for s in seq if not s.is_empty)
        stages[e] = seq
        best = max(best, nonempty)
    return KWEstimate(best, stages)


def kw_rank_lower_bound(y: FuncExpr, cfg: KWGridConfig = KWGridConfig(), n_jobs: int = 1) -> int:
    """Number of nonempty grid stages, maximised over the epsilon list."""
    return kw_estimate(y, cfg, n_jobs).lower_bound


def stages_csv(est: KWEstimate) -> str:
    """Rows: format_version, eps, x, last stage retaining x, witness of that stage."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["format_version", "eps", "x", "retained_at", "delta", "p", "q", "r", "s", "gap_lo"])
    for e, seq in est.stages.items():
        last = {}
        for k, stage in enumerate(seq):
            for x in stage.points:
                last[x] = (k, stage.witnesses.get(x, []))
        for x in sorted(last):
            k, wits = last[x]
            if wits:
                wt = wits[0]
                w.writerow([FORMAT_VERSION, str(e), str(x), k, str(wt.delta), str(wt.p), str(wt.q),
                            str(wt.r), str(wt.s), f"{float(wt.gap.lo):.6g}"])
            else:
                w.writerow([FORMAT_VERSION, str(e), str(x), k, "", "", "", "", "", ""])
    return buf.getvalue()


__all__ = [
    "KWGridConfig", "GridSet", "Witness", "KWEstimate", "diff_quotient", "kw_step",
    "kw_estimate", "kw_rank_lower_bound", "stages_csv", "feature_points", "EqualPointsError",
]
