"""scikit-learn style wrappers.

Samples are function expressions (or their JSON form), not feature vectors, so
these estimators are stateless: ``fit`` validates input and records the
configuration, and the real work happens in ``predict``/``transform``.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .func import FuncExpr, func_from_json
from .kw import KWGridConfig, kw_rank_lower_bound
from .ordinal import render_ordinal
from .removed import solvable_rank


def _as_funcs(X) -> list[FuncExpr]:
    return [func_from_json(x) if isinstance(x, dict) else x for x in X]


class SolvableRankTransformer(TransformerMixin, BaseEstimator):
    """Maps each function to its solvable rank, rendered as ordinal text."""

    def __init__(self, cap: str | None = None):
        self.cap = cap

    def fit(self, X, y=None):
        self.n_samples_seen_ = len(_as_funcs(X))
        return self

    def transform(self, X):
        from .ordinal import parse_ordinal

        cap = parse_ordinal(self.cap) if self.cap is not None else None
        return np.array([[render_ordinal(solvable_rank(f, cap))] for f in _as_funcs(X)], dtype=object)


class KWRankEstimator(BaseEstimator):
    """Grid lower bound for the Kechris-Woodin rank; ``score`` is exact-match accuracy."""

    def __init__(self, epsilons=("1/2", "1/4"), grid_step="1/256", min_delta_exp: int = 20,
                 max_stage: int = 4, refine: int = 4, n_jobs: int = 1):
        self.epsilons = epsilons
        self.grid_step = grid_step
        self.min_delta_exp = min_delta_exp
        self.max_stage = max_stage
        self.refine = refine
        self.n_jobs = n_jobs

    def _config(self) -> KWGridConfig:
        return KWGridConfig(
            epsilons=tuple(Fraction(str(e)) for e in self.epsilons),
            delta_schedule=tuple(Fraction(1, 1 << k) for k in range(3, self.min_delta_exp + 1)),
            grid_step=Fraction(str(self.grid_step)),
            max_stage=self.max_stage,
            refine=self.refine,
        )

    def fit(self, X, y=None):
        self.config_ = self._config()
        self.n_samples_seen_ = len(_as_funcs(X))
        return self

    def predict(self, X):
        cfg = getattr(self, "config_", None) or self._config()
        return np.array([kw_rank_lower_bound(f, cfg, self.n_jobs) for f in _as_funcs(X)], dtype=int)

    def score(self, X, y):
        return float(np.mean(self.predict(X) == np.asarray(y)))


__all__ = ["SolvableRankTransformer", "KWRankEstimator"]
