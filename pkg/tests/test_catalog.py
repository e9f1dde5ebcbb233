import numpy as np
from sklearn.base import clone

from solvrank.catalog import PROVENANCE, catalog, decorate, tower_family
from solvrank.estimators import KWRankEstimator, SolvableRankTransformer
from solvrank.func import Poly, SinSqExample, func_to_json, norm_certificates
from solvrank.removed import solvable_rank
from solvrank.tree import limsup_rank, render_tree


def test_catalog_expectations_hold():
    for e in catalog():
        assert set(e.provenance.values()) <= set(PROVENANCE)
        if e.tree is not None and e.limsup is not None:
            assert limsup_rank(e.tree) == e.limsup
        assert solvable_rank(e.func) == e.sv, e.name


def test_tower_family_deterministic():
    a = [render_tree(t) for t in tower_family(20, seed=4)]
    b = [render_tree(t) for t in tower_family(20, seed=4)]
    assert a == b and len(set(a)) > 10


def test_decorate_keeps_rank():
    import random

    for t in tower_family(14, seed=1):
        d = decorate(t, random.Random(9), p=1.0)
        assert limsup_rank(d) == limsup_rank(t)


def test_norms_of_catalog_trees():
    for e in catalog():
        if e.tree is not None and "westrick" not in e.name:
            s, d = norm_certificates(e.func)
            assert s < 2 and d < 2


def test_transformer():
    t = SolvableRankTransformer().fit([SinSqExample()])
    out = t.transform([SinSqExample(), func_to_json(Poly((0, 0, 1)))])
    assert out.shape == (2, 1) and list(out[:, 0]) == ["2", "1"]
    assert clone(t).get_params() == {"cap": None}


def test_kw_estimator():
    est = KWRankEstimator(grid_step="1/32", max_stage=3)
    est.fit([Poly((0, 0, 1))])
    pred = est.predict([Poly((0, 0, 1)), SinSqExample()])
    assert np.array_equal(pred, [1, 2])
    assert est.score([Poly((0, 0, 1)), SinSqExample()], [1, 2]) == 1.0
    assert clone(est).get_params()["grid_step"] == "1/32"
