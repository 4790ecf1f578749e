"""Serialization surfaces: structured text loaders and JSON report emitters."""

import json
from fractions import Fraction

import numpy as np
import pytest

from scfold import branched_integration as bi
from scfold import perturbation as pert
from scfold.errors import ConfigError
from scfold.groupoids import (
    EpGroupoid,
    FiniteGroup,
    Functor,
    is_equivalence,
    report_json,
)
from scfold.sc_calculus import ScDomain
from scfold.sc_core import FiniteDimScale, PartialQuadrant


def small_model():
    base = FiniteDimScale(1, max_level=2)
    dom = ScDomain(PartialQuadrant(base), center=np.zeros(1), radii=(1.0,) * 3)
    chart = pert.BundleChart("main", dom, FiniteDimScale(1, max_level=2))
    return pert.StrongBundleModel([chart])


def test_multisection_roundtrip():
    model = small_model()
    lam = pert.Multisection(model, [
        (pert.constant_branch_section(model, [0.25]), Fraction(1, 3)),
        (pert.constant_branch_section(model, [-0.5]), Fraction(2, 3)),
    ])
    text = lam.describe()
    loaded = pert.multisection_from_config(model, text_to_cfg(text))
    for v in (0.25, -0.5, 0.1):
        e = model.element("main", np.zeros(1), 1, np.array([v]), 1)
        assert loaded.eval(e) == lam.eval(e)


def text_to_cfg(text):
    cfg = json.loads(text)
    for row in cfg["branches"]:
        row.pop("name", None)
    return cfg


def test_multisection_config_rejects_unknown_kind():
    model = small_model()
    with pytest.raises(ConfigError, match="kind"):
        pert.multisection_from_config(model, {
            "schema": "multisection/1",
            "branches": [{"kind": "mystery", "weight": "1"}],
        })


def test_multisection_eval_alias():
    model = small_model()
    lam = pert.Multisection.zero(model)
    e = model.element("main", np.zeros(1), 1, np.zeros(1), 1)
    assert pert.multisection_eval(lam, e) == Fraction(1)


def test_form_from_config_matches_direct():
    cfg = {
        "schema": "form/1",
        "n_vars": 2,
        "degree": 1,
        "terms": {"1": {"1,0": 1.0}},  # x dy
    }
    form = bi.form_from_config(cfg)
    direct = bi.PolynomialForm(2, 1, {(1,): bi.Polynomial.coordinate(2, 0)})
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = rng.standard_normal(2)
        v = rng.standard_normal(2)
        assert form(x, v) == pytest.approx(direct(x, v), abs=1e-14)


def test_form_config_unknown_key():
    with pytest.raises(ConfigError):
        bi.form_from_config({"n_vars": 2, "degree": 1, "terms": {}, "junk": 1})


def test_groupoid_report_json():
    group = FiniteGroup.cyclic(2)

    def reflect(g, cid, c):
        return cid, (-1.0) ** g * np.asarray(c, dtype=float)

    x = EpGroupoid.from_translation_action(
        group, [("line", np.array([0.0])), ("line", np.array([1.0]))], reflect)
    rep = is_equivalence(Functor.identity(x))
    payload = json.loads(report_json(rep))
    assert payload["passed"] is True
    assert "orbit_bijection_ok" in payload


def test_morphism_invariance_of_rotation_symmetric_form():
    # the area form is invariant under rotations; a generic 1-form is not
    area = bi.PolynomialForm(2, 2, {(0, 1): bi.Polynomial.constant(2, 1.0)})
    th = 2 * np.pi / 3
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    rng = np.random.default_rng(5)
    pairs = []
    for _ in range(10):
        x = rng.standard_normal(2)
        vs = [rng.standard_normal(2) for _ in range(2)]
        pairs.append((x, vs, rot @ x, [rot @ v for v in vs]))
    assert bi.morphism_invariance_residual(area, pairs) <= 1e-12

    skew = bi.PolynomialForm(2, 1, {(0,): bi.Polynomial.constant(2, 1.0)})
    pairs1 = []
    for _ in range(10):
        x = rng.standard_normal(2)
        v = rng.standard_normal(2)
        pairs1.append((x, [v], rot @ x, [rot @ v]))
    assert bi.morphism_invariance_residual(skew, pairs1) > 1e-3
