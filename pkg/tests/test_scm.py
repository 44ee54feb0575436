import json

import numpy as np
import pandas as pd
import pytest

from causal_imitation.diagram import parse_diagram
from causal_imitation.fixtures import fixture, load_query
from causal_imitation.imitation import strategy_contexts
from causal_imitation.scm import (
    DiscreteScm,
    Policy,
    ScmError,
    apply_policy,
    bernoulli_cpt,
    conditional,
    derive_rng,
    deterministic_cpt,
    exact_joint,
    expectation,
    fit_policy_exact,
    fit_policy_from_samples,
    imitation_value,
    marginal,
    random_scm,
    sample,
    scm_from_json,
    scm_to_json,
)


def test_derive_rng_is_keyed():
    a = derive_rng(1, "model", 3).random(4)
    assert np.array_equal(a, derive_rng(1, "model", 3).random(4))
    assert not np.array_equal(a, derive_rng(1, "model", 4).random(4))
    assert not np.array_equal(a, derive_rng(1, "samples", 3).random(4))
    assert not np.array_equal(a, derive_rng(2, "model", 3).random(4))


def test_cpt_validation():
    g = load_query("chain1").diagram
    m = random_scm(g, 0)
    bad = dict(m.cpts)
    bad["X"] = np.array([0.3, 0.3]) if not g.parents("X") else bad["X"] * 0.5
    with pytest.raises(ScmError):
        DiscreteScm(g, {}, bad)
    with pytest.raises(ScmError):
        DiscreteScm(g, {}, {v: t for v, t in m.cpts.items() if v != "X"})
    wrong_shape = dict(m.cpts)
    wrong_shape[g.nodes[-1]] = np.array([0.5, 0.5])
    with pytest.raises(ScmError):
        DiscreteScm(g, {}, wrong_shape)


def test_joint_sums_to_one_and_matches_cpts():
    q = load_query("fig1d")
    m = random_scm(q.diagram, 5)
    joint = exact_joint(m)
    assert joint.shape == (2,) * len(q.diagram.nodes)
    assert joint.sum() == pytest.approx(1.0)
    # P(Z | U1, U2) recovered from the joint
    cond = conditional(m, "Z", ("U1", "U2"), joint)
    assert np.allclose(cond, m.cpts["Z"])


def test_marginal_and_expectation_on_deterministic_model():
    _, m = fixture("xor_confounded")
    assert expectation(m, "Y") == pytest.approx(1.0)
    pz = marginal(m, ["Z"])
    assert pz.shape == (2,)
    assert pz.sum() == pytest.approx(1.0)


def test_deterministic_and_bernoulli_helpers():
    t = deterministic_cpt({"A": 2, "B": 3}, ["A", "B"], 2, lambda a, b: (a + b) % 2)
    assert t.shape == (2, 3, 2)
    assert t[1, 2, 1] == 1.0 and t[1, 2, 0] == 0.0
    assert np.allclose(bernoulli_cpt(0.2), [0.8, 0.2])


def test_conditional_zero_mass_rows_are_uniform():
    q = parse_diagram("obs A X Y\nedge A -> X\nedge X -> Y\norder A X Y\nactions X\ntarget Y\n")
    g = q.diagram
    cpts = {"A": bernoulli_cpt(0.0), "X": random_scm(g, 0).cpts["X"], "Y": random_scm(g, 1).cpts["Y"]}
    m = DiscreteScm(g, {}, cpts)
    table = conditional(m, "X", ("A",))
    assert np.allclose(table[0], cpts["X"][0])
    assert np.allclose(table[1], [0.5, 0.5])


def test_policy_must_use_observed_past():
    q = load_query("fig1c")
    m = random_scm(q.diagram, 0)
    with pytest.raises(ScmError):
        apply_policy(m, Policy({"X1": ("Z",)}, {"X1": np.full((2, 2), 0.5)}))
    lat = next(iter(q.diagram.latent - {"Y"}))
    with pytest.raises(ScmError):
        apply_policy(m, Policy({"X2": (lat,)}, {"X2": np.full((2, 2), 0.5)}))


def test_policy_table_shape_checked():
    with pytest.raises(ScmError):
        Policy({"X": ("A",)}, {"X": np.array([0.5, 0.5])})


def test_expert_policy_reproduces_expert():
    q = parse_diagram("obs A X Y\nedge A -> X\nedge A -> Y\nedge X -> Y\norder A X Y\nactions X\ntarget Y\n")
    for seed in range(5):
        m = random_scm(q.diagram, seed)
        pi = Policy({"X": ("A",)}, {"X": m.cpts["X"]})
        assert imitation_value(m, pi, "Y") == pytest.approx(expectation(m, "Y"))
        # a policy ignoring A is generally biased here
        off = Policy({"X": ()}, {"X": np.array([0.5, 0.5])})
        assert 0.0 <= imitation_value(m, off, "Y") <= 1.0


def test_seq_cloning_matches_expert_on_random_models():
    q = load_query("fig2c")
    ctx = strategy_contexts(q, "seq")
    for seed in range(20):
        m = random_scm(q.diagram, derive_rng(seed, "t"))
        err = abs(expectation(m, "Y") - imitation_value(m, fit_policy_exact(m, ctx), "Y"))
        assert err < 1e-12


def test_random_scm_k_ary_rows():
    g = load_query("fig1c").diagram
    m = random_scm(g, 1, domains={"Z": 3})
    assert m.domains["Z"] == 3
    assert m.cpts["Z"].shape[-1] == 3
    assert np.allclose(m.cpts["Z"].sum(axis=-1), 1.0)


def test_sampling_matches_exact_marginals():
    q = load_query("fig2c")
    m = random_scm(q.diagram, 11)
    data = sample(m, 40000, 3)
    assert list(data.columns) == list(q.diagram.observed)
    for v in q.diagram.observed:
        assert data[v].mean() == pytest.approx(marginal(m, [v])[1], abs=0.015)
    full = sample(m, 10, 3, observed_only=False)
    assert list(full.columns) == list(q.diagram.nodes)


def test_sampling_is_reproducible():
    m = random_scm(load_query("fig1c").diagram, 2)
    pd.testing.assert_frame_equal(sample(m, 100, 9), sample(m, 100, 9))


def test_fit_from_samples_converges_to_exact():
    q = load_query("fig2c")
    m = random_scm(q.diagram, 4)
    ctx = strategy_contexts(q, "seq")
    data = sample(m, 60000, 8)
    est = fit_policy_from_samples(data, ctx, m.domains)
    exact = fit_policy_exact(m, ctx)
    for x in ctx:
        assert np.allclose(est.tables[x], exact.tables[x], atol=0.02)


def test_fit_from_samples_unseen_rows_uniform():
    data = pd.DataFrame({"A": [0, 0, 0], "X": [1, 1, 0]})
    pi = fit_policy_from_samples(data, {"X": ["A"]})
    assert np.allclose(pi.tables["X"][0], [1 / 3, 2 / 3])
    assert np.allclose(pi.tables["X"][1], [0.5, 0.5])


def test_json_round_trip():
    q, m = fixture("cruise_combined")
    text = json.dumps(scm_to_json(q, m))
    q2, m2 = scm_from_json(json.loads(text))
    assert q2.diagram == q.diagram and q2.actions == q.actions
    assert m2.domains == m.domains
    for v in q.diagram.nodes:
        assert np.array_equal(m2.cpts[v], m.cpts[v])


def test_json_rejects_parent_mismatch():
    q, m = fixture("xor_confounded")
    d = scm_to_json(q, m)
    d["cpts"]["Z"]["parents"] = list(reversed(d["cpts"]["Z"]["parents"]))
    with pytest.raises(ScmError):
        scm_from_json(d)


def test_samples_csv_header_in_temporal_order():
    from causal_imitation.scm import samples_to_csv

    q = load_query("fig2c")
    m = random_scm(q.diagram, 0)
    data = sample(m, 5, 1)
    text = samples_to_csv(m, data[list(reversed(data.columns))])
    lines = text.splitlines()
    assert lines[0] == ",".join(q.diagram.observed)
    assert len(lines) == 6
    with pytest.raises(ScmError):
        samples_to_csv(m, data.assign(extra=0))
