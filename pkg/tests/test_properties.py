"""Property checks over generated diagrams and queries."""

from dataclasses import replace
from itertools import combinations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_imitation.diagram import parse_diagram, serialize_query
from causal_imitation.generate import random_diagram, random_query
from causal_imitation.imitation import construct_plan, find_ox, verify_sequential_pi_backdoor
from causal_imitation.oracle import dsep_by_moralization, dsep_by_paths, enumerate_def3
from causal_imitation.scm import derive_rng, expectation, fit_policy_exact, imitation_value, random_scm
from causal_imitation.separation import c_components, d_separated

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_dsep_symmetric_and_matches_oracles(seed):
    rng = np.random.default_rng(seed)
    g = random_diagram(rng, int(rng.integers(2, 8)), int(rng.integers(0, 3)), 0.4)
    nodes = list(g.nodes)
    a, b = rng.choice(nodes, size=2, replace=False)
    z = {v for v in nodes if v not in (a, b) and rng.random() < 0.35}
    want = dsep_by_paths(g, [a], [b], z)
    assert d_separated(g, [a], [b], z) == want
    assert d_separated(g, [b], [a], z) == want
    assert dsep_by_moralization(g, [a], [b], z) == want


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_c_components_partition_observed(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    g = random_diagram(rng, n, int(rng.integers(0, min(n, 3) + 1)), 0.35)
    comps = c_components(g).components
    seen = [v for c in comps for v in c]
    assert sorted(seen) == sorted(g.observed)


@settings(max_examples=120, deadline=None)
@given(seeds)
def test_verdict_matches_oracle_and_plan_verifies(seed):
    q = random_query(np.random.default_rng(seed))
    v = construct_plan(q)
    assert v.imitable == (enumerate_def3(q) is not None)
    if v.imitable:
        assert verify_sequential_pi_backdoor(q, v.plan.contexts).passed


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_ox_monotone_in_actions(seed):
    q = random_query(np.random.default_rng(seed))
    full = find_ox(q).keys()
    for k in range(1, len(q.actions)):
        for sub in combinations(q.actions, k):
            assert find_ox(replace(q, actions=sub)).keys() <= full


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_plan_clones_expert_exactly(seed):
    q = random_query(np.random.default_rng(seed), max_observed=5, max_latent=2)
    v = construct_plan(q)
    if not v.imitable:
        return
    m = random_scm(q.diagram, derive_rng(seed, "prop"))
    pi = fit_policy_exact(m, v.plan.contexts)
    assert abs(expectation(m, q.target) - imitation_value(m, pi, q.target)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_serialize_round_trip(seed):
    q = random_query(np.random.default_rng(seed))
    back = parse_diagram(serialize_query(q))
    assert back.diagram == q.diagram
    assert construct_plan(back).imitable == construct_plan(q).imitable
