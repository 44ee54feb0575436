import numpy as np
import pytest

from causal_imitation import c_component_of, c_components, d_separated, markov_boundary, parse_diagram
from causal_imitation.fixtures import load_query
from causal_imitation.generate import random_diagram
from causal_imitation.oracle import dsep_by_moralization, dsep_by_paths


def _g(text):
    return parse_diagram(text + "\nactions " + text.split()[1] + "\ntarget " + text.split("order")[1].split()[-1]).diagram


CHAIN = _g("obs A B C\nedge A -> B\nedge B -> C\norder A B C")
FORK = _g("obs A B C\nedge B -> A\nedge B -> C\norder B A C")
COLLIDER = _g("obs A B C D\nedge A -> B\nedge C -> B\nedge B -> D\norder A C B D")


def test_chain_fork_collider():
    assert not d_separated(CHAIN, ["A"], ["C"])
    assert d_separated(CHAIN, ["A"], ["C"], ["B"])
    assert not d_separated(FORK, ["A"], ["C"])
    assert d_separated(FORK, ["A"], ["C"], ["B"])
    assert d_separated(COLLIDER, ["A"], ["C"])
    assert not d_separated(COLLIDER, ["A"], ["C"], ["B"])
    # conditioning on a descendant of the collider also opens it
    assert not d_separated(COLLIDER, ["A"], ["C"], ["D"])


def test_overlapping_sets_rejected():
    with pytest.raises(ValueError):
        d_separated(CHAIN, ["A"], ["A"])
    with pytest.raises(ValueError):
        d_separated(CHAIN, ["A"], ["C"], ["A"])


def test_empty_side_is_separated():
    assert d_separated(CHAIN, [], ["C"])


def test_unknown_node_raises():
    with pytest.raises(ValueError):
        d_separated(CHAIN, ["Q"], ["C"])


def test_three_way_agreement_on_random_graphs():
    rng = np.random.default_rng(7)
    for _ in range(150):
        n = int(rng.integers(2, 9))
        g = random_diagram(rng, n, n_latent=int(rng.integers(0, 3)), edge_prob=0.4)
        nodes = list(g.nodes)
        for _ in range(6):
            a = {nodes[int(rng.integers(n))]}
            b = {nodes[int(rng.integers(n))]} - a
            z = {v for v in nodes if rng.random() < 0.3} - a - b
            if not b:
                continue
            want = dsep_by_paths(g, a, b, z)
            assert d_separated(g, a, b, z) == want
            assert dsep_by_moralization(g, a, b, z) == want


def test_c_components_fig1d():
    q = load_query("fig1d")
    part = c_components(q.diagram)
    assert set(part.components) == {frozenset({"X1", "Z"}), frozenset({"X2"})}
    assert part.component("Z") == {"X1", "Z"}
    assert part.witness("X1", "Z") == ["X1", "U1", "Z"]
    assert part.witness("X1", "X2") is None


def test_c_component_follows_latent_chains():
    g = parse_diagram(
        "obs A B Y\nlat U V\nedge U -> A\nedge U -> V\nedge V -> B\nedge A -> Y\nedge B -> Y\n"
        "order U V A B Y\nactions A\ntarget Y\n"
    ).diagram
    assert c_component_of(g, ["A"]) == {"A", "B"}
    # an observed node in between breaks the component
    g2 = parse_diagram(
        "obs A M B Y\nlat U\nedge U -> A\nedge U -> M\nedge M -> B\nedge B -> Y\norder U A M B Y\nactions A\ntarget Y\n"
    ).diagram
    assert c_component_of(g2, ["A"]) == {"A", "M"}
    assert c_component_of(g2, ["B"]) == {"B"}


def test_markov_boundary_is_separating():
    rng = np.random.default_rng(3)
    for _ in range(100):
        g = random_diagram(rng, int(rng.integers(3, 9)), n_latent=int(rng.integers(0, 3)), edge_prob=0.4)
        obs = list(g.observed)
        if len(obs) < 2:
            continue
        s = {obs[int(rng.integers(len(obs)))]}
        mb = markov_boundary(g, s)
        assert not (mb & s)
        assert mb <= set(obs)
        rest = set(obs) - s - mb
        if rest:
            assert dsep_by_paths(g, s, rest, mb)


def test_markov_boundary_fig1d():
    g = load_query("fig1d").diagram
    assert markov_boundary(g, ["X1"]) == {"Z"}
    assert markov_boundary(g, ["X2"]) == {"Z"}
