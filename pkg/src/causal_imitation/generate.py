"""Seeded random diagrams and imitation queries for property tests."""

from __future__ import annotations

import numpy as np

from .diagram import CausalDiagram, ImitationQuery

__all__ = ["random_diagram", "random_query"]


def random_diagram(
    rng: np.random.Generator, n_nodes: int, n_latent: int = 0, edge_prob: float = 0.35
) -> CausalDiagram:
    """DAG whose temporal order is its node order ``V0, V1, ...``.

    The first ``n_latent`` positions are not special: latent nodes are a
    random subset, so they can sit anywhere in the order.
    """
    if not 0 <= n_latent <= n_nodes:
        raise ValueError(f"n_latent must lie in [0, {n_nodes}]")
    names = [f"V{i}" for i in range(n_nodes)]
    edges = {
        (names[i], names[j])
        for i in range(n_nodes)
        for j in range(i + 1, n_nodes)
        if rng.random() < edge_prob
    }
    latent = frozenset(rng.choice(names, size=n_latent, replace=False).tolist()) if n_latent else frozenset()
    return CausalDiagram(tuple(names), frozenset(edges), latent)


def random_query(
    rng: np.random.Generator,
    max_observed: int = 6,
    max_latent: int = 3,
    max_actions: int = 3,
    edge_prob: float = 0.3,
    confounder_prob: float = 0.55,
    target_edge_prob: float = 0.5,
) -> ImitationQuery:
    """Random query with observed nodes ``O*``, latents ``U*`` and a final target ``Y``.

    Latents and the target get higher in-edge probabilities so that
    confounding is common and roughly a fifth of the queries are not
    imitable.  The target is latent or observed with equal odds.
    """
    n_obs = int(rng.integers(2, max_observed + 1))
    n_lat = int(rng.integers(0, max_latent + 1))
    obs = [f"O{i}" for i in range(n_obs)]
    lats = [f"U{i}" for i in range(n_lat)]
    order = [str(v) for v in rng.permutation(obs + lats)] + ["Y"]
    edges = set()
    for i, a in enumerate(order):
        for b in order[i + 1 :]:
            if a in lats:
                p = confounder_prob
            else:
                p = target_edge_prob if b == "Y" else edge_prob
            if rng.random() < p:
                edges.add((a, b))
    k = int(rng.integers(1, max_actions + 1))
    chosen = set(rng.choice(obs, size=min(k, n_obs), replace=False).tolist())
    latent = set(lats)
    if rng.random() < 0.5:
        latent.add("Y")
    g = CausalDiagram(tuple(order), frozenset(edges), frozenset(latent))
    return ImitationQuery(g, tuple(v for v in order if v in chosen), "Y")
