"""XOR-chain counterexample models for actions confounded with the target."""

from __future__ import annotations

from collections import deque
from functools import reduce
from operator import xor

import numpy as np

from .diagram import CausalDiagram, ImitationQuery
from .imitation import analysis_graph
from .scm import DiscreteScm, ScmError, bernoulli_cpt, deterministic_cpt

__all__ = ["confounding_chain", "chain_witness"]


def confounding_chain(q: ImitationQuery, x: str) -> list[str]:
    """Shortest alternating chain ``[Y, U1, V1, U2, ..., Un, X]``.

    Each ``U`` is a latent with direct edges into both neighbours.  The walk
    stops at the first action it meets, so the returned endpoint may be an
    action other than ``x`` when ``x`` is only reachable through one.
    """
    if x not in q.actions:
        raise ScmError(f"{x!r} is not an action")
    gy = analysis_graph(q)
    y = q.target
    if x not in gy:
        raise ScmError(f"{x!r} is not an ancestor of {y!r}")
    actions = set(q.actions)
    prev: dict[str, tuple[str, str] | None] = {y: None}
    queue = deque([y])
    reached = []
    while queue:
        v = queue.popleft()
        if v in actions:
            reached.append(v)
            continue
        for u in gy.parents(v):
            if u not in gy.latent or u == y:
                continue
            for w in gy.children(u):
                if w in prev or (w in gy.latent and w != y):
                    continue
                prev[w] = (v, u)
                queue.append(w)
    if not reached:
        raise ScmError(f"no latent confounding chain links {x!r} to {y!r}; hypothesis not met")
    end = x if x in prev else reached[0]
    chain = [end]
    while prev[chain[-1]] is not None:
        v, u = prev[chain[-1]]
        chain.extend([u, v])
    return chain[::-1]


def _path_to(g: CausalDiagram, start: str, goal: set[str], banned: set[str]) -> list[str]:
    prev: dict[str, str | None] = {start: None}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        if v in goal and v != start:
            path = [v]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for c in g.children(v):
            if c not in prev and c not in banned:
                prev[c] = v
                queue.append(c)
    raise ScmError(f"no directed path from {start!r} to the target avoiding the chain latents")


def chain_witness(q: ImitationQuery, x: str) -> DiscreteScm:
    """Binary model where the expert always gets Y = 1 but no imitator can.

    Latents on the confounding chain are fair coins.  Each chain node XORs its
    two chain latents with its inputs from a scaffolding tree rooted at Y, the
    action copies the last chain latent, and Y checks the XOR arriving through
    the tree against the first chain latent.  Everything off the tree is the
    constant 1.  Tree nodes only read their tree parents, so every chain
    latent reaches Y exactly twice and cancels.
    """
    chain = confounding_chain(q, x)
    g = q.diagram
    gy = analysis_graph(q)
    y = chain[0]
    lats = chain[1::2]
    inner = chain[2:-1:2]
    end = chain[-1]

    banned = set(lats)
    tree_parent: dict[str, list[str]] = {}
    on_tree = {y}
    for v in sorted(set(inner) | {end}, key=g.position.__getitem__, reverse=True):
        if v in on_tree:
            continue
        path = _path_to(gy, v, on_tree, banned)
        for a, b in zip(path, path[1:]):
            tree_parent.setdefault(b, []).append(a)
        on_tree.update(path)

    chain_inputs: dict[str, list[str]] = {y: [lats[0]]}
    for k, v in enumerate(inner):
        chain_inputs[v] = [lats[k], lats[k + 1]]
    chain_inputs.setdefault(end, []).append(lats[-1])

    domains = {v: 2 for v in g.nodes}
    cpts = {}
    for v in g.nodes:
        parents = g.parents(v)
        shape = tuple(2 for _ in parents)
        if v in banned:
            cpts[v] = np.broadcast_to(bernoulli_cpt(0.5), shape + (2,)).copy()
        elif v == y:
            first = parents.index(lats[0])
            others = [parents.index(p) for p in tree_parent.get(v, [])]
            cpts[v] = deterministic_cpt(
                domains, parents, 2,
                lambda *vals, f=first, o=others: int(vals[f] == reduce(xor, (vals[i] for i in o), 0)),
            )
        elif v in on_tree:
            idx = [parents.index(p) for p in chain_inputs.get(v, []) + tree_parent.get(v, [])]
            cpts[v] = deterministic_cpt(
                domains, parents, 2, lambda *vals, ix=idx: reduce(xor, (vals[i] for i in ix), 0)
            )
        else:
            cpts[v] = deterministic_cpt(domains, parents, 2, lambda *vals: 1)
    return DiscreteScm(g, domains, cpts)
