"""d-separation, confounded components and Markov boundaries."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .diagram import CausalDiagram, DiagramError, effective_children, effective_parents

__all__ = [
    "CComponentPartition",
    "c_component_of",
    "c_components",
    "d_separated",
    "markov_boundary",
]


def d_separated(g: CausalDiagram, a: Iterable[str], b: Iterable[str], given: Iterable[str] = ()) -> bool:
    """True iff every path between ``a`` and ``b`` is blocked by ``given``.

    Reachability ("Bayes ball") over the full graph; latent nodes are ordinary
    nodes.  A collider is open when it is an ancestor of ``given`` (inclusive).
    """
    a, b, given = g.check(a), g.check(b), g.check(given)
    if a & b or a & given or b & given:
        raise DiagramError("d_separated: a, b and given must be pairwise disjoint")
    if not a or not b:
        return True
    return not (_reachable(g, a, given) & b)


def _reachable(g: CausalDiagram, sources: frozenset[str], given: frozenset[str]) -> set[str]:
    open_colliders = g.ancestors(given)
    reached = set()
    visited = set()
    # direction: True = arrived from a child (moving up), False = from a parent
    stack = [(s, True) for s in sources]
    while stack:
        v, up = stack.pop()
        if (v, up) in visited:
            continue
        visited.add((v, up))
        if v not in given:
            reached.add(v)
        if up:
            if v in given:
                continue
            stack.extend((p, True) for p in g.parents(v))
            stack.extend((c, False) for c in g.children(v))
        else:
            if v not in given:
                stack.extend((c, False) for c in g.children(v))
            if v in open_colliders:
                stack.extend((p, True) for p in g.parents(v))
    return reached


@dataclass(frozen=True)
class CComponentPartition:
    """Maximal c-components over the observed nodes of a diagram.

    ``links`` keeps, for every latent node, the observed nodes it reaches
    through latent-only directed paths.  Two observed nodes sharing a link are
    confounded; :meth:`witness` chains links into an explicit connecting path.
    """

    components: tuple[frozenset[str], ...]
    member_index: dict[str, int]
    links: tuple[tuple[str, frozenset[str]], ...]

    def component(self, v: str) -> frozenset[str]:
        return self.components[self.member_index[v]]

    def witness(self, a: str, b: str) -> list[str] | None:
        """Alternating path ``[a, L1, n1, L2, ..., b]`` of observed nodes and the
        latents confounding consecutive pairs, or None when not confounded."""
        if self.member_index.get(a) is None or self.member_index.get(a) != self.member_index.get(b):
            return None
        if a == b:
            return [a]
        prev: dict[str, tuple[str, str] | None] = {a: None}
        queue = deque([a])
        while queue:
            v = queue.popleft()
            for latent, members in self.links:
                if v not in members:
                    continue
                for w in sorted(members):
                    if w not in prev:
                        prev[w] = (v, latent)
                        queue.append(w)
        path = [b]
        while prev[path[-1]] is not None:
            v, latent = prev[path[-1]]
            path.extend([latent, v])
        return path[::-1]


def c_components(g: CausalDiagram) -> CComponentPartition:
    parent = {v: v for v in g.observed}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    links = []
    for u in g.nodes:
        if u not in g.latent:
            continue
        members = effective_children(g, [u])
        if not members:
            continue
        links.append((u, members))
        first, *rest = g.sort(members)
        for w in rest:
            ra, rb = find(first), find(w)
            if ra != rb:
                parent[rb] = ra
    groups: dict[str, set[str]] = {}
    for v in g.observed:
        groups.setdefault(find(v), set()).add(v)
    comps = sorted((frozenset(s) for s in groups.values()), key=lambda s: min(g.position[v] for v in s))
    index = {v: i for i, c in enumerate(comps) for v in c}
    return CComponentPartition(tuple(comps), index, tuple(links))


def c_component_of(g: CausalDiagram, s: Iterable[str], partition: CComponentPartition | None = None) -> frozenset[str]:
    """Union of the maximal c-components that intersect ``s``."""
    s = g.check(s)
    if s & g.latent:
        raise DiagramError(f"latent node(s) in c_component_of: {', '.join(sorted(s & g.latent))}")
    partition = partition or c_components(g)
    out: set[str] = set()
    for v in s:
        out |= partition.component(v)
    return frozenset(out)


def markov_boundary(g: CausalDiagram, s: Iterable[str]) -> frozenset[str]:
    """Markov boundary of an observed set: ``Pa+(C(Ch+(s))) \\ s``."""
    s = g.check(s)
    if s & g.latent:
        raise DiagramError(f"latent node(s) in markov_boundary: {', '.join(sorted(s & g.latent))}")
    closure = effective_children(g, s, inclusive=True)
    comp = c_component_of(g, closure)
    return effective_parents(g, comp, inclusive=True) - s
