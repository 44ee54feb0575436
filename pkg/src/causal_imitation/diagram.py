"""Causal diagrams with observed/latent nodes and a fixed temporal order.

Diagrams are immutable values: every mutilation returns a new diagram.  Node
identity is by name, and the node tuple *is* the temporal order.
"""

from __future__ import annotations

import graphlib
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

__all__ = [
    "CausalDiagram",
    "DiagramError",
    "ImitationQuery",
    "after",
    "ancestral_graph",
    "before",
    "effective_children",
    "effective_parents",
    "mutilate",
    "parse_diagram",
    "serialize_query",
]

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\[\]']*$")


class DiagramError(ValueError):
    """Invalid diagram, query or graph file.

    ``line`` is the 1-based line number in the source file, when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class CausalDiagram:
    """A DAG over observed and latent nodes.

    ``nodes`` lists every node in temporal order; ``latent`` is the subset the
    imitator cannot measure.  Construction validates that the order is a
    topological extension of ``edges``.
    """

    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    latent: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", frozenset((a, b) for a, b in self.edges))
        object.__setattr__(self, "latent", frozenset(self.latent))
        seen = set()
        for v in self.nodes:
            if v in seen:
                raise DiagramError(f"duplicate node {v!r}")
            seen.add(v)
        for v in self.latent:
            if v not in seen:
                raise DiagramError(f"undeclared latent node {v!r}")
        for a, b in self.edges:
            for v in (a, b):
                if v not in seen:
                    raise DiagramError(f"edge {a} -> {b} uses undeclared node {v!r}")
            if a == b:
                raise DiagramError(f"self loop on {a!r}")
        sorter = graphlib.TopologicalSorter({v: () for v in self.nodes})
        for a, b in self.edges:
            sorter.add(b, a)
        try:
            tuple(sorter.static_order())
        except graphlib.CycleError as exc:
            raise DiagramError(f"directed cycle through {exc.args[1]}") from None
        pos = self.position
        for a, b in sorted(self.edges):
            if pos[a] >= pos[b]:
                raise DiagramError(f"order not topological: {a} -> {b} but {b} precedes {a}")

    # -- basic structure -------------------------------------------------

    @cached_property
    def position(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    @cached_property
    def _parents(self) -> dict[str, tuple[str, ...]]:
        pa: dict[str, list[str]] = {v: [] for v in self.nodes}
        for a, b in self.edges:
            pa[b].append(a)
        pos = self.position
        return {v: tuple(sorted(ps, key=pos.__getitem__)) for v, ps in pa.items()}

    @cached_property
    def _children(self) -> dict[str, tuple[str, ...]]:
        ch: dict[str, list[str]] = {v: [] for v in self.nodes}
        for a, b in self.edges:
            ch[a].append(b)
        pos = self.position
        return {v: tuple(sorted(cs, key=pos.__getitem__)) for v, cs in ch.items()}

    @cached_property
    def observed(self) -> tuple[str, ...]:
        return tuple(v for v in self.nodes if v not in self.latent)

    def __contains__(self, v: object) -> bool:
        return v in self.position

    def __iter__(self) -> Iterator[str]:
        return iter(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def check(self, vs: Iterable[str]) -> frozenset[str]:
        """Return ``vs`` as a frozenset, raising on unknown nodes."""
        if isinstance(vs, str):
            vs = (vs,)
        out = frozenset(vs)
        unknown = out - self.position.keys()
        if unknown:
            raise DiagramError(f"unknown node(s): {', '.join(sorted(unknown))}")
        return out

    def sort(self, vs: Iterable[str]) -> tuple[str, ...]:
        """Order nodes by temporal position."""
        return tuple(sorted(vs, key=self.position.__getitem__))

    def is_latent(self, v: str) -> bool:
        return v in self.latent

    def parents(self, v: str) -> tuple[str, ...]:
        return self._parents[v]

    def children(self, v: str) -> tuple[str, ...]:
        return self._children[v]

    def ancestors(self, vs: Iterable[str], inclusive: bool = True) -> frozenset[str]:
        start = self.check(vs)
        seen = set(start)
        queue = deque(start)
        while queue:
            for p in self._parents[queue.popleft()]:
                if p not in seen:
                    seen.add(p)
                    queue.append(p)
        return frozenset(seen if inclusive else seen - start)

    def descendants(self, vs: Iterable[str], inclusive: bool = True) -> frozenset[str]:
        start = self.check(vs)
        seen = set(start)
        queue = deque(start)
        while queue:
            for c in self._children[queue.popleft()]:
                if c not in seen:
                    seen.add(c)
                    queue.append(c)
        return frozenset(seen if inclusive else seen - start)

    # -- derived diagrams ------------------------------------------------

    def subgraph(self, keep: Iterable[str]) -> CausalDiagram:
        keep = self.check(keep)
        return CausalDiagram(
            nodes=tuple(v for v in self.nodes if v in keep),
            edges=frozenset((a, b) for a, b in self.edges if a in keep and b in keep),
            latent=self.latent & keep,
        )

    def with_edges(self, edges: Iterable[tuple[str, str]]) -> CausalDiagram:
        return CausalDiagram(self.nodes, frozenset(edges), self.latent)

    def reveal(self, vs: Iterable[str]) -> CausalDiagram:
        """Copy with ``vs`` marked observed."""
        return CausalDiagram(self.nodes, self.edges, self.latent - self.check(vs))


def before(g: CausalDiagram | ImitationQuery, v: str) -> frozenset[str]:
    """Nodes strictly earlier than ``v`` in temporal order."""
    g = _diagram(g)
    g.check(v)
    return frozenset(g.nodes[: g.position[v]])


def after(g: CausalDiagram | ImitationQuery, v: str) -> frozenset[str]:
    """Nodes strictly later than ``v`` in temporal order."""
    g = _diagram(g)
    g.check(v)
    return frozenset(g.nodes[g.position[v] + 1 :])


def mutilate(g: CausalDiagram, underline: Iterable[str] = (), overline: Iterable[str] = ()) -> CausalDiagram:
    """Remove edges leaving ``underline`` and edges entering ``overline``."""
    out_cut = g.check(underline)
    in_cut = g.check(overline)
    return g.with_edges((a, b) for a, b in g.edges if a not in out_cut and b not in in_cut)


def ancestral_graph(g: CausalDiagram, y: str | Iterable[str]) -> CausalDiagram:
    """Induced subgraph on the (inclusive) ancestors of ``y``."""
    return g.subgraph(g.ancestors(y))


def _latent_walk(g: CausalDiagram, s: frozenset[str], step) -> frozenset[str]:
    found = set()
    seen = set()
    queue = deque(s)
    while queue:
        v = queue.popleft()
        for w in step(v):
            if w in g.latent:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
            else:
                found.add(w)
    return frozenset(found)


def effective_parents(g: CausalDiagram, s: Iterable[str], inclusive: bool = False) -> frozenset[str]:
    """Observed nodes with a directed path into ``s`` whose interior is latent.

    ``inclusive=True`` gives the capitalized variant that also contains ``s``.
    """
    s = g.check(s)
    found = _latent_walk(g, s, g.parents)
    return found | s if inclusive else found - s


def effective_children(g: CausalDiagram, s: Iterable[str], inclusive: bool = False) -> frozenset[str]:
    """Observed nodes reached from ``s`` by a directed path whose interior is latent."""
    s = g.check(s)
    found = _latent_walk(g, s, g.children)
    return found | s if inclusive else found - s


@dataclass(frozen=True)
class ImitationQuery:
    """A diagram plus ordered actions and the imitation target."""

    diagram: CausalDiagram
    actions: tuple[str, ...]
    target: str
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        g = self.diagram
        if not self.actions:
            raise DiagramError("empty actions")
        if len(set(self.actions)) != len(self.actions):
            raise DiagramError("duplicate action")
        g.check(self.actions)
        g.check(self.target)
        for x in self.actions:
            if x in g.latent:
                raise DiagramError(f"action {x!r} is not observed")
        pos = [g.position[x] for x in self.actions]
        if pos != sorted(pos):
            raise DiagramError("actions not listed in temporal order")
        if self.target in self.actions:
            raise DiagramError(f"target {self.target!r} is also an action")


def _diagram(g) -> CausalDiagram:
    return g.diagram if isinstance(g, ImitationQuery) else g


# -- .cg text format ------------------------------------------------------


def parse_diagram(text: str, name: str = "") -> ImitationQuery:
    """Parse ``.cg`` text into a validated :class:`ImitationQuery`.

    Bidirected edges ``A <-> B`` become a fresh latent ``_u_A_B_k`` with
    children ``A`` and ``B``, placed in the order just before the earlier
    endpoint.
    """
    declared: dict[str, bool] = {}  # name -> latent
    decl_line: dict[str, int] = {}
    directed: list[tuple[str, str, int]] = []
    bidirected: list[tuple[str, str, int]] = []
    order: list[str] | None = None
    order_line = 0
    actions: list[str] | None = None
    actions_line = 0
    target: str | None = None
    target_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        args = rest.split()
        if keyword in ("obs", "lat"):
            if not args:
                raise DiagramError(f"'{keyword}' needs at least one name", lineno)
            for v in args:
                if not _NAME.match(v):
                    raise DiagramError(f"bad node name {v!r}", lineno)
                if v in declared:
                    raise DiagramError(f"duplicate node {v!r}", lineno)
                declared[v] = keyword == "lat"
                decl_line[v] = lineno
        elif keyword == "edge":
            if len(args) != 3 or args[1] not in ("->", "<->"):
                raise DiagramError("expected 'edge A -> B' or 'edge A <-> B'", lineno)
            a, arrow, b = args
            (directed if arrow == "->" else bidirected).append((a, b, lineno))
        elif keyword == "order":
            if order is not None:
                raise DiagramError("more than one 'order' line", lineno)
            order, order_line = args, lineno
        elif keyword == "actions":
            if actions is not None:
                raise DiagramError("more than one 'actions' line", lineno)
            actions, actions_line = args, lineno
        elif keyword == "target":
            if target is not None or len(args) != 1:
                raise DiagramError("expected exactly one 'target NAME' line", lineno)
            target, target_line = args[0], lineno
        else:
            raise DiagramError(f"unknown keyword {keyword!r}", lineno)

    for a, b, lineno in directed + bidirected:
        for v in (a, b):
            if v not in declared:
                raise DiagramError(f"undeclared node {v!r} in edge", lineno)
    if order is None:
        raise DiagramError("missing 'order' line")
    seen = set()
    for v in order:
        if v not in declared:
            raise DiagramError(f"undeclared node {v!r} in order", order_line)
        if v in seen:
            raise DiagramError(f"node {v!r} repeated in order", order_line)
        seen.add(v)
    missing = [v for v in declared if v not in seen]
    if missing:
        raise DiagramError(f"order not total: missing {', '.join(missing)}", order_line)
    if actions is None:
        raise DiagramError("missing 'actions' line")
    if target is None:
        raise DiagramError("missing 'target' line")
    for v in actions:
        if v not in declared:
            raise DiagramError(f"undeclared node {v!r} in actions", actions_line)
    if target not in declared:
        raise DiagramError(f"undeclared node {target!r} in target", target_line)

    edges = {(a, b) for a, b, _ in directed}
    latent = {v for v, lat in declared.items() if lat}
    order = list(order)
    pos = {v: i for i, v in enumerate(order)}
    for a, b, lineno in directed:
        if pos[a] >= pos[b]:
            raise DiagramError(f"order not topological: {a} -> {b}", order_line)
    pair_count: dict[tuple[str, str], int] = {}
    for a, b, lineno in bidirected:
        if a == b:
            raise DiagramError("bidirected self loop", lineno)
        k = pair_count.get((a, b), 0)
        pair_count[(a, b)] = k + 1
        u = f"_u_{a}_{b}_{k}"
        while u in pos:
            k += 1
            pair_count[(a, b)] = k + 1
            u = f"_u_{a}_{b}_{k}"
        first = min(pos[a], pos[b])
        order.insert(first, u)
        pos = {v: i for i, v in enumerate(order)}
        latent.add(u)
        edges.add((u, a))
        edges.add((u, b))

    try:
        g = CausalDiagram(tuple(order), frozenset(edges), frozenset(latent))
    except DiagramError as exc:
        raise DiagramError(str(exc), order_line) from None
    try:
        return ImitationQuery(g, tuple(actions), target, name=name)
    except DiagramError as exc:
        line = target_line if "target" in str(exc) else actions_line
        raise DiagramError(str(exc), line) from None


def serialize_query(q: ImitationQuery) -> str:
    """Emit ``.cg`` text; declaration order equals temporal order."""
    g = q.diagram
    lines = []
    for v in g.nodes:
        lines.append(f"{'lat' if v in g.latent else 'obs'} {v}")
    pos = g.position
    for a, b in sorted(g.edges, key=lambda e: (pos[e[0]], pos[e[1]])):
        lines.append(f"edge {a} -> {b}")
    lines.append("order " + " ".join(g.nodes))
    lines.append("actions " + " ".join(q.actions))
    lines.append(f"target {q.target}")
    return "\n".join(lines) + "\n"
