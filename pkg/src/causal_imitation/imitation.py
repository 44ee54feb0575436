"""Sequential pi-backdoor: verification, FindOx, and adjustment-plan synthesis.

All graph work for FindOx happens in the ancestral graph of the target, with the
target itself treated as a visible node (it takes part in c-components and
effective-child sets even when the imitator cannot measure it).
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .diagram import (
    CausalDiagram,
    DiagramError,
    ImitationQuery,
    ancestral_graph,
    before,
    effective_children,
    effective_parents,
    mutilate,
)
from .separation import CComponentPartition, c_components, d_separated, markov_boundary

__all__ = [
    "AdjustmentPlan",
    "Condition",
    "Method",
    "OxMap",
    "SequentialReport",
    "Verdict",
    "analysis_graph",
    "boundary_actions",
    "build_g_prime",
    "construct_plan",
    "find_ox",
    "has_valid_adjustment",
    "single_action_pi_backdoor",
    "strategy_contexts",
    "verify_pearl_sequential_backdoor",
    "verify_sequential_pi_backdoor",
]

Contexts = Mapping[str, Iterable[str]]


class Condition(enum.IntEnum):
    BACKDOOR = 1
    NON_ANCESTOR = 2


class Method(str, enum.Enum):
    SEQ_PI_BACKDOOR = "seq"
    PI_BACKDOOR = "pi"
    OBSERVED_PARENTS = "parents"
    ALL_OBSERVED = "all"


def analysis_graph(q: ImitationQuery) -> CausalDiagram:
    """Ancestral graph of the target with the target marked observed."""
    return ancestral_graph(q.diagram.reveal([q.target]), q.target)


def _check_contexts(q: ImitationQuery, contexts: Contexts) -> dict[str, frozenset[str]]:
    g = q.diagram
    out = {}
    for x in q.actions:
        z = g.check(contexts.get(x, ()))
        if z & g.latent:
            raise DiagramError(f"latent node(s) in context of {x}: {', '.join(g.sort(z & g.latent))}")
        late = z - before(g, x)
        if late:
            raise DiagramError(f"context of {x} contains node(s) not before it: {', '.join(g.sort(late))}")
        out[x] = z
    return out


def build_g_prime(q: ImitationQuery, contexts: Contexts, i: int) -> CausalDiagram:
    """G'_i: parents of every later action X_j (j > i, 0-based) replaced by Z_j."""
    ctx = _check_contexts(q, contexts)
    future = q.actions[i + 1 :]
    fset = frozenset(future)
    edges = {(a, b) for a, b in q.diagram.edges if b not in fset}
    for x in future:
        edges.update((z, x) for z in ctx[x])
    return q.diagram.with_edges(edges)


@dataclass(frozen=True)
class SequentialReport:
    """Per-action outcome of the sequential pi-backdoor check.

    ``conditions[x]`` is the first satisfied condition, or None on failure.
    """

    conditions: dict[str, Condition | None]

    @property
    def passed(self) -> bool:
        return all(c is not None for c in self.conditions.values())


def _backdoor_holds(g: CausalDiagram, x: str, y: str, z: frozenset[str]) -> bool:
    if y in z:
        return True
    return d_separated(mutilate(g, [x]), [x], [y], z)


def verify_sequential_pi_backdoor(q: ImitationQuery, contexts: Contexts) -> SequentialReport:
    ctx = _check_contexts(q, contexts)
    conditions: dict[str, Condition | None] = {}
    for i in reversed(range(len(q.actions))):
        x = q.actions[i]
        gi = build_g_prime(q, ctx, i)
        if _backdoor_holds(gi, x, q.target, ctx[x]):
            conditions[x] = Condition.BACKDOOR
        elif x not in gi.ancestors([q.target]):
            conditions[x] = Condition.NON_ANCESTOR
        else:
            conditions[x] = None
    return SequentialReport({x: conditions[x] for x in q.actions})


def verify_pearl_sequential_backdoor(q: ImitationQuery, contexts: Contexts) -> bool:
    """Classic sequential backdoor check, kept for contrast experiments."""
    ctx = _check_contexts(q, contexts)
    g = q.diagram
    seen: set[str] = set()
    for i, x in enumerate(q.actions):
        seen |= ctx[x]
        cond = (seen | set(q.actions[:i])) - {x}
        gi = mutilate(g, [x], q.actions[i + 1 :])
        if q.target in cond:
            continue
        if not d_separated(gi, [x], [q.target], cond):
            return False
    return True


# -- FindOx ---------------------------------------------------------------


@dataclass(frozen=True)
class OxMap:
    """Observed node -> action it is shielded behind, in temporal order."""

    entries: dict[str, str]

    def keys(self) -> frozenset[str]:
        return frozenset(self.entries)

    def __contains__(self, v: object) -> bool:
        return v in self.entries

    def __getitem__(self, v: str) -> str:
        return self.entries[v]

    def __len__(self) -> int:
        return len(self.entries)


def _latent_feeders(g: CausalDiagram, c: frozenset[str]) -> set[str]:
    # latents with a latent-only directed path into c
    found: set[str] = set()
    queue = deque(c)
    while queue:
        for p in g.parents(queue.popleft()):
            if p in g.latent and p not in found:
                found.add(p)
                queue.append(p)
    return found


def _has_valid_adjustment(gy: CausalDiagram, part: CComponentPartition, keys, o_i: str, x_i: str) -> bool:
    """Can o_i be cut off from the unshielded rest of its c-component in time?

    The test runs on the c-component's parents plus the latents feeding it,
    with o_i's outgoing edges removed.  It conditions on every non-shielded
    effective parent of the component that is observed before x_i, and asks
    for separation from the component members that come later.
    """
    comp = part.component(o_i)
    pa = effective_parents(gy, comp, inclusive=True)
    gc = mutilate(gy.subgraph(pa | _latent_feeders(gy, comp)), [o_i])
    given = (pa - keys - {o_i}) & before(gy, x_i)
    targets = comp - keys - {o_i} - given
    if not targets:
        return True
    return d_separated(gc, [o_i], targets, given)


def has_valid_adjustment(q: ImitationQuery, ox_keys: Iterable[str], o_i: str, x_i: str) -> bool:
    gy = analysis_graph(q)
    if o_i not in gy or o_i in gy.latent:
        raise DiagramError(f"{o_i!r} is not an observed node of the ancestral graph of {q.target!r}")
    if x_i not in q.actions:
        raise DiagramError(f"{x_i!r} is not an action")
    return _has_valid_adjustment(gy, c_components(gy), frozenset(ox_keys), o_i, x_i)


def find_ox(q: ImitationQuery) -> OxMap:
    """Largest set of observed ancestors of Y that future actions can shield."""
    gy = analysis_graph(q)
    part = c_components(gy)
    actions = set(q.actions)
    pos = gy.position
    ox: dict[str, str] = {}
    order = [v for v in reversed(gy.nodes) if v not in gy.latent]
    for _ in range(len(order) + 1):
        size = len(ox)
        for o in order:
            if o in ox:
                continue
            ch = effective_children(gy, [o])
            if ch and ch <= ox.keys():
                x = min((ox[c] for c in ch), key=pos.__getitem__)
                if _has_valid_adjustment(gy, part, ox.keys(), o, x):
                    ox[o] = x
            elif o in actions and _has_valid_adjustment(gy, part, ox.keys(), o, o):
                ox[o] = o
        if len(ox) == size:
            break
    else:  # pragma: no cover - each productive pass adds a key
        raise AssertionError("FindOx did not reach a fixpoint")
    return OxMap({v: ox[v] for v in gy.sort(ox)})


def boundary_actions(q: ImitationQuery, ox: OxMap) -> frozenset[str]:
    """Covered actions with an effective child outside the covered set."""
    gy = analysis_graph(q)
    keys = ox.keys()
    return frozenset(
        x for x in q.actions if x in keys and not effective_children(gy, [x]) <= keys
    )


# -- plans ------------------------------------------------------------------


@dataclass(frozen=True)
class AdjustmentPlan:
    covered_actions: tuple[str, ...]
    contexts: dict[str, frozenset[str]]
    condition: dict[str, Condition | None]
    boundary_actions: frozenset[str]
    global_boundary: frozenset[str]


@dataclass(frozen=True)
class Verdict:
    imitable: bool
    plan: AdjustmentPlan
    missing_actions: frozenset[str]
    ox: OxMap

    def to_json(self, g: CausalDiagram) -> dict:
        """JSON-ready dict; key order is part of the output contract."""
        return {
            "imitable": self.imitable,
            "ox": list(g.sort(self.ox.keys())),
            "missing_actions": list(g.sort(self.missing_actions)),
            "boundary_actions": list(g.sort(self.plan.boundary_actions)),
            "plan": [
                {
                    "action": x,
                    "context": list(g.sort(self.plan.contexts[x])),
                    "condition": int(self.plan.condition[x]) if self.plan.condition[x] else None,
                }
                for x in self.plan.covered_actions
            ],
        }


def construct_plan(q: ImitationQuery) -> Verdict:
    """Run FindOx and build the per-action contexts from its Markov boundary.

    Actions that are not ancestors of the target are always covered; they
    satisfy the non-ancestor condition whatever context they get.
    """
    g = q.diagram
    gy = analysis_graph(q)
    ox = find_ox(q)
    keys = ox.keys()
    shielded = [x for x in q.actions if x in keys]
    covered = tuple(x for x in q.actions if x in keys or x not in gy)
    if keys:
        z = markov_boundary(mutilate(gy, shielded), keys)
    else:
        z = frozenset()
    xb = boundary_actions(q, ox)
    pool = (z | xb) - g.latent - {q.target}
    contexts = {x: pool & before(g, x) for x in covered}
    if covered:
        report = verify_sequential_pi_backdoor(replace(q, actions=covered), contexts)
        condition = report.conditions
    else:
        condition = {}
    plan = AdjustmentPlan(covered, contexts, condition, xb, z)
    missing = frozenset(q.actions) - set(covered)
    return Verdict(not missing, plan, missing, ox)


def single_action_pi_backdoor(q: ImitationQuery, x: str) -> frozenset[str] | None:
    """Backdoor context for ``x`` on its own, or None when none exists."""
    if x not in q.actions:
        raise DiagramError(f"{x!r} is not an action")
    gy = analysis_graph(q)
    if x not in gy:
        return frozenset()
    gx = mutilate(gy, [x])
    mb = markov_boundary(gx, [x])
    if not mb <= before(gy, x) or mb & q.diagram.latent:
        return None
    return mb if _backdoor_holds(gy, x, q.target, mb) else None


def strategy_contexts(q: ImitationQuery, method: Method | str) -> dict[str, frozenset[str]] | None:
    """Per-action contexts chosen by one of the four comparison strategies.

    Returns None when the strategy declares the query not imitable.
    """
    method = Method(method)
    g = q.diagram
    observed = frozenset(g.observed)
    if method is Method.ALL_OBSERVED:
        return {x: observed & before(g, x) for x in q.actions}
    if method is Method.OBSERVED_PARENTS:
        return {x: observed & frozenset(g.parents(x)) for x in q.actions}
    if method is Method.PI_BACKDOOR:
        out = {}
        for x in q.actions:
            z = single_action_pi_backdoor(q, x)
            if z is None:
                return None
            out[x] = z
        return out
    verdict = construct_plan(q)
    return dict(verdict.plan.contexts) if verdict.imitable else None
