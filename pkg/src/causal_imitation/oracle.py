"""Brute-force reference implementations.

Nothing here calls into :mod:`separation` or :mod:`imitation`; the graph
oracles work straight off the edge set so that agreement with the fast paths
means something.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .diagram import CausalDiagram, DiagramError, ImitationQuery
from .scm import DiscreteScm, Policy, ScmError, apply_policy, exact_joint

__all__ = [
    "OracleCapError",
    "PolicySearchResult",
    "best_imitator",
    "dsep_by_paths",
    "dsep_by_moralization",
    "enumerate_def3",
]

MAX_PATH_NODES = 12
MAX_ASSIGNMENTS = 2**20
MAX_POLICIES = 2**20


class OracleCapError(ValueError):
    """Input exceeds what the exhaustive search is willing to enumerate."""


def _adjacency(edges: Iterable[tuple[str, str]]):
    parents: dict[str, set[str]] = {}
    children: dict[str, set[str]] = {}
    for a, b in edges:
        children.setdefault(a, set()).add(b)
        parents.setdefault(b, set()).add(a)
    return parents, children


def _closure(start: Iterable[str], step: Mapping[str, set[str]]) -> set[str]:
    seen = set(start)
    stack = list(seen)
    while stack:
        for w in step.get(stack.pop(), ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _sets(g: CausalDiagram, a, b, given):
    a, b, given = set(g.check(a)), set(g.check(b)), set(g.check(given))
    if a & b or a & given or b & given:
        raise DiagramError("a, b and given must be pairwise disjoint")
    return a, b, given


# -- d-separation ------------------------------------------------------------


def dsep_by_paths(g: CausalDiagram, a: Iterable[str], b: Iterable[str], given: Iterable[str] = ()) -> bool:
    """d-separation by listing every simple path and testing each node on it."""
    if len(g.nodes) > MAX_PATH_NODES:
        raise OracleCapError(f"path enumeration limited to {MAX_PATH_NODES} nodes")
    a, b, given = _sets(g, a, b, given)
    parents, children = _adjacency(g.edges)
    with_desc = {v: _closure([v], children) for v in g.nodes}
    neighbours = {v: parents.get(v, set()) | children.get(v, set()) for v in g.nodes}

    def active(path: list[str]) -> bool:
        for left, mid, right in zip(path, path[1:], path[2:]):
            collider = left in parents.get(mid, ()) and right in parents.get(mid, ())
            if collider:
                if not (with_desc[mid] & given):
                    return False
            elif mid in given:
                return False
        return True

    def walk(path: list[str]) -> bool:
        v = path[-1]
        if v in b:
            return active(path)
        for w in sorted(neighbours[v]):
            if w in path or w in a:
                continue
            path.append(w)
            found = walk(path)
            path.pop()
            if found:
                return True
        return False

    return not any(walk([s]) for s in sorted(a))


def _moral_separated(nodes, edges, a: set[str], b: set[str], given: set[str]) -> bool:
    parents, _ = _adjacency(edges)
    keep = _closure(a | b | given, parents)
    undirected: dict[str, set[str]] = {v: set() for v in keep}
    for v in keep:
        ps = [p for p in parents.get(v, ()) if p in keep]
        for p in ps:
            undirected[v].add(p)
            undirected[p].add(v)
        for p, r in itertools.combinations(ps, 2):
            undirected[p].add(r)
            undirected[r].add(p)
    for z in given:
        undirected.pop(z, None)
    step = {v: {w for w in ws if w not in given} for v, ws in undirected.items()}
    return not (_closure(a, step) & b)


def dsep_by_moralization(g: CausalDiagram, a: Iterable[str], b: Iterable[str], given: Iterable[str] = ()) -> bool:
    """d-separation via the moral graph of the ancestral set."""
    a, b, given = _sets(g, a, b, given)
    if not a or not b:
        return True
    return _moral_separated(g.nodes, g.edges, a, b, given)


# -- exhaustive sequential criterion ---------------------------------------


def _def3_holds(q: ImitationQuery, edges: set[tuple[str, str]], i: int, z: frozenset[str]) -> bool:
    x, y = q.actions[i], q.target
    cut = {(a, b) for a, b in edges if a != x}
    if y in z or _moral_separated(q.diagram.nodes, cut, {x}, {y}, set(z)):
        return True
    parents, _ = _adjacency(edges)
    return x not in _closure([y], parents)


def enumerate_def3(q: ImitationQuery) -> dict[str, frozenset[str]] | None:
    """First context assignment satisfying the sequential criterion, or None.

    Candidates for each action are all subsets of the observed nodes that
    precede it.  The search fixes contexts from the last action backwards,
    trying subsets in bitmask order, and backtracks on failure.
    """
    g = q.diagram
    pos = g.position
    pools = []
    for x in q.actions:
        pools.append([v for v in g.nodes if v not in g.latent and pos[v] < pos[x]])
    total = 1
    for p in pools:
        total *= 2 ** len(p)
    if total > MAX_ASSIGNMENTS:
        raise OracleCapError(f"{total} context assignments exceed cap {MAX_ASSIGNMENTS}")
    subsets = [
        [frozenset(v for k, v in enumerate(pool) if mask >> k & 1) for mask in range(2 ** len(pool))]
        for pool in pools
    ]
    n = len(q.actions)
    chosen: dict[str, frozenset[str]] = {}

    def search(i: int, edges: set[tuple[str, str]]) -> bool:
        if i < 0:
            return True
        x = q.actions[i]
        # G'_{i-1} cuts X_i's parents and wires in Z_i
        without = {(a, b) for a, b in edges if b != x}
        for z in subsets[i]:
            if not _def3_holds(q, edges, i, z):
                continue
            chosen[x] = z
            if search(i - 1, without | {(v, x) for v in z}):
                return True
        return False

    if search(n - 1, set(g.edges)):
        return {x: chosen[x] for x in q.actions}
    return None


# -- exhaustive policy search ----------------------------------------------


@dataclass(frozen=True)
class PolicySearchResult:
    best_value: float
    best_policy: Policy
    policies_evaluated: int


def best_imitator(
    m: DiscreteScm, contexts: Mapping[str, Iterable[str]], y: str, actions: Iterable[str] | None = None
) -> PolicySearchResult:
    """Maximum of E[Y | do(pi)] over deterministic policies with the given contexts.

    E[Y | do(pi)] is multilinear in the policy tables, so its maximum over the
    product of simplices sits at a vertex, i.e. a deterministic policy.  The
    search fixes actions in temporal order and only branches on context values
    reachable under the rules already chosen; rows for unreachable contexts
    cannot change the value and are set to action 0.
    """
    g = m.diagram
    acts = g.sort(actions if actions is not None else contexts)
    ctx = {x: g.sort(contexts[x]) for x in acts}
    for x in acts:
        late = [c for c in ctx[x] if g.position[c] >= g.position[x]]
        if late:
            raise ScmError(f"context of {x!r} contains later node(s) {', '.join(late)}")
    axis = {v: i for i, v in enumerate(g.nodes)}
    rules: dict[str, np.ndarray] = {}
    best = [-np.inf, None]
    count = [0]

    def policy() -> Policy:
        return Policy({x: ctx[x] for x in rules}, dict(rules))

    def search(k: int) -> None:
        if k == len(acts):
            count[0] += 1
            if count[0] > MAX_POLICIES:
                raise OracleCapError(f"more than {MAX_POLICIES} deterministic policies")
            pi = policy()
            joint = exact_joint(apply_policy(m, pi))
            p = joint.sum(axis=tuple(i for v, i in axis.items() if v != y))
            value = float(np.dot(np.arange(len(p)), p))
            if value > best[0] + 1e-15:
                best[0], best[1] = value, pi
            return
        x = acts[k]
        c = ctx[x]
        dims = tuple(m.domains[v] for v in c)
        if c:
            partial = apply_policy(m, policy()) if rules else m
            joint = exact_joint(partial)
            pc = joint.sum(axis=tuple(i for v, i in axis.items() if v not in c))
            live = [idx for idx in itertools.product(*(range(d) for d in dims)) if pc[idx] > 0]
        else:
            live = [()]
        card = m.domains[x]
        for choice in itertools.product(range(card), repeat=len(live)):
            table = np.zeros(dims + (card,))
            table[..., 0] = 1.0
            for idx, a in zip(live, choice):
                table[idx] = 0.0
                table[idx + (a,)] = 1.0
            rules[x] = table
            search(k + 1)
        del rules[x]

    search(0)
    return PolicySearchResult(best[0], best[1], count[0])
