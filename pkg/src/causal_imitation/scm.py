"""Discrete structural causal models as conditional probability tables.

Every node (latent or observed) carries a CPT whose leading axes follow the
node's parents in temporal order and whose last axis is the node's own value.
Exact inference enumerates the full joint, which is fine for the small graphs
this package targets.
"""

from __future__ import annotations

import itertools
import zlib
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np
import pandas as pd

from .diagram import CausalDiagram, DiagramError, ImitationQuery, before, parse_diagram, serialize_query

__all__ = [
    "DiscreteScm",
    "Policy",
    "ScmError",
    "apply_policy",
    "bernoulli_cpt",
    "conditional",
    "derive_rng",
    "deterministic_cpt",
    "exact_joint",
    "expectation",
    "fit_policy_exact",
    "fit_policy_from_samples",
    "imitation_value",
    "marginal",
    "random_scm",
    "sample",
    "samples_to_csv",
    "scm_from_json",
    "scm_to_json",
]

MAX_STATES = 2**22
ROW_TOL = 1e-12


class ScmError(ValueError):
    pass


def derive_rng(seed: int, purpose: str = "", index: int = 0) -> np.random.Generator:
    """Independent generator for one (seed, purpose, index) stream."""
    key = zlib.crc32(purpose.encode())
    return np.random.default_rng(np.random.SeedSequence([int(seed), key, int(index)]))


def _as_rng(seed: int | np.random.Generator, purpose: str) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return derive_rng(seed, purpose)


def _check_rows(name: str, table: np.ndarray) -> None:
    if np.any(table < -ROW_TOL) or not np.all(np.abs(table.sum(axis=-1) - 1.0) <= ROW_TOL):
        raise ScmError(f"CPT rows of {name!r} are not probability distributions")


@dataclass(frozen=True)
class DiscreteScm:
    diagram: CausalDiagram
    domains: dict[str, int]
    cpts: dict[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        g = self.diagram
        domains = {v: int(self.domains.get(v, 2)) for v in g.nodes}
        object.__setattr__(self, "domains", domains)
        for v, k in domains.items():
            if k < 2:
                raise ScmError(f"domain of {v!r} must have at least 2 values")
        missing = [v for v in g.nodes if v not in self.cpts]
        if missing:
            raise ScmError(f"missing CPT for {', '.join(missing)}")
        cpts = {}
        for v in g.nodes:
            table = np.asarray(self.cpts[v], dtype=np.float64)
            shape = tuple(domains[p] for p in g.parents(v)) + (domains[v],)
            if table.shape != shape:
                raise ScmError(f"CPT of {v!r} has shape {table.shape}, expected {shape}")
            _check_rows(v, table)
            table.setflags(write=False)
            cpts[v] = table
        object.__setattr__(self, "cpts", cpts)

    @property
    def n_states(self) -> int:
        return int(np.prod([self.domains[v] for v in self.diagram.nodes], dtype=object))

    def parents(self, v: str) -> tuple[str, ...]:
        return self.diagram.parents(v)


def deterministic_cpt(
    domains: Mapping[str, int], parents: Iterable[str], card: int, fn: Callable[..., int]
) -> np.ndarray:
    """Degenerate CPT for ``value = fn(*parent_values)``."""
    parents = list(parents)
    shape = tuple(domains.get(p, 2) for p in parents)
    table = np.zeros(shape + (card,))
    for combo in itertools.product(*(range(k) for k in shape)):
        table[combo + (int(fn(*combo)) % card,)] = 1.0
    return table


def bernoulli_cpt(p: float) -> np.ndarray:
    return np.array([1.0 - p, p])


# -- exact inference -------------------------------------------------------


def _product(m: DiscreteScm, cpts: Mapping[str, np.ndarray], g: CausalDiagram) -> np.ndarray:
    if m.n_states > MAX_STATES:
        raise ScmError(f"state space of {m.n_states} exceeds cap {MAX_STATES}")
    nodes = g.nodes
    pos = g.position
    dims = [m.domains[v] for v in nodes]
    joint = np.ones(dims)
    for v in nodes:
        shape = [1] * len(nodes)
        for p in g.parents(v):
            shape[pos[p]] = m.domains[p]
        shape[pos[v]] = m.domains[v]
        joint = joint * cpts[v].reshape(shape)
    return joint


def exact_joint(m: DiscreteScm) -> np.ndarray:
    """Full joint with one axis per node, in temporal order."""
    return _product(m, m.cpts, m.diagram)


def marginal(m: DiscreteScm, nodes: Iterable[str], joint: np.ndarray | None = None) -> np.ndarray:
    """Joint of ``nodes`` with axes in temporal order."""
    g = m.diagram
    keep = g.check(nodes)
    joint = exact_joint(m) if joint is None else joint
    drop = tuple(i for i, v in enumerate(g.nodes) if v not in keep)
    return joint.sum(axis=drop)


def expectation(m: DiscreteScm, y: str, joint: np.ndarray | None = None) -> float:
    p = marginal(m, [y], joint)
    return float(np.dot(np.arange(len(p)), p))


def conditional(
    m: DiscreteScm, target: str, context: Iterable[str], joint: np.ndarray | None = None
) -> np.ndarray:
    """P(target | context) with context axes in temporal order.

    Rows for zero-mass context assignments are uniform.
    """
    g = m.diagram
    ctx = g.sort(g.check(context) - {target})
    nodes = g.sort(set(ctx) | {target})
    p = marginal(m, nodes, joint)
    # move target axis last
    p = np.moveaxis(p, nodes.index(target), -1)
    mass = p.sum(axis=-1, keepdims=True)
    k = m.domains[target]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(mass > 0, p / np.where(mass > 0, mass, 1.0), 1.0 / k)
    return out


# -- policies ----------------------------------------------------------------


@dataclass(frozen=True)
class Policy:
    """Decision rules: per action, a context tuple and P(action | context)."""

    contexts: dict[str, tuple[str, ...]]
    tables: dict[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        if set(self.contexts) != set(self.tables):
            raise ScmError("policy contexts and tables cover different actions")
        for x, t in self.tables.items():
            t = np.asarray(t, dtype=np.float64)
            if t.ndim != len(self.contexts[x]) + 1:
                raise ScmError(f"policy table for {x!r} does not match its context")
            _check_rows(x, t)

    @property
    def actions(self) -> tuple[str, ...]:
        return tuple(self.contexts)

    def is_deterministic(self) -> bool:
        return all(np.all((t == 0) | (t == 1)) for t in self.tables.values())


def apply_policy(m: DiscreteScm, pi: Policy) -> DiscreteScm:
    """Replace each action's mechanism by its decision rule."""
    g = m.diagram
    edges = set(g.edges)
    cpts = dict(m.cpts)
    for x, ctx in pi.contexts.items():
        g.check([x, *ctx])
        bad = [c for c in ctx if c in g.latent]
        if bad:
            raise ScmError(f"policy for {x!r} conditions on latent {', '.join(bad)}")
        late = set(ctx) - before(g, x)
        if late:
            raise ScmError(f"policy for {x!r} uses {', '.join(sorted(late))}, not observed before it")
        edges = {(a, b) for a, b in edges if b != x}
        edges.update((c, x) for c in ctx)
        # reorder table axes to temporal order of the context
        order = sorted(range(len(ctx)), key=lambda i: g.position[ctx[i]])
        table = np.asarray(pi.tables[x], dtype=np.float64)
        cpts[x] = np.transpose(table, order + [len(ctx)])
    return DiscreteScm(g.with_edges(edges), m.domains, cpts)


def imitation_value(m: DiscreteScm, pi: Policy, y: str) -> float:
    """E[Y | do(pi)]."""
    return expectation(apply_policy(m, pi), y)


def fit_policy_exact(m: DiscreteScm, contexts: Mapping[str, Iterable[str]], joint: np.ndarray | None = None) -> Policy:
    """Behavioral cloning with infinite data: exact P(x | context) from the expert."""
    g = m.diagram
    joint = exact_joint(m) if joint is None else joint
    ctxs, tables = {}, {}
    for x, z in contexts.items():
        ctx = g.sort(z)
        ctxs[x] = ctx
        tables[x] = conditional(m, x, ctx, joint)
    return Policy(ctxs, tables)


# -- random models and sampling --------------------------------------------


def random_scm(
    g: CausalDiagram, seed: int | np.random.Generator, domains: Mapping[str, int] | None = None
) -> DiscreteScm:
    """CPT rows drawn independently; binary rows use P(v=1 | pa) ~ U(0, 1).

    Rows of wider domains are flat-Dirichlet draws (normalized exponentials).
    """
    rng = _as_rng(seed, "random_scm")
    domains = {v: int((domains or {}).get(v, 2)) for v in g.nodes}
    cpts = {}
    for v in g.nodes:
        shape = tuple(domains[p] for p in g.parents(v))
        k = domains[v]
        if k == 2:
            p1 = rng.uniform(0.0, 1.0, size=shape)
            cpts[v] = np.stack([1.0 - p1, p1], axis=-1)
        else:
            e = rng.exponential(1.0, size=shape + (k,))
            cpts[v] = e / e.sum(axis=-1, keepdims=True)
    return DiscreteScm(g, domains, cpts)


def sample(
    m: DiscreteScm, n: int, seed: int | np.random.Generator, observed_only: bool = True
) -> pd.DataFrame:
    """Ancestral sampling in temporal order."""
    if n < 1:
        raise ScmError("n must be at least 1")
    rng = _as_rng(seed, "sample")
    g = m.diagram
    values: dict[str, np.ndarray] = {}
    for v in g.nodes:
        table = m.cpts[v]
        rows = table[tuple(values[p] for p in g.parents(v))] if g.parents(v) else np.broadcast_to(table, (n, table.shape[-1]))
        u = rng.random(n)
        draw = (u[:, None] >= np.cumsum(rows, axis=-1)).sum(axis=-1)
        values[v] = np.minimum(draw, m.domains[v] - 1)
    cols = g.observed if observed_only else g.nodes
    return pd.DataFrame({v: values[v] for v in cols})


def samples_to_csv(m: DiscreteScm, data: pd.DataFrame) -> str:
    """CSV text with one row per sample and columns in temporal order."""
    cols = [v for v in m.diagram.nodes if v in data.columns]
    extra = set(data.columns) - set(cols)
    if extra:
        raise ScmError(f"columns not in the diagram: {', '.join(sorted(extra))}")
    return data[cols].to_csv(index=False, lineterminator="\n")


def fit_policy_from_samples(
    data: pd.DataFrame, contexts: Mapping[str, Iterable[str]], domains: Mapping[str, int] | None = None
) -> Policy:
    """Empirical P(x | context); unseen context rows are uniform.

    Context columns follow the order of ``data``'s columns.
    """
    domains = domains or {}
    columns = list(data.columns)
    ctxs, tables = {}, {}
    for x, z in contexts.items():
        ctx = tuple(sorted(z, key=columns.index))
        dims = tuple(int(domains.get(c, 2)) for c in (*ctx, x))
        flat = np.ravel_multi_index(tuple(data[c].to_numpy() for c in (*ctx, x)), dims)
        counts = np.bincount(flat, minlength=int(np.prod(dims))).reshape(dims).astype(np.float64)
        mass = counts.sum(axis=-1, keepdims=True)
        tables[x] = np.where(mass > 0, counts / np.where(mass > 0, mass, 1.0), 1.0 / dims[-1])
        ctxs[x] = ctx
    return Policy(ctxs, tables)


# -- serialization ---------------------------------------------------------


def scm_to_json(q: ImitationQuery, m: DiscreteScm) -> dict:
    """JSON-ready dict holding the query text and every CPT."""
    if q.diagram != m.diagram:
        raise ScmError("query and SCM use different diagrams")
    g = m.diagram
    return {
        "graph": serialize_query(q),
        "domains": {v: m.domains[v] for v in g.nodes},
        "cpts": {v: {"parents": list(g.parents(v)), "probs": m.cpts[v].tolist()} for v in g.nodes},
    }


def scm_from_json(data: Mapping) -> tuple[ImitationQuery, DiscreteScm]:
    q = parse_diagram(data["graph"])
    g = q.diagram
    cpts = {}
    for v, entry in data["cpts"].items():
        if v not in g:
            raise DiagramError(f"CPT for unknown node {v!r}")
        if tuple(entry["parents"]) != g.parents(v):
            raise ScmError(f"CPT parents of {v!r} do not match the diagram")
        cpts[v] = np.asarray(entry["probs"], dtype=np.float64)
    return q, DiscreteScm(g, dict(data.get("domains", {})), cpts)
