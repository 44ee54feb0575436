"""Named example queries, their concrete models, and self-check bundles."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Mapping

import numpy as np

from .diagram import ImitationQuery, parse_diagram
from .imitation import construct_plan, strategy_contexts, verify_sequential_pi_backdoor
from .scm import (
    DiscreteScm,
    bernoulli_cpt,
    deterministic_cpt,
    derive_rng,
    expectation,
    fit_policy_exact,
    imitation_value,
    random_scm,
)

__all__ = [
    "Check",
    "Fixture",
    "FixtureReport",
    "fixture",
    "fixture_names",
    "load_query",
    "run_fixture",
]


def load_query(name: str) -> ImitationQuery:
    path = resources.files("causal_imitation") / "data" / f"{name}.cg"
    if not path.is_file():
        raise KeyError(f"unknown fixture {name!r}")
    return parse_diagram(path.read_text(), name=name)


# -- concrete models --------------------------------------------------------


def _det(domains: Mapping[str, int], q: ImitationQuery, v: str, fn: Callable[[dict], int]) -> np.ndarray:
    parents = q.diagram.parents(v)
    return deterministic_cpt(domains, parents, domains.get(v, 2), lambda *vals: fn(dict(zip(parents, vals))))


def _coin(q: ImitationQuery, v: str, p: float, domains=None) -> np.ndarray:
    # root-like node that ignores any parents it has
    shape = tuple((domains or {}).get(u, 2) for u in q.diagram.parents(v))
    return np.broadcast_to(bernoulli_cpt(p), shape + (2,)).copy()


def _audiocar(q: ImitationQuery) -> DiscreteScm:
    d: dict[str, int] = {}
    cpts = {v: _coin(q, v, 0.5) for v in ("F", "B", "S")}
    cpts["H"] = _det(d, q, "H", lambda p: p["F"] ^ p["B"] ^ p["S"])
    cpts["X"] = _det(d, q, "X", lambda p: p["H"])
    cpts["Y"] = _det(d, q, "Y", lambda p: 1 - p["X"] ^ p["F"] ^ p["B"] ^ p["S"])
    return DiscreteScm(q.diagram, d, cpts)


def _xor_confounded(q: ImitationQuery) -> DiscreteScm:
    d: dict[str, int] = {}
    cpts = {"U1": _coin(q, "U1", 0.5), "U2": _coin(q, "U2", 0.5)}
    cpts["X1"] = _det(d, q, "X1", lambda p: p["U1"])
    cpts["Z"] = _det(d, q, "Z", lambda p: p["U1"] ^ p["U2"])
    cpts["X2"] = _det(d, q, "X2", lambda p: p["Z"])
    cpts["Y"] = _det(d, q, "Y", lambda p: int(p["X1"] ^ p["X2"] == p["U2"]))
    return DiscreteScm(q.diagram, d, cpts)


def _fig2a(q: ImitationQuery) -> DiscreteScm:
    # the printed Y := X xor Z would make Y constant 0; equality is the intended check
    d: dict[str, int] = {}
    u = "_u_X_Z_0"
    cpts = {u: _coin(q, u, 0.5)}
    cpts["X"] = _det(d, q, "X", lambda p: p[u])
    cpts["Z"] = _det(d, q, "Z", lambda p: p[u])
    cpts["Y"] = _det(d, q, "Y", lambda p: int(p["X"] == p["Z"]))
    return DiscreteScm(q.diagram, d, cpts)


def _fig2d(q: ImitationQuery) -> DiscreteScm:
    # U2 is a pair of fair bits packed into one 4-valued variable; U2[i] is bit i
    u1, u2 = "_u_Z_X1_0", "_u_W_Y_0"
    d = {u2: 4}
    cpts = {u1: _coin(q, u1, 0.5), u2: np.full(4, 0.25)}
    cpts["Z"] = _det(d, q, "Z", lambda p: p[u1])
    cpts["X1"] = _det(d, q, "X1", lambda p: p[u1])
    cpts["W"] = _det(d, q, "W", lambda p: p[u2] >> p["Z"] & 1)
    cpts["X2"] = _det(d, q, "X2", lambda p: p["W"])
    cpts["Y"] = _det(d, q, "Y", lambda p: int((p[u2] >> p["X1"] & 1) == p["X2"]))
    return DiscreteScm(q.diagram, d, cpts)


def _xor_chain3(q: ImitationQuery) -> DiscreteScm:
    d: dict[str, int] = {}
    cpts = {u: _coin(q, u, 0.5) for u in ("U1", "U2", "U3")}
    cpts["Z1"] = _det(d, q, "Z1", lambda p: 1)
    cpts["X1"] = _det(d, q, "X1", lambda p: p["U1"])
    cpts["X2"] = _det(d, q, "X2", lambda p: p["X1"])
    cpts["Z2"] = _det(d, q, "Z2", lambda p: p["U1"] ^ p["U2"])
    cpts["X3"] = _det(d, q, "X3", lambda p: p["X2"] ^ p["Z2"])
    cpts["Z3"] = _det(d, q, "Z3", lambda p: p["X3"] ^ p["U2"] ^ p["U3"])
    cpts["Y"] = _det(d, q, "Y", lambda p: int(p["Z3"] == p["U3"]))
    return DiscreteScm(q.diagram, d, cpts)


def _cruise_hurry(q: ImitationQuery) -> DiscreteScm:
    d: dict[str, int] = {}
    cpts = {"R1": _coin(q, "R1", 0.5), "H": _coin(q, "H", 0.5)}
    cpts["X1"] = _det(d, q, "X1", lambda p: p["R1"] ^ p["H"])
    cpts["R2"] = _det(d, q, "R2", lambda p: p["X1"])
    cpts["X2"] = _det(d, q, "X2", lambda p: p["R2"] ^ p["H"])
    cpts["R3"] = _det(d, q, "R3", lambda p: p["X2"])
    cpts["Y"] = _det(d, q, "Y", lambda p: int(p["R1"] == p["R3"]))
    return DiscreteScm(q.diagram, d, cpts)


def _cruise_ac(q: ImitationQuery) -> DiscreteScm:
    d: dict[str, int] = {}
    cpts = {"H": _coin(q, "H", 0.62), "C": _coin(q, "C", 0.62)}
    cpts["A"] = _det(d, q, "A", lambda p: p["C"] & p["H"])
    cpts["X3"] = _det(d, q, "X3", lambda p: p["H"])
    cpts["R4"] = _det(d, q, "R4", lambda p: p["X3"])
    cpts["Y"] = _det(d, q, "Y", lambda p: p["R4"] ^ p["C"])
    return DiscreteScm(q.diagram, d, cpts)


def _pair(p1: float) -> np.ndarray:
    # value b0 + 2*b1 with b0 ~ Bern(0.5), b1 ~ Bern(p1)
    b0, b1 = bernoulli_cpt(0.5), bernoulli_cpt(p1)
    return np.array([b0[i & 1] * b1[i >> 1] for i in range(4)])


def _cruise_combined(q: ImitationQuery) -> DiscreteScm:
    d = {"C": 4, "H": 4}
    cpts = {"C": _pair(0.62), "H": _pair(0.62)}
    cpts["A"] = _det(d, q, "A", lambda p: (p["C"] >> 1) & (p["H"] >> 1))
    cpts["R1"] = _det(d, q, "R1", lambda p: p["C"] & 1)
    cpts["X1"] = _det(d, q, "X1", lambda p: p["R1"] ^ (p["H"] & 1))
    cpts["R2"] = _det(d, q, "R2", lambda p: p["X1"])
    cpts["X2"] = _det(d, q, "X2", lambda p: p["R2"] ^ (p["H"] & 1))
    cpts["R3"] = _det(d, q, "R3", lambda p: p["X2"])
    cpts["X3"] = _det(d, q, "X3", lambda p: p["H"] >> 1)
    cpts["R4"] = _det(d, q, "R4", lambda p: p["X3"])
    cpts["Y"] = _det(d, q, "Y", lambda p: int(p["R1"] == p["R3"]) & (p["R4"] ^ (p["C"] >> 1)))
    return DiscreteScm(q.diagram, d, cpts)


def _chain(q: ImitationQuery) -> DiscreteScm:
    from .witness import chain_witness

    return chain_witness(q, q.actions[0])


# -- registry -----------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    """Value of a policy family on the fixture's model.

    ``kind`` is "clone" (exact behavioral cloning) or "best" (policy search).
    ``contexts`` is a strategy name or an explicit action -> nodes mapping.
    The check passes when the value equals ``equals`` (1e-9) and/or falls
    short of the expert by more than ``gap``.
    """

    label: str
    kind: str
    contexts: str | Mapping[str, tuple[str, ...]]
    equals: float | None = None
    gap: float | None = None


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    imitable: bool
    model: Callable[[ImitationQuery], DiscreteScm] | None = None
    expert: float | None = None
    checks: tuple[Check, ...] = field(default_factory=tuple)


_AC_EXPERT = 2 * 0.62 * 0.38

_FIXTURES = [
    Fixture("audiocar", "driver with all surrounding cars visible", True, _audiocar, 1.0,
            (Check("clone on {F,B,S}", "clone", "seq", equals=1.0),
             Check("best on {F,B}", "best", {"X": ("F", "B")}, equals=0.5))),
    Fixture("audiocar_latent_side", "driver whose side car S is hidden", False, _audiocar, 1.0,
            (Check("best on {F,B}", "best", "all", equals=0.5),)),
    Fixture("fig1c", "two actions shielded by Z", True),
    Fixture("fig1d", "two actions with a confounded intermediate", False),
    Fixture("xor_confounded", "XOR model on the confounded-intermediate graph", False, _xor_confounded, 1.0,
            (Check("best on (none, {Z})", "best", {"X1": (), "X2": ("Z",)}, equals=0.5),)),
    Fixture("fig2a", "future observation carries the confounder", False, _fig2a, 1.0,
            (Check("best with no context", "best", "all", equals=0.5),)),
    Fixture("fig2b", "second action shields the first", True),
    Fixture("fig2c", "relevant-node example, Z before W", True),
    Fixture("fig2c_z_last", "relevant-node example, Z observed last", False),
    Fixture("fig2d_z_first", "split subproblems with Z before X1", True),
    Fixture("fig2d_x1_first", "split subproblems with X1 before Z", False, _fig2d, 1.0,
            (Check("best on all observed", "best", "all", equals=0.75),)),
    Fixture("fig4", "three actions with a latent chain to Y", False, _xor_chain3, 1.0,
            (Check("best on all observed", "best", "all", gap=0.1),)),
    Fixture("fig5", "three actions, mixed shielding", True),
    Fixture("table1_row1", "simulation graph 1", True),
    Fixture("table1_row2", "simulation graph 2", True),
    Fixture("table1_row3", "simulation graph 2 with X1 before Z", True),
    Fixture("table1_row4", "simulation graph 4", False),
    Fixture("cruise_control", "cruise control graph", True),
    Fixture("cruise_hurry", "cruise control, hurry substructure", True, _cruise_hurry, 1.0,
            (Check("clone on observed parents", "clone", "parents", equals=0.5),
             Check("clone on plan", "clone", "seq", equals=1.0))),
    Fixture("cruise_ac", "cruise control, air-conditioning substructure", True, _cruise_ac, _AC_EXPERT,
            (Check("clone on plan", "clone", "seq", equals=_AC_EXPERT),
             Check("clone on all observed", "clone", "all", gap=0.05))),
    Fixture("cruise_combined", "cruise control, both substructures", True, _cruise_combined, _AC_EXPERT,
            (Check("clone on plan", "clone", "seq", equals=_AC_EXPERT),
             Check("clone on all observed", "clone", "all", gap=0.05))),
    Fixture("chain1", "action directly confounded with Y", False, _chain, 1.0,
            (Check("best with no context", "best", "all", equals=0.5),)),
]
_BY_NAME = {f.name: f for f in _FIXTURES}


def fixture_names() -> list[str]:
    return [f.name for f in _FIXTURES]


def fixture(name: str) -> tuple[ImitationQuery, DiscreteScm | None]:
    if name not in _BY_NAME:
        raise KeyError(f"unknown fixture {name!r}")
    spec = _BY_NAME[name]
    q = load_query(name)
    return q, spec.model(q) if spec.model else None


def fixture_spec(name: str) -> Fixture:
    if name not in _BY_NAME:
        raise KeyError(f"unknown fixture {name!r}")
    return _BY_NAME[name]


# -- runner -----------------------------------------------------------------


@dataclass
class FixtureReport:
    name: str
    lines: list[tuple[str, bool, str]] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.lines)

    def add(self, label: str, ok: bool, detail: str = "") -> None:
        self.lines.append((label, bool(ok), detail))


def _resolve(q: ImitationQuery, contexts) -> dict | None:
    if isinstance(contexts, str):
        return strategy_contexts(q, contexts)
    return {x: tuple(z) for x, z in contexts.items()}


def run_fixture(name: str, n_models: int = 100, seed: int = 0) -> FixtureReport:
    """Verdict, plan validity, model values and (for imitable ones) random-model error."""
    from .oracle import best_imitator

    start = time.perf_counter()
    spec = fixture_spec(name)
    q, m = fixture(name)
    report = FixtureReport(name)
    verdict = construct_plan(q)
    report.add("verdict", verdict.imitable == spec.imitable,
               f"imitable={verdict.imitable}, expected {spec.imitable}")
    if verdict.plan.covered_actions:
        from dataclasses import replace

        sub = replace(q, actions=verdict.plan.covered_actions)
        ok = verify_sequential_pi_backdoor(sub, verdict.plan.contexts).passed
        report.add("plan verifies", ok)
    if m is not None and spec.expert is not None:
        expert = expectation(m, q.target)
        report.add("expert value", abs(expert - spec.expert) < 1e-9, f"E[Y]={expert:.6g}")
        for c in spec.checks:
            ctx = _resolve(q, c.contexts)
            if ctx is None:
                report.add(c.label, False, "strategy found no contexts")
                continue
            if c.kind == "best":
                value = best_imitator(m, ctx, q.target, q.actions).best_value
            else:
                value = imitation_value(m, fit_policy_exact(m, ctx), q.target)
            ok = True
            if c.equals is not None:
                ok &= abs(value - c.equals) < 1e-9
            if c.gap is not None:
                ok &= expert - value > c.gap
            report.add(c.label, ok, f"value={value:.6g}")
    if spec.imitable and n_models > 0:
        ctx = strategy_contexts(q, "seq")
        worst = 0.0
        for i in range(n_models):
            rm = random_scm(q.diagram, derive_rng(seed, f"fixture:{name}", i))
            err = abs(expectation(rm, q.target) - imitation_value(rm, fit_policy_exact(rm, ctx), q.target))
            worst = max(worst, err)
        report.add(f"random models ({n_models})", worst < 1e-9, f"max error={worst:.3g}")
    report.seconds = time.perf_counter() - start
    return report
