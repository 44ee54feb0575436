"""Behavioral-cloning error of each context strategy over random models."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
import pandas as pd

from .diagram import ImitationQuery
from .imitation import Method, strategy_contexts
from .scm import derive_rng, expectation, exact_joint, fit_policy_exact, fit_policy_from_samples, imitation_value, random_scm, sample

__all__ = ["COLUMNS", "ExperimentReport", "ExperimentRow", "parse_methods", "run_experiment"]

COLUMNS = ["graph", "method", "n_models", "n_samples", "mean_abs_error", "std", "not_imitable"]
ALL_METHODS = (Method.SEQ_PI_BACKDOOR, Method.PI_BACKDOOR, Method.OBSERVED_PARENTS, Method.ALL_OBSERVED)


def parse_methods(text: str) -> tuple[Method, ...]:
    """Comma list of method names; a lone ``all`` selects every method."""
    names = [t.strip() for t in text.split(",") if t.strip()]
    if names == ["all"]:
        return ALL_METHODS
    try:
        return tuple(Method(n) for n in names)
    except ValueError as exc:
        raise ValueError(f"unknown method in {text!r}; choose from seq, pi, parents, all") from exc


@dataclass(frozen=True)
class ExperimentRow:
    graph: str
    method: str
    n_models: int
    n_samples: int
    mean_abs_error: float | None
    std: float | None
    not_imitable: bool


@dataclass
class ExperimentReport:
    rows: list[ExperimentRow] = field(default_factory=list)
    errors: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def row(self, method: Method | str) -> ExperimentRow:
        name = Method(method).value
        return next(r for r in self.rows if r.method == name)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.__dict__ for r in self.rows], columns=COLUMNS)

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator="\n")

    def to_text(self) -> str:
        lines = [f"{'method':<10}{'models':>8}{'samples':>9}  mean |E[Y]-E[Y^]|"]
        for r in self.rows:
            cell = "not imitable" if r.not_imitable else f"{r.mean_abs_error:.3e} +/- {r.std:.3e}"
            lines.append(f"{r.method:<10}{r.n_models:>8}{r.n_samples:>9}  {cell}")
        return "\n".join(lines)


def _one_model(
    index: int, q: ImitationQuery, contexts: dict, n_samples: int, seed: int
) -> dict[str, float]:
    m = random_scm(q.diagram, derive_rng(seed, "model", index))
    joint = exact_joint(m)
    expert = expectation(m, q.target, joint)
    data = sample(m, n_samples, derive_rng(seed, "samples", index)) if n_samples else None
    out = {}
    for name, ctx in contexts.items():
        if data is None:
            pi = fit_policy_exact(m, ctx, joint)
        else:
            pi = fit_policy_from_samples(data, ctx, m.domains)
        out[name] = abs(expert - imitation_value(m, pi, q.target))
    return out


def run_experiment(
    q: ImitationQuery,
    n_models: int = 200,
    n_samples: int = 0,
    methods=ALL_METHODS,
    seed: int = 0,
    n_jobs: int = 1,
    graph: str | None = None,
) -> ExperimentReport:
    """Mean and spread of |E[Y] - E[Y | do(pi)]| per strategy.

    Model ``i`` and its dataset come from streams keyed by ``(seed, i)``, so
    results do not depend on ``n_jobs``.  ``n_samples = 0`` fits policies by
    exact conditioning on the expert distribution.
    """
    methods = [Method(m) for m in methods]
    contexts = {}
    for m in methods:
        ctx = strategy_contexts(q, m)
        if ctx is not None:
            contexts[m.value] = ctx
    work = partial(_one_model, q=q, contexts=contexts, n_samples=n_samples, seed=seed)
    if n_jobs > 1 and contexts:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(work, range(n_models)))
    else:
        results = [work(i) for i in range(n_models)] if contexts else []
    report = ExperimentReport()
    name = graph if graph is not None else q.name
    for m in methods:
        if m.value not in contexts:
            report.rows.append(ExperimentRow(name, m.value, n_models, n_samples, None, None, True))
            continue
        errs = np.array([r[m.value] for r in results])
        report.errors[m.value] = errs
        mean = float(errs.mean()) if len(errs) else 0.0
        std = float(errs.std()) if len(errs) else 0.0
        report.rows.append(ExperimentRow(name, m.value, n_models, n_samples, mean, std, False))
    return report
