"""scikit-learn style wrapper: fit an imitating policy from expert demonstrations."""

from __future__ import annotations

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .diagram import ImitationQuery
from .imitation import Method, strategy_contexts
from .scm import Policy, fit_policy_from_samples

__all__ = ["SequentialImitator"]


class SequentialImitator(BaseEstimator):
    """Behavioral cloning restricted to the contexts a strategy selects.

    Parameters
    ----------
    query : ImitationQuery
        Diagram, ordered actions and target.
    method : {"seq", "pi", "parents", "all"}
        How per-action contexts are chosen.
    domains : dict, optional
        Cardinality per node; nodes not listed are binary.
    """

    def __init__(self, query: ImitationQuery, method: str = "seq", domains: dict | None = None):
        self.query = query
        self.method = method
        self.domains = domains

    def fit(self, X: pd.DataFrame, y=None):
        """Estimate P(action | context) from a frame of observed expert samples."""
        if not isinstance(X, pd.DataFrame):
            raise TypeError("X must be a DataFrame with one column per observed node")
        contexts = strategy_contexts(self.query, Method(self.method))
        if contexts is None:
            raise ValueError(f"method {self.method!r} finds no valid contexts for this query")
        needed = set(self.query.actions).union(*contexts.values())
        missing = sorted(needed - set(X.columns))
        if missing:
            raise ValueError(f"X lacks column(s): {', '.join(missing)}")
        self.contexts_ = {x: self.query.diagram.sort(z) for x, z in contexts.items()}
        self.policy_: Policy = fit_policy_from_samples(X, self.contexts_, self.domains)
        return self

    def predict_proba(self, X: pd.DataFrame, action: str) -> np.ndarray:
        """Rows of P(action | context) for each sample in ``X``."""
        check_is_fitted(self, "policy_")
        ctx = self.policy_.contexts[action]
        table = self.policy_.tables[action]
        idx = tuple(X[c].to_numpy() for c in ctx)
        if not ctx:
            return np.broadcast_to(table, (len(X), table.shape[-1])).copy()
        return table[idx]

    def predict(self, X: pd.DataFrame) -> pd.DataFrame:
        """Most probable value of every action given its context."""
        check_is_fitted(self, "policy_")
        return pd.DataFrame(
            {x: self.predict_proba(X, x).argmax(axis=1) for x in self.policy_.actions}, index=X.index
        )
