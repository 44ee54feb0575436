import numpy as np
import pytest

from causal_imitation.generate import random_query

N_QUERIES = 500
QUERY_SEED = 20240611


def make_queries(n: int = N_QUERIES, seed: int = QUERY_SEED):
    rng = np.random.default_rng(seed)
    return [random_query(rng) for _ in range(n)]


@pytest.fixture(scope="session")
def random_queries():
    return make_queries()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for n, m in sys.modules.items() if n.endswith("test_acceptance") and hasattr(m, "RESULTS")), None)
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
