import pytest

from causal_imitation.fixtures import load_query
from causal_imitation.imitation import strategy_contexts
from causal_imitation.oracle import best_imitator
from causal_imitation.scm import ScmError, expectation
from causal_imitation.witness import chain_witness, confounding_chain


def test_chain_shapes():
    assert confounding_chain(load_query("fig1d"), "X1") == ["Y", "U2", "Z", "U1", "X1"]
    assert confounding_chain(load_query("fig4"), "X1") == ["Y", "U3", "Z3", "U2", "Z2", "U1", "X1"]
    assert confounding_chain(load_query("chain1"), "X")[0] == "Y"


def test_no_chain_raises():
    with pytest.raises(ScmError):
        chain_witness(load_query("fig1c"), "X1")
    with pytest.raises(ScmError):
        confounding_chain(load_query("fig1c"), "Z")


@pytest.mark.parametrize("name, action", [("fig1d", "X1"), ("fig4", "X1"), ("chain1", "X")])
def test_witness_gap(name, action):
    q = load_query(name)
    m = chain_witness(q, action)
    assert expectation(m, q.target) == pytest.approx(1.0, abs=1e-12)
    best = best_imitator(m, strategy_contexts(q, "all"), q.target, q.actions).best_value
    assert best <= 0.75 + 1e-12


def test_witness_is_deterministic_off_chain():
    q = load_query("fig4")
    m = chain_witness(q, "X1")
    for v in ("U1", "U2", "U3"):
        assert m.cpts[v].max() == pytest.approx(0.5)
