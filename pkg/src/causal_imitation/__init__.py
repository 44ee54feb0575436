"""Causal imitation learning in sequential settings."""

from .diagram import (
    CausalDiagram,
    DiagramError,
    ImitationQuery,
    after,
    ancestral_graph,
    before,
    effective_children,
    effective_parents,
    mutilate,
    parse_diagram,
    serialize_query,
)
from .imitation import (
    AdjustmentPlan,
    Condition,
    Method,
    OxMap,
    Verdict,
    boundary_actions,
    build_g_prime,
    construct_plan,
    find_ox,
    has_valid_adjustment,
    single_action_pi_backdoor,
    strategy_contexts,
    verify_pearl_sequential_backdoor,
    verify_sequential_pi_backdoor,
)
from .separation import CComponentPartition, c_component_of, c_components, d_separated, markov_boundary

__version__ = "0.1.0"
