"""Interaction-grounded vocabulary alignment over declarative protocols."""

from .constraints import (
    AGENT_1,
    AGENT_2,
    ANY_SENDER,
    Atom,
    Constraint,
    Message,
    Monotonicity,
    Template,
    Trace,
    classify_monotonicity,
    evaluate_constraint,
    format_constraint,
    format_message,
    parse_constraint,
    parse_message,
    violated_constraints,
)
from .engine import AgentRuntime, EnginePolicy, InteractionOutcome, Outcome, run_interaction
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    TaskPool,
    f_score,
    make_prior,
    precision,
    recall,
    run_convergence,
    run_repair,
)
from .learner import InterpretationState, LearnerConfig, PriorAlignment, Violation
from .protocol import (
    AlignmentRelation,
    GenerationError,
    Protocol,
    check_compatibility,
    generate_compatible_pair,
    generate_protocol,
    load_alignment,
    load_protocol,
    random_bijection,
    save_alignment,
    save_protocol,
    translate,
)
from .satisfiability import (
    OversizeInstanceError,
    ProtocolRef,
    brute_force_models,
    enumerate_models,
    is_model,
    is_partial_model,
    possible_messages,
    possible_words,
)

__version__ = "0.1.0"

__all__ = [
    "AGENT_1",
    "AGENT_2",
    "ANY_SENDER",
    "AgentRuntime",
    "AlignmentRelation",
    "Atom",
    "Constraint",
    "EnginePolicy",
    "ExperimentConfig",
    "ExperimentResult",
    "GenerationError",
    "InteractionOutcome",
    "InterpretationState",
    "LearnerConfig",
    "Message",
    "Monotonicity",
    "Outcome",
    "OversizeInstanceError",
    "PriorAlignment",
    "Protocol",
    "ProtocolRef",
    "TaskPool",
    "Template",
    "Trace",
    "Violation",
    "brute_force_models",
    "check_compatibility",
    "classify_monotonicity",
    "enumerate_models",
    "evaluate_constraint",
    "f_score",
    "format_constraint",
    "format_message",
    "generate_compatible_pair",
    "generate_protocol",
    "is_model",
    "is_partial_model",
    "load_alignment",
    "load_protocol",
    "make_prior",
    "parse_constraint",
    "parse_message",
    "possible_messages",
    "possible_words",
    "precision",
    "random_bijection",
    "recall",
    "run_convergence",
    "run_interaction",
    "run_repair",
    "save_alignment",
    "save_protocol",
    "translate",
    "violated_constraints",
]
