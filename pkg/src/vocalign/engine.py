"""One interaction between two agents with compatible protocols.

Each agent keeps a local trace in its own vocabulary: its own messages
verbatim, received messages through the interpretation it chose. A shared
scheduler picks, every round, a speaker among the agents that are able to
utter a possible message and willing to keep talking.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Optional

from .constraints import Constraint, Message, Monotonicity, Template, classify_monotonicity, violated_constraints
from .learner import InterpretationState, Violation
from .satisfiability import ProtocolRef, is_model, possible_messages

_NEGATIVE_BINARY = frozenset(
    {
        Template.NOT_CORRELATION,
        Template.NOT_RESPONSE,
        Template.NOT_BEFORE,
        Template.NOT_PREMISE,
        Template.NOT_IMM_AFTER,
    }
)


class Outcome(str, enum.Enum):
    SUCCESS_BOTH = "success_both"
    SUCCESS_ONE = "success_one"
    FAILURE_INTERPRETATION = "failure_interpretation"
    FAILURE_STUCK = "failure_stuck"
    BOUND_REACHED = "bound_reached"


@dataclass
class EnginePolicy:
    #: Probability that an agent whose trace is already a model declines to speak.
    p_stop: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_stop <= 1.0:
            raise ValueError("p_stop must lie in [0, 1]")


@dataclass
class AgentRuntime:
    agent_id: str
    protocol_ref: ProtocolRef
    learner: InterpretationState
    trace: list[Message] = field(default_factory=list)
    #: Foreign word received at each trace position; None for own messages.
    received_from: list[Optional[str]] = field(default_factory=list)

    def reset(self) -> None:
        self.trace.clear()
        self.received_from.clear()
        self.learner.begin_interaction()


@dataclass
class LogRecord:
    position: int
    speaker: str
    word_sent: str
    word_interpreted: Optional[str]
    possible_set_size: int
    violated: list[str]


@dataclass
class InteractionOutcome:
    status: Outcome
    length: int
    transcript: tuple[Message, ...]
    log: list[LogRecord] = field(default_factory=list)


def _resolve_violation(
    receiver: AgentRuntime, candidate: Message, constraint: Constraint
) -> Violation:
    """Trace a broken constraint back to the earlier mapping it implicates."""
    template = constraint.template
    trace = receiver.trace
    if template is Template.ABSENCE:
        return Violation(constraint)
    if template is Template.BEFORE or template is Template.IMM_AFTER:
        # imm_after breaks only with the required position beyond the trace
        # end; before breaks through an arbitrarily distant history.
        return Violation(constraint)
    if template is Template.PREMISE:
        # The candidate needed a specific word right before it.
        if trace and receiver.received_from[-1] is not None:
            if receiver.learner.config.mutual_positive_adjacency:
                return Violation(
                    constraint, partner=(receiver.received_from[-1], trace[-1].word)
                )
        return Violation(constraint)
    if template in (Template.NOT_PREMISE, Template.NOT_IMM_AFTER):
        # Violation is between the candidate and the adjacent previous message.
        if trace and receiver.received_from[-1] is not None:
            return Violation(
                constraint, partner=(receiver.received_from[-1], trace[-1].word)
            )
        return Violation(constraint)
    if template in _NEGATIVE_BINARY:
        a, b = constraint.a, constraint.b
        assert b is not None
        if a.matches(candidate) and b.matches(candidate):
            return Violation(constraint)
        other = b if a.matches(candidate) else a
        for j in range(len(trace) - 1, -1, -1):
            if other.matches(trace[j]) and receiver.received_from[j] is not None:
                return Violation(
                    constraint, partner=(receiver.received_from[j], trace[j].word)
                )
        return Violation(constraint)
    # Recoverable templates carry no in-interaction evidence on their own.
    return Violation(constraint)


def learning_hook(
    receiver: AgentRuntime, sender_id: str, foreign: str, chosen: str
) -> list[str]:
    """Update the receiver's weights around one reception.

    Returns the textual forms of the constraints found violated, for logging.
    """
    learner = receiver.learner
    trace = tuple(receiver.trace)
    ref = receiver.protocol_ref
    possible = {m.word for m in possible_messages(ref, trace) if m.sender == sender_id}
    update_words = learner.update_set(foreign, chosen)
    observed: list[str] = []
    if learner.config.strategy == "simple":
        learner.simple_update(foreign, {own: own in possible for own in update_words})
        return observed
    verdicts: dict[str, Optional[list[Violation]]] = {}
    for own in update_words:
        if own in possible:
            verdicts[own] = None
            continue
        candidate = Message(sender_id, own)
        broken = violated_constraints(
            ref.constraints, trace, candidate, strong_before=ref.strong_before
        )
        violations = [
            _resolve_violation(receiver, candidate, c)
            for c in sorted(broken, key=str)
            if classify_monotonicity(c) is Monotonicity.NON_MONOTONIC
        ]
        verdicts[own] = violations
        observed.extend(str(v.constraint) for v in violations)
    learner.reasoning_update(foreign, verdicts)
    return observed


def run_interaction(
    a1: AgentRuntime,
    a2: AgentRuntime,
    policy: EnginePolicy,
    rng: random.Random,
    *,
    collect_log: bool = False,
) -> InteractionOutcome:
    if a1.protocol_ref.bound != a2.protocol_ref.bound:
        raise ValueError("agents must share the interaction bound")
    bound = a1.protocol_ref.bound
    a1.reset()
    a2.reset()
    agents = {a1.agent_id: a1, a2.agent_id: a2}
    if len(agents) != 2:
        raise ValueError("agents need distinct ids")
    transcript: list[Message] = []
    log: list[LogRecord] = []

    def finish(status: Outcome) -> InteractionOutcome:
        return InteractionOutcome(
            status=status, length=len(transcript), transcript=tuple(transcript), log=log
        )

    while True:
        if len(transcript) >= bound:
            return finish(Outcome.BOUND_REACHED)

        options: dict[str, set[str]] = {}
        satisfied: dict[str, bool] = {}
        candidates: list[AgentRuntime] = []
        for agent in (a1, a2):
            trace = tuple(agent.trace)
            words = {
                m.word
                for m in possible_messages(agent.protocol_ref, trace)
                if m.sender == agent.agent_id
            }
            options[agent.agent_id] = words
            satisfied[agent.agent_id] = is_model(agent.protocol_ref, trace)
            able = bool(words)
            declines = satisfied[agent.agent_id] and rng.random() < policy.p_stop
            if able and not declines:
                candidates.append(agent)

        if not candidates:
            done = sum(satisfied.values())
            if done == 2:
                return finish(Outcome.SUCCESS_BOTH)
            if done == 1:
                return finish(Outcome.SUCCESS_ONE)
            return finish(Outcome.FAILURE_STUCK)

        speaker = candidates[0] if len(candidates) == 1 else rng.choice(candidates)
        word = rng.choice(sorted(options[speaker.agent_id]))
        speaker.trace.append(Message(speaker.agent_id, word))
        speaker.received_from.append(None)
        transcript.append(Message(speaker.agent_id, word))

        receiver = a2 if speaker is a1 else a1
        rec_trace = tuple(receiver.trace)
        possible_here = {
            m.word
            for m in possible_messages(receiver.protocol_ref, rec_trace)
            if m.sender == speaker.agent_id
        }
        window = possible_here - receiver.learner.mapped_own_words()
        # A word already mapped this interaction keeps its interpretation;
        # only mappings made for *other* foreign words are off limits.
        already = receiver.learner.mappings_made.get(word)
        if already is not None and already in possible_here:
            window.add(already)
        chosen = receiver.learner.choose_interpretation(word, window, rng)
        if chosen is None:
            if collect_log:
                log.append(
                    LogRecord(
                        position=len(transcript) - 1,
                        speaker=speaker.agent_id,
                        word_sent=word,
                        word_interpreted=None,
                        possible_set_size=len(window),
                        violated=[],
                    )
                )
            return finish(Outcome.FAILURE_INTERPRETATION)
        observed = learning_hook(receiver, speaker.agent_id, word, chosen)
        receiver.trace.append(Message(speaker.agent_id, chosen))
        receiver.received_from.append(word)
        if collect_log:
            log.append(
                LogRecord(
                    position=len(transcript) - 1,
                    speaker=speaker.agent_id,
                    word_sent=word,
                    word_interpreted=chosen,
                    possible_set_size=len(window),
                    violated=sorted(set(observed)),
                )
            )
