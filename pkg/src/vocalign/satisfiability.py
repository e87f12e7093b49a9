"""Bounded satisfiability over the joint monitor state of a protocol.

Model / partial-model checks and possible-message computation are reduced to
memoized reachability: can some sequence of at most k further messages drive
every constraint monitor to an accepting state? Messages that are
indistinguishable to every constraint are collapsed into equivalence classes
during the search and expanded again in the results.
"""

from __future__ import annotations

from itertools import product
from typing import TYPE_CHECKING, Iterator

from .constraints import (
    AGENT_IDS,
    Constraint,
    Message,
    Template,
    Trace,
    code_accepting,
    code_deficit,
    code_violated,
    evaluate_constraint,
    initial_code,
    step_code,
)

if TYPE_CHECKING:
    from .protocol import Protocol

BRUTE_FORCE_MAX_VOCAB = 5
BRUTE_FORCE_MAX_BOUND = 5


class OversizeInstanceError(ValueError):
    """Raised when a combinatorial guard rejects an instance."""


class ProtocolRef:
    """A protocol with compiled monitors, message classes and a search cache."""

    def __init__(self, protocol: "Protocol", *, strong_before: bool = False):
        self.protocol = protocol
        self.strong_before = strong_before
        self.constraints: tuple[Constraint, ...] = tuple(protocol.constraints)
        self.bound = protocol.bound
        self.alphabet: tuple[Message, ...] = tuple(
            Message(sender, word)
            for sender in AGENT_IDS
            for word in protocol.vocabulary
        )
        self._initial = tuple(initial_code(c) for c in self.constraints)
        # Messages with identical per-constraint match vectors behave
        # identically; keep one signature per class plus its members.
        classes: dict[tuple, list[Message]] = {}
        for m in self.alphabet:
            sig = tuple(
                (c.a.matches(m), c.b.matches(m) if c.b is not None else False)
                for c in self.constraints
            )
            classes.setdefault(sig, []).append(m)
        self._classes: tuple[tuple[tuple, tuple[Message, ...]], ...] = tuple(
            (sig, tuple(members)) for sig, members in classes.items()
        )
        # Existence constraints grouped by word for a sound step lower bound:
        # atoms over distinct words never match the same message.
        groups: dict[str, list[int]] = {}
        for idx, c in enumerate(self.constraints):
            if c.template is Template.EXISTENCE:
                groups.setdefault(c.a.word, []).append(idx)
        self._existence_groups = tuple(tuple(ids) for ids in groups.values())
        self._cache: dict[tuple[tuple[int, ...], int], bool] = {}

    def initial_codes(self) -> tuple[int, ...]:
        return self._initial

    def step_codes(self, codes: tuple[int, ...], sig: tuple) -> tuple[int, ...]:
        return tuple(
            step_code(c, code, ma, mb)
            for c, code, (ma, mb) in zip(self.constraints, codes, sig)
        )

    def step_message(self, codes: tuple[int, ...], m: Message) -> tuple[int, ...]:
        return tuple(
            step_code(c, code, c.a.matches(m), c.b.matches(m) if c.b else False)
            for c, code in zip(self.constraints, codes)
        )

    def stream(self, trace: Trace) -> tuple[int, ...]:
        codes = self._initial
        for m in trace:
            codes = self.step_message(codes, m)
        return codes

    def any_violated(self, codes: tuple[int, ...]) -> bool:
        return any(code_violated(c, code) for c, code in zip(self.constraints, codes))

    def all_accepting(self, codes: tuple[int, ...]) -> bool:
        return all(
            code_accepting(c, code, strong_before=self.strong_before)
            for c, code in zip(self.constraints, codes)
        )

    def deficit(self, codes: tuple[int, ...]) -> int:
        """A lower bound on the messages still needed for all existence counts."""
        total = 0
        for group in self._existence_groups:
            any_d = a1_d = a2_d = 0
            for idx in group:
                c = self.constraints[idx]
                d = code_deficit(c, codes[idx])
                if c.a.sender == "A1":
                    a1_d = max(a1_d, d)
                elif c.a.sender == "A2":
                    a2_d = max(a2_d, d)
                else:
                    any_d = max(any_d, d)
            total += max(any_d, a1_d + a2_d)
        return total


def feasible_within(ref: ProtocolRef, codes: tuple[int, ...], k: int) -> bool:
    """True iff some sequence of at most k messages makes every monitor accept."""
    if ref.any_violated(codes):
        return False
    if ref.deficit(codes) > k:
        return False
    if ref.all_accepting(codes):
        return True
    if k <= 0:
        return False
    key = (codes, k)
    cached = ref._cache.get(key)
    if cached is not None:
        return cached
    result = any(
        feasible_within(ref, ref.step_codes(codes, sig), k - 1)
        for sig, _ in ref._classes
    )
    ref._cache[key] = result
    return result


def is_model(ref: ProtocolRef, trace: Trace) -> bool:
    if len(trace) > ref.bound:
        return False
    return ref.all_accepting(ref.stream(trace))


def is_partial_model(ref: ProtocolRef, trace: Trace) -> bool:
    if len(trace) > ref.bound:
        return False
    return feasible_within(ref, ref.stream(trace), ref.bound - len(trace))


def possible_messages(ref: ProtocolRef, trace: Trace) -> set[Message]:
    """Messages whose append keeps the trace a partial model."""
    if not is_partial_model(ref, trace):
        raise ValueError("trace is not a partial model of the protocol")
    if len(trace) >= ref.bound:
        return set()
    codes = ref.stream(trace)
    remaining = ref.bound - len(trace) - 1
    result: set[Message] = set()
    for sig, members in ref._classes:
        if feasible_within(ref, ref.step_codes(codes, sig), remaining):
            result.update(members)
    return result


def possible_words(ref: ProtocolRef, trace: Trace, sender: str) -> set[str]:
    """Words w such that (sender, w) is a possible next message."""
    return {m.word for m in possible_messages(ref, trace) if m.sender == sender}


def _all_traces(alphabet: tuple[Message, ...], bound: int) -> Iterator[Trace]:
    for length in range(bound + 1):
        for combo in product(alphabet, repeat=length):
            yield combo


def brute_force_models(protocol: "Protocol", *, strong_before: bool = False) -> set[Trace]:
    """Testing oracle: enumerate every trace up to the bound and filter directly.

    Deliberately independent of the monitor machinery; only direct constraint
    evaluation is used.
    """
    if len(protocol.vocabulary) > BRUTE_FORCE_MAX_VOCAB or protocol.bound > BRUTE_FORCE_MAX_BOUND:
        raise OversizeInstanceError(
            "brute_force_models is limited to vocabularies of at most "
            f"{BRUTE_FORCE_MAX_VOCAB} words and bound {BRUTE_FORCE_MAX_BOUND}"
        )
    alphabet = tuple(
        Message(sender, word) for sender in AGENT_IDS for word in protocol.vocabulary
    )
    constraints = tuple(protocol.constraints)
    return {
        trace
        for trace in _all_traces(alphabet, protocol.bound)
        if all(
            evaluate_constraint(c, trace, strong_before=strong_before)
            for c in constraints
        )
    }


def enumerate_models(ref: ProtocolRef) -> set[Trace]:
    """All models of the protocol, found by walking the partial-model tree."""
    models: set[Trace] = set()
    if not feasible_within(ref, ref.initial_codes(), ref.bound):
        return models

    def walk(trace: Trace, codes: tuple[int, ...]) -> None:
        if ref.all_accepting(codes):
            models.add(trace)
        if len(trace) >= ref.bound:
            return
        remaining = ref.bound - len(trace) - 1
        for sig, members in ref._classes:
            nxt = ref.step_codes(codes, sig)
            if feasible_within(ref, nxt, remaining):
                for m in members:
                    walk(trace + (m,), nxt)

    walk((), ref.initial_codes())
    return models
