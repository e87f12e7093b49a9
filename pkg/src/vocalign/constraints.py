"""Constraint templates over message traces, with direct and streaming semantics.

A trace is a finite sequence of (sender, word) messages. Constraints are
evaluated over the trace as if it were complete: nothing happens after the
last message. Every template also compiles to a small monitor state machine
whose verdict after streaming a full trace agrees with direct evaluation.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Optional

AGENT_1 = "A1"
AGENT_2 = "A2"
ANY_SENDER = "*"

AGENT_IDS = (AGENT_1, AGENT_2)
SENDER_PATTERNS = (AGENT_1, AGENT_2, ANY_SENDER)


class Template(str, enum.Enum):
    EXISTENCE = "existence"
    ABSENCE = "absence"
    CORRELATION = "correlation"
    NOT_CORRELATION = "not_correlation"
    RESPONSE = "response"
    NOT_RESPONSE = "not_response"
    BEFORE = "before"
    NOT_BEFORE = "not_before"
    PREMISE = "premise"
    NOT_PREMISE = "not_premise"
    IMM_AFTER = "imm_after"
    NOT_IMM_AFTER = "not_imm_after"


COUNTED_TEMPLATES = frozenset({Template.EXISTENCE, Template.ABSENCE})
BINARY_TEMPLATES = frozenset(t for t in Template if t not in COUNTED_TEMPLATES)

#: Templates whose violations are always recoverable by uttering further
#: messages; they can never become permanently violated mid-trace, so an
#: agent can only learn from them once the interaction has ended.
MONOTONIC_TEMPLATES = frozenset(
    {Template.EXISTENCE, Template.CORRELATION, Template.RESPONSE}
)


class Monotonicity(str, enum.Enum):
    MONOTONIC = "monotonic"
    NON_MONOTONIC = "non_monotonic"


@dataclass(frozen=True)
class Message:
    """A concrete uttered message: who said which word."""

    sender: str
    word: str

    def __post_init__(self) -> None:
        if self.sender not in AGENT_IDS:
            raise ValueError(f"sender must be one of {AGENT_IDS}, got {self.sender!r}")
        if not self.word:
            raise ValueError("word must be non-empty")


@dataclass(frozen=True)
class Atom:
    """A message pattern: a word plus a sender pattern (A1, A2 or *)."""

    sender: str
    word: str

    def __post_init__(self) -> None:
        if self.sender not in SENDER_PATTERNS:
            raise ValueError(
                f"sender pattern must be one of {SENDER_PATTERNS}, got {self.sender!r}"
            )
        if not self.word:
            raise ValueError("word must be non-empty")

    def matches(self, message: Message) -> bool:
        return self.word == message.word and self.sender in (ANY_SENDER, message.sender)


Trace = tuple[Message, ...]


@dataclass(frozen=True)
class Constraint:
    template: Template
    a: Atom
    b: Optional[Atom] = None
    count: Optional[int] = None

    def __post_init__(self) -> None:
        if self.template in COUNTED_TEMPLATES:
            if self.b is not None:
                raise ValueError(f"{self.template.value} takes a single atom")
            if self.count is None:
                raise ValueError(f"{self.template.value} requires a count")
            minimum = 1 if self.template is Template.EXISTENCE else 0
            if self.count < minimum:
                raise ValueError(
                    f"{self.template.value} count must be >= {minimum}, got {self.count}"
                )
        else:
            if self.b is None:
                raise ValueError(f"{self.template.value} requires two atoms")
            if self.count is not None:
                raise ValueError(f"{self.template.value} does not take a count")

    def words(self) -> frozenset[str]:
        ws = {self.a.word}
        if self.b is not None:
            ws.add(self.b.word)
        return frozenset(ws)

    def __str__(self) -> str:
        return format_constraint(self)


def _first_match(atom: Atom, trace: Trace) -> Optional[int]:
    for j, m in enumerate(trace):
        if atom.matches(m):
            return j
    return None


def _count_matches(atom: Atom, trace: Trace) -> int:
    return sum(1 for m in trace if atom.matches(m))


def evaluate_constraint(c: Constraint, trace: Trace, *, strong_before: bool = False) -> bool:
    """Truth of a constraint over a finished trace.

    `before` defaults to the weak reading: it holds vacuously when neither
    atom occurs. Pass strong_before=True to additionally require that the
    first atom occurs at all.
    """
    t = c.template
    a, b = c.a, c.b
    if t is Template.EXISTENCE:
        return _count_matches(a, trace) >= c.count  # type: ignore[operator]
    if t is Template.ABSENCE:
        return _count_matches(a, trace) <= c.count  # type: ignore[operator]

    assert b is not None
    if t is Template.CORRELATION:
        return _first_match(a, trace) is None or _first_match(b, trace) is not None
    if t is Template.NOT_CORRELATION:
        return _first_match(a, trace) is None or _first_match(b, trace) is None
    if t is Template.RESPONSE:
        return all(
            any(b.matches(m2) for m2 in trace[j:])
            for j, m in enumerate(trace)
            if a.matches(m)
        )
    if t in (Template.NOT_RESPONSE, Template.NOT_BEFORE):
        # Both forbid any a at position j with a b at some position k >= j.
        seen_a = False
        for m in trace:
            if b.matches(m) and (seen_a or a.matches(m)):
                return False
            if a.matches(m):
                seen_a = True
        return True
    if t is Template.BEFORE:
        fa = _first_match(a, trace)
        fb = _first_match(b, trace)
        if fb is None:
            return fa is not None if strong_before else True
        return fa is not None and fb >= fa
    if t is Template.PREMISE:
        # a may only occur immediately after b; a at position 0 violates.
        return all(
            j >= 1 and b.matches(trace[j - 1])
            for j, m in enumerate(trace)
            if a.matches(m)
        )
    if t is Template.NOT_PREMISE:
        return all(
            j == 0 or not b.matches(trace[j - 1])
            for j, m in enumerate(trace)
            if a.matches(m)
        )
    if t is Template.IMM_AFTER:
        return all(
            j + 1 < len(trace) and b.matches(trace[j + 1])
            for j, m in enumerate(trace)
            if a.matches(m)
        )
    if t is Template.NOT_IMM_AFTER:
        return all(
            j + 1 >= len(trace) or not b.matches(trace[j + 1])
            for j, m in enumerate(trace)
            if a.matches(m)
        )
    raise AssertionError(f"unhandled template {t}")


def classify_monotonicity(c: Constraint) -> Monotonicity:
    if c.template in MONOTONIC_TEMPLATES:
        return Monotonicity.MONOTONIC
    return Monotonicity.NON_MONOTONIC


# ---------------------------------------------------------------------------
# Monitors
#
# Each template compiles to a handful of integer-coded states. Transitions
# take the pair (matches_a, matches_b) of the incoming message. The verdict
# flags are derived from the code:
#   accepting_if_ended  -- the streamed prefix satisfies the constraint
#   permanently_violated -- no extension can ever satisfy it again
# ---------------------------------------------------------------------------

_VIOLATED = {
    Template.EXISTENCE: frozenset(),
    Template.CORRELATION: frozenset(),
    Template.RESPONSE: frozenset(),
    Template.ABSENCE: None,  # counter-based, handled specially
    Template.NOT_CORRELATION: frozenset({3}),
    Template.NOT_RESPONSE: frozenset({2}),
    Template.NOT_BEFORE: frozenset({2}),
    Template.BEFORE: frozenset({2}),
    Template.PREMISE: frozenset({3}),
    Template.NOT_PREMISE: frozenset({2}),
    Template.IMM_AFTER: frozenset({2}),
    Template.NOT_IMM_AFTER: frozenset({2}),
}


def initial_code(c: Constraint) -> int:
    return 0


def step_code(c: Constraint, code: int, ma: bool, mb: bool) -> int:
    t = c.template
    if t is Template.EXISTENCE:
        return min(code + 1, c.count) if ma else code  # type: ignore[arg-type]
    if t is Template.ABSENCE:
        return min(code + 1, c.count + 1) if ma else code  # type: ignore[operator]
    if t is Template.CORRELATION:
        # 0: no a yet, 1: a without b, 2: b seen (absorbing)
        if code == 2 or mb:
            return 2
        return 1 if (ma or code == 1) else 0
    if t is Template.NOT_CORRELATION:
        # 0: neither, 1: a only, 2: b only, 3: violated
        if code == 3 or (ma and mb):
            return 3
        if code == 1:
            return 3 if mb else 1
        if code == 2:
            return 3 if ma else 2
        return 1 if ma else (2 if mb else 0)
    if t is Template.RESPONSE:
        # 0: no pending obligation, 1: some a awaits a later b
        if mb:
            return 0
        return 1 if ma else code
    if t in (Template.NOT_RESPONSE, Template.NOT_BEFORE):
        # 0: no a yet, 1: a seen, 2: violated
        if code == 2 or (mb and (code == 1 or ma)):
            return 2
        return 1 if (ma or code == 1) else 0
    if t is Template.BEFORE:
        # 0: neither seen, 1: a seen first (absorbing), 2: violated (b first)
        if code != 0:
            return code
        if ma:
            return 1
        return 2 if mb else 0
    if t is Template.PREMISE:
        # 0: at start, 1: previous matched b, 2: previous did not, 3: violated
        if code == 3:
            return 3
        if ma and code in (0, 2):
            return 3
        return 1 if mb else 2
    if t is Template.NOT_PREMISE:
        # 0: previous did not match b (or start), 1: previous matched b, 2: violated
        if code == 2 or (code == 1 and ma):
            return 2
        return 1 if mb else 0
    if t is Template.IMM_AFTER:
        # 0: no obligation, 1: previous matched a, current must match b, 2: violated
        if code == 2 or (code == 1 and not mb):
            return 2
        return 1 if ma else 0
    if t is Template.NOT_IMM_AFTER:
        # 0: previous did not match a, 1: previous matched a, 2: violated
        if code == 2 or (code == 1 and mb):
            return 2
        return 1 if ma else 0
    raise AssertionError(f"unhandled template {t}")


def code_violated(c: Constraint, code: int) -> bool:
    if c.template is Template.ABSENCE:
        return code > c.count  # type: ignore[operator]
    violated = _VIOLATED[c.template]
    assert violated is not None
    return code in violated


def code_accepting(c: Constraint, code: int, *, strong_before: bool = False) -> bool:
    t = c.template
    if t is Template.EXISTENCE:
        return code >= c.count  # type: ignore[operator]
    if t is Template.ABSENCE:
        return code <= c.count  # type: ignore[operator]
    if t is Template.CORRELATION:
        return code != 1
    if t is Template.RESPONSE:
        return code == 0
    if t is Template.IMM_AFTER:
        return code == 0
    if t is Template.BEFORE and strong_before:
        return code == 1
    return not code_violated(c, code)


def code_deficit(c: Constraint, code: int) -> int:
    """Outstanding number of matches an existence constraint still needs."""
    if c.template is Template.EXISTENCE:
        return max(0, c.count - code)  # type: ignore[operator]
    return 0


@dataclass(frozen=True)
class MonitorState:
    code: int
    accepting_if_ended: bool
    permanently_violated: bool


def compile_monitor(c: Constraint, *, strong_before: bool = False) -> MonitorState:
    code = initial_code(c)
    return MonitorState(
        code=code,
        accepting_if_ended=code_accepting(c, code, strong_before=strong_before),
        permanently_violated=code_violated(c, code),
    )


def monitor_step(
    s: MonitorState, c: Constraint, m: Message, *, strong_before: bool = False
) -> MonitorState:
    ma = c.a.matches(m)
    mb = c.b.matches(m) if c.b is not None else False
    code = step_code(c, s.code, ma, mb)
    return MonitorState(
        code=code,
        accepting_if_ended=code_accepting(c, code, strong_before=strong_before),
        permanently_violated=code_violated(c, code),
    )


def violated_constraints(
    constraints: Iterable[Constraint],
    trace: Trace,
    m: Message,
    *,
    strong_before: bool = False,
) -> set[Constraint]:
    """Constraints that hold on the trace but break once m is appended."""
    extended = trace + (m,)
    return {
        c
        for c in constraints
        if evaluate_constraint(c, trace, strong_before=strong_before)
        and not evaluate_constraint(c, extended, strong_before=strong_before)
    }


# ---------------------------------------------------------------------------
# Textual forms: template(n?, SENDER:word, SENDER:word?) with senders A1/A2/*.
# ---------------------------------------------------------------------------

_ATOM_RE = re.compile(r"^(A1|A2|\*):(.+)$")
_CONSTRAINT_RE = re.compile(r"^\s*([a-z_]+)\s*\(\s*(.*?)\s*\)\s*$")


def parse_atom(text: str) -> Atom:
    match = _ATOM_RE.match(text.strip())
    if match is None:
        raise ValueError(f"malformed atom {text!r}; expected SENDER:word")
    return Atom(sender=match.group(1), word=match.group(2).strip())


def format_atom(atom: Atom) -> str:
    return f"{atom.sender}:{atom.word}"


def parse_message(text: str) -> Message:
    atom = parse_atom(text)
    if atom.sender == ANY_SENDER:
        raise ValueError(f"messages need a concrete sender, got {text!r}")
    return Message(sender=atom.sender, word=atom.word)


def format_message(m: Message) -> str:
    return f"{m.sender}:{m.word}"


def parse_constraint(text: str) -> Constraint:
    match = _CONSTRAINT_RE.match(text)
    if match is None:
        raise ValueError(f"malformed constraint {text!r}")
    name, body = match.group(1), match.group(2)
    try:
        template = Template(name)
    except ValueError:
        raise ValueError(f"unknown template {name!r}") from None
    args = [part.strip() for part in body.split(",")] if body else []
    if template in COUNTED_TEMPLATES:
        if len(args) != 2:
            raise ValueError(f"{name} expects (n, atom), got {text!r}")
        return Constraint(template=template, count=int(args[0]), a=parse_atom(args[1]))
    if len(args) != 2:
        raise ValueError(f"{name} expects (atom, atom), got {text!r}")
    return Constraint(template=template, a=parse_atom(args[0]), b=parse_atom(args[1]))


def format_constraint(c: Constraint) -> str:
    if c.template in COUNTED_TEMPLATES:
        return f"{c.template.value}({c.count}, {format_atom(c.a)})"
    assert c.b is not None
    return f"{c.template.value}({format_atom(c.a)}, {format_atom(c.b)})"
