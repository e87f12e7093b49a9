"""Protocols, vocabulary alignments, random generation and compatibility."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .constraints import (
    ANY_SENDER,
    Atom,
    COUNTED_TEMPLATES,
    Constraint,
    Message,
    Template,
    Trace,
)
from .satisfiability import (
    OversizeInstanceError,
    ProtocolRef,
    feasible_within,
)

COMPATIBILITY_MAX_VOCAB = 16
GENERATION_ATTEMPT_FACTOR = 100


class GenerationError(RuntimeError):
    """Raised when the candidate budget is exhausted while generating."""


@dataclass(frozen=True)
class Protocol:
    vocabulary: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    bound: int

    def __post_init__(self) -> None:
        if self.bound < 1:
            raise ValueError("bound must be positive")
        vocab = set(self.vocabulary)
        if len(vocab) != len(self.vocabulary):
            raise ValueError("vocabulary contains duplicate words")
        for c in self.constraints:
            missing = c.words() - vocab
            if missing:
                raise ValueError(f"constraint {c} uses words outside the vocabulary: {missing}")


@dataclass(frozen=True)
class AlignmentRelation:
    """A set of (foreign word, own word) pairs."""

    pairs: frozenset[tuple[str, str]]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "AlignmentRelation":
        return cls(pairs=frozenset(pairs))

    def is_functional(self) -> bool:
        return len({f for f, _ in self.pairs}) == len(self.pairs)

    def is_injective(self) -> bool:
        return len({o for _, o in self.pairs}) == len(self.pairs)

    def as_mapping(self) -> dict[str, str]:
        if not self.is_functional():
            raise ValueError("alignment maps some foreign word to several own words")
        return dict(sorted(self.pairs))

    def inverse(self) -> "AlignmentRelation":
        return AlignmentRelation(pairs=frozenset((o, f) for f, o in self.pairs))

    def apply_word(self, word: str) -> str:
        mapping = self.as_mapping()
        if word not in mapping:
            raise KeyError(f"no mapping for word {word!r}")
        return mapping[word]

    def apply_trace(self, trace: Trace) -> Trace:
        mapping = self.as_mapping()
        return tuple(Message(m.sender, mapping[m.word]) for m in trace)

    def __len__(self) -> int:
        return len(self.pairs)


def translate(protocol: Protocol, alignment: AlignmentRelation) -> Protocol:
    """Rewrite every word through the alignment; structure is untouched."""
    mapping = alignment.as_mapping()
    missing = set(protocol.vocabulary) - set(mapping)
    if missing:
        raise KeyError(f"alignment lacks mappings for: {sorted(missing)}")
    if not alignment.is_injective():
        raise ValueError("translation requires an injective alignment")

    def tr_atom(atom: Atom) -> Atom:
        return Atom(sender=atom.sender, word=mapping[atom.word])

    constraints = tuple(
        Constraint(
            template=c.template,
            a=tr_atom(c.a),
            b=tr_atom(c.b) if c.b is not None else None,
            count=c.count,
        )
        for c in protocol.constraints
    )
    vocabulary = tuple(mapping[w] for w in protocol.vocabulary)
    return Protocol(vocabulary=vocabulary, constraints=constraints, bound=protocol.bound)


def _random_constraint(vocab: tuple[str, ...], bound: int, rng: random.Random) -> Constraint:
    template = rng.choice(list(Template))
    if template in COUNTED_TEMPLATES:
        word = rng.choice(vocab)
        if template is Template.EXISTENCE:
            count = rng.randint(1, bound)
        else:
            count = rng.randint(0, bound - 1)
        return Constraint(template=template, count=count, a=Atom(ANY_SENDER, word))
    wa, wb = rng.sample(vocab, 2)
    return Constraint(template=template, a=Atom(ANY_SENDER, wa), b=Atom(ANY_SENDER, wb))


def _is_satisfiable(protocol: Protocol) -> bool:
    ref = ProtocolRef(protocol)
    return feasible_within(ref, ref.initial_codes(), protocol.bound)


def generate_protocol(
    vocab_size: int,
    n_constraints: int,
    bound: int,
    rng: random.Random,
    *,
    word_prefix: str = "w",
) -> Protocol:
    """Draw random constraints, keeping each only if the set stays satisfiable."""
    if vocab_size < 2:
        raise ValueError("vocab_size must be at least 2")
    if n_constraints < 0:
        raise ValueError("n_constraints must be non-negative")
    vocab = tuple(f"{word_prefix}{i}" for i in range(vocab_size))
    accepted: list[Constraint] = []
    budget = max(GENERATION_ATTEMPT_FACTOR, GENERATION_ATTEMPT_FACTOR * n_constraints)
    attempts = 0
    while len(accepted) < n_constraints:
        if attempts >= budget:
            raise GenerationError(
                f"gave up after {attempts} draws with {len(accepted)}/{n_constraints} "
                "constraints accepted; the configuration looks over-constrained"
            )
        attempts += 1
        candidate = _random_constraint(vocab, bound, rng)
        if candidate in accepted:
            continue
        trial = Protocol(
            vocabulary=vocab, constraints=tuple(accepted) + (candidate,), bound=bound
        )
        if _is_satisfiable(trial):
            accepted.append(candidate)
    return Protocol(vocabulary=vocab, constraints=tuple(accepted), bound=bound)


def random_bijection(
    foreign: tuple[str, ...], own: tuple[str, ...], rng: random.Random
) -> AlignmentRelation:
    if len(foreign) != len(own):
        raise ValueError("vocabularies must have the same size")
    targets = list(own)
    rng.shuffle(targets)
    return AlignmentRelation.from_pairs(zip(foreign, targets))


def generate_compatible_pair(
    vocab_size: int,
    n_constraints: int,
    bound: int,
    rng: random.Random,
) -> tuple[Protocol, Protocol, AlignmentRelation]:
    """A protocol pair compatible by construction, plus the alignment used.

    Returns (p1, p2, alignment) where p1 = translate(p2, alignment) and the
    alignment is a uniformly random bijection from p2's vocabulary to p1's.
    """
    p2 = generate_protocol(vocab_size, n_constraints, bound, rng, word_prefix="x")
    own_vocab = tuple(f"w{i}" for i in range(vocab_size))
    alignment = random_bijection(p2.vocabulary, own_vocab, rng)
    mapping = alignment.as_mapping()
    translated = translate(p2, alignment)
    p1 = Protocol(vocabulary=own_vocab, constraints=translated.constraints, bound=bound)
    assert tuple(sorted(p1.vocabulary)) == tuple(sorted(mapping[w] for w in p2.vocabulary))
    return p1, p2, alignment


def check_compatibility(
    p1: Protocol, p2: Protocol, alignment: AlignmentRelation
) -> bool:
    """Whether p1 and translate(p2, alignment) have exactly the same models.

    Decided by joint reachability over both protocols' monitor products: the
    model sets differ iff some trace within the bound is accepted by one side
    only, which only depends on the pair of joint monitor states.
    """
    if p1.bound != p2.bound:
        raise ValueError("protocols must share the same bound")
    if len(p1.vocabulary) > COMPATIBILITY_MAX_VOCAB or len(p2.vocabulary) > COMPATIBILITY_MAX_VOCAB:
        raise OversizeInstanceError(
            f"compatibility check is limited to {COMPATIBILITY_MAX_VOCAB} words"
        )
    p2t = translate(p2, alignment)
    if set(p2t.vocabulary) != set(p1.vocabulary):
        return False
    ref1 = ProtocolRef(p1)
    ref2 = ProtocolRef(p2t)

    # Joint message classes: messages equivalent to every constraint on both
    # sides can be collapsed together.
    sigs: dict[tuple, tuple[tuple, tuple]] = {}
    for m in ref1.alphabet:
        s1 = tuple(
            (c.a.matches(m), c.b.matches(m) if c.b else False) for c in ref1.constraints
        )
        s2 = tuple(
            (c.a.matches(m), c.b.matches(m) if c.b else False) for c in ref2.constraints
        )
        sigs[(s1, s2)] = (s1, s2)

    seen: set[tuple] = set()
    stack = [(ref1.initial_codes(), ref2.initial_codes(), p1.bound)]
    while stack:
        c1, c2, k = stack.pop()
        if (c1, c2, k) in seen:
            continue
        seen.add((c1, c2, k))
        if ref1.all_accepting(c1) != ref2.all_accepting(c2):
            return False
        if k == 0:
            continue
        for s1, s2 in sigs.values():
            stack.append((ref1.step_codes(c1, s1), ref2.step_codes(c2, s2), k - 1))
    return True


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def protocol_to_dict(protocol: Protocol) -> dict:
    constraints = []
    for c in protocol.constraints:
        entry: dict = {"template": c.template.value, "a": f"{c.a.sender}:{c.a.word}"}
        if c.count is not None:
            entry["n"] = c.count
        if c.b is not None:
            entry["b"] = f"{c.b.sender}:{c.b.word}"
        constraints.append(entry)
    return {
        "vocabulary": list(protocol.vocabulary),
        "bound": protocol.bound,
        "constraints": constraints,
    }


def protocol_from_dict(data: dict) -> Protocol:
    from .constraints import parse_atom

    constraints = []
    for entry in data["constraints"]:
        template = Template(entry["template"])
        constraints.append(
            Constraint(
                template=template,
                count=entry.get("n"),
                a=parse_atom(entry["a"]),
                b=parse_atom(entry["b"]) if "b" in entry else None,
            )
        )
    return Protocol(
        vocabulary=tuple(data["vocabulary"]),
        constraints=tuple(constraints),
        bound=int(data["bound"]),
    )


def save_protocol(protocol: Protocol, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(protocol_to_dict(protocol), fh, indent=2)
        fh.write("\n")


def load_protocol(path: str) -> Protocol:
    with open(path, encoding="utf-8") as fh:
        return protocol_from_dict(json.load(fh))


def alignment_to_lines(
    alignment: AlignmentRelation, confidences: Optional[dict[tuple[str, str], int]] = None
) -> list[str]:
    lines = []
    for foreign, own in sorted(alignment.pairs):
        if confidences is not None and (foreign, own) in confidences:
            lines.append(f"{foreign},{own},{confidences[(foreign, own)]}")
        else:
            lines.append(f"{foreign},{own}")
    return lines


def alignment_from_lines(lines: Iterable[str]) -> tuple[AlignmentRelation, dict[tuple[str, str], int]]:
    """Parse `foreign,own[,confidence]` lines; confidences default to 1."""
    pairs = []
    confidences: dict[tuple[str, str], int] = {}
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (2, 3):
            raise ValueError(f"malformed alignment line {raw!r}")
        foreign, own = parts[0], parts[1]
        pairs.append((foreign, own))
        confidences[(foreign, own)] = int(parts[2]) if len(parts) == 3 else 1
    return AlignmentRelation.from_pairs(pairs), confidences


def save_alignment(alignment: AlignmentRelation, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(alignment_to_lines(alignment)) + "\n")


def load_alignment(path: str) -> tuple[AlignmentRelation, dict[tuple[str, str], int]]:
    with open(path, encoding="utf-8") as fh:
        return alignment_from_lines(fh)
