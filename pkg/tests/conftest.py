import random

import pytest

from vocalign.constraints import (
    AGENT_IDS,
    ANY_SENDER,
    Atom,
    Constraint,
    Message,
    SENDER_PATTERNS,
    Template,
    parse_constraint,
)
from vocalign.protocol import AlignmentRelation, Protocol

SAMPLES = "samples"

WAITER_VOCAB = ("da bere", "birra", "vino", "acqua", "tipo", "media", "piccola")
CUSTOMER_VOCAB = ("to drink", "beer", "wine", "water", "size", "pint", "half pint")


def _c(text: str) -> Constraint:
    return parse_constraint(text)


@pytest.fixture(scope="session")
def waiter_protocol() -> Protocol:
    return Protocol(
        vocabulary=WAITER_VOCAB,
        bound=5,
        constraints=(
            _c("existence(1, A1:da bere)"),
            _c("absence(1, A1:da bere)"),
            _c("premise(A2:birra, A1:da bere)"),
            _c("premise(A2:vino, A1:da bere)"),
            _c("premise(A2:acqua, A1:da bere)"),
            _c("not_correlation(A2:birra, A1:vino)"),
            _c("response(A2:birra, A1:tipo)"),
            _c("premise(A2:piccola, A1:tipo)"),
            _c("premise(A2:media, A1:tipo)"),
        ),
    )


@pytest.fixture(scope="session")
def customer_protocol() -> Protocol:
    """The published customer protocol (missing the wine/beer exclusion)."""
    return Protocol(
        vocabulary=CUSTOMER_VOCAB,
        bound=5,
        constraints=(
            _c("existence(1, A1:to drink)"),
            _c("absence(1, A1:to drink)"),
            _c("premise(A2:beer, A1:to drink)"),
            _c("premise(A2:water, A1:to drink)"),
            _c("premise(A2:wine, A1:to drink)"),
            _c("response(A2:beer, A1:size)"),
            _c("premise(A2:half pint, A1:size)"),
            _c("premise(A2:pint, A1:size)"),
        ),
    )


@pytest.fixture(scope="session")
def customer_protocol_fixed(customer_protocol) -> Protocol:
    return Protocol(
        vocabulary=customer_protocol.vocabulary,
        bound=customer_protocol.bound,
        constraints=customer_protocol.constraints
        + (_c("not_correlation(A2:beer, A1:wine)"),),
    )


@pytest.fixture(scope="session")
def waiter_customer_alignment() -> AlignmentRelation:
    # Positional: waiter (foreign) word -> customer (own) word.
    return AlignmentRelation.from_pairs(zip(WAITER_VOCAB, CUSTOMER_VOCAB))


def random_constraint(vocab: tuple[str, ...], bound: int, rng: random.Random) -> Constraint:
    """A random constraint with arbitrary sender patterns (wider than the generator's)."""
    template = rng.choice(list(Template))
    sender_a = rng.choice(SENDER_PATTERNS)
    if template is Template.EXISTENCE:
        return Constraint(
            template=template, count=rng.randint(1, bound), a=Atom(sender_a, rng.choice(vocab))
        )
    if template is Template.ABSENCE:
        return Constraint(
            template=template, count=rng.randint(0, bound - 1), a=Atom(sender_a, rng.choice(vocab))
        )
    sender_b = rng.choice(SENDER_PATTERNS)
    return Constraint(
        template=template,
        a=Atom(sender_a, rng.choice(vocab)),
        b=Atom(sender_b, rng.choice(vocab)),
    )


def random_trace(vocab: tuple[str, ...], length: int, rng: random.Random) -> tuple[Message, ...]:
    return tuple(
        Message(rng.choice(AGENT_IDS), rng.choice(vocab)) for _ in range(length)
    )
