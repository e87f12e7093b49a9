"""Interpretation weights for foreign words and the two update strategies.

An agent keeps, for every foreign word it has received, a normalized row of
weights over its own vocabulary. Rows are created lazily (uniform, or via a
softmax over prior-alignment confidences), rewarded when an interpretation is
possible, and punished when it is not. The reasoning strategy refines the
punishment using which constraints broke and which earlier mapping they
implicate.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Literal, Optional

from .constraints import Constraint, Template
from .protocol import AlignmentRelation

ROW_SUM_TOLERANCE = 1e-9

Strategy = Literal["simple", "reasoning"]


@dataclass(frozen=True)
class PriorAlignment:
    """Prior mapping confidences; foreign words need not all occur later."""

    entries: dict[tuple[str, str], int]

    def row_values(self, foreign: str, own_vocab: tuple[str, ...]) -> list[float]:
        return [float(self.entries.get((foreign, own), 0)) for own in own_vocab]


@dataclass
class LearnerConfig:
    strategy: Strategy = "simple"
    reward_rate: float = 0.3
    punish_rate: Optional[float] = None  # defaults: 0.3 simple, 1/|V1| reasoning
    # When a broken positive premise traces to a single received mapping, use
    # the mutual (Jeffrey-style) update instead of the default punishment.
    mutual_positive_adjacency: bool = True

    def resolved_punish_rate(self, own_vocab_size: int) -> float:
        if self.punish_rate is not None:
            return self.punish_rate
        if self.strategy == "reasoning":
            return 1.0 / own_vocab_size
        return 0.3


@dataclass(frozen=True)
class Violation:
    """One broken constraint plus the earlier mapping it implicates, if any.

    partner is (foreign word, own word) when the constraint's other atom is
    traceable to a message the learner received and interpreted; None means
    the default punishment applies (own messages, untraceable context).
    """

    constraint: Constraint
    partner: Optional[tuple[str, str]] = None


class InterpretationState:
    """Weight rows over the own vocabulary plus the per-interaction mapping."""

    def __init__(
        self,
        own_vocab: Iterable[str],
        config: Optional[LearnerConfig] = None,
        prior: Optional[PriorAlignment] = None,
    ):
        self.own_vocab: tuple[str, ...] = tuple(own_vocab)
        if not self.own_vocab:
            raise ValueError("own vocabulary must be non-empty")
        self.config = config or LearnerConfig()
        self.prior = prior
        self.rows: dict[str, dict[str, float]] = {}
        self.mappings_made: dict[str, str] = {}
        if self.prior is not None:
            # Prior knowledge is part of the alignment from the start, not
            # only once a word happens to be received.
            for foreign in sorted({f for f, _ in self.prior.entries}):
                self.rows[foreign] = self._init_row(foreign)

    # -- row management ------------------------------------------------

    def begin_interaction(self) -> None:
        self.mappings_made.clear()

    def mapped_own_words(self) -> set[str]:
        return set(self.mappings_made.values())

    def row(self, foreign: str) -> dict[str, float]:
        if foreign not in self.rows:
            self.rows[foreign] = self._init_row(foreign)
        return self.rows[foreign]

    def _init_row(self, foreign: str) -> dict[str, float]:
        n = len(self.own_vocab)
        if self.prior is None:
            return {own: 1.0 / n for own in self.own_vocab}
        raw = self.prior.row_values(foreign, self.own_vocab)
        exps = [math.exp(v) for v in raw]
        total = sum(exps)
        return {own: e / total for own, e in zip(self.own_vocab, exps)}

    def _normalize(self, foreign: str) -> None:
        row = self.rows[foreign]
        total = sum(row.values())
        if total <= 0.0:
            # Degenerate evidence: every candidate ruled out. Start over.
            uniform = 1.0 / len(self.own_vocab)
            for own in row:
                row[own] = uniform
            return
        for own in row:
            row[own] /= total

    # -- interpretation choice -----------------------------------------

    def choose_interpretation(
        self, foreign: str, candidates: set[str], rng: random.Random
    ) -> Optional[str]:
        """Pick (and record) an interpretation among the candidate own words.

        Returns None when the interaction is in a failure case: the word was
        already mapped outside the candidates, or no candidate remains.
        """
        if foreign in self.mappings_made:
            chosen = self.mappings_made[foreign]
            return chosen if chosen in candidates else None
        if not candidates:
            return None
        row = self.row(foreign)
        best = max(row[own] for own in candidates)
        chosen = rng.choice(sorted(own for own in candidates if row[own] == best))
        self.mappings_made[foreign] = chosen
        return chosen

    def update_set(self, foreign: str, chosen: str) -> set[str]:
        """Own words whose weight reaches the chosen one's, minus already-mapped ones.

        Words excluded only because they were mapped earlier this interaction
        reflect the learner's own bookkeeping, not protocol evidence, so they
        are not updated.
        """
        row = self.row(foreign)
        threshold = row[chosen]
        taken = self.mapped_own_words() - {chosen}
        return {own for own, w in row.items() if w >= threshold and own not in taken}

    # -- updates ---------------------------------------------------------

    def simple_update(self, foreign: str, verdicts: dict[str, bool]) -> None:
        """Reward possible candidates, punish impossible ones, renormalize."""
        row = self.row(foreign)
        r_r = self.config.reward_rate
        r_p = self.config.resolved_punish_rate(len(self.own_vocab))
        for own, possible in verdicts.items():
            if possible:
                row[own] += r_r * row[own]
            else:
                row[own] = max(0.0, row[own] - r_p * row[own])
        self._normalize(foreign)

    def reasoning_update(
        self, foreign: str, verdicts: dict[str, Optional[list[Violation]]]
    ) -> None:
        """Constraint-aware update; verdict None means the candidate is possible.

        For an impossible candidate, each broken rule is applied in turn:
        absence zeroes the weight outright; a rule implicating an earlier
        received mapping punishes both weights in proportion to each other;
        everything else (no broken rule, own messages, untraceable context)
        gets the default proportional punishment.
        """
        row = self.row(foreign)
        r_r = self.config.reward_rate
        r_p = self.config.resolved_punish_rate(len(self.own_vocab))
        touched_foreign: set[str] = {foreign}
        for own, violations in verdicts.items():
            if violations is None:
                row[own] += r_r * row[own]
                continue
            if not violations:
                row[own] = max(0.0, row[own] - r_p * row[own])
                continue
            for violation in violations:
                if violation.constraint.template is Template.ABSENCE:
                    row[own] = 0.0
                elif violation.partner is not None:
                    p_foreign, p_own = violation.partner
                    partner_row = self.row(p_foreign)
                    cut_here = r_p * partner_row[p_own]
                    cut_partner = r_p * row[own]
                    row[own] = max(0.0, row[own] - cut_here)
                    partner_row[p_own] = max(0.0, partner_row[p_own] - cut_partner)
                    touched_foreign.add(p_foreign)
                else:
                    row[own] = max(0.0, row[own] - r_p * row[own])
        for f in touched_foreign:
            self._normalize(f)

    # -- extraction and serialization ------------------------------------

    def extract_alignment(self, rng: random.Random) -> AlignmentRelation:
        """One pair per known foreign word, argmax with random tie-breaking."""
        pairs = []
        for foreign in sorted(self.rows):
            row = self.rows[foreign]
            best = max(row.values())
            pairs.append(
                (foreign, rng.choice(sorted(own for own, w in row.items() if w == best)))
            )
        return AlignmentRelation.from_pairs(pairs)

    def check_rows(self) -> None:
        for foreign, row in self.rows.items():
            total = sum(row.values())
            if abs(total - 1.0) > ROW_SUM_TOLERANCE:
                raise AssertionError(f"row for {foreign!r} sums to {total}")
            if any(w < 0.0 or w > 1.0 for w in row.values()):
                raise AssertionError(f"row for {foreign!r} leaves [0, 1]")

    def dump_rows(self) -> list[str]:
        """Rows as `foreign,own,weight` lines (the alignment file layout)."""
        lines = []
        for foreign in sorted(self.rows):
            for own in self.own_vocab:
                lines.append(f"{foreign},{own},{self.rows[foreign][own]!r}")
        return lines

    def load_rows(self, lines: Iterable[str]) -> None:
        for raw in lines:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            foreign, own, weight = (p.strip() for p in line.split(","))
            self.rows.setdefault(foreign, {o: 0.0 for o in self.own_vocab})
            self.rows[foreign][own] = float(weight)

    @classmethod
    def with_alignment(
        cls,
        own_vocab: Iterable[str],
        pairs: Iterable[tuple[str, str]],
        config: Optional[LearnerConfig] = None,
    ) -> "InterpretationState":
        """A state whose rows already put all weight on the given mapping."""
        state = cls(own_vocab, config=config)
        for foreign, own in pairs:
            state.rows[foreign] = {o: (1.0 if o == own else 0.0) for o in state.own_vocab}
        return state
