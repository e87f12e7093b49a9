"""Alignment quality metrics and the convergence / repair experiments."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .engine import AgentRuntime, EnginePolicy, run_interaction
from .learner import InterpretationState, LearnerConfig, PriorAlignment, Strategy
from .protocol import (
    AlignmentRelation,
    Protocol,
    generate_protocol,
    random_bijection,
    translate,
)
from .satisfiability import ProtocolRef

# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def precision(beta: AlignmentRelation, gamma: AlignmentRelation) -> float:
    """Fraction of beta's pairs that are also in gamma; 0.0 when beta is empty."""
    if not beta.pairs:
        return 0.0
    return len(beta.pairs & gamma.pairs) / len(beta.pairs)


def recall(beta: AlignmentRelation, gamma: AlignmentRelation) -> float:
    """Fraction of gamma's pairs found by beta."""
    if not gamma.pairs:
        raise ValueError("reference alignment must be non-empty")
    return len(beta.pairs & gamma.pairs) / len(gamma.pairs)


def f_score(beta: AlignmentRelation, gamma: AlignmentRelation) -> float:
    p = precision(beta, gamma)
    r = recall(beta, gamma)
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


@dataclass(frozen=True)
class AlignmentScores:
    precision: float
    recall: float
    f_score: float
    no_mappings: bool  # beta was empty, so precision is undefined (reported 0)


def score_alignment(beta: AlignmentRelation, gamma: AlignmentRelation) -> AlignmentScores:
    return AlignmentScores(
        precision=precision(beta, gamma),
        recall=recall(beta, gamma),
        f_score=f_score(beta, gamma),
        no_mappings=not beta.pairs,
    )


# ---------------------------------------------------------------------------
# Priors with a controlled quality level
# ---------------------------------------------------------------------------


def make_prior(
    alpha: AlignmentRelation, quality: float, rng: random.Random
) -> PriorAlignment:
    """A total injective prior with precision = recall = quality against alpha.

    The kept pairs are correct; the remaining foreign words are mapped to a
    derangement of the remaining own words so none of them is accidentally
    right. A remainder of exactly one pair cannot be deranged, so one extra
    pair is swapped in and the achieved quality drops by 1/|alpha|.
    """
    if not alpha.is_functional() or not alpha.is_injective():
        raise ValueError("ground truth must be bijective")
    pairs = sorted(alpha.pairs)
    n = len(pairs)
    keep = round(quality * n)
    if not 0 <= keep <= n:
        raise ValueError("quality out of range for this alignment")
    if n - keep == 1:
        keep -= 1
    kept_idx = set(rng.sample(range(n), keep))
    wrong = [pairs[i] for i in range(n) if i not in kept_idx]
    entries: dict[tuple[str, str], int] = {
        pairs[i]: 1 for i in kept_idx
    }
    if wrong:
        foreigns = [f for f, _ in wrong]
        targets = [o for _, o in wrong]
        shuffled = targets[:]
        while any(s == t for s, t in zip(shuffled, targets)):
            rng.shuffle(shuffled)
        for foreign, own in zip(foreigns, shuffled):
            entries[(foreign, own)] = 1
    return PriorAlignment(entries=entries)


# ---------------------------------------------------------------------------
# Task pool
# ---------------------------------------------------------------------------


class TaskPool:
    """Compatible protocol pairs for one agent couple, all under one alignment.

    Tasks recur: with probability p_new a fresh pair is generated (translated
    under the same ground-truth alignment), otherwise a previous one replays.
    """

    def __init__(
        self,
        own_vocab: tuple[str, ...],
        foreign_vocab: tuple[str, ...],
        alignment: AlignmentRelation,
        n_constraints: int,
        bound: int,
        p_new: float = 0.5,
    ):
        self.own_vocab = own_vocab
        self.foreign_vocab = foreign_vocab
        self.alignment = alignment
        self.n_constraints = n_constraints
        self.bound = bound
        self.p_new = p_new
        self.tasks: list[tuple[ProtocolRef, ProtocolRef]] = []

    def _fresh(self, rng: random.Random) -> tuple[ProtocolRef, ProtocolRef]:
        vocab = self.foreign_vocab
        base = generate_protocol(
            len(vocab), self.n_constraints, self.bound, rng, word_prefix="#"
        )
        # Rename the synthetic words onto the actual foreign vocabulary.
        rename = AlignmentRelation.from_pairs(
            zip(base.vocabulary, vocab)
        )
        p2 = translate(base, rename)
        p1 = translate(p2, self.alignment)
        p1 = Protocol(
            vocabulary=self.own_vocab, constraints=p1.constraints, bound=self.bound
        )
        return ProtocolRef(p1), ProtocolRef(p2)

    def next(self, rng: random.Random) -> tuple[ProtocolRef, ProtocolRef]:
        if not self.tasks or rng.random() < self.p_new:
            task = self._fresh(rng)
            self.tasks.append(task)
            return task
        return rng.choice(self.tasks)


# ---------------------------------------------------------------------------
# Experiment runs
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    vocab_size: int = 10
    n_constraints: int = 10
    n_interactions: int = 200
    n_repetitions: int = 10
    strategy: Strategy = "reasoning"
    prior_quality: Optional[float] = None
    seed: int = 0
    bound: Optional[int] = None  # defaults to vocab_size
    p_new: float = 0.5
    p_stop: float = 0.5

    def resolved_bound(self) -> int:
        return self.bound if self.bound is not None else self.vocab_size


@dataclass(frozen=True)
class CurvePoint:
    interaction: int  # 1-based
    mean_f_score: float
    stderr: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    points: list[CurvePoint]
    #: First 1-based interaction index with mean F-score >= 0.8, if reached.
    reached_08_at: Optional[int]
    csv: str
    per_repetition: list[list[float]] = field(default_factory=list)


def _run_repetition(config: ExperimentConfig, rep: int) -> list[float]:
    rng = random.Random(f"{config.seed}:{rep}")
    bound = config.resolved_bound()
    own_vocab = tuple(f"a{i}" for i in range(config.vocab_size))
    foreign_vocab = tuple(f"b{i}" for i in range(config.vocab_size))
    alpha = random_bijection(foreign_vocab, own_vocab, rng)  # foreign -> own
    alpha_inv = alpha.inverse()

    def make_learner(vocab: tuple[str, ...], truth: AlignmentRelation) -> InterpretationState:
        prior = None
        if config.prior_quality is not None:
            prior = make_prior(truth, config.prior_quality, rng)
        return InterpretationState(
            vocab, config=LearnerConfig(strategy=config.strategy), prior=prior
        )

    learner1 = make_learner(own_vocab, alpha)
    learner2 = make_learner(foreign_vocab, alpha_inv)
    pool = TaskPool(
        own_vocab=own_vocab,
        foreign_vocab=foreign_vocab,
        alignment=alpha,
        n_constraints=config.n_constraints,
        bound=bound,
        p_new=config.p_new,
    )
    policy = EnginePolicy(p_stop=config.p_stop)
    curve: list[float] = []
    for _ in range(config.n_interactions):
        ref1, ref2 = pool.next(rng)
        a1 = AgentRuntime(agent_id="A1", protocol_ref=ref1, learner=learner1)
        a2 = AgentRuntime(agent_id="A2", protocol_ref=ref2, learner=learner2)
        run_interaction(a1, a2, policy, rng)
        f1 = f_score(learner1.extract_alignment(rng), alpha)
        f2 = f_score(learner2.extract_alignment(rng), alpha_inv)
        curve.append((f1 + f2) / 2.0)
    return curve


def _summarize(config: ExperimentConfig, per_rep: list[list[float]]) -> ExperimentResult:
    points = []
    reached: Optional[int] = None
    for i in range(config.n_interactions):
        values = [rep[i] for rep in per_rep]
        mean = sum(values) / len(values)
        if len(values) > 1:
            var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
            stderr = math.sqrt(var / len(values))
        else:
            stderr = 0.0
        points.append(CurvePoint(interaction=i + 1, mean_f_score=mean, stderr=stderr))
        if reached is None and mean >= 0.8:
            reached = i + 1
    header = "interaction,mean_fscore,stderr,strategy,n_constraints,vocab_size,seed"
    rows = [
        f"{p.interaction},{p.mean_f_score:.6f},{p.stderr:.6f},"
        f"{config.strategy},{config.n_constraints},{config.vocab_size},{config.seed}"
        for p in points
    ]
    csv = "\n".join([header, *rows]) + "\n"
    return ExperimentResult(
        config=config, points=points, reached_08_at=reached, csv=csv, per_repetition=per_rep
    )


def run_convergence(config: ExperimentConfig) -> ExperimentResult:
    """Learn from scratch (or from a prior) over repeated random tasks."""
    per_rep = [_run_repetition(config, rep) for rep in range(config.n_repetitions)]
    return _summarize(config, per_rep)


def run_repair(config: ExperimentConfig) -> ExperimentResult:
    """Repair an existing alignment of the configured quality."""
    if config.prior_quality is None:
        raise ValueError("run_repair requires prior_quality")
    return run_convergence(config)
