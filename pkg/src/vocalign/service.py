"""HTTP service exposing protocol generation, checking, runs and experiments."""

from __future__ import annotations

import random
from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import experiments
from .constraints import format_message, parse_message
from .engine import AgentRuntime, EnginePolicy, run_interaction
from .learner import InterpretationState, LearnerConfig
from .protocol import (
    AlignmentRelation,
    GenerationError,
    Protocol,
    check_compatibility,
    generate_compatible_pair,
    generate_protocol,
    protocol_from_dict,
    protocol_to_dict,
)
from .satisfiability import (
    OversizeInstanceError,
    ProtocolRef,
    is_model,
    is_partial_model,
    possible_messages,
)


class ConstraintModel(BaseModel):
    template: str
    n: Optional[int] = None
    a: str
    b: Optional[str] = None


class ProtocolModel(BaseModel):
    vocabulary: list[str]
    bound: int
    constraints: list[ConstraintModel]

    @classmethod
    def from_protocol(cls, protocol: Protocol) -> "ProtocolModel":
        return cls.model_validate(protocol_to_dict(protocol))

    def to_protocol(self) -> Protocol:
        return protocol_from_dict(self.model_dump(exclude_none=True))


class AlignmentPair(BaseModel):
    foreign: str
    own: str
    confidence: int = 1


def _alignment_from_pairs(pairs: list[AlignmentPair]) -> AlignmentRelation:
    return AlignmentRelation.from_pairs((p.foreign, p.own) for p in pairs)


class GenerateRequest(BaseModel):
    vocab_size: int = Field(ge=2)
    n_constraints: int = Field(ge=0)
    bound: int = Field(ge=1)
    seed: int = 0


class GenerateResponse(BaseModel):
    protocol: ProtocolModel


class GeneratePairResponse(BaseModel):
    protocol_a: ProtocolModel
    protocol_b: ProtocolModel
    alignment: list[AlignmentPair]


class CheckRequest(BaseModel):
    protocol: ProtocolModel
    trace: list[str] = Field(default_factory=list)


class CheckResponse(BaseModel):
    is_model: bool
    is_partial_model: bool
    possible_messages: list[str]


class CompatibilityRequest(BaseModel):
    protocol_a: ProtocolModel
    protocol_b: ProtocolModel
    alignment: list[AlignmentPair]


class CompatibilityResponse(BaseModel):
    compatible: bool


class RunRequest(BaseModel):
    protocol_a: ProtocolModel
    protocol_b: ProtocolModel
    alignment: list[AlignmentPair]  # ground truth, foreign (B) -> own (A)
    strategy: Literal["simple", "reasoning"] = "simple"
    seed: int = 0
    p_stop: float = 0.5
    collect_log: bool = False


class LogRecordModel(BaseModel):
    position: int
    speaker: str
    word_sent: str
    word_interpreted: Optional[str]
    possible_set_size: int
    violated: list[str]


class RunResponse(BaseModel):
    status: str
    length: int
    transcript: list[str]
    f_score_a: float
    f_score_b: float
    log: list[LogRecordModel] = Field(default_factory=list)


class ExperimentRequest(BaseModel):
    vocab_size: int = 10
    n_constraints: int = 10
    n_interactions: int = 200
    n_repetitions: int = 10
    strategy: Literal["simple", "reasoning"] = "reasoning"
    quality: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    seed: int = 0
    bound: Optional[int] = None
    p_new: float = 0.5
    p_stop: float = 0.5


class ExperimentResponse(BaseModel):
    csv: str
    reached_08_at: Optional[int]
    final_mean_f_score: float


def _experiment_config(req: ExperimentRequest) -> experiments.ExperimentConfig:
    return experiments.ExperimentConfig(
        vocab_size=req.vocab_size,
        n_constraints=req.n_constraints,
        n_interactions=req.n_interactions,
        n_repetitions=req.n_repetitions,
        strategy=req.strategy,
        prior_quality=req.quality,
        seed=req.seed,
        bound=req.bound,
        p_new=req.p_new,
        p_stop=req.p_stop,
    )


app = FastAPI(title="vocalign", description="Interaction-grounded vocabulary alignment")


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/protocols/generate", response_model=GenerateResponse)
def generate(req: GenerateRequest) -> GenerateResponse:
    rng = random.Random(req.seed)
    try:
        protocol = generate_protocol(req.vocab_size, req.n_constraints, req.bound, rng)
    except GenerationError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return GenerateResponse(protocol=ProtocolModel.from_protocol(protocol))


@app.post("/pairs/generate", response_model=GeneratePairResponse)
def generate_pair(req: GenerateRequest) -> GeneratePairResponse:
    rng = random.Random(req.seed)
    try:
        p1, p2, alignment = generate_compatible_pair(
            req.vocab_size, req.n_constraints, req.bound, rng
        )
    except GenerationError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return GeneratePairResponse(
        protocol_a=ProtocolModel.from_protocol(p1),
        protocol_b=ProtocolModel.from_protocol(p2),
        alignment=[
            AlignmentPair(foreign=f, own=o) for f, o in sorted(alignment.pairs)
        ],
    )


@app.post("/protocols/check", response_model=CheckResponse)
def check(req: CheckRequest) -> CheckResponse:
    try:
        protocol = req.protocol.to_protocol()
        trace = tuple(parse_message(text) for text in req.trace)
    except (ValueError, KeyError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    ref = ProtocolRef(protocol)
    partial = is_partial_model(ref, trace)
    possible = (
        sorted(format_message(m) for m in possible_messages(ref, trace))
        if partial
        else []
    )
    return CheckResponse(
        is_model=is_model(ref, trace),
        is_partial_model=partial,
        possible_messages=possible,
    )


@app.post("/protocols/compatibility", response_model=CompatibilityResponse)
def compatibility(req: CompatibilityRequest) -> CompatibilityResponse:
    try:
        result = check_compatibility(
            req.protocol_a.to_protocol(),
            req.protocol_b.to_protocol(),
            _alignment_from_pairs(req.alignment),
        )
    except (OversizeInstanceError, ValueError, KeyError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return CompatibilityResponse(compatible=result)


@app.post("/interactions/run", response_model=RunResponse)
def run(req: RunRequest) -> RunResponse:
    try:
        p1 = req.protocol_a.to_protocol()
        p2 = req.protocol_b.to_protocol()
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    alpha = _alignment_from_pairs(req.alignment)
    alpha_inv = alpha.inverse()
    rng = random.Random(req.seed)
    config = LearnerConfig(strategy=req.strategy)
    a1 = AgentRuntime(
        agent_id="A1",
        protocol_ref=ProtocolRef(p1),
        learner=InterpretationState(p1.vocabulary, config=config),
    )
    a2 = AgentRuntime(
        agent_id="A2",
        protocol_ref=ProtocolRef(p2),
        learner=InterpretationState(p2.vocabulary, config=config),
    )
    try:
        outcome = run_interaction(
            a1, a2, EnginePolicy(p_stop=req.p_stop), rng, collect_log=req.collect_log
        )
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return RunResponse(
        status=outcome.status.value,
        length=outcome.length,
        transcript=[format_message(m) for m in outcome.transcript],
        f_score_a=experiments.f_score(a1.learner.extract_alignment(rng), alpha),
        f_score_b=experiments.f_score(a2.learner.extract_alignment(rng), alpha_inv),
        log=[
            LogRecordModel(
                position=r.position,
                speaker=r.speaker,
                word_sent=r.word_sent,
                word_interpreted=r.word_interpreted,
                possible_set_size=r.possible_set_size,
                violated=r.violated,
            )
            for r in outcome.log
        ],
    )


@app.post("/experiments/convergence", response_model=ExperimentResponse)
def convergence(req: ExperimentRequest) -> ExperimentResponse:
    result = experiments.run_convergence(_experiment_config(req))
    return ExperimentResponse(
        csv=result.csv,
        reached_08_at=result.reached_08_at,
        final_mean_f_score=result.points[-1].mean_f_score,
    )


@app.post("/experiments/repair", response_model=ExperimentResponse)
def repair(req: ExperimentRequest) -> ExperimentResponse:
    if req.quality is None:
        raise HTTPException(status_code=422, detail="repair requires quality")
    result = experiments.run_repair(_experiment_config(req))
    return ExperimentResponse(
        csv=result.csv,
        reached_08_at=result.reached_08_at,
        final_mean_f_score=result.points[-1].mean_f_score,
    )
