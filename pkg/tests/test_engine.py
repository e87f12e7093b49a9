import random

import pytest

from vocalign.constraints import Message, parse_constraint
from vocalign.engine import (
    AgentRuntime,
    EnginePolicy,
    Outcome,
    learning_hook,
    run_interaction,
)
from vocalign.learner import InterpretationState, LearnerConfig
from vocalign.protocol import Protocol
from vocalign.satisfiability import ProtocolRef, is_partial_model

from conftest import WAITER_VOCAB

FAILURES = {Outcome.FAILURE_INTERPRETATION, Outcome.FAILURE_STUCK}


def c(text):
    return parse_constraint(text)


def fresh_runtime(agent_id, protocol, strategy="simple", prior=None):
    return AgentRuntime(
        agent_id=agent_id,
        protocol_ref=ProtocolRef(protocol),
        learner=InterpretationState(
            protocol.vocabulary, config=LearnerConfig(strategy=strategy), prior=prior
        ),
    )


def oracle_runtime(agent_id, protocol, pairs):
    return AgentRuntime(
        agent_id=agent_id,
        protocol_ref=ProtocolRef(protocol),
        learner=InterpretationState.with_alignment(protocol.vocabulary, pairs),
    )


class TestTermination:
    def test_unconstrained_pair_terminates(self):
        p1 = Protocol(("a", "b"), (), 2)
        p2 = Protocol(("x", "y"), (), 2)
        for seed in range(50):
            a1 = fresh_runtime("A1", p1)
            a2 = fresh_runtime("A2", p2)
            outcome = run_interaction(a1, a2, EnginePolicy(), random.Random(seed))
            assert outcome.length <= 2
            assert outcome.status is not Outcome.FAILURE_INTERPRETATION

    def test_bound_respected(self):
        p = Protocol(("a",), (c("existence(3, *:a)"),), 3)
        q = Protocol(("x",), (c("existence(3, *:x)"),), 3)
        for seed in range(20):
            outcome = run_interaction(
                fresh_runtime("A1", p), fresh_runtime("A2", q), EnginePolicy(), random.Random(seed)
            )
            assert outcome.length <= 3

    def test_bound_mismatch_rejected(self):
        p = Protocol(("a",), (), 2)
        q = Protocol(("x",), (), 3)
        with pytest.raises(ValueError):
            run_interaction(
                fresh_runtime("A1", p), fresh_runtime("A2", q), EnginePolicy(), random.Random(0)
            )

    def test_distinct_ids_required(self):
        p = Protocol(("a",), (), 2)
        with pytest.raises(ValueError):
            run_interaction(
                fresh_runtime("A1", p), fresh_runtime("A1", p), EnginePolicy(), random.Random(0)
            )


class TestOracleAlignment:
    def test_waiter_customer_never_fails(
        self, waiter_protocol, customer_protocol_fixed, waiter_customer_alignment
    ):
        # Learners pre-loaded with the true alignment can never misinterpret.
        w_to_c = waiter_customer_alignment.pairs
        for seed in range(100):
            waiter = oracle_runtime("A1", waiter_protocol, [(c_, w) for w, c_ in w_to_c])
            customer = oracle_runtime("A2", customer_protocol_fixed, list(w_to_c))
            outcome = run_interaction(
                waiter, customer, EnginePolicy(), random.Random(seed)
            )
            assert outcome.status not in FAILURES, (seed, outcome.status)
            assert is_partial_model(waiter.protocol_ref, tuple(waiter.trace))
            assert is_partial_model(customer.protocol_ref, tuple(customer.trace))

    def test_success_reachable(
        self, waiter_protocol, customer_protocol_fixed, waiter_customer_alignment
    ):
        w_to_c = waiter_customer_alignment.pairs
        statuses = set()
        for seed in range(100):
            waiter = oracle_runtime("A1", waiter_protocol, [(c_, w) for w, c_ in w_to_c])
            customer = oracle_runtime("A2", customer_protocol_fixed, list(w_to_c))
            statuses.add(
                run_interaction(waiter, customer, EnginePolicy(), random.Random(seed)).status
            )
        assert Outcome.SUCCESS_BOTH in statuses


class TestInvariants:
    def test_local_traces_stay_partial_models(self):
        # Prefix closure makes the final check cover every intermediate state.
        p1 = Protocol(("a", "b", "c"), (c("response(*:a, *:b)"), c("absence(1, *:c)")), 4)
        p2 = Protocol(("a", "b", "c"), (c("response(*:a, *:b)"), c("absence(1, *:c)")), 4)
        for seed in range(50):
            a1 = fresh_runtime("A1", p1)
            a2 = fresh_runtime("A2", p2)
            outcome = run_interaction(a1, a2, EnginePolicy(), random.Random(seed))
            if outcome.status is Outcome.FAILURE_INTERPRETATION:
                continue
            assert is_partial_model(a1.protocol_ref, tuple(a1.trace))
            assert is_partial_model(a2.protocol_ref, tuple(a2.trace))

    def test_identity_alignment_interprets_every_word(self):
        vocab = ("a", "b", "c")
        p = Protocol(vocab, (c("before(*:a, *:b)"),), 3)
        for seed in range(50):
            a1 = fresh_runtime("A1", p)
            a2 = fresh_runtime("A2", p)
            outcome = run_interaction(a1, a2, EnginePolicy(), random.Random(seed))
            assert len(a1.trace) == len(a2.trace) == outcome.length

    def test_learner_rows_normalized_after_interaction(self):
        p = Protocol(("a", "b"), (c("not_correlation(*:a, *:b)"),), 3)
        for strategy in ("simple", "reasoning"):
            for seed in range(30):
                a1 = fresh_runtime("A1", p, strategy)
                a2 = fresh_runtime("A2", p, strategy)
                run_interaction(a1, a2, EnginePolicy(), random.Random(seed))
                a1.learner.check_rows()
                a2.learner.check_rows()

    def test_repeated_word_keeps_interpretation(self):
        # A foreign word that reappears must map to the same own word.
        p = Protocol(("a", "b"), (), 6)
        for seed in range(30):
            a1 = fresh_runtime("A1", p)
            a2 = fresh_runtime("A2", p)
            run_interaction(a1, a2, EnginePolicy(p_stop=0.0), random.Random(seed))
            for agent in (a1, a2):
                seen = {}
                for m, foreign in zip(agent.trace, agent.received_from):
                    if foreign is None:
                        continue
                    if foreign in seen:
                        assert seen[foreign] == m.word
                    seen[foreign] = m.word


class TestLearningHook:
    def test_mutual_punishment_scenario(self):
        # The polluted-context scenario: "water" was misread as vino, so the
        # correct reading of "beer" looks impossible; both implicated
        # mappings get punished together.
        protocol = Protocol(
            WAITER_VOCAB,
            (
                c("premise(A2:birra, A1:da bere)"),
                c("premise(A2:vino, A1:da bere)"),
                c("not_correlation(A2:birra, A2:vino)"),
            ),
            5,
        )
        waiter = fresh_runtime("A1", protocol, strategy="reasoning")
        waiter.trace.extend([Message("A1", "da bere"), Message("A2", "vino")])
        waiter.received_from.extend([None, "water"])
        waiter.learner.mappings_made["water"] = "vino"
        before_beer = dict(waiter.learner.row("beer"))
        before_water = dict(waiter.learner.row("water"))
        violated = learning_hook(waiter, "A2", "beer", "acqua")
        assert any("not_correlation" in v for v in violated)
        assert waiter.learner.rows["beer"]["birra"] < before_beer["birra"]
        assert waiter.learner.rows["water"]["vino"] < before_water["vino"]

    def test_absence_candidate_zeroed(self):
        protocol = Protocol(("a", "b"), (c("absence(0, *:b)"),), 3)
        agent = fresh_runtime("A1", protocol, strategy="reasoning")
        learning_hook(agent, "A2", "x", "a")
        assert agent.learner.rows["x"]["b"] == 0.0


class TestLogging:
    def test_log_records_structure(self):
        p = Protocol(("a", "b"), (c("not_correlation(*:a, *:b)"),), 4)
        logged = False
        for seed in range(30):
            a1 = fresh_runtime("A1", p, "reasoning")
            a2 = fresh_runtime("A2", p, "reasoning")
            outcome = run_interaction(
                a1, a2, EnginePolicy(), random.Random(seed), collect_log=True
            )
            received = sum(1 for r in outcome.log if r.word_interpreted is not None)
            if outcome.status is not Outcome.FAILURE_INTERPRETATION:
                assert len(outcome.log) == outcome.length == len(outcome.transcript)
                assert received == outcome.length
            for record in outcome.log:
                assert record.speaker in ("A1", "A2")
                assert 0 <= record.position < outcome.length
            if any(r.violated for r in outcome.log):
                logged = True
        assert logged

    def test_no_log_by_default(self):
        p = Protocol(("a",), (), 2)
        outcome = run_interaction(
            fresh_runtime("A1", p), fresh_runtime("A2", p), EnginePolicy(), random.Random(0)
        )
        assert outcome.log == []
