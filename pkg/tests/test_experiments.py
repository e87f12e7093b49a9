import random

import pytest

from vocalign.experiments import (
    ExperimentConfig,
    TaskPool,
    f_score,
    make_prior,
    precision,
    recall,
    run_convergence,
    run_repair,
    score_alignment,
)
from vocalign.protocol import AlignmentRelation, random_bijection, translate


def rel(*pairs):
    return AlignmentRelation.from_pairs(pairs)


class TestMetrics:
    def test_perfect(self):
        a = rel(("x", "a"), ("y", "b"))
        assert precision(a, a) == recall(a, a) == f_score(a, a) == 1.0

    def test_half_right(self):
        truth = rel(("x", "a"), ("y", "b"))
        guess = rel(("x", "a"), ("y", "c"))
        assert precision(guess, truth) == 0.5
        assert recall(guess, truth) == 0.5
        assert f_score(guess, truth) == 0.5

    def test_partial_guess(self):
        truth = rel(("x", "a"), ("y", "b"), ("z", "c"))
        guess = rel(("x", "a"))
        assert precision(guess, truth) == 1.0
        assert recall(guess, truth) == pytest.approx(1 / 3)
        assert f_score(guess, truth) == pytest.approx(0.5)

    def test_empty_guess_scores_zero(self):
        truth = rel(("x", "a"))
        empty = AlignmentRelation.from_pairs([])
        assert precision(empty, truth) == 0.0
        assert f_score(empty, truth) == 0.0
        assert score_alignment(empty, truth).no_mappings is True

    def test_empty_reference_rejected(self):
        with pytest.raises(ValueError):
            recall(rel(("x", "a")), AlignmentRelation.from_pairs([]))


class TestMakePrior:
    @staticmethod
    def alpha(n):
        return AlignmentRelation.from_pairs(
            (f"f{i}", f"o{i}") for i in range(n)
        )

    def test_quality_is_exact(self):
        truth = self.alpha(10)
        for quality in (0.2, 0.5, 0.8):
            for seed in range(20):
                prior = make_prior(truth, quality, random.Random(seed))
                guessed = AlignmentRelation.from_pairs(prior.entries)
                p = precision(guessed, truth)
                assert abs(p - quality) <= 1 / len(truth) + 1e-12
                assert p == pytest.approx(recall(guessed, truth))

    def test_total_and_injective(self):
        truth = self.alpha(10)
        prior = make_prior(truth, 0.5, random.Random(3))
        guessed = AlignmentRelation.from_pairs(prior.entries)
        assert {f for f, _ in guessed.pairs} == {f"f{i}" for i in range(10)}
        assert guessed.is_functional() and guessed.is_injective()

    def test_wrong_pairs_are_never_accidentally_right(self):
        truth = self.alpha(10)
        for seed in range(20):
            prior = make_prior(truth, 0.5, random.Random(seed))
            wrong = set(prior.entries) - truth.pairs
            assert len(wrong) == 5
            for foreign, own in wrong:
                assert truth.as_mapping()[foreign] != own

    def test_remainder_of_one_is_widened(self):
        truth = self.alpha(10)
        prior = make_prior(truth, 0.9, random.Random(0))
        guessed = AlignmentRelation.from_pairs(prior.entries)
        assert precision(guessed, truth) == pytest.approx(0.8)

    def test_non_bijective_truth_rejected(self):
        bad = rel(("x", "a"), ("y", "a"))
        with pytest.raises(ValueError):
            make_prior(bad, 0.5, random.Random(0))


class TestTaskPool:
    @staticmethod
    def pool(p_new=0.5):
        own = tuple(f"a{i}" for i in range(4))
        foreign = tuple(f"b{i}" for i in range(4))
        alpha = random_bijection(foreign, own, random.Random(0))
        return (
            TaskPool(own, foreign, alpha, n_constraints=3, bound=4, p_new=p_new),
            alpha,
        )

    def test_pairs_share_structure_under_alignment(self):
        pool, alpha = self.pool()
        rng = random.Random(1)
        for _ in range(5):
            ref1, ref2 = pool.next(rng)
            translated = translate(ref2.protocol, alpha)
            assert set(ref1.protocol.constraints) == set(translated.constraints)
            assert ref1.bound == ref2.bound == 4

    def test_p_new_zero_replays_single_task(self):
        pool, _ = self.pool(p_new=0.0)
        rng = random.Random(2)
        first = pool.next(rng)
        assert all(pool.next(rng) is first for _ in range(10))
        assert len(pool.tasks) == 1

    def test_p_new_one_always_fresh(self):
        pool, _ = self.pool(p_new=1.0)
        rng = random.Random(3)
        for _ in range(5):
            pool.next(rng)
        assert len(pool.tasks) == 5

    def test_vocabularies(self):
        pool, _ = self.pool()
        ref1, ref2 = pool.next(random.Random(4))
        assert set(ref1.protocol.vocabulary) == {f"a{i}" for i in range(4)}
        assert set(ref2.protocol.vocabulary) == {f"b{i}" for i in range(4)}


def small_config(**kwargs):
    defaults = dict(
        vocab_size=4,
        n_constraints=3,
        n_interactions=12,
        n_repetitions=3,
        strategy="simple",
        seed=5,
        bound=4,
    )
    defaults.update(kwargs)
    return ExperimentConfig(**defaults)


class TestRuns:
    def test_defaults(self):
        config = ExperimentConfig()
        assert config.vocab_size == 10
        assert config.n_constraints == 10
        assert config.n_interactions == 200
        assert config.n_repetitions == 10
        assert config.resolved_bound() == 10

    def test_shapes_and_reproducibility(self):
        r1 = run_convergence(small_config())
        r2 = run_convergence(small_config())
        assert len(r1.points) == 12
        assert len(r1.per_repetition) == 3
        assert all(len(rep) == 12 for rep in r1.per_repetition)
        assert r1.csv == r2.csv
        assert [p.mean_f_score for p in r1.points] == [
            p.mean_f_score for p in r2.points
        ]

    def test_seed_changes_curve(self):
        r1 = run_convergence(small_config())
        r2 = run_convergence(small_config(seed=6))
        assert r1.csv != r2.csv

    def test_csv_format(self):
        result = run_convergence(small_config())
        lines = result.csv.strip().split("\n")
        assert lines[0] == (
            "interaction,mean_fscore,stderr,strategy,n_constraints,vocab_size,seed"
        )
        assert len(lines) == 13
        first = lines[1].split(",")
        assert first[0] == "1"
        assert first[3:] == ["simple", "3", "4", "5"]
        for line in lines[1:]:
            mean, stderr = line.split(",")[1:3]
            assert 0.0 <= float(mean) <= 1.0
            assert float(stderr) >= 0.0

    def test_scores_in_range_and_reach_marker(self):
        result = run_convergence(small_config(n_interactions=40))
        means = [p.mean_f_score for p in result.points]
        assert all(0.0 <= m <= 1.0 for m in means)
        if result.reached_08_at is not None:
            idx = result.reached_08_at
            assert means[idx - 1] >= 0.8
            assert all(m < 0.8 for m in means[: idx - 1])

    def test_learning_happens(self):
        result = run_convergence(small_config(n_interactions=60))
        early = result.points[0].mean_f_score
        late = sum(p.mean_f_score for p in result.points[-10:]) / 10
        assert late > early

    def test_repair_requires_quality(self):
        with pytest.raises(ValueError):
            run_repair(small_config())

    def test_repair_starts_near_prior_quality(self):
        config = small_config(
            vocab_size=10,
            bound=10,
            n_constraints=5,
            n_interactions=1,
            n_repetitions=10,
            prior_quality=0.5,
        )
        result = run_repair(config)
        assert abs(result.points[0].mean_f_score - 0.5) < 0.25

    def test_strategy_recorded(self):
        result = run_convergence(small_config(strategy="reasoning"))
        assert ",reasoning," in result.csv.split("\n")[1]
