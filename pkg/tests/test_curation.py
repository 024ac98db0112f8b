import math

import pytest

from cabs.curation import (
    CurationConfig,
    CurationError,
    keep_decision,
    metaclip_curate,
    sample_frequencies,
)

from conftest import make_sample, make_samples


def head_tail_pool(head_n=5000, tail_n=50, head_concept=0):
    """head_n samples of one common concept plus tail_n rare singletons."""
    pool = [make_sample(f"head-{i}", [head_concept]) for i in range(head_n)]
    pool += [make_sample(f"tail-{i}", [1 + i]) for i in range(tail_n)]
    return pool


class TestKeepDecision:
    def test_uniform_range_and_determinism(self):
        values = [keep_decision(7, f"s{i}") for i in range(1000)]
        assert all(0.0 <= v < 1.0 for v in values)
        assert values == [keep_decision(7, f"s{i}") for i in range(1000)]
        assert values != [keep_decision(8, f"s{i}") for i in range(1000)]

    def test_roughly_uniform(self):
        values = [keep_decision(3, f"s{i}") for i in range(20000)]
        mean = sum(values) / len(values)
        assert abs(mean - 0.5) < 0.02


class TestCuration:
    def test_all_below_threshold_keeps_everything(self):
        pool = make_samples([[0], [1], [2], [0, 1]])
        kept, report = metaclip_curate(pool, CurationConfig(per_concept_threshold=10))
        assert kept == [s.sample_id for s in pool]
        assert report.kept == 4

    def test_no_concept_samples_dropped(self):
        pool = [make_sample("a", [0]), make_sample("b", [])]
        kept, report = metaclip_curate(pool, CurationConfig(per_concept_threshold=10))
        assert kept == ["a"]
        assert report.dropped_no_concepts == 1

    def test_head_thinned_tail_preserved(self):
        t = 500
        pool = head_tail_pool(head_n=10 * t, tail_n=40)
        kept, report = metaclip_curate(pool, CurationConfig(per_concept_threshold=t, seed=1))
        kept_set = set(kept)
        assert all(f"tail-{i}" in kept_set for i in range(40))
        head_kept = sum(1 for k in kept if k.startswith("head-"))
        # binomial: n = 10t, p = 0.1
        sigma = math.sqrt(10 * t * 0.1 * 0.9)
        assert abs(head_kept - t) <= 3 * sigma
        assert report.after_counts[0] == head_kept

    def test_multi_concept_sample_takes_best_probability(self):
        # a sample holding a tail concept is kept even if it also has a head one
        pool = [make_sample(f"h{i}", [0]) for i in range(1000)]
        pool.append(make_sample("mixed", [0, 1]))
        kept, _ = metaclip_curate(pool, CurationConfig(per_concept_threshold=10, seed=0))
        assert "mixed" in set(kept)

    def test_deterministic_across_reruns(self):
        pool = head_tail_pool(head_n=2000, tail_n=10)
        config = CurationConfig(per_concept_threshold=200, seed=9)
        first = metaclip_curate(pool, config)
        second = metaclip_curate(pool, config)
        assert first[0] == second[0]

    def test_order_independent_decisions(self):
        pool = head_tail_pool(head_n=2000, tail_n=10)
        config = CurationConfig(per_concept_threshold=200, seed=9)
        kept_fwd, _ = metaclip_curate(pool, config)
        kept_rev, _ = metaclip_curate(list(reversed(pool)), config)
        assert sorted(kept_fwd) == sorted(kept_rev)

    def test_empty_stream_is_error(self):
        with pytest.raises(CurationError, match="empty"):
            metaclip_curate([], CurationConfig(per_concept_threshold=1))

    def test_precomputed_freqs_allow_single_pass(self):
        pool = make_samples([[0], [0], [1]])
        freqs = sample_frequencies(pool)
        kept, _ = metaclip_curate(iter(pool), CurationConfig(per_concept_threshold=5), freqs=freqs)
        assert len(kept) == 3

    def test_generator_without_freqs_rejected(self):
        pool = make_samples([[0]])
        with pytest.raises(CurationError, match="re-iterable"):
            metaclip_curate(iter(pool), CurationConfig(per_concept_threshold=5))
