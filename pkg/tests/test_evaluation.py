import math

import numpy as np
import pytest

from textkge.data import RawTuple, build_dataset
from textkge.evaluation import (build_filter_index, evaluate, filtered_rank,
                                metrics_from_ranks)

from helpers import small_model


def brute_force_rank(scores, gold, known_true):
    """Independent oracle: sort survivors, locate gold with the mid-rank
    tie rule by explicit enumeration."""
    survivors = [(s, i) for i, s in enumerate(scores)
                 if i == gold or i not in set(known_true)]
    gold_score = scores[gold]
    better = [s for s, i in survivors if s > gold_score]
    tied_others = [i for s, i in survivors if s == gold_score and i != gold]
    return 1 + len(better) + math.ceil(len(tied_others) / 2)


class TestFilteredRank:
    def test_filtering_promotes_gold(self):
        scores = np.array([0.9, 0.95, 0.5])  # gold=0, known-true competitor=1
        assert filtered_rank(scores, 0, {1}) == 1

    def test_single_candidate(self):
        assert filtered_rank(np.array([0.3]), 0, set()) == 1

    def test_constant_scores_mid_rank(self):
        scores = np.ones(5)
        assert filtered_rank(scores, 2, set()) == 3

    def test_gold_out_of_range(self):
        with pytest.raises(ValueError):
            filtered_rank(np.array([0.1, 0.2]), 5, set())

    def test_oracle_agreement_random_cases(self):
        rng = np.random.default_rng(7)
        for case in range(1000):
            n = rng.integers(2, 31)
            # coarse scores force frequent ties
            scores = rng.integers(0, 5, size=n).astype(float)
            gold = int(rng.integers(n))
            known = set(int(i) for i in
                        rng.choice(n, size=rng.integers(0, n), replace=False))
            assert filtered_rank(scores, gold, known) == \
                brute_force_rank(scores, gold, known)

    def test_filtering_monotonicity(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            n = int(rng.integers(3, 20))
            scores = rng.normal(size=n)
            gold = int(rng.integers(n))
            extra = int(rng.integers(n))
            known = set(int(i) for i in rng.choice(n, size=2))
            with_extra = filtered_rank(scores, gold, known | {extra})
            assert with_extra <= filtered_rank(scores, gold, known)

    def test_score_translation_invariance(self):
        rng = np.random.default_rng(9)
        scores = rng.normal(size=20)
        assert filtered_rank(scores, 3, {1, 2}) == \
            filtered_rank(scores + 17.5, 3, {1, 2})


class TestMetrics:
    def test_perfect_ranks(self):
        m = metrics_from_ranks([1, 1, 1])
        assert (m.mr, m.mrr) == (1.0, 1.0)
        assert (m.hits10, m.hits3, m.hits1) == (100.0, 100.0, 100.0)

    def test_hand_arithmetic(self):
        m = metrics_from_ranks([1, 2, 4])
        assert m.mr == pytest.approx(2.333, abs=1e-3)
        assert m.mrr == pytest.approx(0.5833, abs=1e-4)
        assert m.hits10 == pytest.approx(100.0)
        assert m.hits3 == pytest.approx(66.7, abs=0.1)
        assert m.hits1 == pytest.approx(33.3, abs=0.1)

    def test_bounds_random_multisets(self):
        rng = np.random.default_rng(10)
        for _ in range(1000):
            ranks = rng.integers(1, 500, size=rng.integers(1, 50))
            m = metrics_from_ranks(ranks)
            assert m.mr >= 1.0
            assert 0.0 < m.mrr <= 1.0
            assert m.hits1 <= m.hits3 <= m.hits10

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            metrics_from_ranks([])


class TestFilterIndex:
    def test_singleton(self):
        ds = build_dataset([RawTuple("a", "r", "b")])
        assert build_filter_index(ds)[(0, 0)] == {1}

    def test_union_across_splits(self):
        ds = build_dataset([RawTuple("a", "r", "b")],
                           test=[RawTuple("a", "r", "c")])
        idx = build_filter_index(ds)
        s, r = ds.train[0][0], ds.train[0][1]
        assert idx[(s, r)] == {ds.train[0][2], ds.test[0][2]}

    def test_miss_returns_empty(self):
        ds = build_dataset([RawTuple("a", "r", "b")])
        assert build_filter_index(ds).get((99, 99), set()) == set()


class TestEvaluate:
    def test_matches_brute_force(self, toy_dataset):
        from textkge.evaluation import encode_all_entities, score_candidates
        m = small_model(toy_dataset, "cnn", "tucker")
        report, results = evaluate(m, toy_dataset, "test", dump_ranks=True)
        index = build_filter_index(toy_dataset)
        cache = encode_all_entities(m, toy_dataset.n_entities)
        expected = []
        for s, r, t in toy_dataset.test:
            scores = score_candidates(m, s, r,
                                      range(toy_dataset.n_entities), cache=cache)
            expected.append(brute_force_rank(scores, t, index.get((s, r), set())))
        assert [res.rank for res in results] == expected
        assert report.mr == pytest.approx(np.mean(expected))

    def test_empty_split_rejected(self, toy_dataset):
        m = small_model(toy_dataset, "cnn", "tucker")
        toy_dataset.dev.clear()
        with pytest.raises(ValueError):
            evaluate(m, toy_dataset, "dev")

    def test_unknown_split_rejected(self, toy_dataset):
        m = small_model(toy_dataset, "cnn", "tucker")
        with pytest.raises(ValueError):
            evaluate(m, toy_dataset, "validation")
