import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import micro_f1_oracle, random_valid_tags, span_set_oracle
from mcner.metrics import EntitySpan, InvalidTagSequenceError, extract_spans, micro_f1


class TestExtractSpans:
    def test_simple_run(self):
        assert extract_spans(["B-LOC", "I-LOC", "O"]) == {EntitySpan("LOC", 0, 2)}

    def test_all_outside(self):
        assert extract_spans(["O", "O", "O"]) == set()

    def test_adjacent_begins_are_two_spans(self):
        assert extract_spans(["B-PER", "B-PER"]) == {EntitySpan("PER", 0, 1), EntitySpan("PER", 1, 2)}

    def test_span_to_sequence_end(self):
        assert extract_spans(["O", "B-X", "I-X"]) == {EntitySpan("X", 1, 3)}

    def test_invalid_iob_raises(self):
        with pytest.raises(InvalidTagSequenceError):
            extract_spans(["O", "I-LOC"])

    def test_repair_rewrites_orphans(self):
        assert extract_spans(["O", "I-LOC"], repair=True) == {EntitySpan("LOC", 1, 2)}

    @settings(max_examples=120, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_matches_brute_force_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        tags = random_valid_tags(rng, int(rng.integers(1, 11)), ["A", "B", "C"])
        ours = {(s.type_name, s.start, s.end) for s in extract_spans(tags)}
        assert ours == span_set_oracle(tags)


def _random_corpus(rng, n_sentences, types=("A", "B", "C")):
    return [random_valid_tags(rng, int(rng.integers(1, 11)), list(types))
            for _ in range(n_sentences)]


class TestMicroF1:
    def test_identical_corpora_score_one(self):
        rng = np.random.default_rng(0)
        corpus = _random_corpus(rng, 8)
        report = micro_f1(corpus, corpus)
        assert report.f1 == 1.0 and report.precision == 1.0 and report.recall == 1.0

    def test_all_outside_prediction_scores_zero(self):
        gold = [["B-LOC", "O"], ["O", "B-PER"]]
        pred = [["O", "O"], ["O", "O"]]
        report = micro_f1(gold, pred)
        assert report.f1 == 0.0 and report.fn == 2 and report.fp == 0

    def test_boundary_miss_counts_both_ways(self):
        gold = [["B-LOC", "I-LOC"]]
        pred = [["B-LOC", "O"]]
        report = micro_f1(gold, pred)
        assert (report.tp, report.fp, report.fn) == (0, 1, 1)
        assert report.f1 == 0.0

    def test_type_mismatch_is_no_match(self):
        report = micro_f1([["B-LOC"]], [["B-PER"]])
        assert (report.tp, report.fp, report.fn) == (0, 1, 1)

    def test_per_type_counts(self):
        gold = [["B-LOC", "O", "B-PER"]]
        pred = [["B-LOC", "O", "O"]]
        report = micro_f1(gold, pred)
        assert report.per_type["LOC"] == {"tp": 1, "fp": 0, "fn": 0}
        assert report.per_type["PER"] == {"tp": 0, "fp": 0, "fn": 1}

    def test_sentence_count_mismatch(self):
        with pytest.raises(ValueError):
            micro_f1([["O"]], [])

    def test_sentence_length_mismatch(self):
        with pytest.raises(ValueError):
            micro_f1([["O", "O"]], [["O"]])

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_matches_set_intersection_oracle(self, seed):
        rng = np.random.default_rng(seed)
        gold = _random_corpus(rng, int(rng.integers(1, 6)))
        pred = [random_valid_tags(rng, len(g), ["A", "B", "C"]) for g in gold]
        report = micro_f1(gold, pred)
        tp, fp, fn, f1 = micro_f1_oracle(gold, pred)
        assert (report.tp, report.fp, report.fn) == (tp, fp, fn)
        assert report.f1 == pytest.approx(f1)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_swapping_gold_and_pred_swaps_precision_recall(self, seed):
        rng = np.random.default_rng(seed)
        gold = _random_corpus(rng, 4)
        pred = [random_valid_tags(rng, len(g), ["A", "B", "C"]) for g in gold]
        fwd = micro_f1(gold, pred)
        rev = micro_f1(pred, gold)
        assert fwd.precision == pytest.approx(rev.recall)
        assert fwd.recall == pytest.approx(rev.precision)
        assert fwd.f1 == pytest.approx(rev.f1)

    def test_invariant_to_sentence_order(self):
        rng = np.random.default_rng(1)
        gold = _random_corpus(rng, 6)
        pred = [random_valid_tags(rng, len(g), ["A", "B", "C"]) for g in gold]
        fwd = micro_f1(gold, pred)
        order = rng.permutation(len(gold))
        shuffled = micro_f1([gold[i] for i in order], [pred[i] for i in order])
        assert (fwd.tp, fwd.fp, fwd.fn, fwd.f1) == (shuffled.tp, shuffled.fp, shuffled.fn, shuffled.f1)
