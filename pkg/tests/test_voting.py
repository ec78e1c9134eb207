import logging

import numpy as np
import pytest

from nerspan.combine import CandidateTable, SystemOutput, collect_candidates
from nerspan.corpus import Corpus, Sentence, Span, Token, spans_to_tags
from nerspan.voting import (
    vote_corpus,
    vote_majority,
    vote_weighted_class,
    vote_weighted_overall,
)

LABELS = ["LOC", "MISC", "ORG", "PER", "O"]


def table_for(candidates, votes, names=None):
    names = names or [f"s{j}" for j in range(len(votes[0]))]
    return CandidateTable(0, candidates, votes, names)


class TestMajority:
    def test_clear_majority(self):
        t = table_for([(1, 2)], [["LOC", "LOC", "ORG"]])
        assert vote_majority(t) == [Span(1, 2, "LOC")]

    def test_tie_breaks_by_rank(self):
        t = table_for([(1, 2)], [["LOC", "ORG"]])
        assert vote_majority(t) == [Span(1, 2, "LOC")]
        t = table_for([(1, 2)], [["ORG", "LOC"]])
        assert vote_majority(t) == [Span(1, 2, "ORG")]

    def test_o_majority_drops_span(self):
        t = table_for([(1, 2)], [["O", "O", "LOC"]])
        assert vote_majority(t) == []

    def test_mode_wins_when_unique(self):
        rng = np.random.default_rng(2)
        for _ in range(300):
            m = int(rng.integers(1, 7))
            votes = [LABELS[int(rng.integers(len(LABELS)))] for _ in range(m)]
            counts = {l: votes.count(l) for l in set(votes)}
            top = max(counts.values())
            modes = [l for l, c in counts.items() if c == top]
            got = vote_majority(table_for([(1, 1)], [votes]))
            if len(modes) == 1:
                expected = [] if modes[0] == "O" else [Span(1, 1, modes[0])]
                assert got == expected

    def test_decode_resolves_overlaps(self):
        t = table_for(
            [(1, 2), (2, 3)],
            [["LOC", "LOC", "LOC"], ["ORG", "ORG", "O"]],
        )
        # (1,2) has 3/3 votes, (2,3) only 2/3; overlap drops (2,3)
        assert vote_majority(t) == [Span(1, 2, "LOC")]


class TestWeightedOverall:
    def test_weighted_sum_example(self):
        t = table_for([(1, 1)], [["ORG", "LOC", "LOC"]], ["a", "b", "c"])
        got = vote_weighted_overall(t, {"a": 0.9, "b": 0.8, "c": 0.7})
        assert got == [Span(1, 1, "LOC")]  # 1.5 beats 0.9

    def test_strong_single_system_outvotes(self):
        t = table_for([(1, 1)], [["ORG", "LOC", "LOC"]], ["a", "b", "c"])
        got = vote_weighted_overall(t, {"a": 0.9, "b": 0.3, "c": 0.3})
        assert got == [Span(1, 1, "ORG")]  # 0.9 beats 0.6

    def test_single_system_identity(self):
        t = table_for([(2, 3), (5, 5)], [["PER"], ["O"]], ["only"])
        assert vote_weighted_overall(t, {"only": 0.42}) == [Span(2, 3, "PER")]

    def test_missing_weight_rejected(self):
        t = table_for([(1, 1)], [["LOC", "ORG"]], ["a", "b"])
        with pytest.raises(ValueError) as err:
            vote_weighted_overall(t, {"a": 0.5})
        assert "b" in str(err.value)

    def test_equal_weights_match_majority(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            m = int(rng.integers(1, 6))
            n_cands = int(rng.integers(1, 8))
            cands = sorted(
                {(int(b), int(b) + int(rng.integers(0, 3)))
                 for b in rng.integers(1, 20, size=n_cands)}
            )
            votes = [
                [LABELS[int(rng.integers(len(LABELS)))] for _ in range(m)]
                for _ in cands
            ]
            names = [f"s{j}" for j in range(m)]
            t = table_for(cands, votes, names)
            w = float(rng.uniform(0.1, 1.0))
            assert vote_majority(t) == vote_weighted_overall(t, {n: w for n in names})

    @pytest.mark.parametrize("scale", [0.1, 3.0, 100.0])
    def test_scale_invariance(self, scale):
        rng = np.random.default_rng(13)
        for _ in range(300):
            m = int(rng.integers(1, 6))
            names = [f"s{j}" for j in range(m)]
            cands = [(1, 2), (4, 5), (7, 7)]
            votes = [
                [LABELS[int(rng.integers(len(LABELS)))] for _ in range(m)]
                for _ in cands
            ]
            weights = {n: float(rng.uniform(0.05, 1.0)) for n in names}
            t = table_for(cands, votes, names)
            base = vote_weighted_overall(t, weights)
            scaled = vote_weighted_overall(t, {n: w * scale for n, w in weights.items()})
            assert base == scaled


class TestWeightedClass:
    def test_per_class_weights_decide(self):
        # one PER-strong system against two LOC-weak systems
        t = table_for([(1, 1)], [["PER", "LOC", "LOC"]], ["a", "b", "c"])
        weights = {
            "a": {"PER": 0.95, "LOC": 0.1},
            "b": {"PER": 0.2, "LOC": 0.3},
            "c": {"PER": 0.2, "LOC": 0.3},
        }
        got = vote_weighted_class(t, weights)
        assert got == [Span(1, 1, "PER")]  # 0.95 beats 0.6

    def test_equal_weights_reduce_to_majority(self):
        rng = np.random.default_rng(23)
        for _ in range(300):
            m = int(rng.integers(1, 5))
            names = [f"s{j}" for j in range(m)]
            votes = [[LABELS[int(rng.integers(len(LABELS)))] for _ in range(m)]]
            t = table_for([(3, 4)], votes, names)
            weights = {n: {l: 0.6 for l in LABELS if l != "O"} for n in names}
            assert vote_weighted_class(t, weights) == vote_majority(t)

    def test_all_o_votes_dropped(self):
        t = table_for([(1, 1)], [["O", "O"]], ["a", "b"])
        weights = {"a": {"LOC": 0.9}, "b": {"LOC": 0.8}}
        assert vote_weighted_class(t, weights) == []

    def test_missing_class_weight_warns_and_counts_zero(self, caplog):
        t = table_for([(1, 1)], [["PER", "LOC"]], ["a", "b"])
        weights = {"a": {"LOC": 0.4}, "b": {"LOC": 0.5}}  # no PER weight for a
        with caplog.at_level(logging.WARNING):
            got = vote_weighted_class(t, weights)
        assert got == [Span(1, 1, "LOC")]
        assert any("PER" in rec.message for rec in caplog.records)

    def test_o_vote_uses_macro_average(self):
        # system a votes O with macro weight (0.9+0.7)/2 = 0.8 > b's LOC 0.75
        t = table_for([(1, 1)], [["O", "LOC"]], ["a", "b"])
        weights = {"a": {"LOC": 0.9, "PER": 0.7}, "b": {"LOC": 0.75, "PER": 0.2}}
        assert vote_weighted_class(t, weights) == []


class TestVoteCorpus:
    def test_methods_dispatch(self):
        sent = Sentence(
            [Token("a", 1), Token("b", 2), Token("c", 3)],
            spans_to_tags([Span(1, 1, "LOC")], 3),
            [Span(1, 1, "LOC")],
        )
        corpus = Corpus([sent], LABELS, "BIO")
        outs = [
            SystemOutput.from_spans("x", [[Span(1, 1, "LOC")]], corpus),
            SystemOutput.from_spans("y", [[Span(1, 1, "LOC")]], corpus),
        ]
        outs[0].overall_f1 = 0.9
        outs[1].overall_f1 = 0.8
        outs[0].class_f1 = {"LOC": 0.9}
        outs[1].class_f1 = {"LOC": 0.8}
        for method in ("vm", "vof1", "vcf1"):
            assert vote_corpus(corpus, outs, method) == [[Span(1, 1, "LOC")]]
        with pytest.raises(ValueError):
            vote_corpus(corpus, outs, "nope")
