"""Unsupervised voting combiners over candidate tables: majority (VM),
overall-F1-weighted (VOF1), and class-F1-weighted (VCF1)."""

import logging

from .corpus import Corpus, Span
from .combine import CandidateTable, SystemOutput, collect_candidates, OUTSIDE
from .model import ScoredSpan, heuristic_decode

logger = logging.getLogger(__name__)


def _tally(votes: list[str], weights: list[float]) -> dict[str, float]:
    scores: dict[str, float] = {}
    for vote, w in zip(votes, weights):
        scores[vote] = scores.get(vote, 0.0) + w
    return scores


def _winner(votes: list[str], scores: dict[str, float]) -> str:
    """Highest-scoring label; ties go to the vote of the best-ranked system.

    Systems appear in rank order within the vote list, so the first system
    whose vote is among the tied labels breaks the tie. Scores within a
    relative 1e-9 of the maximum count as tied, which keeps the winner
    invariant under rescaling all weights by a positive constant.
    """
    top = max(scores.values())
    cutoff = top - 1e-9 * abs(top)
    tied = {label for label, s in scores.items() if s >= cutoff}
    if len(tied) == 1:
        return tied.pop()
    for vote in votes:
        if vote in tied:
            return vote
    return sorted(tied)[0]  # unreachable: every tied label was voted


def _vote_table(table: CandidateTable,
                weight_of) -> list[ScoredSpan]:
    """Shared voting core; weight_of(system_index, label) -> weight.

    The decode priority (winner weight share) is summed in system order so
    that candidates with identical vote/weight patterns get bitwise-equal
    priorities regardless of which labels were involved.
    """
    out = []
    for (b, e), votes in zip(table.candidates, table.votes):
        weights = [weight_of(j, vote) for j, vote in enumerate(votes)]
        scores = _tally(votes, weights)
        winner = _winner(votes, scores)
        if winner == OUTSIDE:
            continue
        total = sum(weights)
        winner_weight = sum(w for vote, w in zip(votes, weights) if vote == winner)
        priority = winner_weight / total if total > 0 else 0.0
        out.append(ScoredSpan(b, e, winner, priority))
    return heuristic_decode(out)


def vote_majority(table: CandidateTable) -> list[Span]:
    """One system, one vote; O participates and O winners are dropped."""
    scored = _vote_table(table, lambda j, label: 1.0)
    return [s.to_span() for s in scored]


def vote_weighted_overall(table: CandidateTable, weights: dict[str, float]) -> list[Span]:
    """Votes weighted by each system's recorded overall F1.

    Weights are normalized by their maximum before tallying; rescaling all
    weights by a positive constant therefore cannot change any winner, and
    equal weights reduce to plain majority voting exactly.
    """
    missing = [name for name in table.system_names if name not in weights]
    if missing:
        raise ValueError(f"missing overall-F1 weight for system(s) {missing}")
    w = [weights[name] for name in table.system_names]
    scale = max(w)
    if scale <= 0 or min(w) < 0:
        raise ValueError("weights must be non-negative with at least one positive")
    w = [v / scale for v in w]
    scored = _vote_table(table, lambda j, label: w[j])
    return [s.to_span() for s in scored]


def vote_weighted_class(table: CandidateTable,
                        weights: dict[str, dict[str, float]]) -> list[Span]:
    """Votes weighted by each system's recorded per-class F1.

    An O vote carries the system's macro-averaged class F1 (per-class F1
    is undefined for O under entity-level scoring). A missing class weight
    counts as 0 with a warning. Weights are normalized by the global
    maximum, as in vote_weighted_overall.
    """
    missing = [name for name in table.system_names if name not in weights]
    if missing:
        raise ValueError(f"missing class-F1 weights for system(s) {missing}")
    per_system = [weights[name] for name in table.system_names]
    macro = [sum(w.values()) / len(w) if w else 0.0 for w in per_system]
    values = [v for w in per_system for v in w.values()] + macro
    scale = max(values, default=0.0)
    if scale <= 0 or min(values, default=0.0) < 0:
        raise ValueError("weights must be non-negative with at least one positive")
    warned: set[tuple[int, str]] = set()

    def weight_of(j: int, label: str) -> float:
        if label == OUTSIDE:
            return macro[j] / scale
        if label not in per_system[j]:
            if (j, label) not in warned:
                warned.add((j, label))
                logger.warning(
                    "system %s has no class F1 for %s; treating as 0",
                    table.system_names[j], label,
                )
            return 0.0
        return per_system[j][label] / scale

    scored = _vote_table(table, weight_of)
    return [s.to_span() for s in scored]


def vote_corpus(
    corpus: Corpus,
    outputs: list[SystemOutput],
    method: str,
    overall_weights: dict[str, float] | None = None,
    class_weights: dict[str, dict[str, float]] | None = None,
) -> list[list[Span]]:
    """Run one voting method over every sentence of the corpus."""
    result = []
    for i in range(len(corpus)):
        table = collect_candidates(outputs, i)
        if method == "vm":
            result.append(vote_majority(table))
        elif method == "vof1":
            if overall_weights is None:
                overall_weights = {
                    o.name: o.overall_f1 for o in outputs if o.overall_f1 is not None
                }
            result.append(vote_weighted_overall(table, overall_weights))
        elif method == "vcf1":
            if class_weights is None:
                class_weights = {o.name: o.class_f1 for o in outputs}
            result.append(vote_weighted_class(table, class_weights))
        else:
            raise ValueError(f"unknown voting method {method!r}")
    return result
