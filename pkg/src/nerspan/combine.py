"""Re-recognition of entities from multiple base systems' outputs.

Candidates are the union of the base systems' predicted spans; each system
contributes its label for a candidate it predicted exactly, O otherwise.
The trained span model scores every candidate/label pair, label masses are
the vote-count-weighted scores, and the argmax (over entity labels and O)
decides; O winners are discarded.
"""

from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, Span, format_conll, parse_conll, spans_to_tags
from .model import (
    ModelParams,
    ScoredSpan,
    _span_matrix,
    encode,
    heuristic_decode,
    log_softmax,
    sentence_ids,
)

OUTSIDE = "O"


@dataclass
class SystemOutput:
    """One base system's predictions over the evaluation corpus."""

    name: str
    spans: list[list[Span]]  # per sentence
    tags: list[list[str]]  # per sentence, aligned with the corpus tokens
    overall_f1: float | None = None
    class_f1: dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_conll(cls, name: str, text: str, corpus: Corpus,
                   token_col: int = 0, tag_col: int = -1) -> "SystemOutput":
        """Parse a system-output file (lenient) and check corpus alignment."""
        parsed = parse_conll(text, token_col=token_col, tag_col=tag_col,
                             scheme=corpus.tag_scheme, lenient=True)
        if len(parsed) != len(corpus):
            raise ValueError(
                f"system {name!r}: {len(parsed)} sentences, corpus has {len(corpus)}"
            )
        for i, (got, want) in enumerate(zip(parsed.sentences, corpus.sentences)):
            if len(got) != len(want):
                raise ValueError(
                    f"system {name!r}: sentence {i} has {len(got)} tokens, "
                    f"corpus has {len(want)}"
                )
        return cls(name,
                   [s.gold_spans for s in parsed.sentences],
                   [s.gold_tags for s in parsed.sentences])

    @classmethod
    def from_spans(cls, name: str, spans: list[list[Span]], corpus: Corpus) -> "SystemOutput":
        tags = [spans_to_tags(sp, len(sent), corpus.tag_scheme)
                for sp, sent in zip(spans, corpus.sentences)]
        return cls(name, [list(sp) for sp in spans], tags)

    def to_conll(self, corpus: Corpus) -> str:
        return format_conll(corpus, self.tags)


@dataclass
class CandidateTable:
    """Per-sentence candidate spans with one contributed label per system."""

    sentence_index: int
    candidates: list[tuple[int, int]]  # unique (start, end), sorted
    votes: list[list[str]]  # votes[c][j]: system j's label for candidate c
    system_names: list[str]

    def __post_init__(self):
        for row in self.votes:
            if len(row) != len(self.system_names):
                raise ValueError("each candidate needs exactly one label per system")


def collect_candidates(outputs: list[SystemOutput], sentence_index: int) -> CandidateTable:
    """Union of the systems' predicted spans with per-system label votes.

    A system contributes its label only for an exact (start, end) match;
    for every other candidate it votes O.
    """
    if not outputs:
        raise ValueError("at least one system output required")
    n_sent = len(outputs[0].spans)
    for out in outputs:
        if len(out.spans) != n_sent:
            raise ValueError(f"system {out.name!r} is misaligned with the others")
    per_system = []
    for out in outputs:
        table = {(s.start, s.end): s.label for s in out.spans[sentence_index]}
        per_system.append(table)
    candidates = sorted(set().union(*(t.keys() for t in per_system)))
    votes = [[table.get(cand, OUTSIDE) for table in per_system] for cand in candidates]
    return CandidateTable(sentence_index, candidates, votes,
                          [o.name for o in outputs])


def combined_mass(votes: list[str], scores: dict[str, float]) -> dict[str, float]:
    """Label mass for one candidate: sum of score(s, l) over systems voting l.

    Equals vote-count times the span/label score. scores must cover every
    label in the label set, O included.
    """
    mass = {label: 0.0 for label in scores}
    for vote in votes:
        mass[vote] += scores[vote]
    return mass


def _argmax_label(values: np.ndarray, labels: list[str]) -> int:
    # ties resolve to the first label in inventory order
    return int(values.argmax())


def combine_table(
    sentence, table: CandidateTable, params: ModelParams
) -> list[ScoredSpan]:
    """Winning label per candidate, before overlap resolution.

    Candidates whose argmax is O are dropped. The returned probabilities
    are the label masses normalized per candidate.
    """
    if not table.candidates:
        return []
    ids = sentence_ids(sentence, params.vocab)
    h, _ = encode(ids, params)
    s_mat = _span_matrix(h, table.candidates, params, clamp_length=True)
    logits = s_mat @ params.class_vectors.T
    # per-candidate stabilization rescales all of one span's label scores by
    # a shared positive factor, which cannot change that span's argmax
    exp_scores = np.exp(logits - logits.max(axis=1, keepdims=True))
    label_pos = params.label_index()
    out = []
    for row, (b, e) in enumerate(table.candidates):
        counts = np.zeros(len(params.labels))
        for vote in table.votes[row]:
            counts[label_pos[vote]] += 1.0
        mass = counts * exp_scores[row]
        winner = _argmax_label(mass, params.labels)
        if params.labels[winner] == OUTSIDE:
            continue
        norm = mass / mass.sum()
        out.append(ScoredSpan(b, e, params.labels[winner],
                              float(norm[winner]), probs=norm))
    return out


def combine_sentence(sentence, table: CandidateTable, params: ModelParams) -> list[ScoredSpan]:
    """Model-scored combination for one sentence, overlaps resolved."""
    return heuristic_decode(combine_table(sentence, table, params))


def combine_spanner(corpus: Corpus, outputs: list[SystemOutput],
                    params: ModelParams) -> list[list[Span]]:
    """Model-scored combination over a whole corpus."""
    result = []
    for i, sentence in enumerate(corpus.sentences):
        table = collect_candidates(outputs, i)
        result.append([s.to_span() for s in combine_sentence(sentence, table, params)])
    return result


def combination_case(ranked_systems: list[SystemOutput], i: int, k: int) -> list[SystemOutput]:
    """Systems ranked in [i, k) under 1-based descending-F1 ranks."""
    m = len(ranked_systems)
    if not 1 <= i < k <= m + 1:
        raise ValueError(f"interval [{i}, {k}) is invalid for {m} systems")
    return ranked_systems[i - 1 : k - 1]


def parse_interval(text: str, m: int) -> tuple[int, int]:
    """Parse an interval expression into 1-based half-open ranks (i, k).

    "all" and "m[1:]" select every system; "m[:N]" is the top N;
    "m[i:k]" selects ranks i..k-1.
    """
    expr = text.strip()
    if expr == "all":
        return 1, m + 1
    if not (expr.startswith("m[") and expr.endswith("]")):
        raise ValueError(f"cannot parse interval {text!r}")
    body = expr[2:-1]
    if ":" not in body:
        raise ValueError(f"cannot parse interval {text!r}")
    left, right = body.split(":", 1)
    if left and right:
        i, k = int(left), int(right)
    elif left:
        i, k = int(left), m + 1
    elif right:
        i, k = 1, int(right) + 1  # m[:N] means the top N systems
    else:
        i, k = 1, m + 1
    return i, k


@dataclass
class ErrorModel:
    """Per-entity corruption probabilities for synthetic system outputs.

    p_drop may be a single probability or a per-label mapping (labels not
    in the mapping are never dropped).
    """

    p_drop: float | dict[str, float] = 0.0
    p_label_swap: float = 0.0
    p_boundary_shift: float = 0.0

    def drop_probability(self, label: str) -> float:
        if isinstance(self.p_drop, dict):
            return float(self.p_drop.get(label, 0.0))
        return float(self.p_drop)

    def __post_init__(self):
        probs = list(self.p_drop.values()) if isinstance(self.p_drop, dict) else [self.p_drop]
        for p in probs + [self.p_label_swap, self.p_boundary_shift]:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")


def synthesize_system(gold: Corpus, error_model: ErrorModel, seed: int,
                      name: str = "synthetic") -> SystemOutput:
    """Corrupt the gold annotation into a synthetic base system's output.

    Per entity, independently: drop it; relabel it uniformly among the
    other entity labels; shift one boundary by one position. A shift that
    leaves the sentence or collides with an already-placed span is
    rejected (the original boundaries are kept when possible, otherwise
    the entity is dropped).
    """
    rng = np.random.default_rng(seed)
    entity_labels = gold.entity_labels
    spans_out: list[list[Span]] = []
    for sentence in gold.sentences:
        n = len(sentence)
        placed: list[Span] = []
        for span in sentence.gold_spans:
            if rng.random() < error_model.drop_probability(span.label):
                continue
            label = span.label
            if error_model.p_label_swap and rng.random() < error_model.p_label_swap:
                others = [l for l in entity_labels if l != span.label]
                if others:
                    label = others[int(rng.integers(len(others)))]
            start, end = span.start, span.end
            if error_model.p_boundary_shift and rng.random() < error_model.p_boundary_shift:
                move_start = bool(rng.integers(2))
                delta = 1 if rng.integers(2) else -1
                cand = (start + delta, end) if move_start else (start, end + delta)
                if 1 <= cand[0] <= cand[1] <= n and not any(
                    cand[0] <= p.end and p.start <= cand[1] for p in placed
                ):
                    start, end = cand
            candidate = Span(start, end, label)
            if any(candidate.overlaps(p) for p in placed):
                continue
            placed.append(candidate)
        spans_out.append(sorted(placed, key=lambda s: (s.start, s.end)))
    return SystemOutput.from_spans(name, spans_out, gold)
