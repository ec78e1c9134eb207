"""Entity-level F1, attribute bucketing, pairwise heatmap diagnosis, and
the Wilcoxon signed-rank test.

A predicted span counts as correct only on an exact boundary-and-label
match with a gold span. Attributes (entity length, sentence length, OOV
density, label consistency) partition entities into XS/S/L/XL buckets for
fine-grained scoring.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .corpus import Corpus, Sentence, Span

logger = logging.getLogger(__name__)

ATTRIBUTES = ("eCon", "sLen", "eLen", "oDen")
BUCKETS = ("XS", "S", "L", "XL")


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass
class ClassScore:
    precision: float
    recall: float
    f1: float
    gold: int
    predicted: int
    correct: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision, "recall": self.recall, "f1": self.f1,
            "gold": self.gold, "predicted": self.predicted, "correct": self.correct,
        }


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    gold: int
    predicted: int
    correct: int
    per_class: dict[str, ClassScore]

    def to_dict(self) -> dict:
        return {
            "precision": self.precision, "recall": self.recall, "f1": self.f1,
            "gold": self.gold, "predicted": self.predicted, "correct": self.correct,
            "per_class": {k: v.to_dict() for k, v in sorted(self.per_class.items())},
        }


def _score_counts(gold: int, predicted: int, correct: int):
    p = correct / predicted if predicted else 0.0
    r = correct / gold if gold else 0.0
    return p, r, f1_score(p, r)


def entity_f1(gold: Corpus, predicted: list[list[Span]]) -> EvalReport:
    """Micro-averaged precision/recall/F1 with per-class breakdown.

    predicted holds one span list per sentence, aligned with the corpus;
    overlapping predictions are rejected (decode first).
    """
    if len(predicted) != len(gold):
        raise ValueError(
            f"{len(predicted)} prediction lists for {len(gold)} sentences"
        )
    gold_n = pred_n = correct_n = 0
    by_class: dict[str, list[int]] = {}
    for sent, pred in zip(gold.sentences, predicted):
        for i, a in enumerate(pred):
            for b in pred[i + 1 :]:
                if a.overlaps(b):
                    raise ValueError(
                        f"overlapping predicted spans {a} and {b}; decode first"
                    )
        gold_set = set(sent.gold_spans)
        pred_set = set(pred)
        hits = gold_set & pred_set
        gold_n += len(gold_set)
        pred_n += len(pred_set)
        correct_n += len(hits)
        for s in gold_set:
            by_class.setdefault(s.label, [0, 0, 0])[0] += 1
        for s in pred_set:
            by_class.setdefault(s.label, [0, 0, 0])[1] += 1
        for s in hits:
            by_class.setdefault(s.label, [0, 0, 0])[2] += 1
    per_class = {}
    for label, (g, p, c) in by_class.items():
        pp, rr, ff = _score_counts(g, p, c)
        per_class[label] = ClassScore(pp, rr, ff, g, p, c)
    pp, rr, ff = _score_counts(gold_n, pred_n, correct_n)
    return EvalReport(pp, rr, ff, gold_n, pred_n, correct_n, per_class)


@dataclass
class TrainStats:
    """Training-set statistics behind the OOV and label-consistency attributes."""

    vocab_words: frozenset
    surface_counts: Counter = field(default_factory=Counter)
    surface_label_counts: Counter = field(default_factory=Counter)

    @classmethod
    def from_corpus(cls, train: Corpus) -> "TrainStats":
        vocab = frozenset(t.surface for s in train.sentences for t in s.tokens)
        surface_counts: Counter = Counter()
        surface_label_counts: Counter = Counter()
        for sent in train.sentences:
            for span in sent.gold_spans:
                surface = sent.span_text(span).lower()
                surface_counts[surface] += 1
                surface_label_counts[surface, span.label] += 1
        return cls(vocab, surface_counts, surface_label_counts)


def attributes(span: Span, sentence: Sentence, stats: TrainStats) -> dict[str, float]:
    """eLen, sLen, oDen, eCon for one entity in its sentence context."""
    n = len(sentence)
    oov = sum(1 for t in sentence.tokens if t.surface not in stats.vocab_words)
    surface = sentence.span_text(span).lower()
    seen = stats.surface_counts.get(surface, 0)
    consistent = stats.surface_label_counts.get((surface, span.label), 0)
    return {
        "eLen": float(span.length),
        "sLen": float(n),
        "oDen": oov / n,
        "eCon": consistent / seen if seen else 0.0,
    }


@dataclass(frozen=True)
class AttributeSpec:
    """Bucket intervals for one attribute.

    intervals maps bucket name to (lo, hi, lo_closed, hi_closed); the four
    intervals cover the attribute range in order XS, S, L, XL. Values
    outside every interval clamp to the nearest end bucket with a warning.
    """

    attribute: str
    intervals: tuple[tuple[float, float, bool, bool], ...]

    def __post_init__(self):
        if self.attribute not in ATTRIBUTES:
            raise ValueError(f"unknown attribute {self.attribute!r}")
        if len(self.intervals) != len(BUCKETS):
            raise ValueError("exactly four bucket intervals required")
        los = [iv[0] for iv in self.intervals]
        if los != sorted(los):
            raise ValueError("bucket intervals must be monotone")


DEFAULT_SPECS: dict[str, AttributeSpec] = {
    "eCon": AttributeSpec("eCon", (
        (0.0, 0.0, True, True),
        (0.0, 0.5, False, True),
        (0.5, 1.0, False, False),
        (1.0, 1.0, True, True),
    )),
    "sLen": AttributeSpec("sLen", (
        (1.0, 7.0, True, False),
        (7.0, 16.0, True, False),
        (16.0, 31.0, True, False),
        (31.0, 124.0, True, True),
    )),
    "eLen": AttributeSpec("eLen", (
        (1.0, 1.0, True, True),
        (2.0, 2.0, True, True),
        (3.0, 3.0, True, True),
        (3.0, 6.0, False, True),
    )),
    "oDen": AttributeSpec("oDen", (
        (0.0, 0.0, True, True),
        (0.0, 0.067, False, True),
        (0.067, 0.203, False, True),
        (0.203, 1.0, False, True),
    )),
}


def bucketize(value: float, spec: AttributeSpec) -> str:
    """Bucket name for an attribute value; out-of-range values clamp."""
    for name, (lo, hi, lo_c, hi_c) in zip(BUCKETS, spec.intervals):
        above = value > lo if not lo_c else value >= lo
        below = value < hi if not hi_c else value <= hi
        if above and below:
            return name
    first_lo = spec.intervals[0][0]
    if value < first_lo or (value == first_lo and not spec.intervals[0][2]):
        logger.warning("%s value %s below range; clamped to XS", spec.attribute, value)
        return "XS"
    logger.warning("%s value %s above range; clamped to XL", spec.attribute, value)
    return "XL"


@dataclass
class BucketScore:
    f1: float | None  # None when the bucket holds no gold or predicted entities
    gold: int
    predicted: int
    correct: int

    def to_dict(self) -> dict:
        return {"f1": self.f1, "gold": self.gold,
                "predicted": self.predicted, "correct": self.correct}


@dataclass
class BucketReport:
    attribute: str
    spec: AttributeSpec
    buckets: dict[str, BucketScore]

    def to_dict(self) -> dict:
        return {
            "attribute": self.attribute,
            "buckets": {b: self.buckets[b].to_dict() for b in BUCKETS},
        }


def bucket_f1(
    gold: Corpus,
    predicted: list[list[Span]],
    attribute: str,
    stats: TrainStats,
    spec: AttributeSpec | None = None,
) -> BucketReport:
    """Bucket-wise F1 for one attribute.

    Every gold and every predicted entity is assigned to exactly one bucket
    by its own attribute value; an exact-match prediction lands in its gold
    entity's bucket by construction.
    """
    spec = spec or DEFAULT_SPECS[attribute]
    if spec.attribute != attribute:
        raise ValueError(f"spec is for {spec.attribute}, not {attribute}")
    if len(predicted) != len(gold):
        raise ValueError("predictions do not align with the corpus")
    counts = {b: [0, 0, 0] for b in BUCKETS}  # gold, predicted, correct
    for sent, pred in zip(gold.sentences, predicted):
        gold_set = set(sent.gold_spans)
        for span in sent.gold_spans:
            b = bucketize(attributes(span, sent, stats)[attribute], spec)
            counts[b][0] += 1
        for span in pred:
            b = bucketize(attributes(span, sent, stats)[attribute], spec)
            counts[b][1] += 1
            if span in gold_set:
                counts[b][2] += 1
    buckets = {}
    for b, (g, p, c) in counts.items():
        if g == 0 and p == 0:
            buckets[b] = BucketScore(None, g, p, c)
        else:
            _, _, ff = _score_counts(g, p, c)
            buckets[b] = BucketScore(ff, g, p, c)
    return BucketReport(attribute, spec, buckets)


def bucket_reports(
    gold: Corpus, predicted: list[list[Span]], stats: TrainStats,
    specs: dict[str, AttributeSpec] | None = None,
) -> dict[str, BucketReport]:
    specs = specs or DEFAULT_SPECS
    return {attr: bucket_f1(gold, predicted, attr, stats, specs[attr])
            for attr in ATTRIBUTES}


def heatmap_diff(
    reports_a: dict[str, BucketReport],
    reports_b: dict[str, BucketReport],
) -> dict[str, dict[str, float]]:
    """Per-(attribute, bucket) F1 difference, F1_a - F1_b.

    Empty buckets (F1 absent) enter the difference as 0.0; the bucket
    counts in the underlying reports tell the two cases apart.
    """
    if set(reports_a) != set(reports_b):
        raise ValueError("attribute sets differ between the two report sets")
    diff: dict[str, dict[str, float]] = {}
    for attr in reports_a:
        ra, rb = reports_a[attr], reports_b[attr]
        if ra.spec != rb.spec:
            raise ValueError(f"bucket specs differ for {attr}")
        diff[attr] = {
            b: (ra.buckets[b].f1 or 0.0) - (rb.buckets[b].f1 or 0.0)
            for b in BUCKETS
        }
    return diff


def heatmap_to_csv(diff: dict[str, dict[str, float]]) -> str:
    lines = ["attribute," + ",".join(BUCKETS)]
    for attr in sorted(diff):
        lines.append(attr + "," + ",".join(f"{diff[attr][b]:.6f}" for b in BUCKETS))
    return "\n".join(lines) + "\n"


def report_to_csv(report: EvalReport) -> str:
    """Tabular form of an evaluation report: overall row plus one per class."""
    lines = ["class,precision,recall,f1,gold,predicted,correct"]

    def row(name, s):
        return (f"{name},{s.precision:.6f},{s.recall:.6f},{s.f1:.6f},"
                f"{s.gold},{s.predicted},{s.correct}")

    lines.append(row("ALL", report))
    for label in sorted(report.per_class):
        lines.append(row(label, report.per_class[label]))
    return "\n".join(lines) + "\n"


def bucket_report_to_csv(report: BucketReport) -> str:
    """Tabular form of one attribute's bucket report."""
    lines = ["bucket,f1,gold,predicted,correct"]
    for bucket in BUCKETS:
        s = report.buckets[bucket]
        f1 = "" if s.f1 is None else f"{s.f1:.6f}"
        lines.append(f"{bucket},{f1},{s.gold},{s.predicted},{s.correct}")
    return "\n".join(lines) + "\n"


@dataclass
class WilcoxonResult:
    statistic: float  # min(W+, W-) over nonzero differences
    p_value: float
    significant: bool  # at the 0.05 level
    n: int  # pairs remaining after zero differences are removed
    method: str  # "exact", "normal", or "degenerate"

    def __iter__(self):  # allow tuple unpacking (W, p, significant)
        return iter((self.statistic, self.p_value, self.significant))


def _signed_ranks(diffs: np.ndarray):
    ranks = rankdata(np.abs(diffs))  # average ranks under ties
    w_plus = float(ranks[diffs > 0].sum())
    w_minus = float(ranks[diffs < 0].sum())
    return ranks, w_plus, w_minus


def _exact_p(ranks: np.ndarray, w_plus: float) -> float:
    """Two-sided exact p by enumerating all sign assignments.

    Counts are accumulated over the distribution of W+ via a convolution
    on doubled ranks (average ranks are multiples of 1/2, so doubling
    yields integers). Equivalent to summing over all 2^n assignments.
    """
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: counts.size - r]
        counts += shifted
    w2 = int(np.rint(2.0 * w_plus))
    n_assign = 2.0 ** len(ranks)
    le = counts[: w2 + 1].sum() / n_assign
    ge = counts[w2:].sum() / n_assign
    return min(1.0, 2.0 * min(le, ge))


def _normal_p(diffs: np.ndarray, w_plus: float) -> float:
    """Two-sided normal approximation with tie-corrected variance and a
    0.5 continuity correction."""
    n = len(diffs)
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(np.abs(diffs), return_counts=True)
    var -= float((tie_counts**3 - tie_counts).sum()) / 48.0
    if var <= 0:
        return 1.0
    z = max(abs(w_plus - mean) - 0.5, 0.0) / math.sqrt(var)
    return math.erfc(z / math.sqrt(2.0))


EXACT_LIMIT = 25


def wilcoxon_signed_rank(x, y, method: str = "auto") -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are removed first. The exact distribution (all 2^n
    sign assignments over the average ranks of |d|) is used for n <= 25;
    larger samples use a normal approximation with tie-corrected variance.
    All-zero differences are degenerate: p = 1.0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    diffs = x - y
    diffs = diffs[diffs != 0.0]
    n = len(diffs)
    if n == 0:
        return WilcoxonResult(0.0, 1.0, False, 0, "degenerate")
    if n < 5:
        raise ValueError(f"need at least 5 nonzero differences, got {n}")
    ranks, w_plus, w_minus = _signed_ranks(diffs)
    statistic = min(w_plus, w_minus)
    if method == "auto":
        method = "exact" if n <= EXACT_LIMIT else "normal"
    if method == "exact":
        p = _exact_p(ranks, w_plus)
    elif method == "normal":
        p = _normal_p(diffs, w_plus)
    else:
        raise ValueError(f"unknown method {method!r}")
    return WilcoxonResult(statistic, p, p < 0.05, n, method)
