"""Span-prediction NER: one model recognizes entities directly and
re-recognizes them as a combiner over other systems' outputs, with
attribute-bucketed evaluation and an HTTP service for interactive
combination exploration."""

from .corpus import (
    Corpus,
    ParseError,
    Sentence,
    Span,
    TagSchemeError,
    Token,
    Vocab,
    build_vocab,
    format_conll,
    parse_conll,
    spans_to_tags,
    tags_to_spans,
)
from .model import (
    ModelConfig,
    ModelParams,
    ScoredSpan,
    encode,
    enumerate_spans,
    heuristic_decode,
    load_checkpoint,
    loss_and_grad,
    predict,
    predict_corpus,
    predict_proba,
    save_checkpoint,
    score_label,
    span_repr,
    train,
)
from .combine import (
    CandidateTable,
    ErrorModel,
    SystemOutput,
    collect_candidates,
    combination_case,
    combine_spanner,
    parse_interval,
    synthesize_system,
)
from .voting import vote_corpus, vote_majority, vote_weighted_class, vote_weighted_overall
from .evaluation import (
    AttributeSpec,
    BucketReport,
    EvalReport,
    TrainStats,
    attributes,
    bucket_f1,
    bucket_reports,
    bucketize,
    entity_f1,
    heatmap_diff,
    wilcoxon_signed_rank,
)
from .registry import Registry

__version__ = "0.1.0"

__all__ = [
    "Corpus", "ParseError", "Sentence", "Span", "TagSchemeError", "Token",
    "Vocab", "build_vocab", "format_conll", "parse_conll", "spans_to_tags",
    "tags_to_spans",
    "ModelConfig", "ModelParams", "ScoredSpan", "encode", "enumerate_spans",
    "heuristic_decode", "load_checkpoint", "loss_and_grad", "predict",
    "predict_corpus", "predict_proba", "save_checkpoint", "score_label",
    "span_repr", "train",
    "CandidateTable", "ErrorModel", "SystemOutput", "collect_candidates",
    "combination_case", "combine_spanner", "parse_interval", "synthesize_system",
    "vote_corpus", "vote_majority", "vote_weighted_class", "vote_weighted_overall",
    "AttributeSpec", "BucketReport", "EvalReport", "TrainStats", "attributes",
    "bucket_f1", "bucket_reports", "bucketize", "entity_f1", "heatmap_diff",
    "wilcoxon_signed_rank",
    "Registry",
    "__version__",
]
