"""Interpretable evaluation: bucket entities by attributes, compare two
systems with a heatmap of bucket-F1 differences, and test significance.

Attributes: entity length (eLen), sentence length (sLen), OOV density of
the sentence (oDen), and label consistency of the surface form in training
data (eCon). Each partitions test entities into XS/S/L/XL buckets.

Run:  python demos/04_bucket_diagnosis.py
"""

from nerspan import (
    ErrorModel,
    TrainStats,
    attributes,
    bucket_reports,
    entity_f1,
    heatmap_diff,
    synthesize_system,
    wilcoxon_signed_rank,
)
from nerspan.datagen import build_lexicon_corpus
from nerspan.evaluation import BUCKETS, heatmap_to_csv

train_corpus = build_lexicon_corpus(50, seed=100)
test_corpus = build_lexicon_corpus(120, seed=777)
stats = TrainStats.from_corpus(train_corpus)

sent = test_corpus.sentences[0]
span = sent.gold_spans[0]
print("attributes of", repr(sent.span_text(span)), "in:", " ".join(sent.surfaces))
for key, value in attributes(span, sent, stats).items():
    print(f"  {key} = {value:.3f}")

sys_a = synthesize_system(test_corpus, ErrorModel(p_drop=0.15), seed=4, name="a")
sys_b = synthesize_system(test_corpus, ErrorModel(p_label_swap=0.25), seed=5, name="b")
print(f"\nsystem a (drops entities):  F1 = {entity_f1(test_corpus, sys_a.spans).f1:.4f}")
print(f"system b (swaps labels):    F1 = {entity_f1(test_corpus, sys_b.spans).f1:.4f}")

reports_a = bucket_reports(test_corpus, sys_a.spans, stats)
reports_b = bucket_reports(test_corpus, sys_b.spans, stats)
diff = heatmap_diff(reports_a, reports_b)
print("\nbucket-F1 difference (a - b); positive = a better:")
print(heatmap_to_csv(diff))

print("paired bucket F1s, Wilcoxon signed-rank:")
a_scores = [reports_a[attr].buckets[b].f1 or 0.0 for attr in diff for b in BUCKETS]
b_scores = [reports_b[attr].buckets[b].f1 or 0.0 for attr in diff for b in BUCKETS]
result = wilcoxon_signed_rank(a_scores, b_scores)
print(f"  W = {result.statistic}, p = {result.p_value:.4f} ({result.method}), "
      f"significant at 0.05: {result.significant}")
