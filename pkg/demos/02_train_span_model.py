"""Train the span scorer on a synthetic corpus and inspect predictions.

The model enumerates every span up to a length cap, represents each one by
its boundary token states plus a length embedding, and classifies it over
the label set (O included). Decoding keeps the most probable
non-overlapping entity spans.

Run:  python demos/02_train_span_model.py        (about 5 seconds)
"""

import os
import tempfile
import time

from nerspan import ModelConfig, entity_f1, load_checkpoint, predict, save_checkpoint, train
from nerspan.datagen import build_lexicon_corpus

train_corpus = build_lexicon_corpus(50, seed=100)
dev_corpus = build_lexicon_corpus(30, seed=200)
print(f"train: {len(train_corpus)} sentences, "
      f"{sum(len(s.gold_spans) for s in train_corpus.sentences)} entities")

config = ModelConfig(
    word_dim=16, hidden_dim=16, max_span_len=4, length_embed_dim=4,
    learning_rate=3.0, epochs=200, batch_size=8, seed=7, patience=20,
)
start = time.time()
params = train(train_corpus, dev_corpus, config)
print(f"trained in {time.time() - start:.1f}s "
      f"(early stopping on dev F1, patience {config.patience})")

for corpus, name in [(train_corpus, "train"), (dev_corpus, "dev")]:
    pred = [[s.to_span() for s in predict(x, params)] for x in corpus.sentences]
    print(f"{name} F1: {entity_f1(corpus, pred).f1:.4f}")

sent = dev_corpus.sentences[0]
print("\nsample sentence:", " ".join(sent.surfaces))
for scored in predict(sent, params):
    print(f"  ({scored.start},{scored.end}) {scored.label}  p={scored.probability:.3f}")

with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "model.json")
    save_checkpoint(params, path)
    again = load_checkpoint(path)
    print(f"\ncheckpoint round-trips: {len(again.labels)} labels, "
          f"vocab of {len(again.vocab)}")
