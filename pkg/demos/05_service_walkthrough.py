"""The registry service end to end, in process: create a registry, train
and store a checkpoint, register systems, then drive every HTTP endpoint
the combination-exploration UI uses.

Run:  python demos/05_service_walkthrough.py     (about 10 seconds)

To run the same thing as a real server:
  nerspan serve --registry <dir> --port 8570
"""

import io
import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from nerspan import ErrorModel, ModelConfig, Registry, format_conll, save_checkpoint, synthesize_system, train
from nerspan.datagen import build_lexicon_corpus
from nerspan.service import create_app

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    gold = build_lexicon_corpus(80, seed=300)
    train_corpus = build_lexicon_corpus(50, seed=100)
    (tmp / "eval.conll").write_text(format_conll(gold))
    (tmp / "train.conll").write_text(format_conll(train_corpus))

    params = train(
        train_corpus, build_lexicon_corpus(30, seed=200),
        ModelConfig(word_dim=16, hidden_dim=16, max_span_len=4, length_embed_dim=4,
                    learning_rate=3.0, epochs=200, batch_size=8, seed=7, patience=20),
    )
    save_checkpoint(params, tmp / "model.json")

    registry = Registry.create(tmp / "reg", tmp / "eval.conll",
                               checkpoint_path=tmp / "model.json",
                               train_corpus_path=tmp / "train.conll")
    for i, model in enumerate([ErrorModel(p_drop=0.1),
                               ErrorModel(p_drop=0.2, p_label_swap=0.1)]):
        out = synthesize_system(gold, model, seed=30 + i, name=f"sys{i}")
        registry.register(f"sys{i}", out.to_conll(gold))

    client = TestClient(create_app(tmp / "reg"))

    print("GET /health ->", client.get("/health").json()["status"])

    doc = client.get("/systems").json()
    print("\nGET /systems:")
    for entry in doc["systems"]:
        print(f"  #{entry['rank']} {entry['name']}  F1={entry['overall_f1']:.4f}")

    print("\nPOST /systems (multipart upload):")
    third = synthesize_system(gold, ErrorModel(p_boundary_shift=0.3), seed=99, name="up")
    resp = client.post("/systems", data={"name": "uploaded"},
                       files={"file": ("up.conll",
                                       io.BytesIO(third.to_conll(gold).encode()),
                                       "text/plain")})
    print("  status", resp.status_code, "->",
          [e["name"] for e in resp.json()["systems"]])

    print("\nPOST /combine {method=spanner, interval=all}:")
    resp = client.post("/combine", json={"method": "spanner", "interval": "all"})
    report = resp.json()["report"]
    print(f"  combined F1 = {report['overall']['f1']:.4f} over {report['systems']}")
    best = max(e["overall_f1"] for e in doc["systems"])
    print(f"  best single = {best:.4f}; delta = {report['overall']['f1'] - best:+.4f}")

    print("\nGET /buckets?attr=eLen&a=sys0&b=sys1:")
    diff = client.get("/buckets", params={"attr": "eLen", "a": "sys0", "b": "sys1"}).json()
    print("  " + json.dumps(diff["diff"]))
