"""Shared oracle machinery for the unit and acceptance suites."""

import math

import numpy as np

from nerspan.combine import combined_mass
from nerspan.corpus import Sentence, Span, Token, Vocab, spans_to_tags
from nerspan.model import ModelConfig, init_params, loss_and_grad

FD_EPS = 1e-4
FD_RTOL = 1e-4
FD_ATOL = 1e-8


def numerical_gradient(batch, params, subsets=None, eps=FD_EPS):
    """Central-difference derivative of the loss for every parameter entry."""
    grads = {}
    for name, tensor in params.tensors():
        flat = tensor.ravel()
        out = np.zeros_like(flat)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + eps
            up, _ = loss_and_grad(batch, params, subsets)
            flat[idx] = orig - eps
            down, _ = loss_and_grad(batch, params, subsets)
            flat[idx] = orig
            out[idx] = (up - down) / (2.0 * eps)
        grads[name] = out.reshape(tensor.shape)
    return grads


def random_model_and_batch(rng):
    """A tiny random model (dims <= 8) and 1-2 sentences of <= 5 tokens."""
    vocab_size = int(rng.integers(3, 7))
    words = [f"w{i}" for i in range(vocab_size)]
    labels = ["LOC", "ORG", "PER", "O"][: int(rng.integers(2, 4))] + ["O"]
    labels = sorted(set(labels) - {"O"}) + ["O"]
    cfg = ModelConfig(
        word_dim=int(rng.integers(2, 5)),
        hidden_dim=int(rng.integers(1, 4)),
        max_span_len=int(rng.integers(1, 4)),
        length_embed_dim=int(rng.integers(1, 3)),
        seed=int(rng.integers(1 << 30)),
    )
    vocab = Vocab(["<pad>", "<unk>"] + words)
    params = init_params(cfg, vocab, labels, rng)
    # biases start at zero; randomize everything for a harsher check
    for _, tensor in params.tensors():
        tensor += rng.uniform(-0.4, 0.4, size=tensor.shape)
    params.embeddings[0] = 0.0

    batch = []
    for _ in range(int(rng.integers(1, 3))):
        n = int(rng.integers(1, 6))
        surfaces = [words[int(rng.integers(vocab_size))] for _ in range(n)]
        spans = []
        if n >= 2 and rng.random() < 0.8:
            b = int(rng.integers(1, n))
            e = min(n, b + int(rng.integers(0, cfg.max_span_len)))
            if e - b + 1 <= cfg.max_span_len:
                spans.append(Span(b, e, labels[int(rng.integers(len(labels) - 1))]))
        tags = spans_to_tags(spans, n)
        batch.append(Sentence([Token(s, i + 1) for i, s in enumerate(surfaces)], tags, spans))
    return params, batch


def assert_grads_match(analytic, numeric, rtol=FD_RTOL, atol=FD_ATOL):
    for name in analytic:
        a, n = analytic[name], numeric[name]
        err = np.abs(a - n)
        bound = rtol * np.maximum(np.abs(a), np.abs(n)) + atol
        worst = (err - bound).max()
        assert (err <= bound).all(), (
            f"{name}: worst excess {worst:.3e}, max abs err {err.max():.3e}"
        )


def brute_force_combine(sentence, table, params):
    """Naive evaluation of the combination rule: raw exp scores, explicit
    sums, argmax in label order. Independent of the library path."""
    from nerspan.model import encode, sentence_ids, span_repr

    ids = sentence_ids(sentence, params.vocab)
    h, _ = encode(ids, params)
    winners = []
    for cand, votes in zip(table.candidates, table.votes):
        s = span_repr(h, cand[0], cand[1], params, clamp_length=True)
        raw = {
            label: math.exp(float(s @ params.class_vectors[k]))
            for k, label in enumerate(params.labels)
        }
        mass = combined_mass(votes, raw)
        best_label, best_value = None, -1.0
        for label in params.labels:  # first-in-order wins ties
            if mass[label] > best_value:
                best_label, best_value = label, mass[label]
        if best_label != "O":
            total = sum(mass.values())
            winners.append((cand, best_label, mass[best_label] / total))
    return winners
