"""Span-scoring NER model: BiLSTM encoder, span representations, softmax
label scoring, analytic gradients, SGD training, and heuristic decoding.

The network, for a sentence of n tokens:

    u_t = E[w_t]                                  word embeddings
    h_t = [lstm_fwd(u)_t ; lstm_bwd(u)_t]         BiLSTM token states
    s   = [h_b ; h_e ; Z_len[e-b+1]]              span representation
    P(y_k | s) = softmax_k(s . y_k)               label distribution

All arithmetic is float64 and all randomness flows from one seeded
generator, so training is bitwise reproducible.
"""

import json
import logging
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .corpus import Corpus, Sentence, Span, Vocab, build_vocab, OUTSIDE

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "span-model-checkpoint/1"


@dataclass
class ModelConfig:
    word_dim: int = 16
    hidden_dim: int = 16  # per direction
    max_span_len: int = 6
    length_embed_dim: int = 8
    learning_rate: float = 0.3
    epochs: int = 60
    batch_size: int = 8
    seed: int = 0
    neg_downsample_ratio: float = 1.0
    gradient_clip: float = 5.0
    min_count: int = 1
    patience: int = 20
    pretrained_path: str | None = None

    def __post_init__(self):
        for name in ("word_dim", "hidden_dim", "max_span_len", "length_embed_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 < self.neg_downsample_ratio <= 1.0:
            raise ValueError("neg_downsample_ratio must be in (0, 1]")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("bad epochs/batch_size")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        return cls(**data)


@dataclass
class ModelParams:
    """All learnable tensors plus the vocabulary and label inventory."""

    config: ModelConfig
    vocab: Vocab
    labels: list[str]  # entity labels then O, matching Corpus.label_set
    embeddings: np.ndarray  # (V, D)
    fw_wx: np.ndarray  # (4H, D)
    fw_wh: np.ndarray  # (4H, H)
    fw_b: np.ndarray  # (4H,)
    bw_wx: np.ndarray
    bw_wh: np.ndarray
    bw_b: np.ndarray
    length_table: np.ndarray  # (L_max, K)
    class_vectors: np.ndarray  # (C, 4H + K)

    TENSOR_NAMES = (
        "embeddings",
        "fw_wx", "fw_wh", "fw_b",
        "bw_wx", "bw_wh", "bw_b",
        "length_table", "class_vectors",
    )

    def tensors(self):
        return [(name, getattr(self, name)) for name in self.TENSOR_NAMES]

    def clone(self) -> "ModelParams":
        kw = {name: getattr(self, name).copy() for name in self.TENSOR_NAMES}
        return ModelParams(config=self.config, vocab=self.vocab,
                           labels=list(self.labels), **kw)

    def validate(self):
        cfg, h = self.config, self.config.hidden_dim
        span_dim = 4 * h + cfg.length_embed_dim
        expect = {
            "embeddings": (len(self.vocab), cfg.word_dim),
            "fw_wx": (4 * h, cfg.word_dim), "fw_wh": (4 * h, h), "fw_b": (4 * h,),
            "bw_wx": (4 * h, cfg.word_dim), "bw_wh": (4 * h, h), "bw_b": (4 * h,),
            "length_table": (cfg.max_span_len, cfg.length_embed_dim),
            "class_vectors": (len(self.labels), span_dim),
        }
        for name, arr in self.tensors():
            if arr.shape != expect[name]:
                raise ValueError(f"{name}: shape {arr.shape}, expected {expect[name]}")
            if not np.isfinite(arr).all():
                raise FloatingPointError(f"non-finite values in parameter block {name}")

    @property
    def o_index(self) -> int:
        return self.labels.index(OUTSIDE)

    def label_index(self) -> dict[str, int]:
        return {l: i for i, l in enumerate(self.labels)}


def zero_grads(params: ModelParams) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(arr) for name, arr in params.tensors()}


def init_params(
    config: ModelConfig,
    vocab: Vocab,
    labels: list[str],
    rng: np.random.Generator,
    pretrained: dict[str, np.ndarray] | None = None,
) -> ModelParams:
    """Uniform(-0.1, 0.1) initialization; the pad embedding row stays zero."""
    h, d, k = config.hidden_dim, config.word_dim, config.length_embed_dim

    def u(*shape):
        return rng.uniform(-0.1, 0.1, size=shape)

    params = ModelParams(
        config=config, vocab=vocab, labels=list(labels),
        embeddings=u(len(vocab), d),
        fw_wx=u(4 * h, d), fw_wh=u(4 * h, h), fw_b=np.zeros(4 * h),
        bw_wx=u(4 * h, d), bw_wh=u(4 * h, h), bw_b=np.zeros(4 * h),
        length_table=u(config.max_span_len, k),
        class_vectors=u(len(labels), 4 * h + k),
    )
    params.embeddings[Vocab.PAD] = 0.0
    if pretrained:
        for word, vec in pretrained.items():
            if word in vocab:
                if vec.shape != (d,):
                    raise ValueError(
                        f"pretrained vector for {word!r} has dim {vec.shape}, expected {d}"
                    )
                params.embeddings[vocab.id(word)] = vec
    params.validate()
    return params


def load_word_vectors(path: str) -> dict[str, np.ndarray]:
    """Read "word v1 v2 ..." lines into a word -> vector map."""
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.rstrip("\n").split()
            if len(parts) < 2:
                continue
            vectors[parts[0]] = np.array([float(v) for v in parts[1:]])
    return vectors


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


class _LstmCache:
    """Per-step activations kept for backpropagation through time."""

    __slots__ = ("x", "i", "f", "o", "g", "c", "tc", "h")

    def __init__(self, n, hidden):
        self.x = None
        for name in ("i", "f", "o", "g", "c", "tc", "h"):
            setattr(self, name, np.zeros((n, hidden)))


def lstm_forward(x: np.ndarray, wx, wh, b) -> tuple[np.ndarray, _LstmCache]:
    """Run a single-direction LSTM over x (n, D); returns states (n, H).

    The stacked (4H, .) weight matrices hold the input, forget, output,
    and cell-candidate gates in that row order.
    """
    n = x.shape[0]
    hidden = wh.shape[1]
    cache = _LstmCache(n, hidden)
    cache.x = x
    h_prev = np.zeros(hidden)
    c_prev = np.zeros(hidden)
    for t in range(n):
        pre = wx @ x[t] + wh @ h_prev + b
        i = _sigmoid(pre[:hidden])
        f = _sigmoid(pre[hidden : 2 * hidden])
        o = _sigmoid(pre[2 * hidden : 3 * hidden])
        g = np.tanh(pre[3 * hidden :])
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        cache.i[t], cache.f[t], cache.o[t], cache.g[t] = i, f, o, g
        cache.c[t], cache.tc[t], cache.h[t] = c, tc, h
        h_prev, c_prev = h, c
    return cache.h, cache


def lstm_backward(d_h: np.ndarray, cache: _LstmCache, wx, wh):
    """Backpropagate d_h (n, H) through the cached forward pass.

    Returns (d_wx, d_wh, d_b, d_x).
    """
    n, hidden = d_h.shape
    d_wx = np.zeros_like(wx)
    d_wh = np.zeros_like(wh)
    d_b = np.zeros(4 * hidden)
    d_x = np.zeros_like(cache.x)
    dh_next = np.zeros(hidden)
    dc_next = np.zeros(hidden)
    for t in range(n - 1, -1, -1):
        i, f, o, g = cache.i[t], cache.f[t], cache.o[t], cache.g[t]
        tc = cache.tc[t]
        c_prev = cache.c[t - 1] if t > 0 else np.zeros(hidden)
        h_prev = cache.h[t - 1] if t > 0 else np.zeros(hidden)
        dh = d_h[t] + dh_next
        do = dh * tc
        dc = dc_next + dh * o * (1.0 - tc * tc)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        da = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            do * o * (1.0 - o),
            dg * (1.0 - g * g),
        ])
        d_wx += np.outer(da, cache.x[t])
        d_wh += np.outer(da, h_prev)
        d_b += da
        d_x[t] = wx.T @ da
        dh_next = wh.T @ da
        dc_next = dc * f
    return d_wx, d_wh, d_b, d_x


def sentence_ids(sentence: Sentence, vocab: Vocab) -> np.ndarray:
    return np.array(vocab.ids(sentence.surfaces), dtype=np.int64)


def encode(ids: np.ndarray, params: ModelParams):
    """BiLSTM token states (n, 2H) for a sequence of vocab ids."""
    if ids.min() < 0 or ids.max() >= params.embeddings.shape[0]:
        raise IndexError("token id out of embedding range")
    u = params.embeddings[ids]
    h_f, cache_f = lstm_forward(u, params.fw_wx, params.fw_wh, params.fw_b)
    h_b_rev, cache_b = lstm_forward(u[::-1], params.bw_wx, params.bw_wh, params.bw_b)
    h = np.concatenate([h_f, h_b_rev[::-1]], axis=1)
    if not np.isfinite(h).all():
        raise FloatingPointError("non-finite hidden states in forward pass")
    return h, (cache_f, cache_b, ids)


def enumerate_spans(n: int, max_len: int) -> list[tuple[int, int]]:
    """All (start, end) with 1 <= start <= end <= min(start+max_len-1, n),
    ordered by length then start."""
    if n < 1 or max_len < 1:
        raise ValueError("n and max_len must be >= 1")
    return [
        (b, b + length - 1)
        for length in range(1, min(max_len, n) + 1)
        for b in range(1, n - length + 2)
    ]


def span_count(n: int, max_len: int) -> int:
    m = min(max_len, n)
    return n * m - m * (m - 1) // 2


def span_repr(h: np.ndarray, start: int, end: int, params: ModelParams,
              clamp_length: bool = False) -> np.ndarray:
    """Concatenate boundary states and the length embedding for one span."""
    n = h.shape[0]
    if not 1 <= start <= end <= n:
        raise ValueError(f"bad span ({start}, {end}) for sentence of {n} tokens")
    length = end - start + 1
    if length > params.config.max_span_len:
        if not clamp_length:
            raise ValueError(
                f"span length {length} exceeds the length table "
                f"({params.config.max_span_len})"
            )
        length = params.config.max_span_len
    return np.concatenate([h[start - 1], h[end - 1], params.length_table[length - 1]])


def _span_matrix(h: np.ndarray, spans: list[tuple[int, int]], params: ModelParams,
                 clamp_length: bool = False) -> np.ndarray:
    rows = [span_repr(h, b, e, params, clamp_length=clamp_length) for b, e in spans]
    return np.stack(rows) if rows else np.zeros((0, params.class_vectors.shape[1]))


def score_label(s: np.ndarray, k: int, params: ModelParams) -> float:
    """Unnormalized compatibility exp(s . y_k) between a span and label k."""
    value = math.exp(float(s @ params.class_vectors[k]))
    if not math.isfinite(value):
        raise FloatingPointError("non-finite span/label score")
    return value


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Row-stabilized log softmax; shifting a row by a constant is a no-op."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def predict_proba(s: np.ndarray, params: ModelParams) -> np.ndarray:
    """P(y | s) over the label inventory for one span representation."""
    return np.exp(log_softmax(s @ params.class_vectors.T))


def gold_label_map(sentence: Sentence) -> dict[tuple[int, int], str]:
    return {(sp.start, sp.end): sp.label for sp in sentence.gold_spans}


def loss_and_grad(
    batch: list[Sentence],
    params: ModelParams,
    span_subsets: list[list[tuple[int, int]]] | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean span-level cross-entropy over the batch and its full gradient.

    Every enumerated span carries one gold label: the entity label on an
    exact boundary match, otherwise O. span_subsets (parallel to batch)
    restricts which spans enter the loss; training uses it to downsample
    O spans. Gradients are exact derivatives of the returned loss.
    """
    params.validate()
    cfg = params.config
    h_dim = cfg.hidden_dim
    label_idx = params.label_index()
    grads = zero_grads(params)

    per_sentence = []
    total_spans = 0
    for si, sentence in enumerate(batch):
        spans = (span_subsets[si] if span_subsets is not None
                 else enumerate_spans(len(sentence), cfg.max_span_len))
        if span_subsets is not None:
            for b, e in spans:
                if not 1 <= b <= e <= len(sentence) or e - b + 1 > cfg.max_span_len:
                    raise ValueError(f"bad span subset entry ({b}, {e})")
        per_sentence.append(spans)
        total_spans += len(spans)
    if total_spans == 0:
        raise ValueError("no spans in batch")

    loss = 0.0
    for sentence, spans in zip(batch, per_sentence):
        if not spans:
            continue
        ids = sentence_ids(sentence, params.vocab)
        h, (cache_f, cache_b, _) = encode(ids, params)
        s_mat = _span_matrix(h, spans, params)
        logits = s_mat @ params.class_vectors.T
        if not np.isfinite(logits).all():
            raise FloatingPointError("non-finite logits (class_vectors block)")
        log_p = log_softmax(logits)
        gold = gold_label_map(sentence)
        gold_idx = np.array([label_idx[gold.get(span, OUTSIDE)] for span in spans])
        rows = np.arange(len(spans))
        loss -= log_p[rows, gold_idx].sum()

        d_logits = np.exp(log_p)
        d_logits[rows, gold_idx] -= 1.0
        d_logits /= total_spans

        grads["class_vectors"] += d_logits.T @ s_mat
        d_s = d_logits @ params.class_vectors
        d_h = np.zeros_like(h)
        for row, (b, e) in enumerate(spans):
            d_h[b - 1] += d_s[row, : 2 * h_dim]
            d_h[e - 1] += d_s[row, 2 * h_dim : 4 * h_dim]
            grads["length_table"][e - b] += d_s[row, 4 * h_dim :]

        d_wx, d_wh, d_b, d_u = lstm_backward(
            d_h[:, :h_dim], cache_f, params.fw_wx, params.fw_wh)
        grads["fw_wx"] += d_wx
        grads["fw_wh"] += d_wh
        grads["fw_b"] += d_b
        d_wx, d_wh, d_b, d_u_rev = lstm_backward(
            d_h[::-1, h_dim:], cache_b, params.bw_wx, params.bw_wh)
        grads["bw_wx"] += d_wx
        grads["bw_wh"] += d_wh
        grads["bw_b"] += d_b
        d_u += d_u_rev[::-1]
        np.add.at(grads["embeddings"], ids, d_u)

    return loss / total_spans, grads


@dataclass
class ScoredSpan:
    """A span with its chosen label and probability; probs (when present)
    is the full distribution over params.labels."""

    start: int
    end: int
    label: str
    probability: float
    probs: np.ndarray | None = field(default=None, repr=False)

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other) -> bool:
        return self.start <= other.end and other.start <= self.end

    def to_span(self) -> Span:
        return Span(self.start, self.end, self.label)


def heuristic_decode(spans: list[ScoredSpan]) -> list[ScoredSpan]:
    """Greedily drop overlaps, keeping the highest-probability spans.

    Ties prefer the longer span, then the smaller start. Output is sorted
    by position.
    """
    ordered = sorted(spans, key=lambda s: (-s.probability, -s.length, s.start, s.label))
    kept: list[ScoredSpan] = []
    for cand in ordered:
        if not any(cand.overlaps(k) for k in kept):
            kept.append(cand)
    return sorted(kept, key=lambda s: (s.start, s.end))


def predict(sentence: Sentence, params: ModelParams) -> list[ScoredSpan]:
    """Non-overlapping entity spans for one sentence (argmax label != O)."""
    ids = sentence_ids(sentence, params.vocab)
    h, _ = encode(ids, params)
    spans = enumerate_spans(len(sentence), params.config.max_span_len)
    s_mat = _span_matrix(h, spans, params)
    probs = np.exp(log_softmax(s_mat @ params.class_vectors.T))
    o_idx = params.o_index
    scored = []
    for row, (b, e) in enumerate(spans):
        k = int(probs[row].argmax())
        if k == o_idx:
            continue
        scored.append(ScoredSpan(b, e, params.labels[k], float(probs[row, k]),
                                 probs=probs[row]))
    return heuristic_decode(scored)


def predict_corpus(corpus: Corpus, params: ModelParams) -> list[list[ScoredSpan]]:
    return [predict(s, params) for s in corpus.sentences]


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale all blocks so the global L2 norm is at most max_norm."""
    total = math.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


def train(
    train_corpus: Corpus,
    dev_corpus: Corpus,
    config: ModelConfig,
    pretrained: dict[str, np.ndarray] | None = None,
) -> ModelParams:
    """SGD training with best-dev-F1 checkpointing and early stopping.

    Stops once the dev F1 has not improved for config.patience epochs.
    Deterministic given (config, corpora): one generator seeded with
    config.seed drives initialization, shuffling and O-span downsampling.
    """
    from .evaluation import entity_f1  # local import, evaluation sits above model

    if not train_corpus.sentences:
        raise ValueError("empty training corpus")
    if not dev_corpus.sentences:
        raise ValueError("empty dev corpus")
    if config.pretrained_path and pretrained is None:
        pretrained = load_word_vectors(config.pretrained_path)

    vocab = build_vocab(train_corpus, config.min_count)
    labels = list(train_corpus.label_set)
    rng = np.random.default_rng(config.seed)
    params = init_params(config, vocab, labels, rng, pretrained=pretrained)
    if config.epochs == 0:
        return params

    sentences = train_corpus.sentences
    best = params.clone()
    best_f1 = -1.0
    stale = 0
    for epoch in range(config.epochs):
        order = rng.permutation(len(sentences))
        subsets = None
        if config.neg_downsample_ratio < 1.0:
            subsets = []
            for sent in sentences:
                gold = gold_label_map(sent)
                kept = [
                    span for span in enumerate_spans(len(sent), config.max_span_len)
                    if span in gold or rng.random() < config.neg_downsample_ratio
                ]
                subsets.append(kept)
        loss = math.nan
        for lo in range(0, len(order), config.batch_size):
            chunk = order[lo : lo + config.batch_size]
            batch = [sentences[i] for i in chunk]
            batch_subsets = [subsets[i] for i in chunk] if subsets else None
            if batch_subsets is not None and not any(batch_subsets):
                continue  # downsampling emptied the whole batch
            loss, grads = loss_and_grad(batch, params, batch_subsets)
            clip_gradients(grads, config.gradient_clip)
            grads["embeddings"][Vocab.PAD] = 0.0  # pad row stays frozen
            for name, tensor in params.tensors():
                tensor -= config.learning_rate * grads[name]
        report = entity_f1(dev_corpus,
                           [[s.to_span() for s in predict(sent, params)]
                            for sent in dev_corpus.sentences])
        logger.debug("epoch %d: loss %.4f dev F1 %.4f", epoch, loss, report.f1)
        if report.f1 >= best_f1:
            # ties keep the later (more converged) parameters, but only a
            # strict improvement resets the early-stopping clock
            if report.f1 > best_f1:
                stale = 0
            else:
                stale += 1
            best_f1 = report.f1
            best = params.clone()
        else:
            stale += 1
        if stale >= config.patience:
            break
    return best


def save_checkpoint(params: ModelParams, path: str) -> None:
    """Write a versioned JSON checkpoint (config, vocab, named tensors)."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "config": params.config.to_dict(),
        "vocab": params.vocab.to_dict(),
        "labels": params.labels,
        "tensors": {
            name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
            for name, arr in params.tensors()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_checkpoint(path: str) -> ModelParams:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unsupported checkpoint format {doc.get('format')!r}")
    tensors = {
        name: np.array(entry["data"], dtype=np.float64).reshape(entry["shape"])
        for name, entry in doc["tensors"].items()
    }
    params = ModelParams(
        config=ModelConfig.from_dict(doc["config"]),
        vocab=Vocab.from_dict(doc["vocab"]),
        labels=list(doc["labels"]),
        **tensors,
    )
    params.validate()
    return params
