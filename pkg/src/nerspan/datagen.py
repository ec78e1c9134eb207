"""Deterministic synthetic corpora for tests and demos.

Sentences mix filler words with entities drawn from a fixed, unambiguous
lexicon (every surface form always carries the same label), so a span
model can learn them to near-perfect F1.
"""

import numpy as np

from .corpus import Corpus, Sentence, Span, Token, spans_to_tags

# 10 entries; surface forms are unambiguous across labels
DEFAULT_LEXICON = [
    ("alice", "PER"),
    ("bob marley", "PER"),
    ("carol jones", "PER"),
    ("paris", "LOC"),
    ("new york", "LOC"),
    ("rio grande valley", "LOC"),
    ("acme corp", "ORG"),
    ("initech", "ORG"),
    ("globex industries", "ORG"),
    ("umbrella", "ORG"),
]

FILLERS = [
    "the", "a", "report", "said", "that", "went", "to", "from", "meeting",
    "market", "yesterday", "today", "again", "quietly", "rose", "fell",
]


def build_lexicon_corpus(
    n_sentences: int,
    seed: int = 0,
    lexicon: list[tuple[str, str]] | None = None,
    max_entities: int = 2,
) -> Corpus:
    """Generate a BIO corpus of filler text with lexicon entities."""
    lexicon = lexicon if lexicon is not None else DEFAULT_LEXICON
    rng = np.random.default_rng(seed)
    # round-robin over a shuffled lexicon so every entry occurs once the
    # corpus holds at least len(lexicon) entities
    order = rng.permutation(len(lexicon))
    drawn = 0
    sentences = []
    labels = set()
    for _ in range(n_sentences):
        n_entities = int(rng.integers(1, max_entities + 1))
        words: list[str] = []
        spans: list[Span] = []
        for k in range(n_entities):
            words.extend(
                FILLERS[int(rng.integers(len(FILLERS)))]
                for _ in range(int(rng.integers(1, 4)))
            )
            if drawn % len(order) == 0:
                order = rng.permutation(len(lexicon))
            surface, label = lexicon[int(order[drawn % len(order)])]
            drawn += 1
            parts = surface.split()
            start = len(words) + 1
            words.extend(parts)
            spans.append(Span(start, start + len(parts) - 1, label))
            labels.add(label)
        words.extend(
            FILLERS[int(rng.integers(len(FILLERS)))]
            for _ in range(int(rng.integers(1, 3)))
        )
        tags = spans_to_tags(spans, len(words), "BIO")
        tokens = [Token(w, i + 1) for i, w in enumerate(words)]
        sentences.append(Sentence(tokens, tags, spans))
    return Corpus(sentences, sorted(labels) + ["O"], "BIO")
