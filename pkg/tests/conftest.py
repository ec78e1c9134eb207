import pytest

from nerspan.datagen import build_lexicon_corpus
from nerspan.model import ModelConfig, train


@pytest.fixture(scope="session")
def fixture_corpora():
    """Train/dev/eval splits drawn from the same synthetic distribution."""
    return {
        "train": build_lexicon_corpus(50, seed=100),
        "dev": build_lexicon_corpus(30, seed=200),
        "eval": build_lexicon_corpus(40, seed=300),
    }


@pytest.fixture(scope="session")
def trained_params(fixture_corpora):
    cfg = ModelConfig(
        word_dim=16, hidden_dim=16, max_span_len=4, length_embed_dim=4,
        learning_rate=3.0, epochs=200, batch_size=8, seed=7, patience=20,
    )
    return train(fixture_corpora["train"], fixture_corpora["dev"], cfg)
