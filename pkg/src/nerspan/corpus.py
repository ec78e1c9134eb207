"""CoNLL column data: parsing, tag/span conversion, vocabulary.

Spans are 1-based inclusive (start, end) pairs; a sentence of n tokens
admits spans with 1 <= start <= end <= n. Tag sequences use the BIO or
BIOES scheme.
"""

from collections import Counter
from dataclasses import dataclass, field

SCHEMES = ("BIO", "BIOES")
OUTSIDE = "O"
DOCSTART = "-DOCSTART-"

PAD_WORD = "<pad>"
UNK_WORD = "<unk>"


class ParseError(ValueError):
    """Malformed CoNLL input; carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TagSchemeError(ValueError):
    """Illegal tag or tag transition under the active scheme."""


@dataclass(frozen=True)
class Span:
    """Entity span with 1-based inclusive boundaries."""

    start: int
    end: int
    label: str

    def __post_init__(self):
        if self.start < 1 or self.end < self.start:
            raise ValueError(f"bad span boundaries ({self.start}, {self.end})")
        if not self.label or self.label == OUTSIDE:
            raise ValueError(f"bad span label {self.label!r}")

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other: "Span") -> bool:
        return self.start <= other.end and other.start <= self.end


@dataclass(frozen=True)
class Token:
    surface: str
    index: int  # 1-based position within the sentence

    def __post_init__(self):
        if not self.surface:
            raise ValueError("empty token surface")
        if self.index < 1:
            raise ValueError(f"bad token index {self.index}")


@dataclass
class Sentence:
    tokens: list[Token]
    gold_tags: list[str]
    gold_spans: list[Span]

    def __post_init__(self):
        if len(self.gold_tags) != len(self.tokens):
            raise ValueError(
                f"{len(self.gold_tags)} tags for {len(self.tokens)} tokens"
            )

    def __len__(self):
        return len(self.tokens)

    @property
    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def span_text(self, span: Span) -> str:
        return " ".join(t.surface for t in self.tokens[span.start - 1 : span.end])


@dataclass
class Corpus:
    sentences: list[Sentence]
    label_set: list[str]  # entity labels (sorted) followed by O
    tag_scheme: str = "BIO"

    def __len__(self):
        return len(self.sentences)

    @property
    def entity_labels(self) -> list[str]:
        return [l for l in self.label_set if l != OUTSIDE]

    def gold_spans(self) -> list[list[Span]]:
        return [s.gold_spans for s in self.sentences]


def _split_tag(tag: str, scheme: str) -> tuple[str, str]:
    """Return (prefix, label); label is "" for O."""
    if tag == OUTSIDE:
        return OUTSIDE, ""
    if len(tag) < 3 or tag[1] != "-":
        raise TagSchemeError(f"malformed tag {tag!r}")
    prefix, label = tag[0], tag[2:]
    valid = "BIO" if scheme == "BIO" else "BIOES"
    if prefix not in valid or prefix == "O":
        raise TagSchemeError(f"prefix {prefix!r} not valid under {scheme}")
    if not label:
        raise TagSchemeError(f"malformed tag {tag!r}")
    return prefix, label


def iob1_to_bio(tags: list[str]) -> list[str]:
    """Convert IOB1 tags (entities may open with I-X) to BIO."""
    out = []
    prev_label = None
    for tag in tags:
        prefix, label = _split_tag(tag, "BIO")
        if prefix == "I" and prev_label != label:
            out.append("B-" + label)
        else:
            out.append(tag)
        prev_label = label if prefix != OUTSIDE else None
    return out


def tags_to_spans(tags: list[str], scheme: str = "BIO", lenient: bool = False) -> list[Span]:
    """Decode a tag sequence into non-overlapping spans.

    Strict mode raises TagSchemeError on illegal transitions (e.g. I-X
    opening a span in BIO, or a B-X left unclosed in BIOES). Lenient mode
    repairs them: a stray continuation starts a new span, an unclosed
    BIOES span is emitted up to its last contiguous position.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    spans: list[Span] = []
    start = None
    label = None

    def close(end):
        nonlocal start, label
        if start is not None:
            spans.append(Span(start, end, label))
        start, label = None, None

    def illegal(pos, tag, why):
        raise TagSchemeError(f"position {pos}: {tag} {why}")

    for i, tag in enumerate(tags):
        pos = i + 1
        prefix, tag_label = _split_tag(tag, scheme)
        continues = start is not None and label == tag_label
        if scheme == "BIO":
            if prefix == "B":
                close(pos - 1)
                start, label = pos, tag_label
            elif prefix == "I":
                if not continues:
                    if not lenient:
                        illegal(pos, tag, "does not continue an open span")
                    close(pos - 1)
                    start, label = pos, tag_label
            else:  # O
                close(pos - 1)
        else:  # BIOES
            if start is not None and (prefix in ("B", "S", "O") or not continues):
                # the open span is interrupted before an E closed it
                if not lenient:
                    illegal(pos, tag, f"interrupts an open {label} span")
                close(pos - 1)
            if prefix == "B":
                start, label = pos, tag_label
            elif prefix == "S":
                spans.append(Span(pos, pos, tag_label))
            elif prefix == "I":
                if start is None:
                    if not lenient:
                        illegal(pos, tag, "does not continue an open span")
                    start, label = pos, tag_label
            elif prefix == "E":
                if start is None:
                    if not lenient:
                        illegal(pos, tag, "does not continue an open span")
                    spans.append(Span(pos, pos, tag_label))
                else:
                    close(pos)
    if start is not None:
        if scheme == "BIOES" and not lenient:
            raise TagSchemeError(f"sequence ends with open {label} span")
        close(len(tags))
    return spans


def spans_to_tags(spans: list[Span], n: int, scheme: str = "BIO") -> list[str]:
    """Encode spans as a tag sequence of length n.

    Inverse of tags_to_spans: decoding the result reproduces the spans.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    tags = [OUTSIDE] * n
    occupied = [False] * n
    for span in spans:
        if span.end > n:
            raise ValueError(f"span {span} exceeds sentence length {n}")
        if any(occupied[span.start - 1 : span.end]):
            raise ValueError(f"span {span} overlaps another span")
        for i in range(span.start - 1, span.end):
            occupied[i] = True
        if scheme == "BIO":
            tags[span.start - 1] = "B-" + span.label
            for i in range(span.start, span.end):
                tags[i] = "I-" + span.label
        else:
            if span.length == 1:
                tags[span.start - 1] = "S-" + span.label
            else:
                tags[span.start - 1] = "B-" + span.label
                for i in range(span.start, span.end - 1):
                    tags[i] = "I-" + span.label
                tags[span.end - 1] = "E-" + span.label
    return tags


def parse_conll(
    text: str,
    token_col: int = 0,
    tag_col: int = -1,
    scheme: str = "BIO",
    lenient: bool = False,
    convert_iob1: bool = False,
) -> Corpus:
    """Parse CoNLL column text into a Corpus.

    Sentences are separated by blank lines; lines starting with -DOCSTART-
    are document markers and are skipped. Columns are whitespace-separated
    and their count must be constant across the file.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    sentences: list[Sentence] = []
    labels: set[str] = set()
    surfaces: list[str] = []
    tags: list[str] = []
    start_line = None
    ncols = None

    def flush(at_line):
        nonlocal surfaces, tags
        if not surfaces:
            return
        seq = iob1_to_bio(tags) if convert_iob1 else list(tags)
        try:
            spans = tags_to_spans(seq, scheme, lenient=lenient)
        except TagSchemeError as exc:
            raise ParseError(str(exc), line=start_line) from exc
        tokens = [Token(s, i + 1) for i, s in enumerate(surfaces)]
        sentences.append(Sentence(tokens, seq, spans))
        labels.update(sp.label for sp in spans)
        for t in seq:
            prefix, lab = _split_tag(t, scheme)
            if lab:
                labels.add(lab)
        surfaces, tags = [], []

    for lineno, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped:
            flush(lineno)
            continue
        if stripped.startswith(DOCSTART):
            flush(lineno)
            continue
        cols = stripped.split()
        if ncols is None:
            ncols = len(cols)
        elif len(cols) != ncols:
            raise ParseError(
                f"ragged columns ({len(cols)} found, {ncols} expected)", line=lineno
            )
        try:
            surface = cols[token_col]
            tag = cols[tag_col]
        except IndexError:
            raise ParseError(
                f"column index out of range for {len(cols)} columns", line=lineno
            ) from None
        try:
            _split_tag(tag, scheme)
        except TagSchemeError as exc:
            raise ParseError(str(exc), line=lineno) from exc
        if not surfaces:
            start_line = lineno
        surfaces.append(surface)
        tags.append(tag)
    flush(None)
    label_set = sorted(labels) + [OUTSIDE]
    return Corpus(sentences, label_set, scheme)


def format_conll(corpus: Corpus, tags_per_sentence: list[list[str]] | None = None) -> str:
    """Serialize a corpus as two-column CoNLL text (token, tag).

    When tags_per_sentence is given it replaces the gold tags, which is how
    system outputs are written.
    """
    if tags_per_sentence is not None and len(tags_per_sentence) != len(corpus):
        raise ValueError("tag sequences do not align with the corpus")
    blocks = []
    for i, sent in enumerate(corpus.sentences):
        tags = tags_per_sentence[i] if tags_per_sentence is not None else sent.gold_tags
        if len(tags) != len(sent):
            raise ValueError(f"sentence {i}: {len(tags)} tags for {len(sent)} tokens")
        blocks.append("\n".join(f"{tok.surface} {tag}" for tok, tag in zip(sent.tokens, tags)))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


@dataclass
class Vocab:
    """Word-to-id map with reserved pad (0) and unk (1) ids."""

    words: list[str]  # index == id; words[0], words[1] are pad/unk markers
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    PAD = 0
    UNK = 1

    def __post_init__(self):
        if not self._index:
            self._index = {w: i for i, w in enumerate(self.words[2:], start=2)}

    def __len__(self):
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def id(self, word: str) -> int:
        return self._index.get(word, self.UNK)

    def ids(self, words: list[str]) -> list[int]:
        return [self.id(w) for w in words]

    def to_dict(self) -> dict:
        return {"words": self.words}

    @classmethod
    def from_dict(cls, data: dict) -> "Vocab":
        return cls(list(data["words"]))


def build_vocab(train: Corpus, min_count: int = 1) -> Vocab:
    """Build a vocabulary from training tokens.

    Ids are assigned by descending frequency, ties broken lexicographically,
    after the two reserved ids. Words below min_count map to unk.
    """
    if not train.sentences:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    counts = Counter(t.surface for s in train.sentences for t in s.tokens)
    kept = sorted(
        (w for w, c in counts.items() if c >= min_count),
        key=lambda w: (-counts[w], w),
    )
    return Vocab([PAD_WORD, UNK_WORD] + kept)
