"""Corpus handling: CoNLL parsing, tag/span conversion, vocabulary.

Run:  python demos/01_spans_and_corpora.py
"""

from nerspan import build_vocab, parse_conll, spans_to_tags, tags_to_spans

SAMPLE = """\
-DOCSTART- O

London B-LOC
is O
beautiful O

Alice B-PER
visited O
New B-LOC
York I-LOC
"""

corpus = parse_conll(SAMPLE)
print(f"parsed {len(corpus)} sentences; labels: {corpus.label_set}")
for sent in corpus.sentences:
    entities = [(sp.start, sp.end, sp.label, sent.span_text(sp)) for sp in sent.gold_spans]
    print(" ", " ".join(sent.surfaces))
    print("   entities:", entities)

print("\ntag sequence -> spans (strict gold decoding):")
tags = ["B-PER", "I-PER", "O", "B-LOC"]
print(f"  {tags} -> {tags_to_spans(tags)}")

print("\nlenient decoding repairs what real systems emit:")
print(f"  ['O', 'I-ORG'] -> {tags_to_spans(['O', 'I-ORG'], lenient=True)}")

spans = tags_to_spans(tags)
print("\nspans -> tags round-trips:")
print(f"  {spans_to_tags(spans, 4)}")

vocab = build_vocab(corpus)
print(f"\nvocabulary of {len(vocab)} entries (pad=0, unk=1):")
print("  first words:", vocab.words[:8])
print("  unseen word id:", vocab.id("zzz"))
