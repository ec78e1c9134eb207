"""System combination: the trained span model re-recognizes entities from
other systems' outputs and beats every single base system.

Three synthetic systems each lose 20% of a different entity class; their
errors are disjoint, so combining them recovers nearly everything. The
same candidate tables also feed the three voting baselines.

Run:  python demos/03_combine_systems.py        (about 10 seconds)
"""

from nerspan import (
    ErrorModel,
    ModelConfig,
    combination_case,
    combine_spanner,
    entity_f1,
    parse_interval,
    synthesize_system,
    train,
    vote_corpus,
)
from nerspan.datagen import build_lexicon_corpus

fixture = build_lexicon_corpus(200, seed=500)
params = train(
    build_lexicon_corpus(50, seed=100),
    build_lexicon_corpus(30, seed=200),
    ModelConfig(word_dim=16, hidden_dim=16, max_span_len=4, length_embed_dim=4,
                learning_rate=3.0, epochs=200, batch_size=8, seed=7, patience=20),
)

systems = []
for label, seed in [("PER", 71), ("LOC", 72), ("ORG", 73)]:
    out = synthesize_system(fixture, ErrorModel(p_drop={label: 0.2}),
                            seed=seed, name=f"drop-{label}")
    out.overall_f1 = entity_f1(fixture, out.spans).f1
    out.class_f1 = {
        lab: cs.f1 for lab, cs in entity_f1(fixture, out.spans).per_class.items()
    }
    systems.append(out)
    print(f"{out.name}: F1 = {out.overall_f1:.4f}")

systems.sort(key=lambda s: -s.overall_f1)

print("\ncombiners over all three systems:")
combined = combine_spanner(fixture, systems, params)
print(f"  span-model combiner: F1 = {entity_f1(fixture, combined).f1:.4f}")
for method in ("vm", "vof1", "vcf1"):
    spans = vote_corpus(fixture, systems, method)
    print(f"  {method:>5}: F1 = {entity_f1(fixture, spans).f1:.4f}")

print("\nrank-interval combination cases:")
for expr in ("m[:2]", "m[2:]", "all"):
    subset = combination_case(systems, *parse_interval(expr, len(systems)))
    spans = combine_spanner(fixture, subset, params)
    names = ",".join(s.name for s in subset)
    print(f"  {expr:>6} ({names}): F1 = {entity_f1(fixture, spans).f1:.4f}")
