"""Command-line interface: train, predict, eval, register, combine,
buckets, synth, serve.

A JSON configuration file (--config) supplies defaults for any long flag
(keys use the flag spelling with dashes replaced by underscores); explicit
flags win over the file. Every run prints the resolved seed to stderr so
stdout stays clean for report payloads.
"""

import argparse
import json
import sys
from pathlib import Path

from .combine import ErrorModel
from .corpus import format_conll, parse_conll
from .evaluation import entity_f1
from .model import (
    ModelConfig,
    load_checkpoint,
    predict,
    save_checkpoint,
    train,
)
from .registry import METHODS, Registry, report_json


def _read(path):
    return Path(path).read_text(encoding="utf-8")


def _load_config(path):
    if not path:
        return {}
    doc = json.loads(_read(path))
    if not isinstance(doc, dict):
        raise SystemExit("--config must hold a JSON object")
    return doc


def _resolve(args, config, name, default):
    """Explicit flag > config file entry > default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _parse_file(args, config, path, lenient=False):
    return parse_conll(
        _read(path),
        token_col=_resolve(args, config, "token_col", 0),
        tag_col=_resolve(args, config, "tag_col", -1),
        lenient=lenient,
    )


def _print_seed(seed):
    print(f"seed: {seed}", file=sys.stderr)


def cmd_train(args, config):
    seed = _resolve(args, config, "seed", 0)
    _print_seed(seed)
    cfg = ModelConfig(
        word_dim=_resolve(args, config, "word_dim", 16),
        hidden_dim=_resolve(args, config, "hidden_dim", 16),
        max_span_len=_resolve(args, config, "max_span_len", 6),
        length_embed_dim=_resolve(args, config, "length_embed_dim", 8),
        learning_rate=_resolve(args, config, "learning_rate", 1.0),
        epochs=_resolve(args, config, "epochs", 100),
        batch_size=_resolve(args, config, "batch_size", 8),
        seed=seed,
        neg_downsample_ratio=_resolve(args, config, "neg_downsample_ratio", 1.0),
        gradient_clip=_resolve(args, config, "gradient_clip", 5.0),
        min_count=_resolve(args, config, "min_count", 1),
        patience=_resolve(args, config, "patience", 20),
        pretrained_path=_resolve(args, config, "pretrained", None),
    )
    train_corpus = _parse_file(args, config, args.train)
    dev_corpus = _parse_file(args, config, args.dev)
    params = train(train_corpus, dev_corpus, cfg)
    save_checkpoint(params, args.out)
    dev_pred = [[s.to_span() for s in predict(sent, params)]
                for sent in dev_corpus.sentences]
    report = entity_f1(dev_corpus, dev_pred)
    print(json.dumps({"checkpoint": str(args.out), "dev_f1": report.f1},
                     indent=2, sort_keys=True))
    return 0


def cmd_predict(args, config):
    _print_seed(_resolve(args, config, "seed", 0))
    params = load_checkpoint(args.checkpoint)
    corpus = _parse_file(args, config, args.input)
    tags = []
    from .corpus import spans_to_tags

    for sent in corpus.sentences:
        spans = [s.to_span() for s in predict(sent, params)]
        tags.append(spans_to_tags(spans, len(sent), corpus.tag_scheme))
    text = format_conll(corpus, tags)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text, encoding="utf-8")
    return 0


def cmd_eval(args, config):
    _print_seed(_resolve(args, config, "seed", 0))
    gold = _parse_file(args, config, args.gold)
    from .combine import SystemOutput
    from .evaluation import report_to_csv

    output = SystemOutput.from_conll(
        Path(args.pred).stem, _read(args.pred), gold,
        token_col=_resolve(args, config, "token_col", 0),
        tag_col=_resolve(args, config, "tag_col", -1),
    )
    report = entity_f1(gold, output.spans)
    if args.csv:
        sys.stdout.write(report_to_csv(report))
    else:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def _open_registry(args, config, allow_create=False):
    root = Path(_resolve(args, config, "registry", None) or args.registry)
    if (root / "manifest.json").exists():
        return Registry.load(root)
    if not allow_create:
        raise SystemExit(f"no registry at {root}")
    corpus = _resolve(args, config, "corpus", None)
    if not corpus:
        raise SystemExit("creating a registry requires --corpus")
    return Registry.create(
        root, corpus,
        checkpoint_path=_resolve(args, config, "checkpoint", None),
        train_corpus_path=_resolve(args, config, "train_corpus", None),
    )


def cmd_register(args, config):
    _print_seed(_resolve(args, config, "seed", 0))
    registry = _open_registry(args, config, allow_create=True)
    entry = registry.register(args.name, _read(args.file))
    print(json.dumps({"registered": entry.to_dict(),
                      "systems": [e.to_dict() for e in registry.entries]},
                     indent=2, sort_keys=True))
    return 0


def cmd_combine(args, config):
    _print_seed(_resolve(args, config, "seed", 0))
    registry = _open_registry(args, config)
    systems = args.systems.split(",") if args.systems else None
    response = registry.combine(args.method, systems=systems,
                                interval=args.interval,
                                include_spans=args.spans)
    print(report_json(response["report"]))
    if args.spans:
        print(json.dumps({"spans": response["spans"]}, sort_keys=True),
              file=sys.stderr)
    return 0


def cmd_buckets(args, config):
    _print_seed(_resolve(args, config, "seed", 0))
    registry = _open_registry(args, config)
    print(json.dumps(registry.bucket_diff(args.attr, args.a, args.b),
                     indent=2, sort_keys=True))
    return 0


def cmd_synth(args, config):
    seed = _resolve(args, config, "seed", 0)
    _print_seed(seed)
    gold = _parse_file(args, config, args.corpus)
    from .combine import synthesize_system

    model = ErrorModel(
        p_drop=args.p_drop, p_label_swap=args.p_label_swap,
        p_boundary_shift=args.p_boundary_shift,
    )
    output = synthesize_system(gold, model, seed, args.name)
    text = output.to_conll(gold)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def cmd_serve(args, config):
    _print_seed(_resolve(args, config, "seed", 0))
    from .service import serve

    root = Path(_resolve(args, config, "registry", None) or args.registry)
    serve(root,
          host=_resolve(args, config, "host", "127.0.0.1"),
          port=int(_resolve(args, config, "port", 8570)))
    return 0


def _add_column_flags(p):
    p.add_argument("--token-col", type=int, default=None,
                   help="token column index (default 0)")
    p.add_argument("--tag-col", type=int, default=None,
                   help="tag column index (default: last)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nerspan",
        description="Span-prediction NER, system combination, and bucketed evaluation",
    )
    parser.add_argument("--config", help="JSON file with default flag values")
    parser.add_argument("--seed", type=int, default=None,
                        help="random seed (printed to stderr on every run)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the span model")
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--out", required=True)
    _add_column_flags(p)
    for flag, kind in [
        ("--word-dim", int), ("--hidden-dim", int), ("--max-span-len", int),
        ("--length-embed-dim", int), ("--learning-rate", float), ("--epochs", int),
        ("--batch-size", int), ("--neg-downsample-ratio", float),
        ("--gradient-clip", float), ("--min-count", int), ("--patience", int),
    ]:
        p.add_argument(flag, type=kind, default=None)
    p.add_argument("--pretrained", default=None,
                   help="plain-text word vectors ('word v1 v2 ...' per line)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="tag a corpus with a trained checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", default="-")
    _add_column_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="entity-level F1 of a system output file")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--csv", action="store_true", help="comma-separated output")
    _add_column_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("register", help="add a system output to a registry")
    p.add_argument("--registry", required=True)
    p.add_argument("--name", required=True)
    p.add_argument("--file", required=True)
    p.add_argument("--corpus", default=None,
                   help="evaluation corpus (first registration creates the registry)")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--train-corpus", default=None)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("combine", help="combine registered systems")
    p.add_argument("--registry", required=True)
    p.add_argument("--method", required=True, choices=METHODS)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--systems", help="comma-separated system names")
    group.add_argument("--interval", help="rank interval, e.g. m[:3], m[2:4], all")
    p.add_argument("--spans", action="store_true",
                   help="also emit per-sentence spans (stderr)")
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("buckets", help="bucket-F1 heatmap row between two systems")
    p.add_argument("--registry", required=True)
    p.add_argument("--attr", required=True, choices=["eCon", "sLen", "eLen", "oDen"])
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_buckets)

    p = sub.add_parser("synth", help="synthesize a corrupted system output")
    p.add_argument("--corpus", required=True)
    _add_column_flags(p)
    p.add_argument("--out", default="-")
    p.add_argument("--name", default="synthetic")
    p.add_argument("--p-drop", type=float, default=0.0)
    p.add_argument("--p-label-swap", type=float, default=0.0)
    p.add_argument("--p-boundary-shift", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the HTTP service over a registry")
    p.add_argument("--registry", required=True)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _load_config(args.config)
    try:
        return args.func(args, config)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
