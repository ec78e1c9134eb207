"""File-backed registry of base-system outputs, scores, and the combiner
checkpoint, plus the combination engine behind the CLI and the HTTP API.

Layout under the registry root:

    manifest.json        names, file paths, scores, ranks
    corpus.conll         the evaluation corpus (gold)
    train.conll          optional training corpus (attribute statistics)
    model.json           optional span-model checkpoint
    outputs/<name>.conll one file per registered system, stored verbatim
"""

import json
import logging
import shutil
import time
from dataclasses import dataclass
from pathlib import Path

from .combine import (
    SystemOutput,
    combination_case,
    combine_spanner,
    parse_interval,
    synthesize_system,
)
from .corpus import Corpus, parse_conll
from .evaluation import (
    ATTRIBUTES,
    TrainStats,
    bucket_reports,
    entity_f1,
    heatmap_diff,
)
from .model import ModelParams, load_checkpoint
from .voting import vote_corpus

logger = logging.getLogger(__name__)

MANIFEST_FORMAT = "combination-registry/1"
METHODS = ("spanner", "vm", "vof1", "vcf1")


@dataclass
class ManifestEntry:
    name: str
    file: str  # relative to the registry root
    overall_f1: float
    class_f1: dict[str, float]
    rank: int = 0

    def to_dict(self) -> dict:
        return {
            "name": self.name, "file": self.file, "rank": self.rank,
            "overall_f1": self.overall_f1,
            "class_f1": dict(sorted(self.class_f1.items())),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ManifestEntry":
        return cls(data["name"], data["file"], data["overall_f1"],
                   dict(data["class_f1"]), data.get("rank", 0))


class Registry:
    def __init__(self, root: Path, entries: list[ManifestEntry],
                 corpus_file: str, train_file: str | None, checkpoint_file: str | None):
        self.root = Path(root)
        self.entries = entries
        self.corpus_file = corpus_file
        self.train_file = train_file
        self.checkpoint_file = checkpoint_file
        self._corpus: Corpus | None = None
        self._stats: TrainStats | None = None
        self._params: ModelParams | None = None

    # -- construction -----------------------------------------------------

    @classmethod
    def create(cls, root, corpus_path, checkpoint_path=None, train_corpus_path=None) -> "Registry":
        root = Path(root)
        if (root / "manifest.json").exists():
            raise ValueError(f"registry already exists at {root}")
        root.mkdir(parents=True, exist_ok=True)
        (root / "outputs").mkdir(exist_ok=True)
        parse_conll(Path(corpus_path).read_text(encoding="utf-8"))  # validate early
        shutil.copyfile(corpus_path, root / "corpus.conll")
        train_file = None
        if train_corpus_path:
            shutil.copyfile(train_corpus_path, root / "train.conll")
            train_file = "train.conll"
        checkpoint_file = None
        if checkpoint_path:
            load_checkpoint(checkpoint_path)  # validate the format tag early
            shutil.copyfile(checkpoint_path, root / "model.json")
            checkpoint_file = "model.json"
        reg = cls(root, [], "corpus.conll", train_file, checkpoint_file)
        reg.save()
        return reg

    @classmethod
    def load(cls, root) -> "Registry":
        root = Path(root)
        path = root / "manifest.json"
        if not path.exists():
            raise FileNotFoundError(f"no registry manifest at {path}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        if doc.get("format") != MANIFEST_FORMAT:
            raise ValueError(f"unsupported manifest format {doc.get('format')!r}")
        entries = [ManifestEntry.from_dict(e) for e in doc["systems"]]
        missing = [f for f in [doc["corpus"], doc.get("train_corpus"),
                               doc.get("checkpoint")] + [e.file for e in entries]
                   if f and not (root / f).exists()]
        if missing:
            raise ValueError(f"manifest references missing file(s) {missing}")
        return cls(root, entries, doc["corpus"], doc.get("train_corpus"),
                   doc.get("checkpoint"))

    def save(self) -> None:
        doc = {
            "format": MANIFEST_FORMAT,
            "corpus": self.corpus_file,
            "train_corpus": self.train_file,
            "checkpoint": self.checkpoint_file,
            "systems": [e.to_dict() for e in self.entries],
        }
        (self.root / "manifest.json").write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    # -- cached resources --------------------------------------------------

    @property
    def corpus(self) -> Corpus:
        if self._corpus is None:
            text = (self.root / self.corpus_file).read_text(encoding="utf-8")
            self._corpus = parse_conll(text)
        return self._corpus

    @property
    def train_stats(self) -> TrainStats:
        if self._stats is None:
            if self.train_file:
                text = (self.root / self.train_file).read_text(encoding="utf-8")
                self._stats = TrainStats.from_corpus(parse_conll(text))
            else:
                logger.warning(
                    "registry has no training corpus; attribute statistics "
                    "fall back to the evaluation corpus"
                )
                self._stats = TrainStats.from_corpus(self.corpus)
        return self._stats

    @property
    def params(self) -> ModelParams:
        if self._params is None:
            if not self.checkpoint_file:
                raise ValueError("registry has no model checkpoint; "
                                 "method 'spanner' is unavailable")
            self._params = load_checkpoint(self.root / self.checkpoint_file)
        return self._params

    # -- registration ------------------------------------------------------

    def register(self, name: str, output_text: str) -> ManifestEntry:
        """Validate, score, store, and re-rank a base system's output."""
        if not name or "/" in name or name != name.strip():
            raise ValueError(f"bad system name {name!r}")
        if any(e.name == name for e in self.entries):
            raise ValueError(f"system {name!r} is already registered")
        output = SystemOutput.from_conll(name, output_text, self.corpus)
        report = entity_f1(self.corpus, output.spans)
        rel = f"outputs/{name}.conll"
        (self.root / rel).write_text(output_text, encoding="utf-8")
        entry = ManifestEntry(
            name, rel, report.f1,
            {label: cs.f1 for label, cs in report.per_class.items()},
        )
        self.entries.append(entry)
        self._rerank()
        self.save()
        return entry

    def _rerank(self) -> None:
        self.entries.sort(key=lambda e: (-e.overall_f1, e.name))
        for i, entry in enumerate(self.entries):
            entry.rank = i + 1

    # -- selection and combination ------------------------------------------

    def output_of(self, entry: ManifestEntry) -> SystemOutput:
        text = (self.root / entry.file).read_text(encoding="utf-8")
        out = SystemOutput.from_conll(entry.name, text, self.corpus)
        out.overall_f1 = entry.overall_f1
        out.class_f1 = dict(entry.class_f1)
        return out

    def select(self, systems: list[str] | None = None,
               interval=None) -> list[ManifestEntry]:
        """Resolve an explicit name list or a rank interval to entries."""
        if (systems is None) == (interval is None):
            raise ValueError("select systems either by name list or by interval")
        if systems is not None:
            if not systems:
                raise ValueError("empty system selection")
            by_name = {e.name: e for e in self.entries}
            missing = [n for n in systems if n not in by_name]
            if missing:
                raise ValueError(f"unknown system(s) {missing}")
            picked = [by_name[n] for n in systems]
            return sorted(picked, key=lambda e: e.rank)
        if isinstance(interval, str):
            i, k = parse_interval(interval, len(self.entries))
        else:
            i, k = int(interval[0]), int(interval[1])
        return combination_case(self.entries, i, k)

    def combine(self, method: str, systems: list[str] | None = None,
                interval=None, include_spans: bool = False) -> dict:
        """Run one combination request; returns the response document.

        The "report" sub-document is the deterministic payload the CLI
        prints; elapsed time and optional per-sentence spans sit beside it.
        """
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
        start = time.perf_counter()
        entries = self.select(systems, interval)
        outputs = [self.output_of(e) for e in entries]
        corpus = self.corpus
        if method == "spanner":
            combined = combine_spanner(corpus, outputs, self.params)
        else:
            combined = vote_corpus(
                corpus, outputs, method,
                overall_weights={e.name: e.overall_f1 for e in entries},
                class_weights={e.name: dict(e.class_f1) for e in entries},
            )
        report = entity_f1(corpus, combined)
        buckets = bucket_reports(corpus, combined, self.train_stats)
        overall = report.to_dict()
        per_class = overall.pop("per_class")
        doc = {
            "report": {
                "method": method,
                "systems": [e.name for e in entries],
                "overall": overall,
                "per_class": per_class,
                "buckets": {a: buckets[a].to_dict()["buckets"] for a in ATTRIBUTES},
            },
            "elapsed_seconds": time.perf_counter() - start,
        }
        if include_spans:
            doc["spans"] = [
                [{"start": s.start, "end": s.end, "label": s.label} for s in sent]
                for sent in combined
            ]
        return doc

    def bucket_diff(self, attribute: str, name_a: str, name_b: str) -> dict:
        """Heatmap entry set for one attribute between two systems."""
        if attribute not in ATTRIBUTES:
            raise ValueError(f"unknown attribute {attribute!r}")
        reports = {}
        for name in (name_a, name_b):
            entries = self.select(systems=[name])
            output = self.output_of(entries[0])
            reports[name] = bucket_reports(self.corpus, output.spans, self.train_stats)
        diff = heatmap_diff(
            {attribute: reports[name_a][attribute]},
            {attribute: reports[name_b][attribute]},
        )[attribute]
        return {
            "attribute": attribute,
            "a": name_a,
            "b": name_b,
            "diff": diff,
            "a_buckets": reports[name_a][attribute].to_dict()["buckets"],
            "b_buckets": reports[name_b][attribute].to_dict()["buckets"],
        }

    def synthesize(self, error_model, seed: int, name: str) -> str:
        """Corrupt the registry corpus into a synthetic system output text."""
        output = synthesize_system(self.corpus, error_model, seed, name)
        return output.to_conll(self.corpus)


def report_json(report: dict) -> str:
    """Canonical serialization of a combine report (CLI and service agree)."""
    return json.dumps(report, indent=2, sort_keys=True)
