import io
import json

import pytest
from fastapi.testclient import TestClient

from nerspan.combine import ErrorModel, synthesize_system
from nerspan.corpus import format_conll
from nerspan.model import save_checkpoint
from nerspan.registry import Registry, report_json
from nerspan.service import create_app


@pytest.fixture(scope="module")
def registry_root(tmp_path_factory, fixture_corpora, trained_params):
    """A populated registry: corpus, checkpoint, and three synthetic systems."""
    root = tmp_path_factory.mktemp("registry")
    gold = fixture_corpora["eval"]
    (root / "eval.conll").write_text(format_conll(gold), encoding="utf-8")
    (root / "train.conll").write_text(
        format_conll(fixture_corpora["train"]), encoding="utf-8"
    )
    save_checkpoint(trained_params, root / "ckpt.json")
    registry = Registry.create(
        root / "reg",
        root / "eval.conll",
        checkpoint_path=root / "ckpt.json",
        train_corpus_path=root / "train.conll",
    )
    for i, model in enumerate([
        ErrorModel(p_drop=0.1),
        ErrorModel(p_drop=0.25, p_label_swap=0.1),
        ErrorModel(p_drop=0.35, p_label_swap=0.2, p_boundary_shift=0.2),
    ]):
        out = synthesize_system(gold, model, seed=40 + i, name=f"sys{i}")
        registry.register(f"sys{i}", out.to_conll(gold))
    return root / "reg"


class TestRegistry:
    def test_gold_as_output_ranks_first(self, registry_root, fixture_corpora):
        registry = Registry.load(registry_root)
        gold = fixture_corpora["eval"]
        entry = registry.register("oracle", format_conll(gold))
        try:
            assert entry.overall_f1 == 1.0
            assert entry.rank == 1
            assert [e.rank for e in registry.entries] == list(
                range(1, len(registry.entries) + 1)
            )
        finally:
            registry.entries = [e for e in registry.entries if e.name != "oracle"]
            registry._rerank()
            registry.save()
            (registry_root / "outputs" / "oracle.conll").unlink()

    def test_ranks_descend_by_f1(self, registry_root):
        registry = Registry.load(registry_root)
        f1s = [e.overall_f1 for e in registry.entries]
        assert f1s == sorted(f1s, reverse=True)

    def test_duplicate_name_rejected(self, registry_root):
        registry = Registry.load(registry_root)
        with pytest.raises(ValueError):
            registry.register("sys0", "whatever O\n")

    def test_misaligned_output_rejected(self, registry_root):
        registry = Registry.load(registry_root)
        with pytest.raises(ValueError):
            registry.register("short", "lone O\n")

    def test_reload_reproduces_scores_and_ranks(self, registry_root):
        a = Registry.load(registry_root)
        b = Registry.load(registry_root)
        assert [e.to_dict() for e in a.entries] == [e.to_dict() for e in b.entries]

    def test_interval_equals_explicit_names(self, registry_root):
        registry = Registry.load(registry_root)
        by_interval = registry.select(interval="m[1:3]")
        names = [e.name for e in by_interval]
        by_names = registry.select(systems=names)
        assert by_interval == by_names

    def test_single_system_vm_equals_registered_score(self, registry_root):
        registry = Registry.load(registry_root)
        top = registry.entries[0]
        response = registry.combine("vm", interval=[1, 2])
        assert response["report"]["overall"]["f1"] == pytest.approx(top.overall_f1)

    def test_unknown_selection_errors(self, registry_root):
        registry = Registry.load(registry_root)
        with pytest.raises(ValueError):
            registry.combine("vm", systems=["ghost"])
        with pytest.raises(ValueError):
            registry.combine("nope", interval="all")
        with pytest.raises(ValueError):
            registry.combine("vm", systems=[])

    def test_combine_deterministic_reports(self, registry_root):
        registry = Registry.load(registry_root)
        r1 = registry.combine("spanner", interval="all")
        r2 = registry.combine("spanner", interval="all")
        assert report_json(r1["report"]) == report_json(r2["report"])

    def test_all_methods_produce_reports(self, registry_root):
        registry = Registry.load(registry_root)
        for method in ("spanner", "vm", "vof1", "vcf1"):
            response = registry.combine(method, interval="all")
            report = response["report"]
            assert report["method"] == method
            assert set(report["buckets"]) == {"eCon", "sLen", "eLen", "oDen"}
            assert 0.0 <= report["overall"]["f1"] <= 1.0
            assert response["elapsed_seconds"] >= 0.0


@pytest.fixture(scope="module")
def client(registry_root):
    return TestClient(create_app(registry_root))


class TestService:
    def test_health(self, client):
        doc = client.get("/health").json()
        assert doc["status"] == "ok"
        assert doc["has_checkpoint"]

    def test_systems_listing(self, client):
        doc = client.get("/systems").json()
        assert [e["rank"] for e in doc["systems"]] == [1, 2, 3]
        assert doc["checkpoint"] == "model.json"
        assert doc["methods"] == ["spanner", "vm", "vof1", "vcf1"]

    def test_combine_endpoint(self, client):
        resp = client.post("/combine", json={"method": "vm", "interval": [1, 3]})
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["report"]["method"] == "vm"
        assert len(doc["report"]["systems"]) == 2

    def test_combine_identical_responses(self, client):
        body = {"method": "spanner", "interval": "all"}
        r1 = client.post("/combine", json=body)
        r2 = client.post("/combine", json=body)
        assert r1.content == r2.content

    def test_combine_validation_errors(self, client):
        assert client.post("/combine", json={"method": "nope", "interval": "all"}).status_code == 400
        assert client.post("/combine", json={"method": "vm"}).status_code == 400
        assert client.post("/combine", json={"method": "vm", "systems": []}).status_code == 400
        assert client.post("/combine", json={"method": "vm", "systems": ["ghost"]}).status_code == 400

    def test_combine_explicit_names_and_spans(self, client):
        resp = client.post("/combine", json={
            "method": "vof1", "systems": ["sys0", "sys1"], "include_spans": True,
        })
        doc = resp.json()
        assert doc["report"]["systems"] == ["sys0", "sys1"]
        assert isinstance(doc["spans"], list)
        assert all(set(s) == {"start", "end", "label"}
                   for sent in doc["spans"] for s in sent)

    def test_buckets_endpoint(self, client):
        resp = client.get("/buckets", params={"attr": "eLen", "a": "sys0", "b": "sys1"})
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["attribute"] == "eLen"
        assert set(doc["diff"]) == {"XS", "S", "L", "XL"}

    def test_buckets_self_diff_zero(self, client):
        doc = client.get("/buckets", params={"attr": "eCon", "a": "sys0", "b": "sys0"}).json()
        assert all(v == 0.0 for v in doc["diff"].values())

    def test_buckets_validation(self, client):
        assert client.get("/buckets", params={"attr": "zzz", "a": "sys0", "b": "sys1"}).status_code == 400
        assert client.get("/buckets", params={"attr": "eLen", "a": "ghost", "b": "sys1"}).status_code == 400

    def test_upload_system_multipart(self, client, fixture_corpora):
        gold = fixture_corpora["eval"]
        out = synthesize_system(gold, ErrorModel(p_drop=0.5), seed=77, name="up")
        text = out.to_conll(gold)
        resp = client.post(
            "/systems",
            data={"name": "uploaded"},
            files={"file": ("uploaded.conll", io.BytesIO(text.encode()), "text/plain")},
        )
        assert resp.status_code == 201
        assert any(e["name"] == "uploaded" for e in resp.json()["systems"])
        # duplicate upload conflicts
        resp = client.post(
            "/systems",
            data={"name": "uploaded"},
            files={"file": ("x.conll", io.BytesIO(text.encode()), "text/plain")},
        )
        assert resp.status_code == 409
        # malformed upload is a 400
        resp = client.post(
            "/systems",
            data={"name": "broken"},
            files={"file": ("x.conll", io.BytesIO(b"just one line O\n"), "text/plain")},
        )
        assert resp.status_code == 400

    def test_upload_invalidates_memo_but_keeps_purity(self, client):
        before = client.post("/combine", json={"method": "vm", "interval": "all"}).json()
        after = client.post("/combine", json={"method": "vm", "interval": "all"}).json()
        assert before["report"] == after["report"]


class TestManifestValidation:
    def test_missing_output_file_detected(self, tmp_path, fixture_corpora):
        gold = fixture_corpora["eval"]
        (tmp_path / "eval.conll").write_text(format_conll(gold))
        registry = Registry.create(tmp_path / "reg", tmp_path / "eval.conll")
        out = synthesize_system(gold, ErrorModel(p_drop=0.2), seed=1, name="s")
        registry.register("s", out.to_conll(gold))
        (tmp_path / "reg" / "outputs" / "s.conll").unlink()
        with pytest.raises(ValueError) as err:
            Registry.load(tmp_path / "reg")
        assert "missing file" in str(err.value)
