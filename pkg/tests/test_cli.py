import json

import pytest
from fastapi.testclient import TestClient

from nerspan.cli import main
from nerspan.corpus import format_conll, parse_conll
from nerspan.datagen import build_lexicon_corpus
from nerspan.registry import report_json
from nerspan.service import create_app


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def cli_workspace(tmp_path_factory, fixture_corpora, trained_params):
    from nerspan.model import save_checkpoint

    root = tmp_path_factory.mktemp("cli")
    (root / "train.conll").write_text(format_conll(fixture_corpora["train"]))
    (root / "eval.conll").write_text(format_conll(fixture_corpora["eval"]))
    save_checkpoint(trained_params, root / "ckpt.json")
    return root


class TestBasicCommands:
    def test_seed_printed_to_stderr(self, capsys, cli_workspace):
        code, out, err = run_cli(
            capsys, "--seed", "41", "synth",
            "--corpus", str(cli_workspace / "eval.conll"), "--out", "-",
        )
        assert code == 0
        assert "seed: 41" in err
        assert "seed" not in out

    def test_synth_register_combine_flow(self, capsys, cli_workspace):
        reg = cli_workspace / "registry"
        for i, (seed, drop) in enumerate([(1, "0.1"), (2, "0.3")]):
            code, out, err = run_cli(
                capsys, "--seed", str(seed), "synth",
                "--corpus", str(cli_workspace / "eval.conll"),
                "--p-drop", drop,
                "--out", str(cli_workspace / f"sys{i}.conll"),
            )
            assert code == 0
            code, out, err = run_cli(
                capsys, "register",
                "--registry", str(reg),
                "--name", f"sys{i}",
                "--file", str(cli_workspace / f"sys{i}.conll"),
                "--corpus", str(cli_workspace / "eval.conll"),
                "--checkpoint", str(cli_workspace / "ckpt.json"),
                "--train-corpus", str(cli_workspace / "train.conll"),
            )
            assert code == 0, err
            doc = json.loads(out)
            assert doc["registered"]["name"] == f"sys{i}"

        code, out, err = run_cli(
            capsys, "combine", "--registry", str(reg),
            "--method", "vm", "--interval", "all",
        )
        assert code == 0
        report = json.loads(out)
        assert report["method"] == "vm"
        assert report["systems"] == ["sys0", "sys1"]

    def test_eval_command(self, capsys, cli_workspace):
        code, out, err = run_cli(
            capsys, "eval",
            "--gold", str(cli_workspace / "eval.conll"),
            "--pred", str(cli_workspace / "sys0.conll"),
        )
        assert code == 0
        doc = json.loads(out)
        assert 0.0 < doc["f1"] < 1.0
        assert doc["per_class"]

    def test_predict_command(self, capsys, cli_workspace):
        out_path = cli_workspace / "predicted.conll"
        code, _, err = run_cli(
            capsys, "predict",
            "--checkpoint", str(cli_workspace / "ckpt.json"),
            "--input", str(cli_workspace / "eval.conll"),
            "--output", str(out_path),
        )
        assert code == 0
        predicted = parse_conll(out_path.read_text(), lenient=True)
        gold = parse_conll((cli_workspace / "eval.conll").read_text())
        assert len(predicted) == len(gold)

    def test_buckets_command(self, capsys, cli_workspace):
        code, out, err = run_cli(
            capsys, "buckets", "--registry", str(cli_workspace / "registry"),
            "--attr", "eLen", "--a", "sys0", "--b", "sys1",
        )
        assert code == 0
        doc = json.loads(out)
        assert set(doc["diff"]) == {"XS", "S", "L", "XL"}

    def test_error_paths_exit_nonzero(self, capsys, cli_workspace):
        code, out, err = run_cli(
            capsys, "combine", "--registry", str(cli_workspace / "registry"),
            "--method", "vm", "--systems", "ghost",
        )
        assert code == 2
        assert "ghost" in err

    def test_config_file_defaults(self, capsys, cli_workspace, tmp_path):
        cfg = tmp_path / "conf.json"
        cfg.write_text(json.dumps({"seed": 1234}))
        code, out, err = run_cli(
            capsys, "--config", str(cfg), "synth",
            "--corpus", str(cli_workspace / "eval.conll"), "--out", "-",
        )
        assert code == 0
        assert "seed: 1234" in err

    def test_flag_overrides_config(self, capsys, cli_workspace, tmp_path):
        cfg = tmp_path / "conf.json"
        cfg.write_text(json.dumps({"seed": 1234}))
        code, out, err = run_cli(
            capsys, "--config", str(cfg), "--seed", "9", "synth",
            "--corpus", str(cli_workspace / "eval.conll"), "--out", "-",
        )
        assert code == 0
        assert "seed: 9" in err


class TestTrainCommand:
    def test_train_writes_checkpoint(self, capsys, tmp_path):
        train_c = build_lexicon_corpus(12, seed=61)
        dev_c = build_lexicon_corpus(6, seed=62)
        (tmp_path / "train.conll").write_text(format_conll(train_c))
        (tmp_path / "dev.conll").write_text(format_conll(dev_c))
        code, out, err = run_cli(
            capsys, "--seed", "3", "train",
            "--train", str(tmp_path / "train.conll"),
            "--dev", str(tmp_path / "dev.conll"),
            "--out", str(tmp_path / "model.json"),
            "--word-dim", "6", "--hidden-dim", "6", "--max-span-len", "4",
            "--length-embed-dim", "2", "--epochs", "3", "--learning-rate", "1.0",
        )
        assert code == 0, err
        assert "seed: 3" in err
        doc = json.loads(out)
        assert (tmp_path / "model.json").exists()
        assert 0.0 <= doc["dev_f1"] <= 1.0


class TestCliServiceParity:
    def test_combine_report_byte_identical(self, capsys, cli_workspace):
        reg = cli_workspace / "registry"
        client = TestClient(create_app(reg))
        for body, flags in [
            ({"method": "vm", "interval": "all"},
             ["--method", "vm", "--interval", "all"]),
            ({"method": "spanner", "interval": [1, 2]},
             ["--method", "spanner", "--interval", "m[1:2]"]),
            ({"method": "vof1", "systems": ["sys1"]},
             ["--method", "vof1", "--systems", "sys1"]),
            ({"method": "vcf1", "interval": "m[:2]"},
             ["--method", "vcf1", "--interval", "m[:2]"]),
        ]:
            resp = client.post("/combine", json=body)
            assert resp.status_code == 200
            service_payload = report_json(resp.json()["report"]) + "\n"
            code, out, err = run_cli(
                capsys, "combine", "--registry", str(reg), *flags
            )
            assert code == 0
            assert out == service_payload
