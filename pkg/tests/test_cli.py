import json
from pathlib import Path

import pytest

from sentsimp.cli import main
from synth import make_corpus, to_conllu_files, to_text_files

from conftest import TABLE1_CONLLU, TABLE1_TEMPLATE


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestEvaluate:
    def test_golden_report(self, tmp_path, capsys):
        src = _write(tmp_path, "src.txt", "the big cat sat .\na dog ran far .\n")
        out = _write(tmp_path, "out.txt", "the cat sat .\na dog ran .\n")
        ref = _write(tmp_path, "ref.0", "the cat sat .\na dog ran .\n")
        json_out = tmp_path / "report.json"
        assert main(["evaluate", "--source", src, "--output", out, "--refs", ref,
                     "--json", str(json_out)]) == 0
        stdout = capsys.readouterr().out
        # byte-for-byte: the written report equals the printed one and the
        # metrics-module oracle's rendering
        from sentsimp.metrics import EvalInstance, evaluate_all

        instances = [
            EvalInstance("the big cat sat .", "the cat sat .", ("the cat sat .",)),
            EvalInstance("a dog ran far .", "a dog ran .", ("a dog ran .",)),
        ]
        golden = evaluate_all(instances).to_json()
        assert stdout == golden
        assert json_out.read_text() == golden

    def test_line_count_mismatch(self, tmp_path):
        src = _write(tmp_path, "src.txt", "a\nb\n")
        out = _write(tmp_path, "out.txt", "a\n")
        ref = _write(tmp_path, "ref.0", "a\nb\n")
        assert main(["evaluate", "--source", src, "--output", out, "--refs", ref]) == 1


class TestExtractTemplates:
    def test_table1_fixture(self, tmp_path):
        conllu = _write(tmp_path, "t.conllu", TABLE1_CONLLU)
        templates_out = tmp_path / "templates.txt"
        rules_out = tmp_path / "rules.txt"
        assert main(["extract-templates", "--conllu", conllu,
                     "--templates-out", str(templates_out),
                     "--rules-out", str(rules_out)]) == 0
        assert templates_out.read_text().strip() == TABLE1_TEMPLATE
        rules = rules_out.read_text().strip().splitlines()
        assert rules == ["Obj(amod, det, nmod)", "Punct()", "Root(obj, punct)"]

    def test_synchronous_and_ranked(self, tmp_path, synthetic_pairs):
        src_conllu, tgt_conllu = to_conllu_files(synthetic_pairs)
        c = _write(tmp_path, "c.conllu", src_conllu)
        s = _write(tmp_path, "s.conllu", tgt_conllu)
        sync_out = tmp_path / "sync.tsv"
        ranked_out = tmp_path / "ranked.txt"
        assert main(["extract-templates", "--conllu", c, "--simple-conllu", s,
                     "--synchronous-out", str(sync_out),
                     "--ranked-out", str(ranked_out)]) == 0
        assert "Root(conj, punct)\tRoot(punct)" in sync_out.read_text()
        assert "Root(conj, punct)" in ranked_out.read_text()

    def test_missing_file(self, tmp_path):
        assert main(["extract-templates", "--conllu", str(tmp_path / "no.conllu")]) == 1


class TestBuildLexicon:
    def test_outputs(self, tmp_path, synthetic_pairs):
        complex_text, simple_text = to_text_files(synthetic_pairs)
        c = _write(tmp_path, "c.txt", complex_text)
        s = _write(tmp_path, "s.txt", simple_text)
        list_out = tmp_path / "list.txt"
        dict_out = tmp_path / "dict.tsv"
        assert main(["build-lexicon", "--complex", c, "--simple", s,
                     "--list-out", str(list_out), "--dict-out", str(dict_out),
                     "--n", "6", "--threshold", "0.4", "--no-manual"]) == 0
        words = list_out.read_text().split()
        assert words[:3] == ["occurs", "purchases", "terminates"]
        assert "occurs\tis" in dict_out.read_text()


@pytest.fixture(scope="module")
def trained(tmp_path_factory, synthetic_pairs):
    tmp_path = tmp_path_factory.mktemp("cli-train")
    pairs = synthetic_pairs[:12]
    complex_text, simple_text = to_text_files(pairs)
    src_conllu, tgt_conllu = to_conllu_files(pairs)
    c = _write(tmp_path, "c.txt", complex_text)
    s = _write(tmp_path, "s.txt", simple_text)
    cc = _write(tmp_path, "c.conllu", src_conllu)
    sc = _write(tmp_path, "s.conllu", tgt_conllu)
    config = _write(tmp_path, "config.ini",
                    "hidden_dim = 32\nfeedforward_dim = 64\nheads = 2\n"
                    "layers = 1\nvocab_cap = 300\n")
    ckpt = tmp_path / "model.ckpt"
    log = tmp_path / "log.json"
    code = main(["train", "--complex", c, "--simple", s,
                 "--complex-conllu", cc, "--simple-conllu", sc,
                 "--out", str(ckpt), "--epochs", "40", "--seed", "3",
                 "--validate-every", "10", "--patience", "2",
                 "--config", config, "--log-json", str(log)])
    assert code == 0
    return tmp_path, ckpt, log


class TestTrainAndSimplify:
    def test_training_log(self, trained):
        _, _, log = trained
        entries = json.loads(Path(log).read_text())
        assert all("loss" in e for e in entries)

    def test_simplify_roundtrip(self, trained, tmp_path):
        base, ckpt, _ = trained
        inp = _write(tmp_path, "in.txt", "the cat occurs a arduous mat .\n")
        out = tmp_path / "out.txt"
        code = main(["simplify", "--checkpoint", str(ckpt), "--input", inp,
                     "--out", str(out), "--beam", "3"])
        assert code == 0
        assert out.read_text().strip()

    def test_empty_input_exit_1(self, trained, tmp_path, capsys):
        _, ckpt, _ = trained
        inp = _write(tmp_path, "empty.txt", "\n\n")
        assert main(["simplify", "--checkpoint", str(ckpt), "--input", inp]) == 1
        assert "empty.txt" in capsys.readouterr().err

    def test_markers_file(self, trained, tmp_path):
        base, ckpt, _ = trained
        inp = _write(tmp_path, "in.txt", "the cat occurs a mat .\n")
        markers = _write(tmp_path, "m.txt", "- - REPLACE - - -\n")
        out = tmp_path / "out.txt"
        assert main(["simplify", "--checkpoint", str(ckpt), "--input", inp,
                     "--markers", markers, "--out", str(out)]) == 0

    def test_misaligned_markers_exit_1(self, trained, tmp_path):
        _, ckpt, _ = trained
        inp = _write(tmp_path, "in.txt", "a b\n")
        markers = _write(tmp_path, "m.txt", "KEEP\n")
        assert main(["simplify", "--checkpoint", str(ckpt), "--input", inp,
                     "--markers", markers]) == 1


class TestUsageErrors:
    def test_unknown_flag_exit_1(self, capsys):
        assert main(["evaluate", "--nope"]) == 1

    def test_missing_subcommand_exit_1(self):
        assert main([]) == 1
