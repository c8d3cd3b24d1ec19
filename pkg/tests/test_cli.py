import json
from pathlib import Path

import pytest

from ctcfusion.cli import main
from ctcfusion.toylang import make_sentences


@pytest.fixture(scope="module")
def sentences():
    return make_sentences(80, seed=3)


@pytest.fixture()
def manifest(tmp_path, sentences):
    path = tmp_path / "all.tsv"
    lines = [
        f"utt{i:03d}\tspk{i % 4}\t{' '.join(s)}\n" for i, s in enumerate(sentences)
    ]
    path.write_text("".join(lines), encoding="utf-8")
    return path


def run(*argv):
    return main([str(a) for a in argv])


class TestPrepare:
    def test_splits_and_vocab(self, tmp_path, manifest, capsys):
        assert run("prepare", manifest, "--out-dir", tmp_path / "data") == 0
        out = tmp_path / "data"
        counts = {
            name: len((out / f"{name}.tsv").read_text().splitlines())
            for name in ("train", "val", "test")
        }
        assert sum(counts.values()) == 80
        assert counts["test"] == 8
        vocab = (out / "vocab.txt").read_text().splitlines()
        assert vocab[-1] == "<blank>"
        assert "|" in vocab
        assert (out / "vocab.txt.provenance.json").exists()

    def test_deterministic_given_seed(self, tmp_path, manifest):
        for d in ("a", "b"):
            run("prepare", manifest, "--out-dir", tmp_path / d, "--seed", 5)
        assert (tmp_path / "a/test.tsv").read_text() == (
            tmp_path / "b/test.tsv"
        ).read_text()

    def test_missing_manifest_is_usage_error(self, tmp_path, capsys):
        assert run("prepare", tmp_path / "nope.tsv", "--out-dir", tmp_path) == 2
        assert "not found" in capsys.readouterr().err

    def test_malformed_manifest(self, tmp_path, capsys):
        bad = tmp_path / "bad.tsv"
        bad.write_text("only-one-column\n")
        assert run("prepare", bad, "--out-dir", tmp_path / "o") == 2


class TestTrainLm:
    def test_writes_arpa(self, tmp_path, sentences, capsys):
        corpus_file = tmp_path / "corpus.txt"
        corpus_file.write_text("\n".join(" ".join(s) for s in sentences) + "\n")
        arpa = tmp_path / "lm.arpa"
        assert run("train-lm", corpus_file, "--order", 3, "--out", arpa) == 0
        text = arpa.read_text()
        assert text.startswith("\\data\\")
        assert "\\3-grams:" in text

    def test_source_fraction(self, tmp_path, sentences):
        corpus_file = tmp_path / "corpus.txt"
        corpus_file.write_text("\n".join(" ".join(s) for s in sentences) + "\n")
        arpa = tmp_path / "lm.arpa"
        assert run("train-lm", f"{corpus_file}:0.5", "--order", 2, "--out", arpa) == 0
        prov = json.loads((tmp_path / "lm.arpa.provenance.json").read_text())
        assert prov["sentences"] == 40

    def test_order_out_of_range(self, tmp_path, capsys):
        corpus_file = tmp_path / "c.txt"
        corpus_file.write_text("a b\n")
        with pytest.raises(SystemExit) as exc:
            run("train-lm", corpus_file, "--order", 7, "--out", tmp_path / "x")
        assert exc.value.code == 2

    def test_bad_fraction(self, tmp_path, capsys):
        corpus_file = tmp_path / "c.txt"
        corpus_file.write_text("a b\n")
        assert (
            run("train-lm", f"{corpus_file}:lots", "--order", 2, "--out", tmp_path / "x")
            == 2
        )


def full_pipeline(tmp_path, manifest, order=3, decode_extra=()):
    """prepare -> train-lm -> synth -> decode -> eval; returns summary dict."""
    data = tmp_path / "data"
    assert run("prepare", manifest, "--out-dir", data, "--seed", 1) == 0
    train_text = tmp_path / "lm_corpus.txt"
    utts = (data / "train.tsv").read_text().splitlines()
    train_text.write_text("".join(u.split("\t")[2] + "\n" for u in utts))
    arpa = tmp_path / "lm.arpa"
    assert run("train-lm", train_text, "--order", order, "--out", arpa) == 0

    emit_dir = tmp_path / "emit"
    assert (
        run(
            "synth",
            data / "test.tsv",
            "--vocab",
            data / "vocab.txt",
            "--out-dir",
            emit_dir,
            "--noise-epsilon",
            0.3,
            "--frames-per-symbol",
            2,
            "--seed",
            42,
        )
        == 0
    )
    emits = sorted(emit_dir.glob("*.emit"))
    assert len(emits) == 8

    hyp = tmp_path / "hyp.tsv"
    assert (
        run("decode", *emits, "--out", hyp, "--lm", arpa, *decode_extra) == 0
    )
    prefix = tmp_path / "scores"
    assert run("eval", "--hyp", hyp, "--ref", data / "test.tsv", "--out-prefix", prefix) == 0
    return json.loads((tmp_path / "scores.summary.json").read_text())


class TestPipeline:
    def test_end_to_end(self, tmp_path, manifest):
        summary = full_pipeline(tmp_path, manifest)
        assert summary["utterances"] == 8
        assert 0.0 <= summary["wer_percent"] <= 100.0
        detail = (tmp_path / "scores.detail.tsv").read_text().splitlines()
        assert len(detail) == 8

    def test_greedy_flag(self, tmp_path, manifest):
        summary = full_pipeline(tmp_path, manifest, decode_extra=("--greedy",))
        assert summary["utterances"] == 8

    def test_decode_deterministic(self, tmp_path, manifest):
        a = full_pipeline(tmp_path / "a", manifest)
        b = full_pipeline(tmp_path / "b", manifest)
        assert (tmp_path / "a/hyp.tsv").read_text() == (tmp_path / "b/hyp.tsv").read_text()
        assert a == b


class TestDecodeOptions:
    def setup_emissions(self, tmp_path, manifest):
        data = tmp_path / "data"
        run("prepare", manifest, "--out-dir", data, "--seed", 1)
        emit_dir = tmp_path / "emit"
        run(
            "synth", data / "test.tsv", "--vocab", data / "vocab.txt",
            "--out-dir", emit_dir, "--seed", 0,
        )
        return sorted(emit_dir.glob("*.emit"))

    def test_nbest_output(self, tmp_path, manifest):
        emits = self.setup_emissions(tmp_path, manifest)
        nbest = tmp_path / "nbest.json"
        assert (
            run(
                "decode", emits[0], "--out", tmp_path / "h.tsv",
                "--nbest", 3, "--nbest-out", nbest,
            )
            == 0
        )
        data = json.loads(nbest.read_text())
        (lists,) = data.values()
        assert 1 <= len(lists) <= 3
        assert set(lists[0]) == {"text", "score"}

    def test_missing_emission_file(self, tmp_path, capsys):
        assert run("decode", tmp_path / "no.emit", "--out", tmp_path / "h.tsv") == 2

    def test_missing_lm(self, tmp_path, manifest, capsys):
        emits = self.setup_emissions(tmp_path, manifest)
        assert (
            run("decode", emits[0], "--out", tmp_path / "h.tsv", "--lm", tmp_path / "no.arpa")
            == 2
        )


class TestEvalErrors:
    def test_unknown_utterance(self, tmp_path, manifest, capsys):
        hyp = tmp_path / "hyp.tsv"
        hyp.write_text("ghost\thello\n")
        assert (
            run("eval", "--hyp", hyp, "--ref", manifest, "--out-prefix", tmp_path / "s")
            == 2
        )
        assert "no reference" in capsys.readouterr().err

    def test_empty_hyp_file(self, tmp_path, manifest, capsys):
        hyp = tmp_path / "hyp.tsv"
        hyp.write_text("")
        assert (
            run("eval", "--hyp", hyp, "--ref", manifest, "--out-prefix", tmp_path / "s")
            == 2
        )


class TestReport:
    def test_renders_grid(self, tmp_path, capsys):
        cells = tmp_path / "cells.csv"
        cells.write_text(
            "model,lm,dataset,wer\n"
            "m1,none,d1,10.0\n"
            "m1,none,d2,20.0\n"
            "m1,2-gram,d1,5.0\n"
            "m1,2-gram,d2,7.0\n"
        )
        assert run("report", cells, "--out-prefix", tmp_path / "rep") == 0
        text = (tmp_path / "rep.txt").read_text()
        assert "15.00" in text and "6.00" in text
        assert (tmp_path / "rep.csv").read_text().startswith("model,lm,dataset,wer")

    def test_bad_header(self, tmp_path, capsys):
        cells = tmp_path / "cells.csv"
        cells.write_text("a,b\n1,2\n")
        assert run("report", cells) == 2


class TestConfig:
    def test_config_file_supplies_flags(self, tmp_path, manifest):
        cfg = tmp_path / "prep.cfg"
        cfg.write_text("# prepare settings\nout-dir = {}\nseed = 9\nby-speaker = false\n".format(tmp_path / "out"))
        assert run("prepare", manifest, "--config", cfg) == 0
        prov = json.loads((tmp_path / "out/vocab.txt.provenance.json").read_text())
        assert prov["arguments"]["seed"] == 9

    def test_explicit_flag_wins(self, tmp_path, manifest):
        cfg = tmp_path / "prep.cfg"
        cfg.write_text(f"out-dir = {tmp_path / 'cfg_out'}\nseed = 9\n")
        assert run("prepare", manifest, "--config", cfg, "--seed", 2) == 0
        prov = json.loads((tmp_path / "cfg_out/vocab.txt.provenance.json").read_text())
        assert prov["arguments"]["seed"] == 2

    def test_missing_config(self, tmp_path, manifest, capsys):
        assert run("prepare", manifest, "--config", tmp_path / "no.cfg") == 2

    def test_malformed_config(self, tmp_path, manifest, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("no equals sign here\n")
        assert run("prepare", manifest, "--config", cfg) == 2
