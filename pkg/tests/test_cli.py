import json

import numpy as np
import pytest

from amrkit.cli import run
from amrkit.graph import read_amr_file, write_amr_file
from amrkit.linearize import from_line, linearize, to_line
from amrkit.pipeline import (
    CorpusRecord,
    NoiseSpec,
    StubTranslator,
    apply_noise,
    read_corpus_jsonl,
    write_corpus_jsonl,
)
from amrkit.repair import repair
from amrkit.seqmodel import BOS, EOS, ToyCondModel
from amrkit.smatch import corpus_smatch

from .helpers import random_graph

WANT_BOY = "(w / want-01 :ARG0 (b / boy))\n"


@pytest.fixture
def amr_file(tmp_path):
    path = tmp_path / "g.amr"
    rng = np.random.RandomState(17)
    write_amr_file(str(path), [random_graph(rng, 5) for _ in range(4)])
    return path


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self, capsys):
        assert run(["frobnicate"]) == 1
        assert "error" in capsys.readouterr().err

    def test_no_subcommand_is_usage_error(self):
        assert run([]) == 1

    def test_missing_required_flag(self, tmp_path):
        assert run(["smatch", "--pred", "x.amr"]) == 1

    def test_omitted_seed_defaults_to_zero_and_is_echoed(self, amr_file, capsys):
        assert run(["smatch", "--pred", str(amr_file), "--gold", str(amr_file)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["seed"] == 0

    def test_data_error_is_exit_two(self, tmp_path, amr_file, capsys):
        other = tmp_path / "short.amr"
        other.write_text(WANT_BOY)
        assert run(["smatch", "--pred", str(amr_file), "--gold", str(other), "--seed", "0"]) == 2
        assert "error" in capsys.readouterr().err

    def test_malformed_input_is_exit_two(self, tmp_path):
        bad = tmp_path / "bad.amr"
        bad.write_text("(w / want-01 :ARG0 (b / boy\n")
        assert run(["parse", "--in", str(bad)]) == 2

    def test_missing_file_is_exit_two(self):
        assert run(["parse", "--in", "/nonexistent/x.amr"]) == 2


class TestSmatchCommand:
    def test_self_comparison_scores_one(self, amr_file, capsys):
        assert run(["smatch", "--pred", str(amr_file), "--gold", str(amr_file), "--seed", "0"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["f1"] == 1.0
        assert payload["n_records"] == 4
        assert payload["seed"] == 0

    def test_matches_library_call(self, amr_file, capsys):
        run(
            ["smatch", "--pred", str(amr_file), "--gold", str(amr_file), "--seed", "3",
             "--restarts", "2"]
        )
        payload = json.loads(capsys.readouterr().out)
        lib = corpus_smatch(str(amr_file), str(amr_file), restarts=2, seed=3)
        assert payload["precision"] == lib.precision
        assert payload["recall"] == lib.recall
        assert payload["f1"] == lib.f1

    def test_table_format_prints_seed_header(self, amr_file, capsys):
        run(["smatch", "--pred", str(amr_file), "--gold", str(amr_file), "--seed", "7",
             "--format", "table"])
        out = capsys.readouterr().out
        assert out.startswith("# seed: 7")

    def test_per_record_output(self, amr_file, tmp_path, capsys):
        per = tmp_path / "per.jsonl"
        run(["smatch", "--pred", str(amr_file), "--gold", str(amr_file), "--seed", "0",
             "--per-record", str(per)])
        lines = [json.loads(l) for l in per.read_text().splitlines()]
        assert len(lines) == 4 and all(l["f1"] == 1.0 for l in lines)


class TestReportCommand:
    def test_avg_columns(self, capsys):
        assert run(["report", "--scores", "73.1,75.9,75.4,61.9,83.9", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["AVG"] == 74.0
        assert payload["AVG_X"] == 71.6

    def test_table_layout(self, capsys):
        run(["report", "--scores", "73.1,75.9,75.4,61.9,83.9"])
        out = capsys.readouterr().out
        header, row = out.splitlines()
        assert header.split() == ["row", "DE", "ES", "IT", "ZH", "EN", "AVG_X", "AVG"]
        assert row.split()[-2:] == ["71.6", "74.0"]

    def test_wrong_arity_is_data_error(self, capsys):
        assert run(["report", "--scores", "1,2,3"]) == 2


class TestRoundTripCommands:
    def test_linearize_delinearize(self, amr_file, tmp_path):
        lin = tmp_path / "lin.txt"
        back = tmp_path / "back.amr"
        assert run(["linearize", "--in", str(amr_file), "--out", str(lin)]) == 0
        assert run(["delinearize", "--in", str(lin), "--out", str(back)]) == 0
        orig = read_amr_file(str(amr_file))
        rebuilt = read_amr_file(str(back))
        assert [to_line(linearize(g)) for g in orig] == [to_line(linearize(g)) for g in rebuilt]

    def test_linearize_matches_library(self, amr_file, tmp_path):
        lin = tmp_path / "lin.txt"
        run(["linearize", "--in", str(amr_file), "--out", str(lin)])
        expected = [to_line(linearize(g)) for g in read_amr_file(str(amr_file))]
        assert lin.read_text().splitlines() == expected

    def test_parse_serialize(self, amr_file, tmp_path):
        parsed = tmp_path / "parsed.jsonl"
        back = tmp_path / "back.amr"
        assert run(["parse", "--in", str(amr_file), "--out", str(parsed)]) == 0
        assert run(["serialize", "--in", str(parsed), "--out", str(back)]) == 0
        a = read_amr_file(str(amr_file))
        b = read_amr_file(str(back))
        assert [to_line(linearize(g)) for g in a] == [to_line(linearize(g)) for g in b]


class TestRepairCommand:
    def test_fix_and_report(self, tmp_path):
        preds = tmp_path / "preds.txt"
        preds.write_text("( <V0> want-01 :ARG0 ( <V1> boy\n( <V0> cat )\n")
        fixed = tmp_path / "fixed.txt"
        report = tmp_path / "report.json"
        assert run(["repair", "--in", str(preds), "--out", str(fixed),
                    "--report", str(report)]) == 0
        lines = fixed.read_text().splitlines()
        assert lines[0] == "( <V0> want-01 :ARG0 ( <V1> boy ) )"
        assert lines[1] == "( <V0> cat )"
        payload = json.loads(report.read_text())
        assert payload["total"]["parens_added"] == 2
        assert payload["per_line"][1]["parens_added"] == 0

    def test_matches_library(self, tmp_path):
        line = "( <V5> a :ARG0 :ARG1 ( <V2> b )"
        preds = tmp_path / "p.txt"
        preds.write_text(line + "\n")
        out = tmp_path / "f.txt"
        run(["repair", "--in", str(preds), "--out", str(out)])
        assert out.read_text().splitlines()[0] == to_line(repair(from_line(line)))


class TestNoiseCommand:
    def test_byte_deterministic(self, tmp_path, capsys):
        src = tmp_path / "s.txt"
        src.write_text("one two three four five\nsix seven eight nine ten\n")
        out1, out2 = tmp_path / "n1.txt", tmp_path / "n2.txt"
        argv = ["noise", "--in", str(src), "--kind", "delete:40", "--seed", "5"]
        assert run(argv + ["--out", str(out1)]) == 0
        assert run(argv + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        assert "# seed: 5" in capsys.readouterr().out

    def test_matches_library(self, tmp_path):
        src = tmp_path / "s.txt"
        src.write_text("alpha beta gamma delta\n")
        out = tmp_path / "n.txt"
        run(["noise", "--in", str(src), "--kind", "delete:50", "--seed", "2", "--out", str(out)])
        spec = NoiseSpec("word_delete", rate=0.5, seed=2)
        assert out.read_text().splitlines()[0] == apply_noise(spec, "alpha beta gamma delta")

    def test_mt_kind_uses_stub(self, tmp_path):
        src = tmp_path / "s.txt"
        src.write_text("hello world\n")
        out = tmp_path / "n.txt"
        assert run(["noise", "--in", str(src), "--kind", "mt", "--lang", "ES",
                    "--seed", "0", "--out", str(out)]) == 0
        assert "~es" in out.read_text()


class TestPipelineCommands:
    def _toy_teacher(self, tmp_path):
        vocab = (BOS, EOS, "(", ")", "<V0>", "<V1>", ":ARG0", "want-01", "boy",
                 "amr-unknown", "amr-empty")
        teacher = ToyCondModel(vocab, order=2, alpha=0.1)
        for _ in range(6):
            teacher.observe(["the", "boy"], ["(", "<V0>", "boy", ")", EOS])
            teacher.observe(
                ["wants"], ["(", "<V0>", "want-01", ":ARG0", "(", "<V1>", "boy", ")", ")", EOS]
            )
        path = tmp_path / "teacher.json"
        teacher.save(str(path))
        return path

    def test_distill_writes_valid_records(self, tmp_path, capsys):
        teacher = self._toy_teacher(tmp_path)
        inputs = tmp_path / "en.txt"
        inputs.write_text("the boy\nwants\nthe boy wants\n")
        out = tmp_path / "kd.jsonl"
        assert run(["distill", "--teacher", str(teacher), "--inputs", str(inputs),
                    "--noise", "delete:20", "--beam", "5", "--seed", "1",
                    "--out", str(out)]) == 0
        assert "# seed: 1" in capsys.readouterr().out
        records = read_corpus_jsonl(str(out))
        assert len(records) == 3
        assert all(r.provenance == "seq-kd" for r in records)

    def test_distill_byte_deterministic(self, tmp_path):
        teacher = self._toy_teacher(tmp_path)
        inputs = tmp_path / "en.txt"
        inputs.write_text("the boy\nwants\n")
        out1, out2 = tmp_path / "kd1.jsonl", tmp_path / "kd2.jsonl"
        argv = ["distill", "--teacher", str(teacher), "--inputs", str(inputs),
                "--noise", "delete:50", "--beam", "3", "--seed", "4"]
        assert run(argv + ["--out", str(out1)]) == 0
        assert run(argv + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_filter_vocab_stats(self, tmp_path, capsys):
        tr = StubTranslator(corrupt_pct=0)
        records = [
            CorpusRecord(
                f"r{i}",
                "DE",
                "train",
                tr.translate(f"sentence number {i}", "EN", "DE"),
                tgt=("(", "<V0>", "want-01", ":ARG0", "(", "<V1>", "boy", ")", ")"),
                provenance="silver-mt",
                meta={"src_en": f"sentence number {i}"},
            )
            for i in range(6)
        ]
        corpus = tmp_path / "c.jsonl"
        write_corpus_jsonl(str(corpus), records)

        kept = tmp_path / "kept.jsonl"
        assert run(["filter", "--in", str(corpus), "--kept", str(kept),
                    "--threshold", "0.9"]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["kept"] == 6

        vocab_out = tmp_path / "vocab.txt"
        assert run(["vocab", "--in", str(kept), "--min-count", "5",
                    "--out", str(vocab_out)]) == 0
        assert set(vocab_out.read_text().split()) == {":ARG0", "want-01"}

        assert run(["stats", "--in", str(kept), "--format", "json"]) == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats["DE"]["train"] == 6
