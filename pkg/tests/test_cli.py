import json
import os
from pathlib import Path

from asrf.cli import main

FIXTURES = Path(__file__).parent / "fixtures" / "corpus"
REFS = str(FIXTURES / "references.jsonl")
HYPS = str(FIXTURES / "hypotheses.jsonl")
VOCAB = str(FIXTURES / "train_vocab.txt")


def read_jsonl(path):
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        rec = json.loads(line)
        if "asrf_config" not in rec:
            records.append(rec)
    return records


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["score", "--definitely-not-a-flag"]) == 1

    def test_unknown_command_is_usage_error(self):
        assert main(["frobnicate"]) == 1

    def test_data_error_is_2(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"utterance_id": "u1"}\n', encoding="utf-8")
        out = tmp_path / "out.jsonl"
        assert main(["score", "--refs", str(bad), "--hyps", HYPS,
                     "--out", str(out)]) == 2

    def test_success_is_0(self, tmp_path):
        out = tmp_path / "scores.jsonl"
        assert main(["score", "--refs", REFS, "--hyps", HYPS, "--out", str(out)]) == 0


class TestScoreCommand:
    def test_flawed_ground_truth_wer(self, tmp_path):
        out = tmp_path / "scores.jsonl"
        assert main(["score", "--refs", REFS, "--hyps", HYPS, "--out", str(out)]) == 0
        rows = {(r["utterance_id"], r["model_id"]): r for r in read_jsonl(out)}
        row = rows[("u001", "alpha")]
        assert (row["S"], row["D"], row["I"], row["N"]) == (1, 0, 0, 9)
        assert abs(row["wer"] - 1 / 9) < 1e-6

    def test_spacing_only_marked(self, tmp_path):
        out = tmp_path / "scores.jsonl"
        main(["score", "--refs", REFS, "--hyps", HYPS, "--out", str(out)])
        rows = {(r["utterance_id"], r["model_id"]): r for r in read_jsonl(out)}
        assert rows[("u018", "alpha")]["spacing_only"] is True
        assert rows[("u018", "alpha")]["wer"] > 0

    def test_sorted_output(self, tmp_path):
        out = tmp_path / "scores.jsonl"
        main(["score", "--refs", REFS, "--hyps", HYPS, "--out", str(out)])
        keys = [(r["utterance_id"], r["model_id"]) for r in read_jsonl(out)]
        assert keys == sorted(keys)

    def test_no_temp_residue(self, tmp_path):
        out = tmp_path / "scores.jsonl"
        main(["score", "--refs", REFS, "--hyps", HYPS, "--out", str(out)])
        assert sorted(p.name for p in tmp_path.iterdir()) == ["scores.jsonl"]


class TestErrorsets:
    def test_intersection_members(self, tmp_path):
        scores = tmp_path / "scores.jsonl"
        main(["score", "--refs", REFS, "--hyps", HYPS, "--out", str(scores)])
        out = tmp_path / "sets.json"
        assert main(["errorsets", "--scores", str(scores), "--mode", "intersection",
                     "--out", str(out)]) == 0
        payload = json.loads(out.read_text(encoding="utf-8"))
        [entry] = payload["sets"]
        assert entry["model_id"] == "∩all"
        assert entry["members"] == ["u001"]

    def test_difference_excludes_shared(self, tmp_path):
        scores = tmp_path / "scores.jsonl"
        main(["score", "--refs", REFS, "--hyps", HYPS, "--out", str(scores)])
        out = tmp_path / "sets.json"
        assert main(["errorsets", "--scores", str(scores), "--mode", "difference",
                     "--model", "gamma", "--out", str(out)]) == 0
        [entry] = json.loads(out.read_text(encoding="utf-8"))["sets"]
        assert entry["model_id"] == "Δgamma"
        # u005/u006/u020 are gamma-only; u001 and u007 are shared.
        assert entry["members"] == ["u005", "u006", "u020"]
        assert "u001" not in entry["members"]

    def test_spacing_only_never_in_sets(self, tmp_path):
        scores = tmp_path / "scores.jsonl"
        main(["score", "--refs", REFS, "--hyps", HYPS, "--out", str(scores)])
        out = tmp_path / "sets.json"
        main(["errorsets", "--scores", str(scores), "--out", str(out)])
        for entry in json.loads(out.read_text(encoding="utf-8"))["sets"]:
            assert "u018" not in entry["members"]


class TestClassifyCommand:
    def test_labels_and_patterns(self, tmp_path):
        labels = tmp_path / "labels.jsonl"
        patterns = tmp_path / "patterns.jsonl"
        assert main(["classify", "--refs", REFS, "--hyps", HYPS,
                     "--out", str(labels), "--patterns-out", str(patterns)]) == 0
        rows = read_jsonl(labels)
        by_key = {(r["utterance_id"], r["model_id"]): r for r in rows}
        table_vi = by_key[("u001", "alpha")]
        assert table_vi["category"] == 6
        assert table_vi["needs_human"] is True
        assert by_key[("u005", "gamma")]["category"] == 5
        assert by_key[("u006", "gamma")]["category"] == 2
        assert by_key[("u018", "alpha")]["category"] == 1
        mined = read_jsonl(patterns)
        pairs = {(p["ref_word"], p["hyp_word"]): p for p in mined}
        assert pairs[("paragraph", "ziffer")]["occurrence_count"] == 6
        assert pairs[("paragraph", "ziffer")]["distinct_utterances"] == 4
        assert pairs[("weil", "denn")]["synonym"] is True

    def test_year_style_label(self, tmp_path):
        labels = tmp_path / "labels.jsonl"
        main(["classify", "--refs", REFS, "--hyps", HYPS, "--out", str(labels)])
        rows = read_jsonl(labels)
        year = [r for r in rows if r["utterance_id"] == "u002"]
        assert all(r["category"] == 1 for r in year)
        assert all("year-style" in r["subtags"] for r in year)


class TestVocabCommand:
    def test_coverage_report(self, tmp_path):
        out = tmp_path / "vocab.json"
        assert main(["vocab", "--refs", REFS, "--hyps", HYPS,
                     "--train-vocab", VOCAB, "--out", str(out)]) == 0
        payload = json.loads(out.read_text(encoding="utf-8"))
        alpha = payload["models"]["alpha"]
        assert alpha["unseen_word_types"] == 4
        # beta gets every unseen type right except none; all matched.
        beta = payload["models"]["beta"]
        assert 0.0 <= beta["well_generalized_fraction"] <= 1.0


class TestReportCommand:
    def test_tables_written(self, tmp_path):
        scores = tmp_path / "scores.jsonl"
        labels = tmp_path / "labels.jsonl"
        main(["score", "--refs", REFS, "--hyps", HYPS, "--out", str(scores)])
        main(["classify", "--refs", REFS, "--hyps", HYPS, "--out", str(labels)])
        out_dir = tmp_path / "report"
        assert main(["report", "--refs", REFS, "--hyps", HYPS,
                     "--scores", str(scores), "--labels", str(labels),
                     "--format", "md", "--out", str(out_dir)]) == 0
        names = sorted(p.name for p in out_dir.iterdir())
        assert names == ["adjusted.md", "proportions.md", "rtf.md", "wer.md"]
        wer_md = (out_dir / "wer.md").read_text(encoding="utf-8")
        assert "| Average |" in wer_md and "| Median |" in wer_md
        adjusted_md = (out_dir / "adjusted.md").read_text(encoding="utf-8")
        assert "| alpha |" in adjusted_md

    def test_csv_format(self, tmp_path):
        scores = tmp_path / "scores.jsonl"
        main(["score", "--refs", REFS, "--hyps", HYPS, "--out", str(scores)])
        out_dir = tmp_path / "report"
        assert main(["report", "--refs", REFS, "--hyps", HYPS,
                     "--scores", str(scores), "--format", "csv",
                     "--out", str(out_dir)]) == 0
        assert (out_dir / "wer.csv").exists()


class TestIngestValidate:
    def test_warnings_to_stdout(self, tmp_path, capsys):
        refs = tmp_path / "refs.jsonl"
        refs.write_text(json.dumps({
            "utterance_id": "u1", "dataset_id": "d", "reference": "am 3. mai",
        }) + "\n", encoding="utf-8")
        assert main(["ingest", "validate", "--refs", str(refs)]) == 0
        out = capsys.readouterr().out
        assert "digit-in-reference" in out


class TestDeterminism:
    def test_two_pipeline_runs_byte_identical(self, tmp_path):
        outputs = {}
        for run in ("one", "two"):
            base = tmp_path / run
            base.mkdir()
            scores = base / "scores.jsonl"
            labels = base / "labels.jsonl"
            patterns = base / "patterns.jsonl"
            sets_out = base / "sets.json"
            report_dir = base / "report"
            assert main(["score", "--refs", REFS, "--hyps", HYPS,
                         "--out", str(scores)]) == 0
            assert main(["classify", "--refs", REFS, "--hyps", HYPS,
                         "--out", str(labels), "--patterns-out", str(patterns)]) == 0
            assert main(["errorsets", "--scores", str(scores),
                         "--mode", "intersection", "--out", str(sets_out)]) == 0
            assert main(["report", "--refs", REFS, "--hyps", HYPS,
                         "--scores", str(scores), "--labels", str(labels),
                         "--format", "csv", "--out", str(report_dir)]) == 0
            blobs = {}
            for path in sorted(base.rglob("*")):
                if path.is_file():
                    blobs[str(path.relative_to(base))] = path.read_bytes()
            outputs[run] = blobs
        assert outputs["one"] == outputs["two"]
