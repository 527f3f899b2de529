"""End-to-end CLI behavior over the bundled fixture corpus."""

import json
import shutil

from consentaudit.cli import main

EXPECTED_AUDIT_FILES = [
    "site_reports.csv",
    "corpus_report.csv",
    "pi_breakdown.csv",
    "region_deltas.csv",
    "banner_matrix.csv",
    "stats_table.csv",
    "audit_report.jsonl",
]


def run_audit(corpus_dir, out_dir, extra=()):
    return main(
        ["audit", "--trace-dir", str(corpus_dir), "--output-dir", str(out_dir), *extra]
    )


class TestAudit:
    def test_empty_directory_is_no_traces(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        status = run_audit(empty, tmp_path / "out")
        assert status != 0
        summary = json.loads(capsys.readouterr().err.strip())
        assert summary["error"] == "NoTraces"

    def test_fixture_corpus_writes_all_reports(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        assert run_audit(corpus_dir, out) == 0
        for name in EXPECTED_AUDIT_FILES:
            assert (out / name).exists(), name

    def test_outputs_byte_identical_across_runs(self, corpus_dir, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert run_audit(corpus_dir, first) == 0
        assert run_audit(corpus_dir, second) == 0
        for name in EXPECTED_AUDIT_FILES:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name

    def test_report_contains_outcome_legend(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        run_audit(corpus_dir, out)
        records = [
            json.loads(line)
            for line in (out / "audit_report.jsonl").read_text().splitlines()
        ]
        legend = {r["outcome"] for r in records if r["kind"] == "legend"}
        assert legend == {
            "compliant",
            "ignored_rejection",
            "undeclared",
            "wrong_category",
        }

    def test_malformed_file_recorded_but_run_continues(self, corpus_dir, tmp_path):
        mixed = tmp_path / "mixed"
        mixed.mkdir()
        for source in sorted(corpus_dir.glob("*.jsonl"))[:3]:
            shutil.copy(source, mixed / source.name)
        (mixed / "broken.jsonl").write_text("{not json\n")
        out = tmp_path / "out"
        assert run_audit(mixed, out) == 0
        records = [
            json.loads(line)
            for line in (out / "audit_report.jsonl").read_text().splitlines()
        ]
        errors = [r for r in records if r["kind"] == "error"]
        assert len(errors) == 1
        assert errors[0]["file"] == "broken.jsonl"

    def test_pi_filter_flag_changes_counts(self, corpus_dir, tmp_path):
        with_filter, without = tmp_path / "f", tmp_path / "n"
        run_audit(corpus_dir, with_filter)
        run_audit(corpus_dir, without, extra=["--no-pi-filter"])
        assert (with_filter / "corpus_report.csv").read_bytes() != (
            without / "corpus_report.csv"
        ).read_bytes()

    def test_config_file_with_flag_override(self, corpus_dir, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(
            json.dumps({"trace_dir": str(corpus_dir), "baseline_region": "US"})
        )
        out = tmp_path / "out"
        status = main(
            ["audit", "--config", str(config), "--output-dir", str(out),
             "--baseline-region", "EU"]
        )
        assert status == 0
        deltas = (out / "region_deltas.csv").read_text().splitlines()
        assert all(",EU," in line for line in deltas[1:])  # flag beat the file


class TestTrainButtons:
    def test_single_fold_rejected(self, labeled_pages_path, capsys):
        status = main(
            ["train-buttons", str(labeled_pages_path), "--folds", "1"]
        )
        assert status == 2
        assert "folds" in capsys.readouterr().err

    def test_train_prints_recall_table_and_hash(
        self, labeled_pages_path, tmp_path, capsys
    ):
        model_path = tmp_path / "model.json"
        status = main(
            [
                "train-buttons",
                str(labeled_pages_path),
                "--folds", "3",
                "--trees", "15",
                "--seed", "11",
                "--model-out", str(model_path),
            ]
        )
        assert status == 0
        output = capsys.readouterr().out
        assert "recall@1" in output and "recall@10" in output
        assert output.count("\n") >= 5  # header + folds + mean + hash lines
        assert model_path.exists()
        hash_line = [l for l in output.splitlines() if l.startswith("model_hash,")]
        assert len(hash_line) == 1

    def test_identical_seed_identical_hash(self, labeled_pages_path, tmp_path, capsys):
        hashes = []
        for name in ("m1.json", "m2.json"):
            main(
                [
                    "train-buttons",
                    str(labeled_pages_path),
                    "--folds", "2",
                    "--trees", "8",
                    "--seed", "3",
                    "--model-out", str(tmp_path / name),
                ]
            )
            out = capsys.readouterr().out
            hashes.append(
                next(l for l in out.splitlines() if l.startswith("model_hash,"))
            )
        assert hashes[0] == hashes[1]


class TestDiffRegions:
    def test_single_region_corpus_rejected(self, corpus_dir, tmp_path, capsys):
        single = tmp_path / "single"
        single.mkdir()
        for source in corpus_dir.glob("*__EU__*.jsonl"):
            shutil.copy(source, single / source.name)
        status = main(
            ["diff-regions", "--trace-dir", str(single),
             "--output-dir", str(tmp_path / "out")]
        )
        assert status != 0
        assert json.loads(capsys.readouterr().err)["error"] == "SingleRegion"

    def test_two_region_matrix_is_symmetric_csv(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        status = main(
            ["diff-regions", "--trace-dir", str(corpus_dir), "--output-dir", str(out)]
        )
        assert status == 0
        lines = (out / "banner_matrix.csv").read_text().splitlines()
        assert lines[0] == "region,EU,US"
        eu = lines[1].split(",")
        us = lines[2].split(",")
        assert eu[1] == us[2] == "0"
        assert eu[2] == us[1]

    def test_histograms_include_reject_all_presence(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        main(["diff-regions", "--trace-dir", str(corpus_dir), "--output-dir", str(out)])
        text = (out / "banner_histograms.csv").read_text()
        assert "reject_all_present" in text
        assert "consent_model" in text


class TestReport:
    def test_prints_summary(self, corpus_dir, tmp_path, capsys):
        out = tmp_path / "out"
        run_audit(corpus_dir, out)
        capsys.readouterr()
        status = main(["report", "--output-dir", str(out)])
        assert status == 0
        text = capsys.readouterr().out
        assert "legend" in text
        assert "EU" in text and "US" in text
