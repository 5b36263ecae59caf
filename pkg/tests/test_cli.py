from __future__ import annotations

import json
import subprocess
import sys

import pytest

from urban_affect import cli


def run_main(argv):
    return cli.main(argv)


@pytest.fixture(scope="module")
def scenario_config(small_dir):
    return str(small_dir / "config.json")


@pytest.fixture(scope="module")
def run_dir(small_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("run_out")
    code = run_main(
        ["run", "--config", str(small_dir / "config.json"), "--output-dir", str(out)]
    )
    assert code == 0
    return out


class TestRunCommand:
    def test_output_inventory(self, run_dir):
        rasters = run_dir / "rasters"
        score_csvs = sorted(p.name for p in rasters.glob("score_*.csv"))
        assert score_csvs == [
            "score_opinion_2016.csv",
            "score_opinion_2022.csv",
            "score_perception_2016.csv",
            "score_perception_2022.csv",
        ]
        assert sorted(p.name for p in rasters.glob("trend_*.csv")) == [
            "trend_opinion.csv",
            "trend_perception.csv",
        ]
        assert (rasters / "mismatch.csv").exists()
        assert (run_dir / "regressions.csv").exists()
        assert sorted(p.name for p in run_dir.glob("wordfreq_*.csv")) == [
            "wordfreq_2016.csv",
            "wordfreq_2022.csv",
        ]
        # one image per raster: 4 score + 2 trend + 1 mismatch
        assert len(list(rasters.glob("*.ppm"))) == 7
        assert (run_dir / "manifest.json").exists()
        assert (run_dir / "ingest_report.json").exists()

    def test_manifest_lists_every_output_with_digest(self, run_dir):
        manifest = json.loads((run_dir / "manifest.json").read_text())
        on_disk = {
            str(p.relative_to(run_dir))
            for p in run_dir.rglob("*")
            if p.is_file() and p.name != "manifest.json"
        }
        assert set(manifest["outputs"]) == on_disk
        import hashlib

        for rel, digest in manifest["outputs"].items():
            assert hashlib.sha256((run_dir / rel).read_bytes()).hexdigest() == digest

    def test_ppm_images_have_valid_headers(self, run_dir):
        for ppm in (run_dir / "rasters").glob("*.ppm"):
            data = ppm.read_bytes()
            assert data.startswith(b"P6\n")
            dims = data.split(b"\n", 3)
            width, height = map(int, dims[1].split())
            assert len(dims[3]) == width * height * 3

    def test_wordfreq_contains_planted_vocabulary(self, run_dir):
        text = (run_dir / "wordfreq_2016.csv").read_text()
        assert text.startswith("rank,token,count\n")
        assert len(text.splitlines()) > 3


class TestConfigErrors:
    def test_missing_zoning_path_names_stage(self, small_dir, tmp_path, capsys):
        config = json.loads((small_dir / "config.json").read_text())
        config["zoning_path"] = "nonexistent.geojson"
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(config))
        code = run_main(["run", "--config", str(bad), "--output-dir", str(tmp_path / "o")])
        assert code != 0
        err = capsys.readouterr().err
        assert "zoning" in err

    def test_missing_config_key_fails(self, small_dir, tmp_path, capsys):
        config = json.loads((small_dir / "config.json").read_text())
        del config["zoning_path"]
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(config))
        code = run_main(["run", "--config", str(bad), "--output-dir", str(tmp_path / "o")])
        assert code != 0
        assert "zoning" in capsys.readouterr().err

    def test_identical_epochs_rejected(self, small_dir, tmp_path, capsys):
        config = json.loads((small_dir / "config.json").read_text())
        config["epochs"] = {"early": 2016, "late": 2016}
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(config))
        assert run_main(["run", "--config", str(bad), "--output-dir", str(tmp_path / "o")]) != 0
        assert "distinct" in capsys.readouterr().err


class TestSubcommands:
    def test_ingest_stats(self, scenario_config, capsys):
        assert run_main(["ingest-stats", "--config", scenario_config]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["perception"]["rejected"] == 0
        assert payload["perception_stats"]["bbox_coverage"] == 1.0

    def test_score_text(self, scenario_config, capsys):
        from urban_affect.synth import POS_WORDS

        text = POS_WORDS[0] * 3
        assert run_main(["score-text", "--config", scenario_config, "--text", text]) == 0
        out = capsys.readouterr().out
        score = float(out.split("\t")[0])
        assert 5.0 < score <= 10.0

    def test_regress_subcommand(self, scenario_config, tmp_path, capsys):
        code = run_main(
            ["regress", "--config", scenario_config, "--output-dir", str(tmp_path)]
        )
        assert code == 0
        assert (tmp_path / "regressions.csv").exists()
        assert "Special: building" in capsys.readouterr().out

    def test_mismatch_subcommand(self, scenario_config, tmp_path):
        code = run_main(
            ["mismatch", "--config", scenario_config, "--output-dir", str(tmp_path)]
        )
        assert code == 0
        assert (tmp_path / "mismatch.csv").exists()
        assert (tmp_path / "mismatch.ppm").exists()

    def test_wordfreq_subcommand(self, scenario_config, tmp_path):
        code = run_main(
            [
                "wordfreq",
                "--config",
                scenario_config,
                "--output-dir",
                str(tmp_path),
                "--epoch",
                "2016",
            ]
        )
        assert code == 0
        assert (tmp_path / "wordfreq_2016.csv").exists()

    def test_synth_subcommand(self, tmp_path):
        out = tmp_path / "scen"
        assert run_main(["synth", "--out", str(out), "--seed", "3"]) == 0
        for name in (
            "perception.jsonl",
            "opinion.jsonl",
            "zoning.geojson",
            "lexicon.tsv",
            "corpus_pos.txt",
            "corpus_neg.txt",
            "config.json",
            "answer_key.json",
        ):
            assert (out / name).exists(), name

    def test_env_var_overrides_output_dir(self, scenario_config, tmp_path, monkeypatch):
        target = tmp_path / "env_out"
        monkeypatch.setenv(cli.ENV_OUTDIR, str(target))
        assert run_main(["wordfreq", "--config", scenario_config]) == 0
        assert (target / "wordfreq_2016.csv").exists()


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "urban_affect.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "urban-affect" in proc.stdout
