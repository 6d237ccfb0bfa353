import json

import numpy as np
import pytest

from affectnego.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from affectnego.cores import load_core
from affectnego.policy import DdpgAgent, TrainConfig, save_policy


@pytest.fixture()
def tiny_policy(tmp_path):
    path = tmp_path / "tiny.json"
    save_policy(DdpgAgent(TrainConfig(), np.random.default_rng(0)), str(path))
    return path


class TestBuildCore:
    def test_time_core(self, tmp_path):
        out = tmp_path / "patient.json"
        assert main(["build-core", "--kind", "time", "--flavor", "patient",
                     "--out", str(out)]) == EXIT_OK
        core = load_core(str(out))
        assert core.tau == 0.01

    def test_social_core(self, tmp_path):
        out = tmp_path / "exc.json"
        assert main(["build-core", "--kind", "social", "--flavor", "excitatory",
                     "--seed", "3", "--out", str(out)]) == EXIT_OK
        core = load_core(str(out))
        assert core.mode.value == "excitatory"


class TestSimulate:
    def test_report_to_file(self, tmp_path, tiny_policy):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text(f'episodes = 3\npolicy_snapshot = "{tiny_policy}"\n')
        out = tmp_path / "report.json"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        report = json.loads(out.read_text())
        assert report["metrics"]["episodes"] == 3

    def test_unknown_config_key_exit_2(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("episodez = 3\n")
        assert main(["simulate", "--config", str(cfg)]) == EXIT_CONFIG
        assert "episodez" in capsys.readouterr().err

    def test_missing_policy_exit_2(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("episodes = 2\n")
        assert main(["simulate", "--config", str(cfg)]) == EXIT_CONFIG

    def test_bad_snapshot_exit_3(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        assert main(["simulate", "--policy", str(bad)]) == EXIT_RUNTIME


class TestReplayMood:
    def test_study_with_conditions(self, tmp_path):
        out = tmp_path / "study.json"
        quant = tmp_path / "quantiles.csv"
        code = main(["replay-mood", "--seed", "3",
                     "--condition", "none/excitatory",
                     "--out", str(out), "--quantiles", str(quant)])
        assert code == EXIT_OK
        study = json.loads(out.read_text())
        assert [c["condition"] for c in study["conditions"]] == ["none/none", "none/excitatory"]
        assert quant.read_text().startswith("condition,dimension")


class TestAnalyze:
    def test_comparison(self, tmp_path, tiny_policy):
        reports = []
        for seed in (1, 2):
            cfg = tmp_path / f"cfg{seed}.toml"
            cfg.write_text(f'episodes = 4\nseed = {seed}\npolicy_snapshot = "{tiny_policy}"\n')
            out = tmp_path / f"report{seed}.json"
            assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
            reports.append(out)
        out = tmp_path / "cmp.json"
        assert main(["analyze", str(reports[0]), str(reports[1]), "--out", str(out)]) == EXIT_OK
        cmp = json.loads(out.read_text())
        assert "interactions" in cmp


class TestPretrainCommand:
    def test_short_run_with_curves(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("train_episodes = 5\nwarmup_transitions = 4000\n")
        out = tmp_path / "policy.json"
        curves = tmp_path / "curves.csv"
        code = main(["pretrain", "--config", str(cfg), "--out", str(out),
                     "--curves", str(curves), "--quiet"])
        assert code == EXIT_OK
        assert out.exists()
        lines = curves.read_text().strip().splitlines()
        assert lines[0] == "episode,return,interactions,accepted_share,status,noise_sigma"
        assert len(lines) == 6
