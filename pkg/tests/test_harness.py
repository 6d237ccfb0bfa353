import json

import numpy as np
import pytest

from affectnego.affect import Conditioning, PersonalityConfig, TimePerception
from affectnego.config import ConfigError, HarnessConfig
from affectnego.harness import (
    compare_reports,
    dump_report,
    replay_mood_study,
    run_condition,
    run_experiment,
    standard_personalities,
    study_quantiles_csv,
)
from affectnego.policy import DdpgAgent, TrainConfig, save_policy
from affectnego.ultimatum import Decision, ScriptedRespondent


@pytest.fixture(scope="module")
def tiny_agent():
    # an untrained agent is enough for harness plumbing tests
    return DdpgAgent(TrainConfig(), np.random.default_rng(0))


class TestRunCondition:
    def test_always_accept_forced_outcome(self, tiny_agent):
        cfg = HarnessConfig(episodes=20)
        out = run_condition(cfg, tiny_agent, PersonalityConfig(),
                            respondent_factory=lambda: ScriptedRespondent(Decision.ACCEPT))
        m = out.metrics()
        assert m["success_rate"] == 1.0
        assert m["mean_interactions"] == 1.0
        assert m["mean_accepted_offer"] == m["mean_first_offer"]

    def test_always_reject_aborts(self, tiny_agent):
        cfg = HarnessConfig(episodes=5)
        out = run_condition(cfg, tiny_agent, PersonalityConfig(),
                            respondent_factory=lambda: ScriptedRespondent(Decision.REJECT))
        m = out.metrics()
        assert m["success_rate"] == 0.0
        assert m["mean_interactions"] == 20.0
        assert m["mean_accepted_offer"] is None
        assert m["mean_final_offer_if_rejected"] is not None

    def test_raw_arrays_lengths(self, tiny_agent):
        cfg = HarnessConfig(episodes=7)
        out = run_condition(cfg, tiny_agent, PersonalityConfig())
        raw = out.raw_arrays()
        assert all(len(v) == 7 for v in raw.values())


class TestRunExperiment:
    def test_missing_snapshot_is_config_error(self):
        with pytest.raises(ConfigError):
            run_experiment(HarnessConfig(episodes=2))

    def test_report_shape_and_determinism(self, tiny_agent, tmp_path):
        path = tmp_path / "policy.json"
        save_policy(tiny_agent, str(path))
        cfg = HarnessConfig(episodes=6, policy_snapshot=str(path))
        a = dump_report(run_experiment(cfg))
        b = dump_report(run_experiment(cfg))
        assert a == b
        report = json.loads(a)
        assert report["report"] == "negotiation-experiment-v1"
        assert set(report["metrics"]) >= {"success_rate", "mean_interactions",
                                          "mean_first_offer", "fraction_offered_geq_50"}
        assert report["config_hash"] == cfg.config_hash()

    def test_personality_affects_report(self, tiny_agent, tmp_path):
        path = tmp_path / "policy.json"
        save_policy(tiny_agent, str(path))
        base = HarnessConfig(episodes=4, policy_snapshot=str(path))
        biased = HarnessConfig(episodes=4, policy_snapshot=str(path),
                               time_perception="impatient", conditioning="inhibitory")
        ra = run_experiment(base)
        rb = run_experiment(biased)
        assert ra["condition"] == "none/none"
        assert rb["condition"] == "impatient/inhibitory"


class TestCompareReports:
    def test_comparison_fields(self, tiny_agent, tmp_path):
        path = tmp_path / "policy.json"
        save_policy(tiny_agent, str(path))
        cfg_a = HarnessConfig(episodes=12, policy_snapshot=str(path))
        cfg_b = HarnessConfig(episodes=12, policy_snapshot=str(path), seed=99)
        a = run_experiment(cfg_a)
        b = run_experiment(cfg_b)
        cmp = compare_reports(a, b)
        assert {"U", "p_two_sided", "hedges_g", "mean_a", "mean_b"} <= set(cmp["interactions"])


class TestReplayMoodStudy:
    def test_no_core_vs_no_core_p_is_one(self):
        cfg = HarnessConfig(replay_ticks=40, perception_epochs=5)
        study = replay_mood_study(cfg, [PersonalityConfig()])
        row = study["tests_vs_no_core"][0]
        assert row["p_arousal"] == 1.0
        assert row["p_valence"] == 1.0
        assert row["median_shift_arousal"] == 0.0

    def test_excitatory_shift_up_significant(self):
        cfg = HarnessConfig(replay_ticks=60, perception_epochs=10)
        study = replay_mood_study(
            cfg, [PersonalityConfig(conditioning=Conditioning.EXCITATORY)])
        row = study["tests_vs_no_core"][1]
        assert row["p_arousal"] < 0.05
        assert row["median_shift_arousal"] > 0

    def test_impatient_shifts_down_in_both(self):
        # the impatient bias needs the full default replay to settle past the
        # early transient; the canonical 120-tick stimulus is the contract
        cfg = HarnessConfig()
        study = replay_mood_study(
            cfg, [PersonalityConfig(time_perception=TimePerception.IMPATIENT)])
        row = study["tests_vs_no_core"][1]
        assert row["p_arousal"] < 0.05 and row["median_shift_arousal"] < 0
        assert row["p_valence"] < 0.05 and row["median_shift_valence"] < 0

    def test_determinism(self):
        cfg = HarnessConfig(replay_ticks=30, perception_epochs=3)
        ps = [PersonalityConfig(conditioning=Conditioning.INHIBITORY)]
        assert dump_report(replay_mood_study(cfg, ps)) == dump_report(replay_mood_study(cfg, ps))

    def test_quantile_csv_shape(self):
        cfg = HarnessConfig(replay_ticks=30, perception_epochs=3)
        study = replay_mood_study(cfg, [PersonalityConfig()])
        csv = study_quantiles_csv(study)
        lines = csv.strip().splitlines()
        assert lines[0] == "condition,dimension,min,q1,median,q3,max"
        assert len(lines) == 1 + 2 * len(study["conditions"])


def test_standard_personalities_cover_eight_combinations():
    labels = {p.label() for p in standard_personalities()}
    assert len(labels) == 8
    assert "patient/excitatory" in labels and "impatient/inhibitory" in labels
