"""Experiment orchestration: seeded negotiation experiments with personality
cores wired into the mood stack, quantitative per-condition metrics, the
mood-bias replay study, and condition comparisons.

All randomness flows from the single config seed; identical config + seed
reproduces every report byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .affect import PersonalityConfig
from .config import ConfigError, HarnessConfig
from .cores import build_cores, default_conditioning_frames
from .gamma import GammaGwrNetwork
from .gwr import GwrNetwork
from .mood import MoodEngine, PersonalityMood
from .policy import DdpgAgent, load_policy
from .stats import hedges_g, mann_whitney_u
from .stimuli import AffectTrace, RespondentAffectSource, default_mood_stimulus
from .ultimatum import Status, StochasticRespondent, run_episode

OFFERED_MAJORITY_POINTS = 50.0


def _mean(xs: list[float]) -> float | None:
    return float(np.mean(xs)) if xs else None

def _stderr(xs: list[float]) -> float:
    if len(xs) < 2:
        return 0.0
    return float(np.std(xs, ddof=1) / math.sqrt(len(xs)))


@dataclass
class ConditionResult:
    """Raw per-episode outcomes for one personality condition."""

    label: str
    interactions: list[int]
    accepted: list[bool]
    first_offers: list[float]
    final_offers: list[float]
    max_offers: list[float]
    returns: list[float]

    def metrics(self) -> dict:
        n = len(self.interactions)
        accepted_offers = [f for f, ok in zip(self.final_offers, self.accepted) if ok]
        rejected_finals = [f for f, ok in zip(self.final_offers, self.accepted) if not ok]
        inter = [float(x) for x in self.interactions]
        return {
            "episodes": n,
            "success_rate": (sum(self.accepted) / n) if n else 0.0,
            "mean_interactions": _mean(inter),
            "stderr_interactions": _stderr(inter),
            "mean_first_offer": _mean(self.first_offers),
            "mean_accepted_offer": _mean(accepted_offers),
            "mean_final_offer_if_rejected": _mean(rejected_finals),
            "fraction_offered_geq_50": (
                sum(1 for m in self.max_offers if m >= OFFERED_MAJORITY_POINTS) / n
            ) if n else 0.0,
        }

    def raw_arrays(self) -> dict:
        return {
            "interactions": self.interactions,
            "accepted": self.accepted,
            "first_offers": self.first_offers,
            "final_offers": self.final_offers,
            "max_offers": self.max_offers,
            "returns": self.returns,
        }


def run_condition(cfg: HarnessConfig, agent: DdpgAgent,
                  personality: PersonalityConfig,
                  label: str | None = None,
                  respondent_factory=None) -> ConditionResult:
    """Seeded episodes against the stochastic respondent (or respondents from
    a supplied factory, fresh per episode) with the personality cores (built
    once, frozen) wired into a fresh per-episode mood stack."""
    game_cfg = cfg.game_config()
    if respondent_factory is None:
        respondent_factory = lambda: StochasticRespondent(game_cfg)
    frames = None
    if personality.conditioning.value != "none":
        frames = default_conditioning_frames(personality.conditioning, cfg.seed,
                                             n=cfg.conditioning_stimulus_count)
    time_core, social_core = build_cores(personality, cfg.seed,
                                         time_steps=cfg.time_core_steps,
                                         conditioning_frames=frames)
    result = ConditionResult(label=label or personality.label(),
                             interactions=[], accepted=[], first_offers=[],
                             final_offers=[], max_offers=[], returns=[])
    affect_params = cfg.respondent_params()
    for ep in range(cfg.episodes):
        memory = GammaGwrNetwork(dim=2, params=cfg.memory_params()) if cfg.memory_enabled else None
        mood = PersonalityMood(engine=MoodEngine(params=cfg.mood_params(),
                                                 memory_repeat=cfg.memory_repeat),
                               time_core=time_core, social_core=social_core,
                               memory=memory,
                               social_bmus=cfg.social_bmus, time_bmus=cfg.time_bmus)
        out = run_episode(policy_fn=lambda s: agent.act(s),
                          respondent=respondent_factory(), mood=mood, cfg=game_cfg,
                          rng=np.random.default_rng([cfg.seed, ep]),
                          affect_source=RespondentAffectSource(affect_params))
        result.interactions.append(out.rounds)
        result.accepted.append(out.status is Status.ACCEPTED)
        result.first_offers.append(out.first_offer.human_points)
        result.final_offers.append(out.final_offer.human_points)
        result.max_offers.append(out.max_human_points)
        result.returns.append(out.episode_return)
    return result


def run_experiment(cfg: HarnessConfig, agent: DdpgAgent | None = None) -> dict:
    """The `simulate` entry point: one personality condition, full report."""
    if agent is None:
        if not cfg.policy_snapshot:
            raise ConfigError("simulate requires policy_snapshot in the config")
        agent = load_policy(cfg.policy_snapshot)
    condition = run_condition(cfg, agent, cfg.personality())
    return {
        "report": "negotiation-experiment-v1",
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "condition": condition.label,
        "metrics": condition.metrics(),
        "raw": condition.raw_arrays(),
    }


def compare_reports(report_a: dict, report_b: dict) -> dict:
    """Directional comparison of two experiment reports: rank test and
    effect size on interactions, plus the offered-majority fractions."""
    ia = [float(x) for x in report_a["raw"]["interactions"]]
    ib = [float(x) for x in report_b["raw"]["interactions"]]
    mw = mann_whitney_u(ia, ib, "two-sided")
    return {
        "report": "condition-comparison-v1",
        "a": report_a["condition"],
        "b": report_b["condition"],
        "interactions": {
            "mean_a": float(np.mean(ia)),
            "mean_b": float(np.mean(ib)),
            "U": mw.U,
            "p_two_sided": mw.p,
            "hedges_g": hedges_g(ia, ib),
        },
        "fraction_offered_geq_50": {
            "a": report_a["metrics"]["fraction_offered_geq_50"],
            "b": report_b["metrics"]["fraction_offered_geq_50"],
        },
        "success_rate": {
            "a": report_a["metrics"]["success_rate"],
            "b": report_b["metrics"]["success_rate"],
        },
    }


# -- mood replay study ---------------------------------------------------------

def replay_mood_study(cfg: HarnessConfig,
                      personalities: list[PersonalityConfig] | None = None,
                      stimulus: AffectTrace | None = None) -> dict:
    """Replay one fixed stimulus under different affective cores and collect
    the per-tick mood means; every measured condition is rank-tested against
    the no-core baseline (two-sided) in both affect dimensions."""
    if stimulus is None:
        stimulus = default_mood_stimulus(cfg.seed, ticks=cfg.replay_ticks)
    if personalities is None:
        personalities = standard_personalities()
    baseline = PersonalityConfig()
    conditions = [baseline] + [p for p in personalities if p != baseline]

    # One perception map shared by every condition: identical replays.
    perception = GwrNetwork(dim=stimulus.dim, params=cfg.perception_params())
    perception.fit(list(stimulus.frames), epochs=cfg.perception_epochs)

    runs = []
    for personality in conditions:
        frames = None
        if personality.conditioning.value != "none":
            frames = default_conditioning_frames(personality.conditioning, cfg.seed,
                                                 n=cfg.conditioning_stimulus_count)
        time_core, social_core = build_cores(personality, cfg.seed,
                                             time_steps=cfg.time_core_steps,
                                             conditioning_frames=frames)
        memory = GammaGwrNetwork(dim=2, params=cfg.memory_params()) if cfg.memory_enabled else None
        mood = PersonalityMood(engine=MoodEngine(params=cfg.mood_params(),
                                                 memory_repeat=cfg.memory_repeat),
                               time_core=time_core, social_core=social_core,
                               memory=memory,
                               social_bmus=cfg.social_bmus, time_bmus=cfg.time_bmus)
        arousal: list[float] = []
        valence: list[float] = []
        for _ in range(cfg.replay_epochs):
            for frame in stimulus.frames:
                bmus = perception.find_bmus(frame.features, cfg.perception_bmus)
                points = [perception.decode(i) for i, _ in bmus]
                snap = mood.observe(points)
                arousal.append(snap.mean.arousal)
                valence.append(snap.mean.valence)
        runs.append({
            "condition": personality.label(),
            "arousal": arousal,
            "valence": valence,
        })

    base = runs[0]
    table = []
    for run in runs:
        row = {"condition": run["condition"]}
        for dim in ("arousal", "valence"):
            mw = mann_whitney_u(run[dim], base[dim], "two-sided")
            row[f"U_{dim}"] = mw.U
            row[f"p_{dim}"] = mw.p
            row[f"median_shift_{dim}"] = float(np.median(run[dim]) - np.median(base[dim]))
        table.append(row)

    return {
        "report": "mood-replay-study-v1",
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "stimulus": stimulus.meta.source_id,
        "ticks": len(stimulus.frames) * cfg.replay_epochs,
        "conditions": runs,
        "tests_vs_no_core": table,
    }


def standard_personalities() -> list[PersonalityConfig]:
    """The eight core combinations studied for mood bias."""
    from .affect import Conditioning, TimePerception
    out = []
    for tp in (TimePerception.NONE, TimePerception.PATIENT, TimePerception.IMPATIENT):
        for cond in (Conditioning.NONE, Conditioning.EXCITATORY, Conditioning.INHIBITORY):
            if tp is TimePerception.NONE and cond is Conditioning.NONE:
                continue
            out.append(PersonalityConfig(time_perception=tp, conditioning=cond))
    return out


def study_quantiles_csv(study: dict) -> str:
    """Box-plot quantile export for the replay study (data-only plotting)."""
    rows = ["condition,dimension,min,q1,median,q3,max"]
    for run in study["conditions"]:
        for dim in ("arousal", "valence"):
            q = np.quantile(run[dim], [0.0, 0.25, 0.5, 0.75, 1.0])
            cells = [run["condition"], dim] + [format(float(x), ".17g") for x in q]
            rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def dump_report(report: dict) -> str:
    """Canonical JSON text; identical runs serialize byte-identically."""
    return json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n"
