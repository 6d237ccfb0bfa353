"""Flat TOML configuration for the experiment harness. Unknown keys are
rejected outright, and every model constant (decay taus, arousal thresholds,
self-organizing table rows, acceptance breakpoints, reward weights) has a
named key so sensitivity studies never require code edits.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .affect import Conditioning, PersonalityConfig, TimePerception
from .gamma import GammaGwrParams, default_alphas
from .gwr import GwrParams
from .stimuli import RespondentAffectParams
from .ultimatum import GameConfig
from .policy import TrainConfig


class ConfigError(ValueError):
    """Invalid or unknown configuration; maps to exit code 2 in the CLI."""


_FLOAT_FIELDS_AS_INT_OK = True  # TOML integers are accepted for float keys


@dataclass
class HarnessConfig:
    seed: int = 14

    # personality under test
    time_perception: str = "none"      # none | patient | impatient | custom
    custom_tau: float = 0.0
    conditioning: str = "none"         # none | excitatory | inhibitory
    patient_tau: float = 0.01
    impatient_tau: float = 0.08

    # core construction
    time_core_steps: int = 120
    conditioning_stimulus_count: int = 160
    excitatory_min_arousal: float = 0.3
    inhibitory_max_arousal: float = 0.05

    # self-organizing table rows (habituation, insertion, max age, contexts)
    perception_habituation_threshold: float = 0.2
    perception_insertion_threshold: float = 0.5
    perception_max_edge_age: int = 50
    memory_habituation_threshold: float = 0.5
    memory_insertion_threshold: float = 0.8
    memory_max_edge_age: int = 5
    memory_context_vectors: int = 10
    core_habituation_threshold: float = 0.5
    core_insertion_threshold: float = 0.9
    core_max_edge_age: int = 5
    core_context_vectors: int = 5
    mood_habituation_threshold: float = 0.5
    mood_insertion_threshold: float = 0.9
    mood_max_edge_age: int = 5
    mood_context_vectors: int = 10

    # shared learning constants for the growing networks
    eps_b: float = 0.1
    eps_n: float = 0.01
    tau_b: float = 0.3
    tau_n: float = 0.1
    kappa: float = 1.05
    beta: float = 0.7
    alpha_w: float = 0.5

    # mood formation
    memory_enabled: bool = True
    memory_repeat: int = 1
    perception_bmus: int = 2
    social_bmus: int = 5
    time_bmus: int = 2

    # mood replay study
    replay_ticks: int = 120
    replay_epochs: int = 1
    perception_epochs: int = 50

    # game rules and reward
    max_rejections: int = 20
    first_offer_human_min: float = 5.0
    first_offer_human_max: float = 20.0
    action_scale: float = 10.0
    w_offer: float = 0.05
    w_mood: float = 1.0
    terminal_accept_scale: float = 1.0
    abort_penalty: float = -1.0
    accept_full: float = 0.7
    accept_linear: float = 0.5
    accept_low: float = 0.4
    accept_low_p: float = 0.1

    # simulated respondent expressivity
    respondent_arousal_base: float = 0.2
    respondent_arousal_per_rejection: float = 0.1
    respondent_noise_sigma: float = 0.05
    respondent_burst_frames: int = 4

    # learner
    discount: float = 0.95
    soft_update: float = 0.005
    batch_size: int = 64
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    noise_sigma_start: float = 0.3
    noise_sigma_end: float = 0.05
    warmup_transitions: int = 500
    train_episodes: int = 2000
    buffer_capacity: int = 50000
    momentum: float = 0.0
    q_guard: float = 1e4
    pretrain_samples: int = 500
    pretrain_tau: float = 0.08
    pretrain_traj_steps: int = 21

    # simulate / experiment
    episodes: int = 500
    policy_snapshot: str = ""

    # session service
    listening_window_ticks: int = 6

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if f.type == "float" and isinstance(v, int) and not isinstance(v, bool):
                setattr(self, f.name, float(v))
        if self.time_perception not in ("none", "patient", "impatient", "custom"):
            raise ConfigError(f"bad time_perception: {self.time_perception!r}")
        if self.conditioning not in ("none", "excitatory", "inhibitory"):
            raise ConfigError(f"bad conditioning: {self.conditioning!r}")
        if self.time_perception == "custom" and self.custom_tau <= 0.0:
            raise ConfigError("custom time perception needs custom_tau > 0")
        if self.episodes < 1:
            raise ConfigError("episodes must be at least 1")
        if self.replay_ticks < 2 or self.replay_epochs < 1:
            raise ConfigError("replay needs at least 2 ticks and 1 epoch")

    # -- materialized sub-configs -------------------------------------------

    def personality(self) -> PersonalityConfig:
        tp = TimePerception(self.time_perception)
        tau = self.custom_tau if tp is TimePerception.CUSTOM else None
        return PersonalityConfig(time_perception=tp,
                                 conditioning=Conditioning(self.conditioning),
                                 custom_tau=tau)

    def game_config(self) -> GameConfig:
        return GameConfig(
            max_rejections=self.max_rejections,
            first_offer_human_min=self.first_offer_human_min,
            first_offer_human_max=self.first_offer_human_max,
            action_scale=self.action_scale,
            w_offer=self.w_offer, w_mood=self.w_mood,
            terminal_accept_scale=self.terminal_accept_scale,
            abort_penalty=self.abort_penalty,
            accept_full=self.accept_full, accept_linear=self.accept_linear,
            accept_low=self.accept_low, accept_low_p=self.accept_low_p,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            discount=self.discount, soft_update=self.soft_update,
            batch_size=self.batch_size, actor_lr=self.actor_lr,
            critic_lr=self.critic_lr,
            noise_sigma_start=self.noise_sigma_start,
            noise_sigma_end=self.noise_sigma_end,
            warmup_transitions=self.warmup_transitions,
            episodes=self.train_episodes, buffer_capacity=self.buffer_capacity,
            momentum=self.momentum, q_guard=self.q_guard,
            pretrain_samples=self.pretrain_samples,
            pretrain_tau=self.pretrain_tau,
            pretrain_traj_steps=self.pretrain_traj_steps,
            with_memory=self.memory_enabled,
            seed=self.seed,
        )

    def respondent_params(self) -> RespondentAffectParams:
        return RespondentAffectParams(
            arousal_base=self.respondent_arousal_base,
            arousal_per_rejection=self.respondent_arousal_per_rejection,
            noise_sigma=self.respondent_noise_sigma,
            burst_frames=self.respondent_burst_frames,
        )

    def perception_params(self) -> GwrParams:
        return GwrParams(
            insertion_threshold=self.perception_insertion_threshold,
            habituation_threshold=self.perception_habituation_threshold,
            max_edge_age=self.perception_max_edge_age,
            eps_b=self.eps_b, eps_n=self.eps_n,
            tau_b=self.tau_b, tau_n=self.tau_n, kappa=self.kappa,
        )

    def _gamma_params(self, insertion: float, habituation: float,
                      max_age: int, K: int) -> GammaGwrParams:
        alpha_w, alpha_k = default_alphas(K, self.alpha_w)
        return GammaGwrParams(
            insertion_threshold=insertion, habituation_threshold=habituation,
            max_edge_age=max_age, eps_b=self.eps_b, eps_n=self.eps_n,
            tau_b=self.tau_b, tau_n=self.tau_n, kappa=self.kappa,
            K=K, alpha_w=alpha_w, alpha_k=alpha_k, beta=self.beta,
        )

    def memory_params(self) -> GammaGwrParams:
        return self._gamma_params(self.memory_insertion_threshold,
                                  self.memory_habituation_threshold,
                                  self.memory_max_edge_age,
                                  self.memory_context_vectors)

    def core_params(self) -> GammaGwrParams:
        return self._gamma_params(self.core_insertion_threshold,
                                  self.core_habituation_threshold,
                                  self.core_max_edge_age,
                                  self.core_context_vectors)

    def mood_params(self) -> GammaGwrParams:
        return self._gamma_params(self.mood_insertion_threshold,
                                  self.mood_habituation_threshold,
                                  self.mood_max_edge_age,
                                  self.mood_context_vectors)

    def canonical_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def config_from_dict(data: dict) -> HarnessConfig:
    known = {f.name for f in fields(HarnessConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        return HarnessConfig(**data)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None) -> HarnessConfig:
    """Load a flat TOML config; None means all defaults."""
    if path is None:
        return HarnessConfig()
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        with open(p, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    return config_from_dict(data)
