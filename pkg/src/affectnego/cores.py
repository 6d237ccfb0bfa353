"""Personality core builders: time-perception biases trained on decayed
affect trajectories, and social-conditioning biases trained on
arousal-filtered stimuli. Cores are trained once and frozen; negotiation
only ever queries them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .affect import (
    AffectFrame,
    ArousalValence,
    Conditioning,
    PersonalityConfig,
    TimePerception,
)
from .gamma import GammaGwrNetwork, GammaGwrParams, social_core_params, time_core_params
from .gwr import GwrError, f2s

EXCITATORY_MIN_AROUSAL = 0.3
INHIBITORY_MAX_AROUSAL = 0.05

TIME_CORE_START = ArousalValence(0.5, 0.5)
MIN_TIME_CORE_STEPS = 90

TIME_CORE_QUERY_BMUS = 2
SOCIAL_CORE_QUERY_BMUS = 5

CORE_SNAPSHOT_FORMAT = "affective-core-v1"


class CoreError(ValueError):
    """Raised when a personality core cannot be built or queried."""


def decay(t: int, tau: float) -> float:
    """Interaction-time decay exp(-tau*t); 1 at t=0, monotone to 0."""
    if t < 0:
        raise CoreError("decay time must be non-negative")
    if tau <= 0.0:
        raise CoreError("decay constant tau must be positive")
    return math.exp(-tau * t)


@dataclass
class TimePerceptionCore:
    """Frozen prototypes of the agent's intrinsic state decaying from a
    positively excited start over interaction time."""

    tau: float
    net: GammaGwrNetwork

    def query(self, current: ArousalValence, n: int = TIME_CORE_QUERY_BMUS) -> list[ArousalValence]:
        return query_core_net(self.net, current, n)


@dataclass
class SocialConditioningCore:
    """Frozen prototypes of either high-arousal (excitatory) or low-arousal
    (inhibitory) acculturation stimuli."""

    mode: Conditioning
    net: GammaGwrNetwork

    def query(self, current: ArousalValence, n: int = SOCIAL_CORE_QUERY_BMUS) -> list[ArousalValence]:
        return query_core_net(self.net, current, n)


def query_core_net(net: GammaGwrNetwork, current: ArousalValence, n: int) -> list[ArousalValence]:
    if net.neuron_count == 0:
        raise CoreError("cannot query an untrained core")
    return net.bmus_decoded(current.as_tuple(), n).points


def build_time_core(tau: float, steps: int = 120,
                    params: GammaGwrParams | None = None) -> TimePerceptionCore:
    """Train a fresh recurrent network on the decayed trajectory
    (0.5, 0.5)*exp(-tau*t) for t = 0..steps-1, then freeze it."""
    if tau <= 0.0:
        raise CoreError("decay constant tau must be positive")
    if steps < MIN_TIME_CORE_STEPS:
        raise CoreError(f"time core needs at least {MIN_TIME_CORE_STEPS} steps, got {steps}")
    net = GammaGwrNetwork(dim=2, params=params if params is not None else time_core_params())
    for t in range(steps):
        y = decay(t, tau)
        net.train_step((TIME_CORE_START.arousal * y, TIME_CORE_START.valence * y))
    return TimePerceptionCore(tau=tau, net=net)


def filter_frames(frames: Sequence[AffectFrame], mode: Conditioning) -> list[AffectFrame]:
    """Keep only the frames admissible for the conditioning mode: strictly
    above 0.3 arousal for excitatory, strictly below 0.05 for inhibitory."""
    if mode is Conditioning.EXCITATORY:
        kept = [f for f in frames if f.av.arousal > EXCITATORY_MIN_AROUSAL]
    elif mode is Conditioning.INHIBITORY:
        kept = [f for f in frames if f.av.arousal < INHIBITORY_MAX_AROUSAL]
    else:
        raise CoreError(f"no conditioning filter for mode {mode}")
    if not kept:
        raise CoreError(f"insufficient conditioning stimuli for {mode.value} core")
    return kept


def build_social_core(frames: Sequence[AffectFrame], mode: Conditioning,
                      params: GammaGwrParams | None = None) -> SocialConditioningCore:
    """Filter the stimuli for the mode, train a fresh recurrent network on
    the surviving arousal-valence sequence, freeze it."""
    kept = filter_frames(frames, mode)
    if len(kept) < 2:
        raise CoreError("need at least 2 admissible conditioning frames")
    net = GammaGwrNetwork(dim=2, params=params if params is not None else social_core_params())
    for f in kept:
        net.train_step(f.av.as_tuple())
    return SocialConditioningCore(mode=mode, net=net)


def default_conditioning_frames(mode: Conditioning, seed: int, n: int = 160) -> list[AffectFrame]:
    """Synthetic acculturation stimuli. Excitatory conditioning uses joyful
    high-energy clips (high arousal, pleasant); inhibitory uses dull
    low-energy ones (near-flat arousal, mildly unpleasant). Frames are
    ordered toward the mode's valence extreme so training ends there and the
    frozen temporal context keeps queries anchored to it."""
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(n):
        if mode is Conditioning.EXCITATORY:
            a = rng.uniform(0.55, 0.95)
            v = rng.uniform(0.65, 0.95)
        elif mode is Conditioning.INHIBITORY:
            a = rng.uniform(0.0, 0.045)
            v = rng.uniform(-0.6, -0.2)
        else:
            raise CoreError(f"no stimulus generator for mode {mode}")
        points.append((a, v))
    points.sort(key=lambda p: p[1], reverse=(mode is Conditioning.INHIBITORY))
    return [AffectFrame.from_av(step, ArousalValence(a, v))
            for step, (a, v) in enumerate(points)]


def build_cores(personality: PersonalityConfig, seed: int,
                time_steps: int = 120,
                conditioning_frames: Sequence[AffectFrame] | None = None,
                stimulus_count: int = 160,
                ) -> tuple[TimePerceptionCore | None, SocialConditioningCore | None]:
    """Build the (time, social) core pair for a personality; None slots for
    unbiased dimensions."""
    time_core = None
    if personality.time_perception is not TimePerception.NONE:
        time_core = build_time_core(personality.tau, steps=time_steps)
    social_core = None
    if personality.conditioning is not Conditioning.NONE:
        frames = conditioning_frames
        if frames is None:
            frames = default_conditioning_frames(personality.conditioning, seed,
                                                 n=stimulus_count)
        social_core = build_social_core(frames, personality.conditioning)
    return time_core, social_core


# -- persistence -------------------------------------------------------------

def core_to_snapshot(core: TimePerceptionCore | SocialConditioningCore) -> dict:
    if isinstance(core, TimePerceptionCore):
        return {"format": CORE_SNAPSHOT_FORMAT, "kind": "time",
                "tau": f2s(core.tau), "net": core.net.to_snapshot()}
    return {"format": CORE_SNAPSHOT_FORMAT, "kind": "social",
            "mode": core.mode.value, "net": core.net.to_snapshot()}


def core_from_snapshot(snap: dict) -> TimePerceptionCore | SocialConditioningCore:
    if snap.get("format") != CORE_SNAPSHOT_FORMAT:
        raise GwrError(f"unsupported core snapshot format: {snap.get('format')}")
    net = GammaGwrNetwork.from_snapshot(snap["net"])
    if snap["kind"] == "time":
        return TimePerceptionCore(tau=float(snap["tau"]), net=net)
    if snap["kind"] == "social":
        return SocialConditioningCore(mode=Conditioning(snap["mode"]), net=net)
    raise GwrError(f"unknown core kind: {snap['kind']}")


def save_core(core: TimePerceptionCore | SocialConditioningCore, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(core_to_snapshot(core), fh, sort_keys=True, separators=(",", ":"))


def load_core(path: str) -> TimePerceptionCore | SocialConditioningCore:
    with open(path, encoding="utf-8") as fh:
        return core_from_snapshot(json.load(fh))
