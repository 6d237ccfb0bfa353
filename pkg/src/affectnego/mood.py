"""Mood formation: perception, affective-memory and personality-core inputs
fused asynchronously into a growing 2-d mood network. The agent's mood at
any moment is the mean over all mood prototypes.

Sources are optional per tick; whatever is present is fed in a fixed order
(perception, memory, social, time) so runs are reproducible. Absent sources
are skipped, never padded.
"""

from __future__ import annotations

from dataclasses import dataclass

from .affect import ArousalValence, NEUTRAL, PersonalityConfig
from .cores import (
    SOCIAL_CORE_QUERY_BMUS,
    TIME_CORE_QUERY_BMUS,
    SocialConditioningCore,
    TimePerceptionCore,
    build_cores,
)
from .gamma import GammaGwrNetwork, GammaGwrParams, memory_params, mood_params

FEED_ORDER = ("perception", "memory", "social", "time")


class MoodError(ValueError):
    """Raised on mood-engine contract violations."""


@dataclass
class MoodTickInput:
    """One tick's worth of affect points, any subset of sources present."""

    perception: list[ArousalValence] | None = None
    memory_mean: ArousalValence | None = None
    social: list[ArousalValence] | None = None
    time: list[ArousalValence] | None = None

    def present_sources(self) -> list[str]:
        out = []
        if self.perception:
            out.append("perception")
        if self.memory_mean is not None:
            out.append("memory")
        if self.social:
            out.append("social")
        if self.time:
            out.append("time")
        return out

    def points_in_order(self, memory_repeat: int = 1) -> list[ArousalValence]:
        pts: list[ArousalValence] = []
        if self.perception:
            pts.extend(self.perception)
        if self.memory_mean is not None:
            pts.extend([self.memory_mean] * memory_repeat)
        if self.social:
            pts.extend(self.social)
        if self.time:
            pts.extend(self.time)
        return pts


@dataclass(frozen=True)
class MoodSnapshot:
    mean: ArousalValence
    neuron_count: int
    step: int


class MoodEngine:
    """The mood network plus a tick counter and a tick log.

    ``memory_repeat`` weights the affective-memory mean against the BMU
    points within a tick (it contributes one training point by default)."""

    def __init__(self, params: GammaGwrParams | None = None, memory_repeat: int = 1) -> None:
        self.net = GammaGwrNetwork(dim=2, params=params if params is not None else mood_params())
        self.memory_repeat = max(1, int(memory_repeat))
        self.step = 0
        self.log: list[dict] = []

    def current_mood(self) -> ArousalValence:
        """Mean over all mood prototypes; neutral before any tick."""
        if self.net.neuron_count == 0:
            return NEUTRAL
        return self.net.mean_decoded()

    def tick(self, tick_input: MoodTickInput) -> MoodSnapshot:
        """Feed every present point, in the fixed source order, then report
        the post-tick mood."""
        sources = tick_input.present_sources()
        if not sources:
            raise MoodError("mood tick needs at least one present source")
        for point in tick_input.points_in_order(self.memory_repeat):
            self.net.train_step(point.as_tuple())
        self.step += 1
        snap = MoodSnapshot(mean=self.current_mood(),
                            neuron_count=self.net.neuron_count,
                            step=self.step)
        self.log.append({
            "step": snap.step,
            "sources_present": sources,
            "mean_a": snap.mean.arousal,
            "mean_v": snap.mean.valence,
            "neuron_count": snap.neuron_count,
        })
        return snap


@dataclass
class PersonalityMood:
    """A mood engine wired to a personality: optional frozen cores plus an
    optional per-user affective memory. On each observation the cores are
    queried with the current mood (the bias each contributes is relative to
    where the agent already is)."""

    engine: MoodEngine
    time_core: TimePerceptionCore | None = None
    social_core: SocialConditioningCore | None = None
    memory: GammaGwrNetwork | None = None
    social_bmus: int = SOCIAL_CORE_QUERY_BMUS
    time_bmus: int = TIME_CORE_QUERY_BMUS

    def current_mood(self) -> ArousalValence:
        return self.engine.current_mood()

    def observe(self, perception: list[ArousalValence] | None) -> MoodSnapshot:
        """One tick: train the memory on the perceived points, query the
        cores against the current mood, feed everything to the mood net.
        Works with an empty perception window (core/memory ticks alone)."""
        perception = list(perception) if perception else None
        memory_mean = None
        if self.memory is not None:
            if perception:
                for p in perception:
                    self.memory.train_step(p.as_tuple())
            if self.memory.neuron_count > 0:
                memory_mean = self.memory.mean_decoded()
        mood_now = self.current_mood()
        social = self.social_core.query(mood_now, self.social_bmus) if self.social_core else None
        time_pts = self.time_core.query(mood_now, self.time_bmus) if self.time_core else None
        return self.engine.tick(MoodTickInput(perception=perception,
                                              memory_mean=memory_mean,
                                              social=social, time=time_pts))


def build_personality_mood(personality: PersonalityConfig, seed: int,
                           with_memory: bool = True,
                           time_steps: int = 120,
                           conditioning_frames=None,
                           stimulus_count: int = 160,
                           mood_net_params: GammaGwrParams | None = None,
                           memory_net_params: GammaGwrParams | None = None,
                           memory_repeat: int = 1,
                           ) -> PersonalityMood:
    """Fresh mood stack for one interaction under the given personality."""
    time_core, social_core = build_cores(
        personality, seed, time_steps=time_steps,
        conditioning_frames=conditioning_frames, stimulus_count=stimulus_count)
    memory = None
    if with_memory:
        memory = GammaGwrNetwork(
            dim=2, params=memory_net_params if memory_net_params is not None else memory_params())
    return PersonalityMood(engine=MoodEngine(params=mood_net_params, memory_repeat=memory_repeat),
                           time_core=time_core, social_core=social_core,
                           memory=memory)
