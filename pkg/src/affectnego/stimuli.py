"""Affect input sources: CSV trace files, synthetic generators, and the
parametric affective-response model standing in for a human respondent.

The respondent model is an explicit, documented stand-in for human
expressivity, not a validated model of it: displeasure scales linearly with
how little the human is offered, agitation ramps with consecutive
rejections, and frames carry small Gaussian jitter. Every parameter is
config-exposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .affect import AffectFrame, ArousalValence, Offer, clamp
from .gwr import f2s

TICK_MS = 500


class StimuliError(ValueError):
    """Base error for trace and generator failures."""


class TraceParseError(StimuliError):
    """Malformed trace file (bad header, non-numeric cell, wrong arity)."""


class TraceRangeError(StimuliError):
    """Affect value outside [-1, 1] in a trace file."""


class TraceOrderError(StimuliError):
    """Trace steps not strictly increasing."""


@dataclass(frozen=True)
class TraceMeta:
    source_id: str
    tick_ms: int = TICK_MS


@dataclass(frozen=True)
class AffectTrace:
    """An ordered affect stream of uniform feature dimension."""

    dim: int
    frames: tuple[AffectFrame, ...]
    meta: TraceMeta

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", tuple(self.frames))
        last = -1
        for f in self.frames:
            if len(f.features) != self.dim:
                raise TraceParseError(
                    f"frame {f.step}: feature dim {len(f.features)} != trace dim {self.dim}")
            if f.step <= last:
                raise TraceOrderError(f"steps must be strictly increasing at {f.step}")
            last = f.step
            if self.dim == 2 and f.features != f.av.as_tuple():
                raise TraceParseError(
                    f"frame {f.step}: 2-d features must equal (arousal, valence)")

    def points(self) -> list[ArousalValence]:
        return [f.av for f in self.frames]


def load_trace(path: str | Path) -> AffectTrace:
    """Read a `step,arousal,valence[,f0..fD-1]` CSV; the exact inverse of
    save_trace."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise TraceParseError(f"{path}: empty trace file")
    header = lines[0].split(",")
    if header[:3] != ["step", "arousal", "valence"]:
        raise TraceParseError(f"{path}: bad header {lines[0]!r}")
    feat_cols = header[3:]
    for i, name in enumerate(feat_cols):
        if name != f"f{i}":
            raise TraceParseError(f"{path}: bad feature column {name!r}")
    dim = len(feat_cols) if feat_cols else 2
    frames: list[AffectFrame] = []
    prev_step = -1
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise TraceParseError(f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}")
        try:
            step = int(cells[0])
            a = float(cells[1])
            v = float(cells[2])
            feats = tuple(float(c) for c in cells[3:])
        except ValueError as exc:
            raise TraceParseError(f"{path}:{lineno}: {exc}") from None
        if not (-1.0 <= a <= 1.0 and -1.0 <= v <= 1.0):
            raise TraceRangeError(f"{path}:{lineno}: affect ({a}, {v}) outside [-1, 1]")
        if step <= prev_step:
            raise TraceOrderError(f"{path}:{lineno}: step {step} not after {prev_step}")
        prev_step = step
        if not feats:
            feats = (a, v)
        frames.append(AffectFrame(step=step, features=feats, av=ArousalValence(a, v)))
    return AffectTrace(dim=dim, frames=tuple(frames), meta=TraceMeta(source_id=path.stem))


def save_trace(trace: AffectTrace, path: str | Path) -> None:
    path = Path(path)
    cols = ["step", "arousal", "valence"]
    wide = trace.dim != 2
    if wide:
        cols += [f"f{i}" for i in range(trace.dim)]
    rows = [",".join(cols)]
    for f in trace.frames:
        cells = [str(f.step), f2s(f.av.arousal), f2s(f.av.valence)]
        if wide:
            cells += [f2s(x) for x in f.features]
        rows.append(",".join(cells))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def synth_random_states(n: int, seed: int) -> list[ArousalValence]:
    """n affect points with standard-normal coordinates clipped to [-1, 1];
    about 31.7% of the mass per coordinate piles up on the walls."""
    if n < 0:
        raise StimuliError("n must be non-negative")
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((n, 2))
    return [ArousalValence(clamp(a), clamp(v)) for a, v in draws]


def synth_decay_trajectory(start: ArousalValence, tau: float, steps: int,
                           source_id: str = "decay") -> AffectTrace:
    """The start point scaled by exp(-tau*t) for t = 0..steps-1."""
    if steps < 1:
        raise StimuliError("trajectory needs at least one step")
    if tau <= 0.0:
        raise StimuliError("tau must be positive")
    frames = []
    for t in range(steps):
        y = math.exp(-tau * t)
        frames.append(AffectFrame.from_av(t, start.scaled(y)))
    return AffectTrace(dim=2, frames=tuple(frames), meta=TraceMeta(source_id=source_id))


@dataclass(frozen=True)
class RespondentAffectParams:
    """Stand-in expressivity model: valence tracks the offered share,
    arousal ramps with consecutive rejections."""

    arousal_base: float = 0.2
    arousal_per_rejection: float = 0.1
    noise_sigma: float = 0.05
    burst_frames: int = 4


def respondent_affect(offer: Offer, consecutive_rejections: int,
                      rng: np.random.Generator,
                      params: RespondentAffectParams | None = None) -> list[ArousalValence]:
    """One 500 ms burst of affect frames reacting to an offer."""
    if consecutive_rejections < 0:
        raise StimuliError("rejection count must be non-negative")
    p = params if params is not None else RespondentAffectParams()
    v = 2.0 * offer.human_fraction - 1.0
    a = min(1.0, p.arousal_base + p.arousal_per_rejection * consecutive_rejections)
    out = []
    for _ in range(p.burst_frames):
        noise = rng.normal(0.0, p.noise_sigma, 2) if p.noise_sigma > 0 else (0.0, 0.0)
        out.append(ArousalValence(a + noise[0], v + noise[1]))
    return out


class RespondentAffectSource:
    """Episode affect source backed by the parametric respondent model."""

    def __init__(self, params: RespondentAffectParams | None = None) -> None:
        self.params = params if params is not None else RespondentAffectParams()
        self._rng: np.random.Generator | None = None

    def reset(self, rng: np.random.Generator) -> None:
        self._rng = rng

    def burst(self, offer: Offer, consecutive_rejections: int) -> list[ArousalValence]:
        if self._rng is None:
            raise StimuliError("affect source used before reset")
        return respondent_affect(offer, consecutive_rejections, self._rng, self.params)


class TrajectoryAffectSource:
    """Episode affect source replaying pre-built mood trajectories: each
    episode picks one trajectory from the pool and steps through it on every
    rejection, sticking at its final point."""

    def __init__(self, pool: Sequence[Sequence[ArousalValence]]) -> None:
        if not pool or any(len(t) == 0 for t in pool):
            raise StimuliError("trajectory pool must hold non-empty trajectories")
        self.pool = [list(t) for t in pool]
        self._current: list[ArousalValence] = self.pool[0]
        self._cursor = 0

    def reset(self, rng: np.random.Generator) -> None:
        self._current = self.pool[int(rng.integers(len(self.pool)))]
        self._cursor = 0

    def burst(self, offer: Offer, consecutive_rejections: int) -> list[ArousalValence]:
        point = self._current[min(self._cursor, len(self._current) - 1)]
        self._cursor += 1
        return [point]


def default_mood_stimulus(seed: int, ticks: int = 120) -> AffectTrace:
    """The fixed synthetic replay used for mood-bias studies: an engaged,
    mildly pleasant conversation wandering through a few affective contexts.
    Arousal sits in a mid band well clear of both conditioning thresholds
    and valence in a low-positive band, leaving every core bias room to push
    in its own direction."""
    rng = np.random.default_rng(seed)
    segments = max(1, ticks // 20)
    frames = []
    step = 0
    for _ in range(segments):
        a0 = rng.uniform(0.24, 0.40)
        v0 = rng.uniform(0.22, 0.42)
        length = min(20, ticks - step)
        for _ in range(length):
            a = clamp(a0 + rng.normal(0.0, 0.03))
            v = clamp(v0 + rng.normal(0.0, 0.03))
            frames.append(AffectFrame.from_av(step, ArousalValence(a, v)))
            step += 1
    while step < ticks:
        frames.append(AffectFrame.from_av(step, frames[-1].av))
        step += 1
    return AffectTrace(dim=2, frames=tuple(frames), meta=TraceMeta(source_id=f"synthetic-{seed}"))
