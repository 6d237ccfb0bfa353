"""Shared affect vocabulary: arousal-valence points, feature frames, offers,
personality configuration, and the small geometry kernels everything else
builds on.

All values are plain 64-bit floats. Out-of-range arithmetic results are
clamped back into the legal square rather than rejected, because decayed and
averaged affect states must stay usable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

PATIENT_TAU = 0.01
IMPATIENT_TAU = 0.08

OFFER_TOTAL = 100.0
_OFFER_EPS = 1e-9


class AffectError(ValueError):
    """Raised on contract violations in the affect layer."""


def clamp(x: float, lo: float = -1.0, hi: float = 1.0) -> float:
    return lo if x < lo else hi if x > hi else x


@dataclass(frozen=True)
class ArousalValence:
    """A point in the 2-D affect plane; both components clamped to [-1, 1]."""

    arousal: float
    valence: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "arousal", clamp(float(self.arousal)))
        object.__setattr__(self, "valence", clamp(float(self.valence)))

    def as_tuple(self) -> tuple[float, float]:
        return (self.arousal, self.valence)

    def scaled(self, factor: float) -> "ArousalValence":
        return ArousalValence(self.arousal * factor, self.valence * factor)


NEUTRAL = ArousalValence(0.0, 0.0)


@dataclass(frozen=True)
class AffectFrame:
    """One 500 ms perception tick: a feature vector plus its decoded affect.

    When the feature space is the affect plane itself (dim 2), ``features``
    is exactly ``(arousal, valence)``.
    """

    step: int
    features: tuple[float, ...]
    av: ArousalValence

    def __post_init__(self) -> None:
        if self.step < 0:
            raise AffectError(f"frame step must be non-negative, got {self.step}")
        if len(self.features) < 2:
            raise AffectError("feature dimension must be at least 2")
        object.__setattr__(self, "features", tuple(float(f) for f in self.features))

    @classmethod
    def from_av(cls, step: int, av: ArousalValence) -> "AffectFrame":
        return cls(step=step, features=av.as_tuple(), av=av)


@dataclass(frozen=True)
class Offer:
    """A split of the 100 points between robot and human; always conserves
    the total."""

    robot_points: float
    human_points: float

    def __post_init__(self) -> None:
        total = self.robot_points + self.human_points
        if abs(total - OFFER_TOTAL) > _OFFER_EPS:
            raise AffectError(f"offer must sum to {OFFER_TOTAL}, got {total}")
        if not (0.0 <= self.human_points <= OFFER_TOTAL):
            raise AffectError(f"human share out of range: {self.human_points}")

    @classmethod
    def from_human_points(cls, human_points: float) -> "Offer":
        h = min(max(float(human_points), 0.0), OFFER_TOTAL)
        return cls(robot_points=OFFER_TOTAL - h, human_points=h)

    @property
    def human_fraction(self) -> float:
        return self.human_points / OFFER_TOTAL

    @property
    def robot_fraction(self) -> float:
        return self.robot_points / OFFER_TOTAL

    def rounded(self) -> tuple[int, int]:
        """Integer view for display/logging; internal state stays real."""
        h = round(self.human_points)
        return (int(OFFER_TOTAL) - h, h)


class TimePerception(str, Enum):
    NONE = "none"
    PATIENT = "patient"
    IMPATIENT = "impatient"
    CUSTOM = "custom"


class Conditioning(str, Enum):
    NONE = "none"
    EXCITATORY = "excitatory"
    INHIBITORY = "inhibitory"


@dataclass(frozen=True)
class PersonalityConfig:
    """A personality = time-perception bias + social-conditioning bias."""

    time_perception: TimePerception = TimePerception.NONE
    conditioning: Conditioning = Conditioning.NONE
    custom_tau: float | None = None

    def __post_init__(self) -> None:
        if self.time_perception is TimePerception.CUSTOM:
            if self.custom_tau is None or self.custom_tau <= 0.0:
                raise AffectError("custom time perception requires tau > 0")

    @property
    def tau(self) -> float | None:
        """Decay constant for the configured time perception, if any."""
        if self.time_perception is TimePerception.PATIENT:
            return PATIENT_TAU
        if self.time_perception is TimePerception.IMPATIENT:
            return IMPATIENT_TAU
        if self.time_perception is TimePerception.CUSTOM:
            return self.custom_tau
        return None

    def label(self) -> str:
        return f"{self.time_perception.value}/{self.conditioning.value}"


def euclidean_sq(a: Sequence[float], b: Sequence[float]) -> float:
    """Squared Euclidean distance; the distance kernel for all networks."""
    if len(a) != len(b):
        raise AffectError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return float(sum((x - y) * (x - y) for x, y in zip(a, b)))


def cosine_distance(a: Sequence[float], b: Sequence[float]) -> float:
    """1 - cos(a, b), in [0, 2]. Zero-norm inputs are an error; callers that
    may hit the origin must shift into a strictly positive region first."""
    if len(a) != len(b):
        raise AffectError(f"dimension mismatch: {len(a)} vs {len(b)}")
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0.0 or nb == 0.0:
        raise AffectError("cosine distance undefined for zero-norm input")
    dot = sum(x * y for x, y in zip(a, b))
    return clamp(1.0 - dot / (na * nb), 0.0, 2.0)


def mean_av(points: Iterable[ArousalValence]) -> ArousalValence:
    """Component-wise mean of affect points, clamped back into the square."""
    pts = list(points)
    if not pts:
        raise AffectError("mean of empty affect list; supply a neutral default")
    a = sum(p.arousal for p in pts) / len(pts)
    v = sum(p.valence for p in pts) / len(pts)
    return ArousalValence(a, v)
