"""The Ultimatum Game environment: offer mechanics, the piecewise stochastic
acceptance model, the episode lifecycle, and the dual offer/mood reward.

One "interaction" is an offer plus the respondent's decision on it. The
proposer opens with an unfair offer, and each rejection triggers a listening
window (affect burst into the mood stack) followed by a policy update of the
offer. Negotiation aborts after a fixed number of consecutive rejections.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Protocol, Sequence

import numpy as np

from .affect import ArousalValence, Offer, OFFER_TOTAL, cosine_distance
from .mood import PersonalityMood

MOOD_SHIFT = 1.0 + 1e-6  # lifts moods into the positive quadrant for the cosine term


class GameError(ValueError):
    """Raised on episode/contract violations."""


class Decision(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"


class Status(str, Enum):
    ACTIVE = "active"
    ACCEPTED = "accepted"
    ABORTED = "aborted"


@dataclass(frozen=True)
class GameConfig:
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

    def __post_init__(self) -> None:
        if self.max_rejections < 1:
            raise GameError("max_rejections must be at least 1")
        if not 0.0 < self.action_scale <= 50.0:
            raise GameError(f"action_scale must be in (0, 50]: {self.action_scale}")
        if not 0.0 <= self.first_offer_human_min <= self.first_offer_human_max <= OFFER_TOTAL:
            raise GameError("first-offer bounds out of order")
        if not 0.0 < self.accept_low < self.accept_linear < self.accept_full <= 1.0:
            raise GameError("acceptance breakpoints out of order")


@dataclass(frozen=True)
class HistoryEntry:
    offer: Offer
    decision: Decision
    mood: ArousalValence


@dataclass
class NegotiationState:
    """One episode's mutable state; status only ever leaves ACTIVE once."""

    offer: Offer
    round: int = 0  # consecutive rejections so far
    status: Status = Status.ACTIVE
    history: list[HistoryEntry] = field(default_factory=list)

    def require_active(self) -> None:
        if self.status is not Status.ACTIVE:
            raise GameError(f"episode already terminal ({self.status.value})")

    def finish(self, status: Status) -> None:
        self.require_active()
        if status is Status.ACTIVE:
            raise GameError("cannot finish into ACTIVE")
        self.status = status


def acceptance_probability(human_fraction: float, cfg: GameConfig | None = None) -> float:
    """Piecewise acceptance model on the fraction offered to the human:
    certain at 0.7+, proportional in [0.5, 0.7), a long shot in [0.4, 0.5),
    hopeless below."""
    cfg = cfg if cfg is not None else GameConfig()
    if not 0.0 <= human_fraction <= 1.0:
        raise GameError(f"offer fraction out of [0,1]: {human_fraction}")
    if human_fraction >= cfg.accept_full:
        return 1.0
    if human_fraction >= cfg.accept_linear:
        return human_fraction
    if human_fraction >= cfg.accept_low:
        return cfg.accept_low_p
    return 0.0


class Respondent(Protocol):
    def decide(self, offer: Offer, rng: np.random.Generator) -> Decision: ...


class StochasticRespondent:
    """Accepts with the piecewise probability of the offered fraction."""

    def __init__(self, cfg: GameConfig | None = None) -> None:
        self.cfg = cfg if cfg is not None else GameConfig()

    def decide(self, offer: Offer, rng: np.random.Generator) -> Decision:
        p = acceptance_probability(offer.human_fraction, self.cfg)
        return Decision.ACCEPT if rng.random() < p else Decision.REJECT


class ScriptedRespondent:
    """Plays back a fixed decision sequence (repeating the last one)."""

    def __init__(self, decisions: Sequence[Decision] | Decision) -> None:
        if isinstance(decisions, Decision):
            decisions = [decisions]
        if not decisions:
            raise GameError("scripted respondent needs at least one decision")
        self.decisions = list(decisions)
        self._i = 0

    def decide(self, offer: Offer, rng: np.random.Generator) -> Decision:
        d = self.decisions[min(self._i, len(self.decisions) - 1)]
        self._i += 1
        return d


def respond(state: NegotiationState, rng: np.random.Generator,
            cfg: GameConfig | None = None) -> Decision:
    """Stochastic decision on the current offer of an active episode."""
    state.require_active()
    return StochasticRespondent(cfg).decide(state.offer, rng)


def apply_update(state: NegotiationState, delta: float,
                 cfg: GameConfig | None = None) -> NegotiationState:
    """Move the human share by delta*action_scale points, clamped to the
    playable range; the robot share absorbs the difference."""
    cfg = cfg if cfg is not None else GameConfig()
    state.require_active()
    new_h = state.offer.human_points + float(delta) * cfg.action_scale
    state.offer = Offer.from_human_points(new_h)
    return state


def _sign(x: float) -> float:
    return 1.0 if x > 0.0 else -1.0 if x < 0.0 else 0.0


def step_reward(prev_offer: Offer, new_offer: Offer,
                prev_mood: ArousalValence, new_mood: ArousalValence,
                outcome: Status, cfg: GameConfig | None = None) -> float:
    """Offer shaping + signed mood change + terminal bonus/penalty.

    The offer term pays for conceding toward the human while the robot still
    keeps the majority; the mood term pays (or charges) the angular mood
    displacement with the sign of the valence change."""
    cfg = cfg if cfg is not None else GameConfig()
    r = 0.0
    if (new_offer.human_points > prev_offer.human_points
            and new_offer.robot_points > OFFER_TOTAL / 2.0):
        r += cfg.w_offer
    shift_prev = (prev_mood.arousal + MOOD_SHIFT, prev_mood.valence + MOOD_SHIFT)
    shift_new = (new_mood.arousal + MOOD_SHIFT, new_mood.valence + MOOD_SHIFT)
    r += cfg.w_mood * _sign(new_mood.valence - prev_mood.valence) \
        * cosine_distance(shift_prev, shift_new)
    if outcome is Status.ACCEPTED:
        r += cfg.terminal_accept_scale * new_offer.robot_fraction
    elif outcome is Status.ABORTED:
        r += cfg.abort_penalty
    return r


def state_vector(mood: ArousalValence, offer: Offer) -> np.ndarray:
    """The 4-tuple RL state: mood plus the normalized offer split."""
    return np.array([mood.arousal, mood.valence,
                     offer.robot_fraction, offer.human_fraction], dtype=float)


class AffectSource(Protocol):
    def reset(self, rng: np.random.Generator) -> None: ...
    def burst(self, offer: Offer, consecutive_rejections: int) -> list[ArousalValence]: ...


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: float
    reward: float
    next_state: np.ndarray
    done: bool


@dataclass(frozen=True)
class EpisodeResult:
    status: Status
    rounds: int
    first_offer: Offer
    final_offer: Offer
    episode_return: float
    max_human_points: float
    history: tuple[HistoryEntry, ...]


PolicyFn = Callable[[np.ndarray], float]
TransitionSink = Callable[[Transition], None]


def run_episode(policy_fn: PolicyFn,
                respondent: Respondent,
                mood: PersonalityMood,
                cfg: GameConfig,
                rng: np.random.Generator | int,
                affect_source: AffectSource,
                transition_sink: TransitionSink | None = None) -> EpisodeResult:
    """Play one negotiation: present offers, listen after rejections, let the
    policy move the split, stop on acceptance or after max_rejections.

    Emits (state, action, reward, next_state, done) transitions for every
    policy action once its outcome is known."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    affect_source.reset(rng)
    h0 = rng.uniform(cfg.first_offer_human_min, cfg.first_offer_human_max)
    state = NegotiationState(offer=Offer.from_human_points(h0))
    first_offer = state.offer
    max_human = state.offer.human_points
    total_reward = 0.0
    pending: tuple[np.ndarray, float, Offer, ArousalValence] | None = None

    def settle(outcome: Status, mood_now: ArousalValence, done: bool) -> None:
        nonlocal total_reward, pending
        if pending is None:
            return
        s_vec, action, prev_offer, prev_mood = pending
        r = step_reward(prev_offer, state.offer, prev_mood, mood_now, outcome, cfg)
        total_reward += r
        if transition_sink is not None:
            transition_sink(Transition(state=s_vec, action=action, reward=r,
                                       next_state=state_vector(mood_now, state.offer),
                                       done=done))
        pending = None

    while state.status is Status.ACTIVE:
        decision = respondent.decide(state.offer, rng)
        mood_now = mood.current_mood()
        state.history.append(HistoryEntry(offer=state.offer, decision=decision, mood=mood_now))
        if decision is Decision.ACCEPT:
            settle(Status.ACCEPTED, mood_now, done=True)
            state.finish(Status.ACCEPTED)
            break
        state.round += 1
        if state.round >= cfg.max_rejections:
            settle(Status.ABORTED, mood_now, done=True)
            state.finish(Status.ABORTED)
            break
        burst = affect_source.burst(state.offer, state.round)
        snap = mood.observe(burst)
        settle(Status.ACTIVE, snap.mean, done=False)
        s_vec = state_vector(snap.mean, state.offer)
        action = float(np.clip(policy_fn(s_vec), -1.0, 1.0))
        prev_offer = state.offer
        apply_update(state, action, cfg)
        max_human = max(max_human, state.offer.human_points)
        pending = (s_vec, action, prev_offer, snap.mean)

    return EpisodeResult(status=state.status,
                         rounds=len(state.history),
                         first_offer=first_offer,
                         final_offer=state.offer,
                         episode_return=total_reward,
                         max_human_points=max_human,
                         history=tuple(state.history))
