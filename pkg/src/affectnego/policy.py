"""Deterministic policy gradient learner for the negotiation action.

A bounded-output actor (4 -> 50 relu -> 1 tanh) proposes the offer update;
a Q critic (state 4 -> 50, action 1 -> 50, concat -> 10 -> 1 linear) scores
it. Targets track slowly, experience replays uniformly. The networks are
explicit matrix arithmetic with hand-derived gradients: at this size a
framework buys nothing, and the finite-difference oracle stays decisive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .affect import ArousalValence, PersonalityConfig, clamp
from .gwr import f2s
from .mood import build_personality_mood
from .stimuli import (
    RespondentAffectParams,
    RespondentAffectSource,
    TrajectoryAffectSource,
    synth_decay_trajectory,
    synth_random_states,
)
from .ultimatum import (
    GameConfig,
    Status,
    StochasticRespondent,
    Transition,
    run_episode,
)

STATE_DIM = 4
ACTOR_HIDDEN = 50
CRITIC_BRANCH = 50
CRITIC_MERGE = 10

POLICY_SNAPSHOT_FORMAT = "policy-v1"


class PolicyError(ValueError):
    """Raised on learner contract violations."""


class PolicyDivergence(RuntimeError):
    """Raised when Q estimates blow past the divergence guard."""


@dataclass(frozen=True)
class AgentState:
    """Mood plus normalized offer split, the 4-tuple the networks consume."""

    mood_a: float
    mood_v: float
    offer_r: float
    offer_h: float

    def __post_init__(self) -> None:
        if abs(self.offer_r + self.offer_h - 1.0) > 1e-9:
            raise PolicyError("normalized offer shares must sum to 1")

    def as_vector(self) -> np.ndarray:
        return np.array([self.mood_a, self.mood_v, self.offer_r, self.offer_h], dtype=float)

    @classmethod
    def from_parts(cls, mood: ArousalValence, offer_r: float, offer_h: float) -> "AgentState":
        return cls(mood.arousal, mood.valence, offer_r, offer_h)


@dataclass(frozen=True)
class TrainConfig:
    discount: float = 0.95
    soft_update: float = 0.005
    batch_size: int = 64
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    noise_sigma_start: float = 0.3
    noise_sigma_end: float = 0.05
    warmup_transitions: int = 500
    episodes: int = 2000
    buffer_capacity: int = 50_000
    momentum: float = 0.0
    q_guard: float = 1e4
    pretrain_samples: int = 500
    pretrain_tau: float = 0.08
    pretrain_traj_steps: int = 21
    live_affect_fraction: float = 0.5
    with_memory: bool = True
    seed: int = 14

    def __post_init__(self) -> None:
        if not 0.0 < self.discount < 1.0:
            raise PolicyError("discount must be in (0,1)")
        if not 0.0 < self.soft_update <= 1.0:
            raise PolicyError("soft_update rate must be in (0,1]")
        if self.batch_size < 1 or self.buffer_capacity < self.batch_size:
            raise PolicyError("bad batch/buffer sizing")
        if not 0.0 <= self.momentum < 1.0:
            raise PolicyError("momentum must be in [0,1)")
        if not 0.0 <= self.live_affect_fraction <= 1.0:
            raise PolicyError("live_affect_fraction must be in [0,1]")

    def noise_sigma(self, episode: int) -> float:
        """Linear decay across the episode budget."""
        if self.episodes <= 1:
            return self.noise_sigma_end
        frac = min(1.0, episode / (self.episodes - 1))
        return self.noise_sigma_start + frac * (self.noise_sigma_end - self.noise_sigma_start)


Params = dict[str, np.ndarray]


def _uniform_fan_in(rng: np.random.Generator, out_dim: int, in_dim: int) -> np.ndarray:
    bound = 1.0 / math.sqrt(in_dim)
    return rng.uniform(-bound, bound, size=(out_dim, in_dim))


def _bias_fan_in(rng: np.random.Generator, out_dim: int, in_dim: int) -> np.ndarray:
    bound = 1.0 / math.sqrt(in_dim)
    return rng.uniform(-bound, bound, size=out_dim)


def init_actor(rng: np.random.Generator) -> Params:
    return {
        "W1": _uniform_fan_in(rng, ACTOR_HIDDEN, STATE_DIM),
        "b1": _bias_fan_in(rng, ACTOR_HIDDEN, STATE_DIM),
        "W2": _uniform_fan_in(rng, 1, ACTOR_HIDDEN),
        "b2": _bias_fan_in(rng, 1, ACTOR_HIDDEN),
    }


def init_critic(rng: np.random.Generator) -> Params:
    return {
        "Ws": _uniform_fan_in(rng, CRITIC_BRANCH, STATE_DIM),
        "bs": _bias_fan_in(rng, CRITIC_BRANCH, STATE_DIM),
        "Wa": _uniform_fan_in(rng, CRITIC_BRANCH, 1),
        "ba": _bias_fan_in(rng, CRITIC_BRANCH, 1),
        "Wh": _uniform_fan_in(rng, CRITIC_MERGE, 2 * CRITIC_BRANCH),
        "bh": _bias_fan_in(rng, CRITIC_MERGE, 2 * CRITIC_BRANCH),
        "Wo": _uniform_fan_in(rng, 1, CRITIC_MERGE),
        "bo": _bias_fan_in(rng, 1, CRITIC_MERGE),
    }


def actor_forward(p: Params, S: np.ndarray) -> tuple[np.ndarray, dict]:
    Z1 = S @ p["W1"].T + p["b1"]
    H = np.maximum(Z1, 0.0)
    Z2 = H @ p["W2"].T + p["b2"]
    A = np.tanh(Z2)
    return A, {"S": S, "Z1": Z1, "H": H, "A": A}


def critic_forward(p: Params, S: np.ndarray, A: np.ndarray) -> tuple[np.ndarray, dict]:
    Zs = S @ p["Ws"].T + p["bs"]
    Hs = np.maximum(Zs, 0.0)
    Za = A @ p["Wa"].T + p["ba"]
    Ha = np.maximum(Za, 0.0)
    Cat = np.concatenate([Hs, Ha], axis=1)
    Zh = Cat @ p["Wh"].T + p["bh"]
    Hh = np.maximum(Zh, 0.0)
    Q = Hh @ p["Wo"].T + p["bo"]
    return Q, {"S": S, "A": A, "Zs": Zs, "Hs": Hs, "Za": Za, "Ha": Ha,
               "Cat": Cat, "Zh": Zh, "Hh": Hh, "Q": Q}


def act(actor: Params, state: AgentState | np.ndarray,
        noise_sigma: float = 0.0, rng: np.random.Generator | None = None) -> float:
    """Deterministic action for one state, optionally with clamped Gaussian
    exploration noise."""
    vec = state.as_vector() if isinstance(state, AgentState) else np.asarray(state, dtype=float)
    if vec.shape != (STATE_DIM,):
        raise PolicyError(f"state must have dimension {STATE_DIM}")
    A, _ = actor_forward(actor, vec[None, :])
    a = float(A[0, 0])
    if noise_sigma > 0.0:
        if rng is None:
            raise PolicyError("exploration noise requires an rng")
        a += float(rng.normal(0.0, noise_sigma))
    return clamp(a, -1.0, 1.0)


def critic_q(critic: Params, state: AgentState | np.ndarray, action: float) -> float:
    vec = state.as_vector() if isinstance(state, AgentState) else np.asarray(state, dtype=float)
    if vec.shape != (STATE_DIM,):
        raise PolicyError(f"state must have dimension {STATE_DIM}")
    Q, _ = critic_forward(critic, vec[None, :], np.array([[float(action)]]))
    return float(Q[0, 0])


def _critic_backprop(p: Params, cache: dict, dQ: np.ndarray) -> tuple[Params, np.ndarray]:
    """Backprop an upstream dL/dQ through the critic; returns parameter
    gradients and dL/dA."""
    grads: Params = {}
    grads["Wo"] = dQ.T @ cache["Hh"]
    grads["bo"] = dQ.sum(axis=0)
    dHh = dQ @ p["Wo"]
    dZh = dHh * (cache["Zh"] > 0.0)
    grads["Wh"] = dZh.T @ cache["Cat"]
    grads["bh"] = dZh.sum(axis=0)
    dCat = dZh @ p["Wh"]
    dZs = dCat[:, :CRITIC_BRANCH] * (cache["Zs"] > 0.0)
    dZa = dCat[:, CRITIC_BRANCH:] * (cache["Za"] > 0.0)
    grads["Ws"] = dZs.T @ cache["S"]
    grads["bs"] = dZs.sum(axis=0)
    grads["Wa"] = dZa.T @ cache["A"]
    grads["ba"] = dZa.sum(axis=0)
    dA = dZa @ p["Wa"]
    return grads, dA


def critic_loss_grads(p: Params, S: np.ndarray, A: np.ndarray,
                      y: np.ndarray) -> tuple[float, Params]:
    """Mean squared TD error and its gradient w.r.t. every critic parameter."""
    Q, cache = critic_forward(p, S, A)
    err = Q - y
    loss = float(np.mean(err ** 2))
    dQ = 2.0 * err / err.shape[0]
    grads, _ = _critic_backprop(p, cache, dQ)
    return loss, grads


def actor_objective_grads(actor: Params, critic: Params,
                          S: np.ndarray) -> tuple[float, Params]:
    """Mean Q(s, mu(s)) and its gradient w.r.t. every actor parameter
    (critic held fixed)."""
    A, acache = actor_forward(actor, S)
    Q, ccache = critic_forward(critic, S, A)
    objective = float(np.mean(Q))
    dQ = np.full_like(Q, 1.0 / Q.shape[0])
    _, dA = _critic_backprop(critic, ccache, dQ)
    grads: Params = {}
    dZ2 = dA * (1.0 - acache["A"] ** 2)
    grads["W2"] = dZ2.T @ acache["H"]
    grads["b2"] = dZ2.sum(axis=0)
    dH = dZ2 @ actor["W2"]
    dZ1 = dH * (acache["Z1"] > 0.0)
    grads["W1"] = dZ1.T @ S
    grads["b1"] = dZ1.sum(axis=0)
    return objective, grads


def flatten_params(p: Params) -> tuple[np.ndarray, list[tuple[str, tuple[int, ...]]]]:
    spec = [(k, p[k].shape) for k in sorted(p)]
    vec = np.concatenate([p[k].ravel() for k, _ in spec])
    return vec, spec


def unflatten_params(vec: np.ndarray, spec: list[tuple[str, tuple[int, ...]]]) -> Params:
    out: Params = {}
    i = 0
    for k, shape in spec:
        n = int(np.prod(shape))
        out[k] = vec[i:i + n].reshape(shape).copy()
        i += n
    return out


def soft_update(target: Params, source: Params, rho: float) -> None:
    for k in target:
        target[k] = rho * source[k] + (1.0 - rho) * target[k]


class ReplayBuffer:
    """Fixed-capacity ring of transitions; batches sample uniformly without
    replacement."""

    def __init__(self, capacity: int = 50_000) -> None:
        if capacity < 1:
            raise PolicyError("capacity must be positive")
        self.capacity = capacity
        self._s = np.zeros((capacity, STATE_DIM))
        self._a = np.zeros((capacity, 1))
        self._r = np.zeros((capacity, 1))
        self._s2 = np.zeros((capacity, STATE_DIM))
        self._d = np.zeros((capacity, 1))
        self.size = 0
        self._idx = 0

    def add(self, t: Transition) -> None:
        i = self._idx
        self._s[i] = t.state
        self._a[i, 0] = t.action
        self._r[i, 0] = t.reward
        self._s2[i] = t.next_state
        self._d[i, 0] = 1.0 if t.done else 0.0
        self._idx = (self._idx + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch: int, rng: np.random.Generator):
        if batch > self.size:
            raise PolicyError(f"batch {batch} exceeds buffer size {self.size}")
        idx = rng.choice(self.size, size=batch, replace=False)
        return (self._s[idx], self._a[idx], self._r[idx], self._s2[idx], self._d[idx])


class DdpgAgent:
    """Actor/critic parameter sets, slow-tracking targets, replay buffer."""

    def __init__(self, cfg: TrainConfig, rng: np.random.Generator) -> None:
        self.cfg = cfg
        self.actor = init_actor(rng)
        self.critic = init_critic(rng)
        self.actor_target = {k: v.copy() for k, v in self.actor.items()}
        self.critic_target = {k: v.copy() for k, v in self.critic.items()}
        self.buffer = ReplayBuffer(cfg.buffer_capacity)
        self._vel_actor: Params = {k: np.zeros_like(v) for k, v in self.actor.items()}
        self._vel_critic: Params = {k: np.zeros_like(v) for k, v in self.critic.items()}

    def act(self, state, noise_sigma: float = 0.0,
            rng: np.random.Generator | None = None) -> float:
        return act(self.actor, state, noise_sigma, rng)

    def _step(self, params: Params, grads: Params, vel: Params,
              lr: float, direction: float) -> None:
        m = self.cfg.momentum
        for k in params:
            if m > 0.0:
                vel[k] = m * vel[k] + grads[k]
                params[k] = params[k] + direction * lr * vel[k]
            else:
                params[k] = params[k] + direction * lr * grads[k]

    def train_batch(self, rng: np.random.Generator) -> dict[str, float]:
        """One learner update: critic descends the TD loss, actor ascends the
        critic, targets soft-track both."""
        cfg = self.cfg
        if self.buffer.size < cfg.batch_size:
            raise PolicyError("buffer smaller than a batch")
        S, A, R, S2, D = self.buffer.sample(cfg.batch_size, rng)
        A2, _ = actor_forward(self.actor_target, S2)
        Q2, _ = critic_forward(self.critic_target, S2, A2)
        y = R + cfg.discount * (1.0 - D) * Q2
        if float(np.max(np.abs(y))) > cfg.q_guard:
            raise PolicyDivergence(f"critic target exceeded guard {cfg.q_guard}")
        closs, cgrads = critic_loss_grads(self.critic, S, A, y)
        self._step(self.critic, cgrads, self._vel_critic, cfg.critic_lr, -1.0)
        aobj, agrads = actor_objective_grads(self.actor, self.critic, S)
        self._step(self.actor, agrads, self._vel_actor, cfg.actor_lr, +1.0)
        soft_update(self.actor_target, self.actor, cfg.soft_update)
        soft_update(self.critic_target, self.critic, cfg.soft_update)
        return {"critic_loss": closs, "actor_objective": aobj}

    # -- persistence --------------------------------------------------------

    def to_snapshot(self) -> dict:
        def enc(p: Params) -> dict:
            return {k: [[f2s(x) for x in row] for row in np.atleast_2d(v)]
                    for k, v in p.items()}
        cfg = self.cfg
        return {
            "format": POLICY_SNAPSHOT_FORMAT,
            "architecture": {"state_dim": STATE_DIM, "actor_hidden": ACTOR_HIDDEN,
                             "critic_branch": CRITIC_BRANCH, "critic_merge": CRITIC_MERGE},
            "actor": enc(self.actor),
            "critic": enc(self.critic),
            "actor_target": enc(self.actor_target),
            "critic_target": enc(self.critic_target),
            "train_config": {
                "discount": f2s(cfg.discount), "soft_update": f2s(cfg.soft_update),
                "batch_size": cfg.batch_size, "actor_lr": f2s(cfg.actor_lr),
                "critic_lr": f2s(cfg.critic_lr),
                "noise_sigma_start": f2s(cfg.noise_sigma_start),
                "noise_sigma_end": f2s(cfg.noise_sigma_end),
                "warmup_transitions": cfg.warmup_transitions,
                "episodes": cfg.episodes, "buffer_capacity": cfg.buffer_capacity,
                "momentum": f2s(cfg.momentum), "q_guard": f2s(cfg.q_guard),
                "pretrain_samples": cfg.pretrain_samples,
                "pretrain_tau": f2s(cfg.pretrain_tau),
                "pretrain_traj_steps": cfg.pretrain_traj_steps,
                "with_memory": cfg.with_memory,
                "seed": cfg.seed,
            },
            "seed": cfg.seed,
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> "DdpgAgent":
        if snap.get("format") != POLICY_SNAPSHOT_FORMAT:
            raise PolicyError(f"unsupported policy snapshot: {snap.get('format')}")
        arch = snap["architecture"]
        if (arch["state_dim"], arch["actor_hidden"], arch["critic_branch"],
                arch["critic_merge"]) != (STATE_DIM, ACTOR_HIDDEN, CRITIC_BRANCH, CRITIC_MERGE):
            raise PolicyError(f"architecture mismatch: {arch}")
        tc = snap["train_config"]
        cfg = TrainConfig(
            discount=float(tc["discount"]), soft_update=float(tc["soft_update"]),
            batch_size=int(tc["batch_size"]), actor_lr=float(tc["actor_lr"]),
            critic_lr=float(tc["critic_lr"]),
            noise_sigma_start=float(tc["noise_sigma_start"]),
            noise_sigma_end=float(tc["noise_sigma_end"]),
            warmup_transitions=int(tc["warmup_transitions"]),
            episodes=int(tc["episodes"]), buffer_capacity=int(tc["buffer_capacity"]),
            momentum=float(tc["momentum"]), q_guard=float(tc["q_guard"]),
            pretrain_samples=int(tc["pretrain_samples"]),
            pretrain_tau=float(tc["pretrain_tau"]),
            pretrain_traj_steps=int(tc["pretrain_traj_steps"]),
            with_memory=bool(tc["with_memory"]),
            seed=int(tc["seed"]),
        )
        agent = cls(cfg, np.random.default_rng(0))

        def dec(d: dict, like: Params) -> Params:
            out = {}
            for k, rows in d.items():
                arr = np.array([[float(x) for x in row] for row in rows])
                out[k] = arr.reshape(like[k].shape)
            return out

        agent.actor = dec(snap["actor"], agent.actor)
        agent.critic = dec(snap["critic"], agent.critic)
        agent.actor_target = dec(snap["actor_target"], agent.actor_target)
        agent.critic_target = dec(snap["critic_target"], agent.critic_target)
        return agent

    def dumps(self) -> str:
        return json.dumps(self.to_snapshot(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def loads(cls, text: str) -> "DdpgAgent":
        return cls.from_snapshot(json.loads(text))


def save_policy(agent: DdpgAgent, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(agent.dumps())


def load_policy(path: str) -> DdpgAgent:
    with open(path, encoding="utf-8") as fh:
        return DdpgAgent.loads(fh.read())


# -- pre-training -------------------------------------------------------------

@dataclass(frozen=True)
class EpisodeCurve:
    episode: int
    episode_return: float
    interactions: int
    accepted_human_share: float | None
    status: str
    noise_sigma: float


def curves_to_csv(curves: Iterable[EpisodeCurve]) -> str:
    rows = ["episode,return,interactions,accepted_share,status,noise_sigma"]
    for c in curves:
        share = f2s(c.accepted_human_share) if c.accepted_human_share is not None else ""
        rows.append(f"{c.episode},{f2s(c.episode_return)},{c.interactions},"
                    f"{share},{c.status},{f2s(c.noise_sigma)}")
    return "\n".join(rows) + "\n"


def build_pretrain_pool(cfg: TrainConfig,
                        extra_traces: Iterable[list[ArousalValence]] = ()) -> list[list[ArousalValence]]:
    """Simulated mood dynamics for pre-training: clipped-normal start points
    each decaying over an episode's worth of steps, plus any replayed traces."""
    starts = synth_random_states(cfg.pretrain_samples, seed=cfg.seed)
    pool = [synth_decay_trajectory(s, cfg.pretrain_tau, cfg.pretrain_traj_steps).points()
            for s in starts]
    pool.extend(list(t) for t in extra_traces)
    return pool


def pretrain(cfg: TrainConfig, game_cfg: GameConfig | None = None,
             extra_traces: Iterable[list[ArousalValence]] = (),
             affect_params: RespondentAffectParams | None = None,
             progress: bool = False) -> tuple[DdpgAgent, list[EpisodeCurve]]:
    """Train against the stochastic acceptance model. Mood inputs mix two
    regimes: replayed simulated-dynamics trajectories (state-space coverage)
    and live respondent-model affect reacting to the agent's actual offers
    (so the mood reward carries an action-coupled signal). Returns the
    learner and per-episode learning curves."""
    game_cfg = game_cfg if game_cfg is not None else GameConfig()
    ss = np.random.SeedSequence(cfg.seed)
    rng_init, rng_noise, rng_sample, rng_mode = (np.random.default_rng(c) for c in ss.spawn(4))
    agent = DdpgAgent(cfg, rng_init)
    pool = build_pretrain_pool(cfg, extra_traces)
    pool_source = TrajectoryAffectSource(pool)
    live_source = RespondentAffectSource(affect_params)
    respondent = StochasticRespondent(game_cfg)
    curves: list[EpisodeCurve] = []

    for ep in range(cfg.episodes):
        sigma = cfg.noise_sigma(ep)
        mood = build_personality_mood(PersonalityConfig(), seed=cfg.seed,
                                      with_memory=cfg.with_memory)
        source = live_source if rng_mode.random() < cfg.live_affect_fraction else pool_source

        def policy_fn(state_vec: np.ndarray) -> float:
            return agent.act(state_vec, noise_sigma=sigma, rng=rng_noise)

        def sink(t: Transition) -> None:
            agent.buffer.add(t)
            if agent.buffer.size >= max(cfg.warmup_transitions, cfg.batch_size):
                agent.train_batch(rng_sample)

        result = run_episode(policy_fn, respondent, mood, game_cfg,
                             np.random.default_rng([cfg.seed, 1000 + ep]),
                             source, transition_sink=sink)
        curves.append(EpisodeCurve(
            episode=ep,
            episode_return=result.episode_return,
            interactions=result.rounds,
            accepted_human_share=(result.final_offer.human_fraction
                                  if result.status is Status.ACCEPTED else None),
            status=result.status.value,
            noise_sigma=sigma,
        ))
        if progress and (ep + 1) % 100 == 0:
            recent = curves[-100:]
            accepted = [c.accepted_human_share for c in recent if c.accepted_human_share is not None]
            mean_share = float(np.mean(accepted)) if accepted else float("nan")
            mean_rounds = float(np.mean([c.interactions for c in recent]))
            print(f"episode {ep + 1}/{cfg.episodes}  sigma={sigma:.3f}  "
                  f"mean_rounds={mean_rounds:.2f}  mean_accepted_share={mean_share:.3f}")

    return agent, curves
