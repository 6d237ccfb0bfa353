"""Recurrent Gamma-GWR: a growing network whose neurons carry K context
descriptors fed by a recursive global context, giving each prototype memory
of the recent input trajectory.

This is the substrate for the affective memory, both personality core
biases, and the mood network. It deliberately shares no step logic with the
plain GWR in gwr.py: with K=0 the two must agree observable-for-observable,
and that check only means something if the implementations are independent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .affect import ArousalValence, mean_av
from .gwr import Decoder, ETA_FLOOR, GwrError, f2s

SNAPSHOT_FORMAT = "gamma-gwr-v1"

_ALPHA_TOL = 1e-9


def default_alphas(K: int, alpha_w: float = 0.5) -> tuple[float, tuple[float, ...]]:
    """Recency-weighted modulation: alpha_w mass on the current input, the
    rest split geometrically over the K contexts (normalized to sum to 1)."""
    if K == 0:
        return 1.0, ()
    if not 0.0 < alpha_w < 1.0:
        raise GwrError(f"alpha_w must be in (0,1) when K > 0: {alpha_w}")
    scale = (1.0 - alpha_w) / (1.0 - 2.0 ** -K)
    return alpha_w, tuple(scale * 2.0 ** -k for k in range(1, K + 1))


@dataclass(frozen=True)
class GammaGwrParams:
    """GWR training constants plus the temporal-context machinery."""

    insertion_threshold: float = 0.9
    habituation_threshold: float = 0.5
    max_edge_age: int = 5
    eps_b: float = 0.1
    eps_n: float = 0.01
    tau_b: float = 0.3
    tau_n: float = 0.1
    kappa: float = 1.05
    K: int = 0
    alpha_w: float | None = None
    alpha_k: tuple[float, ...] | None = None
    beta: float = 0.7

    def __post_init__(self) -> None:
        if not 0.0 < self.insertion_threshold < 1.0:
            raise GwrError(f"insertion_threshold must be in (0,1): {self.insertion_threshold}")
        if not 0.0 < self.habituation_threshold < 1.0:
            raise GwrError(f"habituation_threshold must be in (0,1): {self.habituation_threshold}")
        if self.max_edge_age < 1:
            raise GwrError("max_edge_age must be a positive integer")
        if not 0.0 < self.eps_b < 1.0 or not 0.0 < self.eps_n < 1.0:
            raise GwrError("learning rates must be in (0,1)")
        if self.eps_n > self.eps_b:
            raise GwrError("neighbor rate eps_n must not exceed winner rate eps_b")
        if self.tau_b <= 0.0 or self.tau_n <= 0.0:
            raise GwrError("habituation decay constants must be positive")
        if self.kappa <= 0.0:
            raise GwrError("kappa must be positive")
        if self.K < 0:
            raise GwrError("context order K must be non-negative")
        if not 0.0 < self.beta < 1.0:
            raise GwrError(f"beta must be in (0,1): {self.beta}")
        if self.alpha_w is None or self.alpha_k is None:
            aw, ak = default_alphas(self.K)
            object.__setattr__(self, "alpha_w", aw)
            object.__setattr__(self, "alpha_k", ak)
        else:
            object.__setattr__(self, "alpha_k", tuple(float(a) for a in self.alpha_k))
        self.check_normalization()

    def check_normalization(self) -> None:
        if len(self.alpha_k) != self.K:
            raise GwrError(f"expected {self.K} context weights, got {len(self.alpha_k)}")
        if not 0.0 < self.alpha_w <= 1.0:
            raise GwrError(f"alpha_w must be in (0,1]: {self.alpha_w}")
        if any(a <= 0.0 for a in self.alpha_k):
            raise GwrError("context weights must be positive")
        if any(self.alpha_k[i] < self.alpha_k[i + 1] for i in range(len(self.alpha_k) - 1)):
            raise GwrError("context weights must be non-increasing in k")
        total = self.alpha_w + sum(self.alpha_k)
        if abs(total - 1.0) > _ALPHA_TOL:
            raise GwrError(f"modulation weights must sum to 1, got {total}")


def memory_params() -> GammaGwrParams:
    """Affective-memory row: habituation 0.5, insertion 0.8, max age 5, K=10."""
    return GammaGwrParams(insertion_threshold=0.8, habituation_threshold=0.5,
                          max_edge_age=5, K=10)


def time_core_params() -> GammaGwrParams:
    """Time-perception-core row: habituation 0.5, insertion 0.9, max age 5, K=5."""
    return GammaGwrParams(insertion_threshold=0.9, habituation_threshold=0.5,
                          max_edge_age=5, K=5)


def social_core_params() -> GammaGwrParams:
    """Social-conditioning-core row: habituation 0.5, insertion 0.9, max age 5, K=5."""
    return GammaGwrParams(insertion_threshold=0.9, habituation_threshold=0.5,
                          max_edge_age=5, K=5)


def mood_params() -> GammaGwrParams:
    """Robot-mood row: habituation 0.5, insertion 0.9, max age 5, K=10."""
    return GammaGwrParams(insertion_threshold=0.9, habituation_threshold=0.5,
                          max_edge_age=5, K=10)


@dataclass(frozen=True)
class GammaStepReport:
    bmu: int
    inserted: bool
    distance: float
    activation: float
    bmu_habituation: float
    bootstrap: bool = False


@dataclass
class DecodedBmus:
    """Decoded n-best query result; ``shortfall`` marks a truncated answer
    when fewer neurons exist than were requested."""

    points: list[ArousalValence]
    shortfall: bool = False


class GammaGwrNetwork:
    """Single-writer recurrent growing network; snapshots are shareable."""

    def __init__(self, dim: int, params: GammaGwrParams | None = None) -> None:
        if dim < 1:
            raise GwrError("dimension must be positive")
        self.dim = dim
        self.params = params if params is not None else GammaGwrParams()
        self.weights: list[np.ndarray] = []
        self.contexts: list[np.ndarray] = []  # each (K, dim)
        self.habituation: list[float] = []
        self.edges: dict[tuple[int, int], int] = {}
        self.global_context = np.zeros((self.params.K, dim), dtype=float)
        self.prev_bmu: int | None = None

    # -- queries --------------------------------------------------------

    @property
    def neuron_count(self) -> int:
        return len(self.weights)

    def neighbors(self, i: int) -> list[int]:
        out = [b if a == i else a for (a, b) in self.edges if i in (a, b)]
        return sorted(out)

    def _check_input(self, x: Sequence[float]) -> np.ndarray:
        xa = np.asarray(x, dtype=float)
        if xa.shape != (self.dim,):
            raise GwrError(f"input dimension {xa.shape} does not match network dim {self.dim}")
        return xa

    def recurrent_distance(self, x: Sequence[float], index: int) -> float:
        """Weight-plus-context match for one neuron against the current input
        and current global contexts."""
        xa = self._check_input(x)
        if not 0 <= index < self.neuron_count:
            raise GwrError(f"neuron index {index} out of range")
        p = self.params
        d = p.alpha_w * float(np.sum((xa - self.weights[index]) ** 2))
        for k in range(p.K):
            d += p.alpha_k[k] * float(
                np.sum((self.global_context[k] - self.contexts[index][k]) ** 2))
        return d

    def _all_distances(self, xa: np.ndarray) -> np.ndarray:
        p = self.params
        w = np.stack(self.weights)
        diff = w - xa
        d = p.alpha_w * np.einsum("nd,nd->n", diff, diff)
        if p.K > 0:
            ctx = np.stack(self.contexts)  # (N, K, dim)
            cdiff = self.global_context[None, :, :] - ctx
            d = d + np.einsum("nkd,nkd->nk", cdiff, cdiff) @ np.asarray(p.alpha_k)
        return d

    def find_bmus(self, x: Sequence[float], n: int) -> list[tuple[int, float]]:
        """The n best neurons by recurrent distance, ascending, ties broken
        by lowest index. Read-only (does not advance the context)."""
        xa = self._check_input(x)
        if n < 1 or n > self.neuron_count:
            raise GwrError(f"requested {n} BMUs from {self.neuron_count} neurons")
        d = self._all_distances(xa)
        order = np.argsort(d, kind="stable")[:n]
        return [(int(i), float(d[i])) for i in order]

    # -- the recurrent step ----------------------------------------------

    def update_global_context(self) -> None:
        """Advance C_k from the previous winner's stored descriptors:
        C_k <- beta*w_prev + (1-beta)*c_prev^{k-1}, with c^0 identified with
        the weight. No-op before the first step or after the previous winner
        was pruned."""
        if self.prev_bmu is None or self.params.K == 0:
            return
        beta = self.params.beta
        w_prev = self.weights[self.prev_bmu]
        c_prev = self.contexts[self.prev_bmu]
        new_ctx = np.empty_like(self.global_context)
        for k in range(self.params.K):
            lower = w_prev if k == 0 else c_prev[k - 1]
            new_ctx[k] = beta * w_prev + (1.0 - beta) * lower
        self.global_context = new_ctx

    def _add_neuron(self, w: np.ndarray, ctx: np.ndarray) -> int:
        self.weights.append(np.array(w, dtype=float))
        self.contexts.append(np.array(ctx, dtype=float))
        self.habituation.append(1.0)
        return len(self.weights) - 1

    def _edge_key(self, i: int, j: int) -> tuple[int, int]:
        return (i, j) if i < j else (j, i)

    def _habituate(self, i: int, tau: float) -> None:
        eta = self.habituation[i]
        eta += tau * self.params.kappa * (1.0 - eta) - tau
        self.habituation[i] = max(eta, ETA_FLOOR)

    def _prune(self) -> dict[int, int]:
        max_age = self.params.max_edge_age
        self.edges = {k: a for k, a in self.edges.items() if a <= max_age}
        connected = {i for key in self.edges for i in key}
        keep = [i for i in range(self.neuron_count) if i in connected]
        if len(keep) == self.neuron_count:
            return {i: i for i in keep}
        index_map = {old: new for new, old in enumerate(keep)}
        self.weights = [self.weights[i] for i in keep]
        self.contexts = [self.contexts[i] for i in keep]
        self.habituation = [self.habituation[i] for i in keep]
        self.edges = {
            (index_map[a], index_map[b]): age for (a, b), age in self.edges.items()
        }
        if self.prev_bmu is not None:
            self.prev_bmu = index_map.get(self.prev_bmu)
        return index_map

    def train_step(self, x: Sequence[float]) -> GammaStepReport:
        """One recurrent step: advance context, match, connect, grow-or-adapt
        (weights and contexts), habituate, prune, remember the winner."""
        xa = self._check_input(x)
        self.update_global_context()
        if self.neuron_count < 2:
            idx = self._add_neuron(xa, self.global_context)
            self.prev_bmu = idx
            return GammaStepReport(bmu=idx, inserted=True, distance=0.0,
                                   activation=1.0, bmu_habituation=1.0, bootstrap=True)
        p = self.params
        (b, d_b), (s, _) = self.find_bmus(xa, 2)
        self.edges[self._edge_key(b, s)] = 0
        activation = math.exp(-math.sqrt(d_b))
        eta_b = self.habituation[b]
        inserted = activation < p.insertion_threshold and eta_b < p.habituation_threshold
        if inserted:
            new_w = 0.5 * (self.weights[b] + xa)
            new_c = 0.5 * (self.contexts[b] + self.global_context)
            new = self._add_neuron(new_w, new_c)
            self.edges.pop(self._edge_key(b, s), None)
            self.edges[self._edge_key(new, b)] = 0
            self.edges[self._edge_key(new, s)] = 0
        else:
            nbrs = self.neighbors(b)
            self.weights[b] = self.weights[b] + p.eps_b * eta_b * (xa - self.weights[b])
            self.contexts[b] = self.contexts[b] + p.eps_b * eta_b * (self.global_context - self.contexts[b])
            for j in nbrs:
                eta_j = self.habituation[j]
                self.weights[j] = self.weights[j] + p.eps_n * eta_j * (xa - self.weights[j])
                self.contexts[j] = self.contexts[j] + p.eps_n * eta_j * (self.global_context - self.contexts[j])
            self._habituate(b, p.tau_b)
            for j in nbrs:
                self._habituate(j, p.tau_n)
        for key in list(self.edges):
            if b in key:
                self.edges[key] += 1
        index_map = self._prune()
        self.prev_bmu = index_map.get(b)
        return GammaStepReport(bmu=b, inserted=inserted, distance=d_b,
                               activation=activation, bmu_habituation=eta_b)

    # -- decoded views ----------------------------------------------------

    def decode(self, index: int, decoder: Decoder | None = None) -> ArousalValence:
        if not 0 <= index < self.neuron_count:
            raise GwrError(f"neuron index {index} out of range")
        w = self.weights[index]
        if decoder is None:
            if self.dim != 2:
                raise GwrError("identity decode requires a 2-d network")
            a, v = float(w[0]), float(w[1])
        else:
            a, v = decoder(w)
        return ArousalValence(a, v)

    def bmus_decoded(self, x: Sequence[float], n: int,
                     decoder: Decoder | None = None) -> DecodedBmus:
        """Decode the n best matches for x; flags a shortfall instead of
        erroring when fewer neurons exist."""
        if self.neuron_count == 0:
            raise GwrError("cannot query an untrained network")
        m = min(n, self.neuron_count)
        hits = self.find_bmus(x, m)
        points = [self.decode(i, decoder) for i, _ in hits]
        return DecodedBmus(points=points, shortfall=m < n)

    def mean_decoded(self, decoder: Decoder | None = None) -> ArousalValence:
        if self.neuron_count == 0:
            raise GwrError("mean of an empty network")
        return mean_av(self.decode(i, decoder) for i in range(self.neuron_count))

    # -- persistence -------------------------------------------------------

    def to_snapshot(self) -> dict:
        p = self.params
        return {
            "format": SNAPSHOT_FORMAT,
            "dim": self.dim,
            "params": {
                "insertion_threshold": f2s(p.insertion_threshold),
                "habituation_threshold": f2s(p.habituation_threshold),
                "max_edge_age": p.max_edge_age,
                "eps_b": f2s(p.eps_b),
                "eps_n": f2s(p.eps_n),
                "tau_b": f2s(p.tau_b),
                "tau_n": f2s(p.tau_n),
                "kappa": f2s(p.kappa),
                "K": p.K,
                "alpha_w": f2s(p.alpha_w),
                "alpha_k": [f2s(a) for a in p.alpha_k],
                "beta": f2s(p.beta),
            },
            "neurons": [
                {
                    "w": [f2s(v) for v in w],
                    "c": [[f2s(v) for v in row] for row in ctx],
                    "eta": f2s(eta),
                }
                for w, ctx, eta in zip(self.weights, self.contexts, self.habituation)
            ],
            "edges": [
                {"a": a, "b": b, "age": age}
                for (a, b), age in sorted(self.edges.items())
            ],
            "global_contexts": [[f2s(v) for v in row] for row in self.global_context],
            "prev_bmu": self.prev_bmu,
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> "GammaGwrNetwork":
        if snap.get("format") != SNAPSHOT_FORMAT:
            raise GwrError(f"unsupported snapshot format: {snap.get('format')}")
        d = snap["params"]
        params = GammaGwrParams(
            insertion_threshold=float(d["insertion_threshold"]),
            habituation_threshold=float(d["habituation_threshold"]),
            max_edge_age=int(d["max_edge_age"]),
            eps_b=float(d["eps_b"]),
            eps_n=float(d["eps_n"]),
            tau_b=float(d["tau_b"]),
            tau_n=float(d["tau_n"]),
            kappa=float(d["kappa"]),
            K=int(d["K"]),
            alpha_w=float(d["alpha_w"]),
            alpha_k=tuple(float(a) for a in d["alpha_k"]),
            beta=float(d["beta"]),
        )
        net = cls(dim=int(snap["dim"]), params=params)
        for n in snap["neurons"]:
            net.weights.append(np.array([float(v) for v in n["w"]], dtype=float))
            net.contexts.append(np.array(
                [[float(v) for v in row] for row in n["c"]], dtype=float).reshape(params.K, net.dim))
            net.habituation.append(float(n["eta"]))
        for e in snap["edges"]:
            net.edges[(int(e["a"]), int(e["b"]))] = int(e["age"])
        net.global_context = np.array(
            [[float(v) for v in row] for row in snap["global_contexts"]],
            dtype=float).reshape(params.K, net.dim)
        net.prev_bmu = snap["prev_bmu"]
        return net

    def dumps(self) -> str:
        return json.dumps(self.to_snapshot(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def loads(cls, text: str) -> "GammaGwrNetwork":
        return cls.from_snapshot(json.loads(text))
