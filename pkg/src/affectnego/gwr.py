"""Growing-When-Required network for prototyping a perception feature space.

Online vector quantization that inserts a prototype whenever the best match
is both a poor fit (low activation) and already well-trained (habituated),
so the map grows only where the input distribution demands it. Prototypes
decode to arousal-valence through a pluggable affine decoder (identity when
the feature space is the affect plane itself).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .affect import AffectFrame, ArousalValence

ETA_FLOOR = 1e-3

SNAPSHOT_FORMAT = "gwr-v1"


class GwrError(ValueError):
    """Raised on contract violations in the prototype networks."""


def f2s(x: float) -> str:
    """Float to decimal string with 17 significant digits (exact round-trip)."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class GwrParams:
    """Training constants. Defaults are the perception-network row of the
    self-organizing parameter table; learning rates and habituation decay
    constants are conventional settings, all overridable."""

    insertion_threshold: float = 0.5
    habituation_threshold: float = 0.2
    max_edge_age: int = 50
    eps_b: float = 0.1
    eps_n: float = 0.01
    tau_b: float = 0.3
    tau_n: float = 0.1
    kappa: float = 1.05

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


def perception_params() -> GwrParams:
    """Perception-network row: habituation 0.2, insertion 0.5, max age 50."""
    return GwrParams(insertion_threshold=0.5, habituation_threshold=0.2, max_edge_age=50)


@dataclass(frozen=True)
class AffineDecoder:
    """Affine map from feature space (dim D) to the affect plane."""

    matrix: tuple[tuple[float, ...], ...]
    bias: tuple[float, float] = (0.0, 0.0)

    def __call__(self, w: np.ndarray) -> tuple[float, float]:
        m = np.asarray(self.matrix, dtype=float)
        b = np.asarray(self.bias, dtype=float)
        out = m @ w + b
        return float(out[0]), float(out[1])


Decoder = Callable[[np.ndarray], tuple[float, float]]


@dataclass(frozen=True)
class StepReport:
    """What one training step did; enough to audit the growth gate."""

    bmu: int
    inserted: bool
    distance: float
    activation: float
    bmu_habituation: float
    bootstrap: bool = False


class GwrNetwork:
    """Single-writer growing network; take deep-copy snapshots to share."""

    def __init__(self, dim: int, params: GwrParams | None = None) -> None:
        if dim < 1:
            raise GwrError("dimension must be positive")
        self.dim = dim
        self.params = params if params is not None else GwrParams()
        self.weights: list[np.ndarray] = []
        self.habituation: list[float] = []
        self.edges: dict[tuple[int, int], int] = {}

    # -- basic queries ------------------------------------------------------

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

    def find_bmus(self, x: Sequence[float], n: int) -> list[tuple[int, float]]:
        """The n nearest prototypes by squared Euclidean distance, ascending,
        ties broken by lowest index."""
        xa = self._check_input(x)
        if n < 1 or n > self.neuron_count:
            raise GwrError(f"requested {n} BMUs from {self.neuron_count} neurons")
        w = np.stack(self.weights)
        diff = w - xa
        d = np.einsum("nd,nd->n", diff, diff)
        order = np.argsort(d, kind="stable")[:n]
        return [(int(i), float(d[i])) for i in order]

    # -- mutation -----------------------------------------------------------

    def _add_neuron(self, w: np.ndarray) -> int:
        self.weights.append(np.array(w, dtype=float))
        self.habituation.append(1.0)
        return len(self.weights) - 1

    def _edge_key(self, i: int, j: int) -> tuple[int, int]:
        return (i, j) if i < j else (j, i)

    def _set_edge(self, i: int, j: int, age: int = 0) -> None:
        self.edges[self._edge_key(i, j)] = age

    def _habituate(self, i: int, tau: float) -> None:
        eta = self.habituation[i]
        eta += tau * self.params.kappa * (1.0 - eta) - tau
        self.habituation[i] = max(eta, ETA_FLOOR)

    def _age_edges_of(self, i: int) -> None:
        for key in list(self.edges):
            if i in key:
                self.edges[key] += 1

    def _prune(self) -> None:
        max_age = self.params.max_edge_age
        self.edges = {k: a for k, a in self.edges.items() if a <= max_age}
        connected = {i for key in self.edges for i in key}
        orphans = [i for i in range(self.neuron_count) if i not in connected]
        if orphans:
            self._remove_neurons(orphans)

    def _remove_neurons(self, indices: list[int]) -> dict[int, int]:
        """Drop the given neurons; returns the old->new index map."""
        drop = set(indices)
        index_map: dict[int, int] = {}
        new_w: list[np.ndarray] = []
        new_h: list[float] = []
        for old in range(self.neuron_count):
            if old in drop:
                continue
            index_map[old] = len(new_w)
            new_w.append(self.weights[old])
            new_h.append(self.habituation[old])
        self.weights = new_w
        self.habituation = new_h
        self.edges = {
            (index_map[a], index_map[b]): age
            for (a, b), age in self.edges.items()
            if a in index_map and b in index_map
        }
        return index_map

    def train_step(self, x: Sequence[float]) -> StepReport:
        """One online step: match, connect, grow-or-adapt, habituate, prune."""
        xa = self._check_input(x)
        if self.neuron_count < 2:
            # Bootstrap: the first two samples become the initial prototypes.
            idx = self._add_neuron(xa)
            return StepReport(bmu=idx, inserted=True, distance=0.0,
                              activation=1.0, bmu_habituation=1.0, bootstrap=True)
        p = self.params
        (b, d_b), (s, _) = self.find_bmus(xa, 2)
        self._set_edge(b, s, 0)
        activation = math.exp(-math.sqrt(d_b))
        eta_b = self.habituation[b]
        inserted = activation < p.insertion_threshold and eta_b < p.habituation_threshold
        if inserted:
            new = self._add_neuron(0.5 * (self.weights[b] + xa))
            self.edges.pop(self._edge_key(b, s), None)
            self._set_edge(new, b, 0)
            self._set_edge(new, s, 0)
        else:
            nbrs = self.neighbors(b)
            self.weights[b] = self.weights[b] + p.eps_b * eta_b * (xa - self.weights[b])
            for j in nbrs:
                self.weights[j] = self.weights[j] + p.eps_n * self.habituation[j] * (xa - self.weights[j])
            self._habituate(b, p.tau_b)
            for j in nbrs:
                self._habituate(j, p.tau_n)
        self._age_edges_of(b)
        self._prune()
        return StepReport(bmu=b, inserted=inserted, distance=d_b,
                          activation=activation, bmu_habituation=eta_b)

    def fit(self, stream: Sequence[AffectFrame], epochs: int = 1) -> tuple["GwrNetwork", list[float]]:
        """Train on the stream for the given number of epochs, in order.
        Returns the network and a per-epoch mean quantization-error trace."""
        if not stream:
            raise GwrError("cannot fit on an empty stream")
        if epochs < 1:
            raise GwrError("epochs must be positive")
        trace: list[float] = []
        for _ in range(epochs):
            errs = []
            for frame in stream:
                report = self.train_step(frame.features)
                errs.append(math.sqrt(report.distance))
            trace.append(float(np.mean(errs)))
        return self, trace

    def decode(self, index: int, decoder: Decoder | None = None) -> ArousalValence:
        """Map one prototype into the affect square."""
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

    # -- persistence --------------------------------------------------------

    def to_snapshot(self) -> dict:
        return {
            "format": SNAPSHOT_FORMAT,
            "dim": self.dim,
            "params": _params_to_json(self.params),
            "neurons": [
                {"w": [f2s(v) for v in w], "eta": f2s(eta)}
                for w, eta in zip(self.weights, self.habituation)
            ],
            "edges": [
                {"a": a, "b": b, "age": age}
                for (a, b), age in sorted(self.edges.items())
            ],
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> "GwrNetwork":
        if snap.get("format") != SNAPSHOT_FORMAT:
            raise GwrError(f"unsupported snapshot format: {snap.get('format')}")
        net = cls(dim=int(snap["dim"]), params=_params_from_json(snap["params"]))
        for n in snap["neurons"]:
            net.weights.append(np.array([float(v) for v in n["w"]], dtype=float))
            net.habituation.append(float(n["eta"]))
        for e in snap["edges"]:
            net.edges[(int(e["a"]), int(e["b"]))] = int(e["age"])
        return net

    def dumps(self) -> str:
        return json.dumps(self.to_snapshot(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def loads(cls, text: str) -> "GwrNetwork":
        return cls.from_snapshot(json.loads(text))


def _params_to_json(p: GwrParams) -> dict:
    return {
        "insertion_threshold": f2s(p.insertion_threshold),
        "habituation_threshold": f2s(p.habituation_threshold),
        "max_edge_age": p.max_edge_age,
        "eps_b": f2s(p.eps_b),
        "eps_n": f2s(p.eps_n),
        "tau_b": f2s(p.tau_b),
        "tau_n": f2s(p.tau_n),
        "kappa": f2s(p.kappa),
    }


def _params_from_json(d: dict) -> GwrParams:
    return GwrParams(
        insertion_threshold=float(d["insertion_threshold"]),
        habituation_threshold=float(d["habituation_threshold"]),
        max_edge_age=int(d["max_edge_age"]),
        eps_b=float(d["eps_b"]),
        eps_n=float(d["eps_n"]),
        tau_b=float(d["tau_b"]),
        tau_n=float(d["tau_n"]),
        kappa=float(d["kappa"]),
    )
