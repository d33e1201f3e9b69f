"""Network state, model parameters and decision feasibility."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kernels

SNAPSHOT_VERSION = 1
NORM_TOL = 1e-9


class DomainError(ValueError):
    """A precondition on an operation's arguments does not hold."""


class ContractError(RuntimeError):
    """Inputs are individually valid but inconsistent with each other."""


@dataclass(frozen=True)
class ModelParams:
    mu: float = 0.1
    alpha: float = 0.01
    beta: float = 1.1
    horizon: int = 8
    objective_kind: str = "cumulative"
    penalty_at_zero: str = "alpha_beta"
    # equal in-weights 1/|in(v)| at all times (the analysis regime)
    simplified: bool = False

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise DomainError(f"mu must lie in (0, 1), got {self.mu}")
        if not 0.0 <= self.alpha < 1.0:
            raise DomainError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not self.beta > 1.0:
            raise DomainError(f"beta must exceed 1, got {self.beta}")
        if int(self.horizon) < 1:
            raise DomainError(f"horizon must be >= 1, got {self.horizon}")
        if self.objective_kind not in ("terminal", "cumulative"):
            raise DomainError(f"unknown objective kind {self.objective_kind!r}")
        if self.penalty_at_zero not in ("alpha", "alpha_beta"):
            raise DomainError(f"unknown penalty_at_zero {self.penalty_at_zero!r}")

    def decision_weight(self, clock: int) -> float:
        """Penalty per edge for a decision taken at ``clock``.

        With ``alpha_beta`` the decision lands at ``clock + 1`` and is charged
        there; with ``alpha`` it is charged at its own clock (so t=0 costs
        plain ``alpha``).
        """
        shift = 1 if self.penalty_at_zero == "alpha_beta" else 0
        return self.alpha * self.beta ** (clock + shift)


@dataclass(frozen=True, eq=False)
class NetworkState:
    """Snapshot S_t of the intervention environment.

    In-edges are stored sink-major: the in-neighbours of ``v`` are
    ``src[indptr[v]:indptr[v+1]]`` (ascending) with matching ``weight``.
    In-degrees never change, so ``indptr`` is shared by every state of one
    trajectory.
    """

    indptr: np.ndarray
    src: np.ndarray
    weight: np.ndarray
    health: np.ndarray
    susceptibility: np.ndarray
    target: np.ndarray
    healthy: np.ndarray
    clock: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.indptr.shape[0] - 1

    @property
    def in_degree(self) -> np.ndarray:
        if "deg" not in self._cache:
            self._cache["deg"] = np.diff(self.indptr)
        return self._cache["deg"]

    @property
    def sink(self) -> np.ndarray:
        """Sink node of every stored edge (parallel to ``src``)."""
        if "sink" not in self._cache:
            self._cache["sink"] = np.repeat(np.arange(self.n), self.in_degree)
        return self._cache["sink"]

    @property
    def target_mask(self) -> np.ndarray:
        if "tmask" not in self._cache:
            m = np.zeros(self.n, dtype=bool)
            m[self.target] = True
            self._cache["tmask"] = m
        return self._cache["tmask"]

    @property
    def healthy_mask(self) -> np.ndarray:
        if "hmask" not in self._cache:
            m = np.zeros(self.n, dtype=bool)
            m[self.healthy] = True
            self._cache["hmask"] = m
        return self._cache["hmask"]

    def in_edges(self, v: int):
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.src[lo:hi], self.weight[lo:hi]

    def has_edge(self, u: int, v: int) -> bool:
        srcs = self.src[self.indptr[v]:self.indptr[v + 1]]
        i = np.searchsorted(srcs, u)
        return bool(i < srcs.size and srcs[i] == u)

    def edge_list(self) -> list[tuple[int, int, float]]:
        return [(int(u), int(v), float(w)) for u, v, w in zip(self.src, self.sink, self.weight)]

    def evolve(self, **changes) -> NetworkState:
        # in-degree caches stay valid across transitions; role masks too
        st = replace(self, _cache={}, **changes)
        for key in ("deg", "sink", "tmask", "hmask"):
            if key in self._cache:
                st._cache[key] = self._cache[key]
        return st

    def dense_weights(self, uniform: bool = False) -> np.ndarray:
        """Transposed weighted adjacency W with ``W[v, u] = w_(u,v)``."""
        mat = np.zeros((self.n, self.n))
        w = kernels.uniform_weights(self.indptr) if uniform else self.weight
        mat[self.sink, self.src] = w
        return mat


def from_edges(n, edges, health, susceptibility, target, healthy, clock=0) -> NetworkState:
    """Build a state from ``(src, dst, weight)`` triples."""
    edges = sorted((int(d), int(s), float(w)) for s, d, w in edges)
    dst = np.array([e[0] for e in edges], dtype=np.int64)
    src = np.array([e[1] for e in edges], dtype=np.int64)
    w = np.array([e[2] for e in edges], dtype=np.float64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(dst, minlength=n), out=indptr[1:])
    return NetworkState(
        indptr=indptr,
        src=src,
        weight=w,
        health=np.asarray(health, dtype=np.float64).copy(),
        susceptibility=np.asarray(susceptibility, dtype=np.float64).copy(),
        target=np.unique(np.asarray(target, dtype=np.int64)),
        healthy=np.unique(np.asarray(healthy, dtype=np.int64)),
        clock=int(clock),
    )


def check_invariants(state: NetworkState, tol: float = NORM_TOL) -> list[str]:
    """Return a list of violated invariants (empty when the state is sound)."""
    problems = []
    n = state.n
    deg = state.in_degree
    if state.src.size and (state.src.min() < 0 or state.src.max() >= n):
        problems.append("edge source out of range")
    if np.any(state.src == state.sink):
        problems.append("self-loop present")
    for v in range(n):
        s = state.src[state.indptr[v]:state.indptr[v + 1]]
        if s.size > 1 and np.any(np.diff(s) <= 0):
            problems.append(f"duplicate or unsorted in-edges at node {v}")
            break
    w = state.weight
    if np.any(w < 0.0) or np.any(w > 1.0 + tol):
        problems.append("weight outside [0, 1]")
    sums = np.bincount(state.sink, weights=w, minlength=n)
    bad = (deg > 0) & (np.abs(sums - 1.0) > tol)
    if np.any(bad):
        problems.append(f"weights at node {int(np.flatnonzero(bad)[0])} do not sum to 1")
    x = state.health
    if np.any(x < 0.0) or np.any(x > 1.0):
        problems.append("health outside [0, 1]")
    lam = state.susceptibility
    if np.any(lam < 0.0) or np.any(lam > 1.0):
        problems.append("susceptibility outside [0, 1]")
    if np.intersect1d(state.target, state.healthy).size:
        problems.append("target and healthy sets overlap")
    return problems


# --------------------------------------------------------------------------
# decisions


def as_edges(edges) -> np.ndarray:
    """Normalise an edge collection to an ``(m, 2)`` int array sorted by (sink, source)."""
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    arr = arr.reshape(-1, 2)
    if arr.shape[0] == 0:
        return arr
    order = np.lexsort((arr[:, 0], arr[:, 1]))
    return arr[order]


def edge_set(edges) -> set[tuple[int, int]]:
    return {(int(u), int(v)) for u, v in np.asarray(edges, dtype=np.int64).reshape(-1, 2)}


def candidate_edges(state: NetworkState, v: int) -> set[tuple[int, int]]:
    """Absent edges (u, v) with u healthy; ``v`` must be a target."""
    if not (0 <= v < state.n and state.target_mask[v]):
        raise DomainError(f"node {v} is not in the target set")
    present = set(state.src[state.indptr[v]:state.indptr[v + 1]].tolist())
    return {(int(u), v) for u in state.healthy if u != v and int(u) not in present}


@dataclass(frozen=True)
class DecisionCheck:
    ok: bool
    kind: str = ""
    node: int | None = None
    edge: tuple[int, int] | None = None

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "ok"
        return f"violation({self.kind}, node={self.node}, edge={self.edge})"


def validate_decision(state: NetworkState, edges) -> DecisionCheck:
    arr = as_edges(edges)
    seen = set()
    counts: dict[int, int] = {}
    for u, v in arr.tolist():
        if (u, v) in seen:
            return DecisionCheck(False, "duplicate-edge", v, (u, v))
        seen.add((u, v))
        if not (0 <= u < state.n and 0 <= v < state.n):
            return DecisionCheck(False, "node-out-of-range", v, (u, v))
        if u == v or not state.healthy_mask[u] or not state.target_mask[v] or state.has_edge(u, v):
            return DecisionCheck(False, "not-in-candidate-set", v, (u, v))
        counts[v] = counts.get(v, 0) + 1
        if counts[v] > state.in_degree[v]:
            return DecisionCheck(False, "cap", v, (u, v))
    return DecisionCheck(True)


# --------------------------------------------------------------------------
# snapshot files


def _float_list(a):
    return [float(f) for f in np.asarray(a, dtype=np.float64)]


def state_to_dict(state: NetworkState) -> dict:
    return {
        "version": SNAPSHOT_VERSION,
        "nodes": state.n,
        "edges": [{"src": u, "dst": v, "weight": w} for u, v, w in state.edge_list()],
        "health": _float_list(state.health),
        "lambda": _float_list(state.susceptibility),
        "target": [int(i) for i in state.target],
        "healthy": [int(i) for i in state.healthy],
        "clock": int(state.clock),
    }


def state_from_dict(doc: dict) -> NetworkState:
    if doc.get("version") != SNAPSHOT_VERSION:
        raise DomainError(f"unsupported snapshot version {doc.get('version')!r}")
    edges = [(e["src"], e["dst"], e["weight"]) for e in doc["edges"]]
    return from_edges(doc["nodes"], edges, doc["health"], doc["lambda"],
                      doc["target"], doc["healthy"], doc["clock"])


def save_snapshot(state: NetworkState, path) -> None:
    # json writes floats with repr, which round-trips doubles exactly
    Path(path).write_text(json.dumps(state_to_dict(state), indent=1) + "\n")


def load_snapshot(path) -> NetworkState:
    return state_from_dict(json.loads(Path(path).read_text()))
