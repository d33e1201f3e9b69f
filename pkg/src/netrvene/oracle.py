"""Brute-force enumeration oracles for small instances.

Everything here goes through :func:`netrvene.dynamics.step` with explicit
removal sets, never through the closed-form scores, so a disagreement with
:mod:`netrvene.policies` points at the closed form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .dynamics import step
from .model import DomainError, ModelParams, NetworkState, as_edges, candidate_edges

MAX_OUTCOMES = 100_000
MAX_TOTAL_REMOVALS = 12


class TooLargeError(DomainError):
    """The instance exceeds the enumeration guards."""


@dataclass
class EnumeratedDistribution:
    outcomes: list  # [(frozenset of (r, v)), probability]

    def total(self) -> float:
        return float(sum(p for _, p in self.outcomes))


def _node_law(srcs, weights, count):
    """Distribution over unordered removal sets at one node (sequential draws)."""
    k = len(srcs)
    if count == 0:
        return {frozenset(): 1.0}
    if count >= k:
        return {frozenset(srcs): 1.0}
    law: dict = {}

    def rec(left, picked, prob):
        if len(picked) == count:
            key = frozenset(picked)
            law[key] = law.get(key, 0.0) + prob
            return
        mass = [1.0 - weights[j] for j in left]
        total = sum(mass)
        for i, j in enumerate(left):
            p = (1.0 / len(left)) if total <= 0.0 else mass[i] / total
            if p == 0.0:
                continue
            rec(left[:i] + left[i + 1:], picked + [srcs[j]], prob * p)

    rec(list(range(k)), [], 1.0)
    return law


def removal_distribution_exact(state: NetworkState, additions,
                               simplified: bool = False) -> EnumeratedDistribution:
    A = as_edges(additions)
    if A.shape[0] > MAX_TOTAL_REMOVALS:
        raise TooLargeError(f"{A.shape[0]} additions exceed the enumeration guard")
    if A.shape[0] == 0:
        return EnumeratedDistribution([(frozenset(), 1.0)])
    sinks, counts = np.unique(A[:, 1], return_counts=True)
    per_node = []
    size = 1
    for v, c in zip(sinks.tolist(), counts.tolist()):
        lo, hi = state.indptr[v], state.indptr[v + 1]
        k = hi - lo
        if c > k:
            raise DomainError(f"node {v} receives {c} additions but has in-degree {k}")
        w = [1.0 / k] * k if simplified else state.weight[lo:hi].tolist()
        law = _node_law(state.src[lo:hi].tolist(), w, c)
        per_node.append([(frozenset((r, v) for r in s), p) for s, p in law.items()])
        size *= len(law)
        if size > MAX_OUTCOMES:
            raise TooLargeError("joint removal distribution too large to enumerate")
    outcomes = []
    for combo in itertools.product(*per_node):
        edges = frozenset().union(*(c[0] for c in combo))
        prob = float(np.prod([c[1] for c in combo]))
        outcomes.append((edges, prob))
    return EnumeratedDistribution(outcomes)


def _edges_of(removal_set):
    return as_edges(sorted(removal_set))


def _expected_health(state, additions, v, depth, params, next_decision=None):
    """E[x_v(t+1) (+ x_v(t+2))] with optional decision at t+1.

    Returns ``(expected health sum, expected size of the t+1 decision at v)``.
    """
    dist = removal_distribution_exact(state, additions, params.simplified)
    acc = 0.0
    size_next = 0.0
    for rem, prob in dist.outcomes:
        s1, _ = step(state, additions, None, params, removals=_edges_of(rem))
        val = s1.health[v]
        if depth == 2:
            nxt = np.zeros((0, 2), dtype=np.int64)
            if next_decision is not None:
                nxt = next_decision(s1) if callable(next_decision) else as_edges(next_decision)
                nxt = nxt[nxt[:, 1] == v] if nxt.size else nxt
            dist2 = removal_distribution_exact(s1, nxt, params.simplified)
            inner = 0.0
            for rem2, p2 in dist2.outcomes:
                s2, _ = step(s1, nxt, None, params, removals=_edges_of(rem2))
                inner += p2 * s2.health[v]
            val += inner
            size_next += prob * nxt.shape[0]
        acc += prob * val
    return acc, size_next


def set_value(state: NetworkState, v: int, additions, depth: int, params: ModelParams) -> float:
    """f^v (depth 1) or h^v (depth 2) for a decision restricted to sink ``v``."""
    A = as_edges(additions)
    if A.size and np.any(A[:, 1] != v):
        raise DomainError("set_value expects additions into a single sink")
    val, _ = _expected_health(state, A, v, depth, params)
    return val - params.alpha * params.beta**state.clock * A.shape[0]


def exact_score(state: NetworkState, edge, depth: int, params: ModelParams) -> float:
    """Single-addition score by enumerating every removal outcome."""
    if depth not in (1, 2):
        raise DomainError("depth must be 1 or 2")
    u, v = int(edge[0]), int(edge[1])
    if state.in_degree[v] > 6:
        raise TooLargeError(f"in-degree {state.in_degree[v]} exceeds the oracle guard")
    return set_value(state, v, [(u, v)], depth, params) - set_value(state, v, [], depth, params)


@dataclass
class BruteForceResult:
    edges: np.ndarray
    unique: bool
    node_values: dict  # v -> best value
    node_unique: dict


def brute_force_policy(state: NetworkState, params: ModelParams, depth: int,
                       tie_tol: float = 1e-12) -> BruteForceResult:
    """Exact per-target argmax over every feasible subset of candidate edges."""
    chosen = []
    values, uniq = {}, {}
    for v in state.target.tolist():
        cands = sorted(candidate_edges(state, v))
        cap = min(int(state.in_degree[v]), len(cands))
        if len(cands) > 8 or cap > 4:
            raise TooLargeError(f"node {v}: {len(cands)} candidates, cap {cap}")
        scored = []
        for c in range(cap + 1):
            for subset in itertools.combinations(cands, c):
                scored.append((set_value(state, v, list(subset), depth, params), subset))
        scored.sort(key=lambda s: -s[0])
        best_val, best = scored[0]
        values[v] = best_val
        uniq[v] = len(scored) == 1 or scored[1][0] < best_val - tie_tol
        chosen.extend(best)
    return BruteForceResult(as_edges(chosen), all(uniq.values()), values, uniq)


def pairwise_value(state: NetworkState, v: int, first, second, params: ModelParams) -> float:
    """Two-period expected contribution of sink ``v``.

    ``first`` is the decision at t and ``second`` the decision at t+1, either
    a fixed edge set or a callable evaluated on each realised S_{t+1}.  Both
    are restricted to edges into ``v``.
    """
    A = as_edges(first)
    A = A[A[:, 1] == v] if A.size else A
    health, size_next = _expected_health(state, A, v, 2, params, next_decision=second)
    a, b, t = params.alpha, params.beta, state.clock
    return health - a * b**t * A.shape[0] - a * b ** (t + 1) * size_next
