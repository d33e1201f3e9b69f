"""Transition function: removals, weight updates and health propagation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import ContractError, DomainError, ModelParams, NetworkState, as_edges, validate_decision


@dataclass(frozen=True)
class TransitionRecord:
    additions: np.ndarray
    removals: np.ndarray
    pre_clock: int
    post_health: np.ndarray

    def to_json(self) -> dict:
        return {
            "type": "transition",
            "t": int(self.pre_clock),
            "additions": self.additions.tolist(),
            "removals": self.removals.tolist(),
            "post_health": [float(x) for x in self.post_health],
        }


def removal_marginals(weights) -> np.ndarray:
    """P[(r, v) removed] for each in-edge of v when one edge is added."""
    w = np.asarray(weights, dtype=np.float64)
    k = w.size
    if k == 1:
        return np.ones(1)
    return (1.0 - w) / (k - 1)


def _draw_without_replacement(weights, count, rng) -> np.ndarray:
    # sequential: each draw from (1 - w) over the edges still present
    w = np.asarray(weights, dtype=np.float64)
    k = w.size
    if count >= k:
        return np.arange(k)
    left = list(range(k))
    picked = []
    for _ in range(count):
        mass = np.array([1.0 - w[j] for j in left])
        total = mass.sum()
        if total <= 0.0:
            i = int(rng.integers(len(left)))
        else:
            i = int(rng.choice(len(left), p=mass / total))
        picked.append(left.pop(i))
    return np.sort(np.array(picked, dtype=np.int64))


def _effective_weights(state: NetworkState, simplified: bool) -> np.ndarray:
    return kernels.uniform_weights(state.indptr) if simplified else state.weight


def sample_removals(state: NetworkState, additions, rng, simplified: bool = False) -> np.ndarray:
    """Draw the exogenous removal set paired with ``additions``.

    Nodes are visited in ascending order so that a seeded stream gives the
    same draw every time.
    """
    A = as_edges(additions)
    if A.shape[0] == 0:
        return np.zeros((0, 2), dtype=np.int64)
    w_eff = _effective_weights(state, simplified)
    sinks, counts = np.unique(A[:, 1], return_counts=True)
    out = []
    for v, c in zip(sinks.tolist(), counts.tolist()):
        lo, hi = state.indptr[v], state.indptr[v + 1]
        if hi - lo < c:
            raise DomainError(f"node {v} receives {c} additions but has in-degree {hi - lo}")
        idx = _draw_without_replacement(w_eff[lo:hi], c, rng)
        for j in idx:
            out.append((int(state.src[lo + j]), v))
    return as_edges(out)


def update_weights(state: NetworkState, additions, removals, mu: float,
                   simplified: bool = False):
    """Edge weight update for one transition.

    Returns ``(src, weight)`` for the post-transition edge layout (same
    ``indptr``; sources re-sorted within each sink).
    """
    A = as_edges(additions)
    R = as_edges(removals)
    n = state.n
    chi = np.bincount(A[:, 1], minlength=n) if A.size else np.zeros(n, dtype=np.int64)
    rem = np.bincount(R[:, 1], minlength=n) if R.size else np.zeros(n, dtype=np.int64)
    if chi.shape[0] != n or rem.shape[0] != n or np.any(chi != rem):
        raise ContractError("removal counts do not match addition counts per node")

    if simplified:
        new_w = kernels.uniform_weights(state.indptr)
    else:
        new_w = kernels.drift_weights(state.indptr, state.weight, mu)
    new_src = state.src.copy()
    if A.size == 0:
        return new_src, new_w

    by_sink_add: dict[int, list[int]] = {}
    for u, v in A.tolist():
        by_sink_add.setdefault(v, []).append(u)
    by_sink_rem: dict[int, set[int]] = {}
    for r, v in R.tolist():
        by_sink_rem.setdefault(v, set()).add(r)

    for v, added in by_sink_add.items():
        lo, hi = state.indptr[v], state.indptr[v + 1]
        k = hi - lo
        old_src = state.src[lo:hi]
        gone = by_sink_rem[v]
        if len(gone) != len(added) or not gone.issubset(set(old_src.tolist())):
            raise ContractError(f"removals at node {v} are not existing in-edges")
        if set(added) & set(old_src.tolist()):
            raise ContractError(f"addition into node {v} duplicates an existing edge")
        keep = ~np.isin(old_src, list(gone))
        srcs = np.concatenate([old_src[keep], np.array(added, dtype=np.int64)])
        if simplified:
            ws = np.full(k, 1.0 / k)
        else:
            ws = np.concatenate([state.weight[lo:hi][keep], np.full(len(added), 1.0 / k**2)])
            ws = ws / ws.sum()
        order = np.argsort(srcs)
        new_src[lo:hi] = srcs[order]
        new_w[lo:hi] = ws[order]
    return new_src, new_w


def propagate_health(state: NetworkState, new_weights, new_src=None) -> np.ndarray:
    """x(t+1) from x(t) using the post-transition weights."""
    src = state.src if new_src is None else new_src
    out = kernels.propagate(state.indptr, src, np.asarray(new_weights, dtype=np.float64),
                            state.health, state.susceptibility)
    return np.clip(out, 0.0, 1.0)


def no_action_health(state: NetworkState, params: ModelParams) -> np.ndarray:
    """Health one step ahead when nothing is added (deterministic)."""
    if params.simplified:
        w = kernels.uniform_weights(state.indptr)
    else:
        w = kernels.drift_weights(state.indptr, state.weight, params.mu)
    return propagate_health(state, w)


def step(state: NetworkState, additions, rng, params: ModelParams, removals=None):
    """Advance one period.  ``removals`` may be supplied to bypass sampling."""
    A = as_edges(additions)
    check = validate_decision(state, A)
    if not check.ok:
        raise DomainError(f"infeasible decision: {check}")
    if removals is None:
        R = sample_removals(state, A, rng, simplified=params.simplified)
    else:
        R = as_edges(removals)
    new_src, new_w = update_weights(state, A, R, params.mu, simplified=params.simplified)
    x_next = propagate_health(state, new_w, new_src)
    nxt = state.evolve(src=new_src, weight=new_w, health=x_next, clock=state.clock + 1)
    return nxt, TransitionRecord(A, R, state.clock, x_next)
