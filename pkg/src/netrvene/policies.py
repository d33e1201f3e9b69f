"""Baseline policies and the score-and-select heuristics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dynamics import no_action_health, removal_marginals
from .model import ContractError, DomainError, ModelParams, NetworkState, as_edges

POLICY_KINDS = (
    "control",
    "initial_random",
    "perpetual_random",
    "heuristic_myopic",
    "heuristic_lookahead",
    "gradient_based",
)


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    n: int = 10
    L: int = 10

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise DomainError(f"unknown policy kind {self.kind!r}")
        if self.n < 1 or self.L < 1:
            raise DomainError("gradient hyperparameters n and L must be >= 1")

    def acts_at(self, clock: int) -> bool:
        if self.kind == "control":
            return False
        if self.kind in ("initial_random", "gradient_based"):
            return clock == 0
        if self.kind == "heuristic_lookahead":
            return clock % 2 == 0
        return True


# --------------------------------------------------------------------------
# baselines


def control_policy(state: NetworkState) -> np.ndarray:
    return np.zeros((0, 2), dtype=np.int64)


def random_policy(state: NetworkState, rng) -> np.ndarray:
    """One random absent H -> S edge per healthy node, subject to the cap."""
    if state.healthy.size == 0 or state.target.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    mask = state.healthy_mask[state.src] & state.target_mask[state.sink]
    existing: dict[int, set[int]] = {}
    for u, v in zip(state.src[mask].tolist(), state.sink[mask].tolist()):
        existing.setdefault(u, set()).add(v)
    used = np.zeros(state.n, dtype=np.int64)
    deg = state.in_degree
    chosen = []
    for u in state.healthy.tolist():
        out = existing.get(u)
        pool = state.target if not out else np.array(
            [v for v in state.target.tolist() if v not in out and v != u], dtype=np.int64)
        if pool.size == 0:
            continue
        v = int(pool[rng.integers(pool.size)])
        if used[v] < deg[v]:
            used[v] += 1
            chosen.append((u, v))
    return as_edges(chosen)


# --------------------------------------------------------------------------
# single-edge scores


@dataclass
class NodeCache:
    delta: float
    psi: float
    theta: float
    pi: float
    gamma: np.ndarray
    marginals: np.ndarray
    a1: float
    c1: float
    a2: float
    c2: float


@dataclass
class ScoreContext:
    """Per-(node, time) cached quantities behind the single-addition scores.

    ``ops`` counts elementary work: ``|in(v)|`` for each node setup and one
    per scored edge afterwards.
    """

    state: NetworkState
    params: ModelParams
    lookahead: bool = False
    ops: int = 0
    _nodes: dict = field(default_factory=dict, repr=False)
    _x1: np.ndarray | None = field(default=None, repr=False)
    _clock: int = -1

    def __post_init__(self):
        self._clock = self.state.clock

    @property
    def next_health(self) -> np.ndarray:
        if self._x1 is None:
            self._x1 = no_action_health(self.state, self.params)
        return self._x1

    def node(self, v: int) -> NodeCache:
        if v in self._nodes:
            return self._nodes[v]
        st, p = self.state, self.params
        lo, hi = st.indptr[v], st.indptr[v + 1]
        k = hi - lo
        if k == 0:
            raise DomainError(f"node {v} has no in-edges")
        w = np.full(k, 1.0 / k) if p.simplified else st.weight[lo:hi]
        x = st.health
        x1 = self.next_health if self.lookahead else x
        xr = x[st.src[lo:hi]]
        xr1 = x1[st.src[lo:hi]]
        mu = p.mu
        a1, c1, a2, c2 = kernels.coefficients(
            st.indptr, st.src, st.weight, x, x1, mu,
            np.array([v], dtype=np.int64), p.simplified, self.lookahead)
        cache = NodeCache(
            delta=float(w @ xr),
            psi=float((((1 - mu) * w + mu / k) * xr).sum()),
            theta=float((1 - mu) * k * k * (w @ xr1)),
            pi=float(mu / k * xr1.sum()),
            gamma=k * k * (1.0 - w) + 1.0,
            marginals=removal_marginals(w),
            a1=float(a1[0]), c1=float(c1[0]), a2=float(a2[0]), c2=float(c2[0]),
        )
        self.ops += k
        self._nodes[v] = cache
        return cache

    def check(self, state: NetworkState):
        if state is not self.state or state.clock != self._clock:
            raise ContractError("score context was built for a different state")


def _score(state, edge, ctx: ScoreContext, lookahead: bool) -> float:
    ctx.check(state)
    if ctx.lookahead != lookahead:
        raise ContractError("score context built for the other scorer")
    u, v = int(edge[0]), int(edge[1])
    if not (state.target_mask[v] and state.healthy_mask[u]) or state.has_edge(u, v):
        raise DomainError(f"edge {(u, v)} is not a candidate")
    c = ctx.node(v)
    ctx.ops += 1
    lam = state.susceptibility[v]
    pen = ctx.params.alpha * ctx.params.beta**state.clock
    if not lookahead:
        return lam * (c.a1 * state.health[u] + c.c1) - pen
    x1 = ctx.next_health
    return ((2.0 - lam) * lam * (c.a1 * state.health[u] + c.c1)
            + lam * (c.a2 * x1[u] + c.c2) - pen)


def myopic_score(state: NetworkState, edge, ctx: ScoreContext) -> float:
    """E[x_v(t+1) | add edge] - E[x_v(t+1) | no addition] - alpha beta^t."""
    return _score(state, edge, ctx, lookahead=False)


def lookahead_score(state: NetworkState, edge, ctx: ScoreContext) -> float:
    """Two-period analogue of :func:`myopic_score`, no action at t+1."""
    return _score(state, edge, ctx, lookahead=True)


# --------------------------------------------------------------------------
# batch selection


@dataclass
class Candidates:
    targets: np.ndarray
    cptr: np.ndarray
    csrc: np.ndarray

    def sinks(self) -> np.ndarray:
        return np.repeat(self.targets, np.diff(self.cptr))


def enumerate_candidates(state: NetworkState) -> Candidates:
    cptr, csrc = kernels.candidates(state.indptr, state.src, state.target,
                                    state.healthy, state.n)
    return Candidates(state.target, cptr, csrc)


def batch_scores(state: NetworkState, params: ModelParams, cands: Candidates,
                 lookahead: bool) -> np.ndarray:
    x = state.health
    x1 = no_action_health(state, params) if lookahead else x
    a1, c1, a2, c2 = kernels.coefficients(
        state.indptr, state.src, state.weight, x, x1, params.mu, cands.targets,
        params.simplified, lookahead)
    pen = params.alpha * params.beta**state.clock
    return kernels.score_candidates(cands.targets, cands.cptr, cands.csrc, x, x1,
                                    state.susceptibility, a1, c1, a2, c2, lookahead, pen)


def select_from_scores(state: NetworkState, cands: Candidates, scores: np.ndarray):
    """Per target keep the ``|in(v)|`` best strictly positive scores.

    Ties break by ascending source id.
    """
    caps = state.in_degree[cands.targets]
    chosen = kernels.select_topk(cands.cptr, cands.csrc, scores, caps)
    edges = np.column_stack([cands.csrc[chosen], cands.sinks()[chosen]])
    return edges.astype(np.int64), scores[chosen]


def heuristic_select(state: NetworkState, params: ModelParams, scorer="myopic"):
    """Score every candidate edge and keep the best per target.

    ``scorer`` is ``"myopic"``, ``"lookahead"`` or a callable
    ``scorer(state, candidates) -> scores``.  Returns ``(edges, scores)``.
    """
    cands = enumerate_candidates(state)
    if callable(scorer):
        scores = np.asarray(scorer(state, cands), dtype=np.float64)
    elif scorer in ("myopic", "lookahead"):
        scores = batch_scores(state, params, cands, scorer == "lookahead")
    else:
        raise DomainError(f"unknown scorer {scorer!r}")
    return select_from_scores(state, cands, scores)


# --------------------------------------------------------------------------
# dispatcher


@dataclass
class Decision:
    edges: np.ndarray
    scores: np.ndarray | None = None
    diagnostics: list | None = None


def decide(spec: PolicySpec, state: NetworkState, params: ModelParams, rng) -> Decision:
    if not spec.acts_at(state.clock):
        return Decision(control_policy(state))
    kind = spec.kind
    if kind in ("initial_random", "perpetual_random"):
        return Decision(random_policy(state, rng))
    if kind == "heuristic_myopic":
        e, s = heuristic_select(state, params, "myopic")
        return Decision(e, s)
    if kind == "heuristic_lookahead":
        e, s = heuristic_select(state, params, "lookahead")
        return Decision(e, s)
    if kind == "gradient_based":
        from .gradient import run_gradient_policy

        diag: list = []
        e = run_gradient_policy(state, params, spec.n, spec.L, rng, diagnostics=diag)
        return Decision(e, None, diag)
    return Decision(control_policy(state))
