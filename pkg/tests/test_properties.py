"""Property tests over randomly drawn states and decisions."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st_

from netrvene import kernels, oracle
from netrvene.dynamics import removal_marginals, step
from netrvene.model import ModelParams, check_invariants
from netrvene.policies import ScoreContext, enumerate_candidates, lookahead_score, myopic_score
from netrvene.validation import random_decision, random_instance

seeds = st_.integers(0, 2**32 - 1)


@settings(max_examples=200, deadline=None)
@given(st_.lists(st_.floats(1e-3, 1.0), min_size=1, max_size=8))
def test_marginals_form_a_distribution(raw):
    w = np.array(raw) / sum(raw)
    m = removal_marginals(w)
    assert np.all(m >= -1e-15)
    assert abs(m.sum() - 1.0) < 1e-12


@settings(max_examples=150, deadline=None)
@given(seeds, st_.booleans())
def test_transition_preserves_invariants(seed, simplified):
    rng = np.random.default_rng(seed)
    state, params = random_instance(rng, n_range=(4, 14), max_in=6, simplified=simplified)
    for _ in range(3):
        nxt, rec = step(state, random_decision(state, rng), rng, params)
        assert check_invariants(nxt) == []
        assert np.array_equal(nxt.in_degree, state.in_degree)
        assert np.all((nxt.health >= 0) & (nxt.health <= 1))
        # rem_v(R) = chi_v(A)
        n = state.n
        assert np.array_equal(np.bincount(rec.additions[:, 1], minlength=n) if rec.additions.size else np.zeros(n),
                              np.bincount(rec.removals[:, 1], minlength=n) if rec.removals.size else np.zeros(n))
        state = nxt


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_health_is_a_convex_combination(seed):
    rng = np.random.default_rng(seed)
    state, _ = random_instance(rng, n_range=(4, 12))
    x = kernels.propagate(state.indptr, state.src, state.weight, state.health, state.susceptibility)
    for v in range(state.n):
        nb = state.health[state.src[state.indptr[v]:state.indptr[v + 1]]]
        lo = min(nb.min(), state.health[v])
        hi = max(nb.max(), state.health[v])
        assert lo - 1e-12 <= x[v] <= hi + 1e-12


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_selection_is_positive_and_capped(seed):
    rng = np.random.default_rng(seed)
    state, _ = random_instance(rng, n_range=(4, 16))
    c = enumerate_candidates(state)
    scores = rng.standard_normal(c.csrc.size)
    caps = state.in_degree[c.targets]
    chosen = kernels.select_topk(c.cptr, c.csrc, scores, caps)
    assert np.all(scores[chosen] > 0)
    for i in range(c.targets.size):
        seg = slice(c.cptr[i], c.cptr[i + 1])
        picked = scores[seg][chosen[seg]]
        assert picked.size <= caps[i]
        rest = scores[seg][~chosen[seg]]
        if picked.size and rest.size:
            assert rest.max() <= picked.min() or rest.max() <= 0


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_enumerated_removal_law_sums_to_one(seed):
    rng = np.random.default_rng(seed)
    state, _ = random_instance(rng, n_range=(4, 9), max_in=4)
    A = random_decision(state, rng)
    if A.shape[0] > oracle.MAX_TOTAL_REMOVALS:
        return
    assert abs(oracle.removal_distribution_exact(state, A).total() - 1.0) < 1e-12


@settings(max_examples=60, deadline=None)
@given(seeds, st_.floats(0.0, 0.09), st_.floats(1.01, 2.0), st_.integers(0, 6))
def test_frozen_target_scores_are_pure_penalty(seed, alpha, beta, clock):
    rng = np.random.default_rng(seed)
    state, _ = random_instance(rng)
    lam = state.susceptibility.copy()
    lam[state.target] = 0.0
    state = state.evolve(susceptibility=lam, clock=clock)
    p = ModelParams(alpha=alpha, beta=beta)
    c = enumerate_candidates(state)
    ctx1, ctx2 = ScoreContext(state, p), ScoreContext(state, p, lookahead=True)
    for v, u in zip(c.sinks().tolist(), c.csrc.tolist()):
        assert abs(myopic_score(state, (u, v), ctx1) + alpha * beta**clock) < 1e-14
        assert abs(lookahead_score(state, (u, v), ctx2) + alpha * beta**clock) < 1e-14
