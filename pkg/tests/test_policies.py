import numpy as np
import pytest

from conftest import star
from netrvene import oracle
from netrvene.model import ContractError, DomainError, ModelParams, from_edges
from netrvene.policies import (Candidates, PolicySpec, ScoreContext, control_policy, decide,
                               heuristic_select, lookahead_score, myopic_score, random_policy,
                               select_from_scores)


def _equal_weight_example():
    # sink 0 fed by 1 (x=0.2) and 2 (x=0.4); healthy 3 with x=1.0
    st = star([0.5, 0.5], health=[0.5, 0.2, 0.4, 1.0], lam=1.0, extra_healthy=[9])
    return st, ModelParams(alpha=0.0, simplified=True)


def test_myopic_equal_weight_example():
    st, p = _equal_weight_example()
    got = myopic_score(st, (3, 0), ScoreContext(st, p))
    assert got == pytest.approx(0.35, abs=1e-12)
    assert got == pytest.approx(oracle.exact_score(st, (3, 0), 1, p), abs=1e-12)


def test_indifference_point_scores_minus_penalty():
    w = np.array([0.5, 0.3, 0.2])
    xr = np.array([0.9, 0.1, 0.6])
    p = ModelParams(alpha=0.02, beta=1.3, mu=0.4)
    st = star(w, health=[0.5, *xr, 0.0], lam=0.7, extra_healthy=[9], clock=2)
    ctx = ScoreContext(st, p)
    c = ctx.node(0)
    x_star = -c.c1 / c.a1
    st = st.evolve(health=np.array([0.5, *xr, x_star]))
    pen = 0.02 * 1.3**2
    assert myopic_score(st, (4, 0), ScoreContext(st, p)) == pytest.approx(-pen, abs=1e-12)
    assert oracle.exact_score(st, (4, 0), 1, p) == pytest.approx(-pen, abs=1e-12)


@pytest.mark.parametrize("scorer", [myopic_score, lookahead_score])
def test_zero_susceptibility_scores_minus_penalty(scorer):
    p = ModelParams(alpha=0.03, beta=1.5)
    st = star([0.6, 0.4], health=[0.2, 0.3, 0.9, 1.0], lam=[0.0, 0.5, 0.5, 0.5], extra_healthy=[9], clock=3)
    ctx = ScoreContext(st, p, lookahead=scorer is lookahead_score)
    assert scorer(st, (3, 0), ctx) == pytest.approx(-0.03 * 1.5**3, abs=1e-15)


def test_lookahead_health_term_factor_in_equal_weights():
    # equal weights: health term is (2 - lam) lam / k (x_u - mean) + lam / k (x1_u - mean x1)
    st = star([0.5, 0.5], health=[0.5, 0.2, 0.4, 1.0], lam=[0.6, 0.3, 0.8, 0.5], extra_healthy=[9])
    p = ModelParams(alpha=0.0, simplified=True)
    ctx = ScoreContext(st, p, lookahead=True)
    x1 = ctx.next_health
    lam = 0.6
    want = (2 - lam) * lam / 2 * (1.0 - 0.3) + lam / 2 * (x1[3] - (x1[1] + x1[2]) / 2)
    assert lookahead_score(st, (3, 0), ctx) == pytest.approx(want, abs=1e-12)
    assert lookahead_score(st, (3, 0), ctx) == pytest.approx(oracle.exact_score(st, (3, 0), 2, p), abs=1e-12)


def test_scores_refuse_non_candidates_and_stale_context():
    st, p = _equal_weight_example()
    ctx = ScoreContext(st, p)
    with pytest.raises(DomainError):
        myopic_score(st, (1, 0), ctx)
    with pytest.raises(ContractError):
        myopic_score(st.evolve(clock=1), (3, 0), ctx)
    with pytest.raises(ContractError):
        lookahead_score(st, (3, 0), ctx)


def test_context_counts_work():
    st, p = _equal_weight_example()
    ctx = ScoreContext(st, p)
    myopic_score(st, (3, 0), ctx)
    myopic_score(st, (3, 0), ctx)
    assert ctx.ops == 2 + 2  # node setup |in(v)| = 2, then one per score


def _cands(scores, cap):
    c = Candidates(np.array([0]), np.array([0, len(scores)]), np.arange(1, len(scores) + 1))
    st = star([1.0 / cap] * cap)
    return st, c, np.asarray(scores, dtype=float)


def test_negative_scores_give_empty_selection():
    st, c, s = _cands([-0.1, -0.2], 2)
    edges, _ = select_from_scores(st, c, s)
    assert edges.shape == (0, 2)


def test_top_k_with_negative_exclusion():
    st, c, s = _cands([0.5, 0.3, -0.1], 2)
    edges, kept = select_from_scores(st, c, s)
    assert {tuple(e) for e in edges.tolist()} == {(1, 0), (2, 0)}
    assert sorted(kept.tolist()) == [0.3, 0.5]


def test_ties_break_by_source():
    st, c, s = _cands([0.2, 0.4, 0.4, 0.4], 2)
    edges, _ = select_from_scores(st, c, s)
    assert sorted(edges[:, 0].tolist()) == [2, 3]


def test_control_is_empty():
    st, _ = _equal_weight_example()
    assert control_policy(st).shape == (0, 2)


def test_random_policy_without_healthy_nodes(rng):
    st, _ = _equal_weight_example()
    assert random_policy(st.evolve(healthy=np.zeros(0, dtype=np.int64)), rng).shape == (0, 2)


def test_random_policy_forced_choice(rng):
    st, _ = _equal_weight_example()
    assert random_policy(st, rng).tolist() == [[3, 0]]


def test_schedules():
    assert not any(PolicySpec("control").acts_at(t) for t in range(6))
    assert [PolicySpec("initial_random").acts_at(t) for t in range(3)] == [True, False, False]
    assert [PolicySpec("gradient_based").acts_at(t) for t in range(3)] == [True, False, False]
    assert [PolicySpec("heuristic_lookahead").acts_at(t) for t in range(4)] == [True, False, True, False]
    assert all(PolicySpec("heuristic_myopic").acts_at(t) for t in range(4))
    assert all(PolicySpec("perpetual_random").acts_at(t) for t in range(4))
    with pytest.raises(DomainError):
        PolicySpec("greedy")


def test_decide_respects_schedule(rng):
    st, p = _equal_weight_example()
    st = st.evolve(clock=1)
    assert decide(PolicySpec("heuristic_lookahead"), st, p, rng).edges.shape == (0, 2)
    assert decide(PolicySpec("heuristic_myopic"), st, p, rng).edges.tolist() == [[3, 0]]


def test_heuristic_respects_in_degree_cap():
    edges = [(1, 0, 0.5), (2, 0, 0.5)] + [(0, i, 1.0) for i in range(1, 7)]
    x = [0.0, 0.0, 0.0, 0.9, 0.95, 1.0, 0.99]
    st = from_edges(7, edges, x, [1.0] * 7, [0], [3, 4, 5, 6])
    got, _ = heuristic_select(st, ModelParams(alpha=0.0))
    assert got.shape[0] == 2
    assert sorted(got[:, 0].tolist()) == [5, 6]
