import numpy as np
import pytest

from conftest import star
from netrvene import oracle
from netrvene.dynamics import step
from netrvene.model import ModelParams, from_edges


def test_single_addition_outcomes():
    st = star([0.5, 0.3, 0.2], extra_healthy=[9])
    dist = oracle.removal_distribution_exact(st, [(4, 0)])
    probs = {tuple(sorted(o))[0][0]: p for o, p in dist.outcomes}
    assert probs == pytest.approx({1: 0.25, 2: 0.35, 3: 0.40})
    assert dist.total() == pytest.approx(1.0)


def test_empty_decision_is_a_point_mass():
    dist = oracle.removal_distribution_exact(star([0.5, 0.5]), [])
    assert dist.outcomes == [(frozenset(), 1.0)]


def test_independent_nodes_multiply():
    edges = [(2, 0, 0.7), (3, 0, 0.3), (2, 1, 0.4), (3, 1, 0.6), (0, 2, 1.0), (1, 3, 1.0),
             (0, 4, 1.0), (1, 5, 1.0)]
    st = from_edges(6, edges, np.full(6, 0.5), np.full(6, 0.5), [0, 1], [4, 5])
    dist = oracle.removal_distribution_exact(st, [(4, 0), (5, 1)])
    got = {o: p for o, p in dist.outcomes}
    assert len(got) == 4
    assert got[frozenset({(2, 0), (2, 1)})] == pytest.approx(0.3 * 0.6)
    assert got[frozenset({(3, 0), (3, 1)})] == pytest.approx(0.7 * 0.4)


def test_equal_weight_closed_form():
    rng = np.random.default_rng(7)
    for _ in range(50):
        k = int(rng.integers(1, 6))
        x = rng.random(k + 3)
        lam = float(rng.random())
        p = ModelParams(alpha=float(rng.uniform(0, 0.1)), beta=float(rng.uniform(1.01, 2)),
                        simplified=True)
        st = star([1.0 / k] * k, health=x, lam=lam, extra_healthy=[9, 10], clock=int(rng.integers(0, 4)))
        u = k + 1
        want = lam / k * (x[u] - x[1:k + 1].mean()) - p.alpha * p.beta**st.clock
        assert oracle.exact_score(st, (u, 0), 1, p) == pytest.approx(want, abs=1e-12)


def test_zero_susceptibility_depth_one():
    p = ModelParams(alpha=0.05, beta=1.2)
    st = star([0.2, 0.8], lam=[0.0, 0.5, 0.5, 0.5], extra_healthy=[9], clock=2)
    assert oracle.exact_score(st, (3, 0), 1, p) == pytest.approx(-0.05 * 1.2**2, abs=1e-15)


def test_brute_force_no_positive_subset():
    st = star([0.5, 0.5], health=[0.5, 0.9, 0.9, 0.1], lam=0.8, extra_healthy=[9])
    res = oracle.brute_force_policy(st, ModelParams(alpha=0.01), 1)
    assert res.edges.shape == (0, 2) and res.unique


def test_brute_force_single_positive_candidate():
    st = star([0.5, 0.5], health=[0.5, 0.1, 0.1, 0.9], lam=0.8, extra_healthy=[9])
    res = oracle.brute_force_policy(st, ModelParams(alpha=0.01), 1)
    assert res.edges.tolist() == [[3, 0]]


def test_pairwise_value_without_decisions_is_two_step_health(rng):
    st = star([0.3, 0.7], health=[0.2, 0.6, 0.9, 0.4], lam=0.6, extra_healthy=[9])
    p = ModelParams(mu=0.25)
    s1, _ = step(st, [], rng, p)
    s2, _ = step(s1, [], rng, p)
    assert oracle.pairwise_value(st, 0, [], [], p) == pytest.approx(s1.health[0] + s2.health[0], abs=1e-15)


def test_guards_refuse_large_instances():
    st = star([1 / 7] * 7, extra_healthy=[20])
    with pytest.raises(oracle.TooLargeError):
        oracle.exact_score(st, (8, 0), 1, ModelParams())
