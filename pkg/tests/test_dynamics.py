import numpy as np
import pytest
from scipy import stats

from conftest import star
from netrvene import oracle
from netrvene.dynamics import (no_action_health, propagate_health, removal_marginals,
                               sample_removals, step, update_weights)
from netrvene.model import ContractError, DomainError, ModelParams, check_invariants, from_edges


def test_removal_marginals_example():
    assert removal_marginals([0.5, 0.3, 0.2]) == pytest.approx([0.25, 0.35, 0.40])
    assert removal_marginals([0.5, 0.3, 0.2]).sum() == pytest.approx(1.0)


def test_equal_weights_give_uniform_marginals():
    assert removal_marginals([0.25] * 4) == pytest.approx([0.25] * 4)


def test_single_in_edge_is_always_removed():
    assert removal_marginals([1.0]) == pytest.approx([1.0])


def test_monte_carlo_marginals_within_three_sigma(rng):
    st = star([0.5, 0.3, 0.2], extra_healthy=[9])
    n = 20_000
    counts = np.zeros(3)
    for _ in range(n):
        R = sample_removals(st, [(4, 0)], rng)
        counts[R[0, 0] - 1] += 1
    p = np.array([0.25, 0.35, 0.40])
    sigma = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) <= 3 * sigma)


def test_no_additions_no_removals(rng):
    assert sample_removals(star([0.5, 0.5]), [], rng).shape == (0, 2)


def test_drift_example():
    st = star([0.8, 0.2])
    _, w = update_weights(st, [], [], 0.5)
    assert w[st.indptr[0]:st.indptr[1]] == pytest.approx([0.65, 0.35])


def test_equal_weights_are_a_fixed_point():
    st = star([0.5, 0.5])
    for mu in (0.1, 0.7):
        _, w = update_weights(st, [], [], mu)
        assert w[:2] == pytest.approx([0.5, 0.5])


def test_add_and_normalise_example():
    # sources 1, 2, 3 with weights 0.5, 0.3, 0.2; remove (2, 0), add (4, 0)
    st = star([0.5, 0.3, 0.2], extra_healthy=[9])
    src, w = update_weights(st, [(4, 0)], [(2, 0)], 0.1)
    assert src[:3].tolist() == [1, 3, 4]
    assert w[:3] == pytest.approx([0.61644, 0.24658, 0.13699], abs=5e-6)


def test_inconsistent_removals_are_refused():
    st = star([0.5, 0.3, 0.2], extra_healthy=[9])
    with pytest.raises(ContractError):
        update_weights(st, [(4, 0)], [], 0.1)
    with pytest.raises(ContractError):
        update_weights(st, [(4, 0)], [(4, 0)], 0.1)


def test_zero_susceptibility_freezes_health():
    st = star([0.3, 0.7], health=[0.1, 0.9, 0.4], lam=0.0)
    assert propagate_health(st, st.weight) == pytest.approx(st.health)


def test_propagation_examples():
    st = star([0.5, 0.5], health=[0.3, 0.0, 1.0], lam=1.0)
    assert propagate_health(st, st.weight)[0] == pytest.approx(0.5)
    st = star([0.5, 0.5], health=[0.4, 0.6, 1.0], lam=0.5)
    assert propagate_health(st, st.weight)[0] == pytest.approx(0.6)


def test_frozen_system_stays_constant(rng):
    st = star([0.2, 0.3, 0.5], health=[0.1, 0.5, 0.7, 0.9], lam=0.0)
    p = ModelParams()
    x0 = st.health.copy()
    for _ in range(5):
        st, _ = step(st, [], rng, p)
        assert np.array_equal(st.health, x0)


def test_drift_contracts_towards_uniform(rng):
    st = star([0.7, 0.2, 0.1])
    p = ModelParams(mu=0.3)
    dev = []
    for _ in range(10):
        dev.append(np.abs(st.weight[:3] - 1 / 3).max())
        st, _ = step(st, [], rng, p)
    assert all(b < a for a, b in zip(dev, dev[1:]))


def test_step_rejects_infeasible_decisions(rng):
    st = star([0.5, 0.5], extra_healthy=[9])
    with pytest.raises(DomainError):
        step(st, [(1, 0)], rng, ModelParams())


def test_step_conserves_structure(rng):
    st = star([0.4, 0.3, 0.2, 0.1], extra_healthy=[8, 9])
    new, rec = step(st, [(5, 0), (6, 0)], rng, ModelParams())
    assert check_invariants(new) == []
    assert np.array_equal(new.in_degree, st.in_degree)
    assert rec.removals.shape == (2, 2) and set(rec.removals[:, 1]) == {0}
    assert new.clock == st.clock + 1
    assert rec.to_json()["type"] == "transition"


def test_no_action_health_is_a_deterministic_step(rng):
    st = star([0.6, 0.4], health=[0.2, 0.9, 0.1])
    p = ModelParams(mu=0.2)
    nxt, _ = step(st, [], rng, p)
    assert np.array_equal(no_action_health(st, p), nxt.health)


def test_two_removals_follow_sequential_law(rng):
    edges = [(1, 0, 0.1), (2, 0, 0.2), (3, 0, 0.3), (4, 0, 0.4)] + [(0, i, 1.0) for i in range(1, 7)]
    st = from_edges(7, edges, np.full(7, 0.5), np.full(7, 0.5), [0], [5, 6])
    A = [(5, 0), (6, 0)]
    exact = oracle.removal_distribution_exact(st, A).outcomes
    index = {o: i for i, (o, _) in enumerate(exact)}
    counts = np.zeros(len(exact))
    n = 20_000
    for _ in range(n):
        R = sample_removals(st, A, rng)
        counts[index[frozenset(map(tuple, R.tolist()))]] += 1
    expected = n * np.array([p for _, p in exact])
    assert stats.chisquare(counts, expected).pvalue > 2 * stats.norm.sf(3.0)
