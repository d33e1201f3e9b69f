"""Gradient-based one-shot selection of A_0 for the terminal objective.

The policy works on the equal-weight propagation model: with the
transposed adjacency ``W`` (``W[v, u] = 1/|in(v)|``) and a perturbation ``Y``
encoding additions (+) and removals (-), the terminal health vector is
``Omega^T x(0)`` with ``Omega = Lambda (W + Y) + I - Lambda``.

Gradients are taken with respect to the edge indicators, i.e. ``Y`` measured
in units of ``1/|in(v)|`` per row; that is where the ``lambda_i / |in(i)|``
chain-rule factor comes from.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .dynamics import sample_removals
from .model import ModelParams, NetworkState, as_edges
from .policies import heuristic_select


def perturbation_matrix(state: NetworkState, additions, removals) -> np.ndarray:
    n = state.n
    Y = np.zeros((n, n))
    deg = state.in_degree.astype(np.float64)
    A = as_edges(additions)
    R = as_edges(removals)
    if A.size:
        Y[A[:, 1], A[:, 0]] = 1.0 / deg[A[:, 1]]
    if R.size:
        Y[R[:, 1], R[:, 0]] = -1.0 / deg[R[:, 1]]
    return Y


def propagation_matrix(state: NetworkState, Y) -> np.ndarray:
    lam = state.susceptibility
    W = state.dense_weights(uniform=True)
    omega = lam[:, None] * (W + Y)
    omega[np.diag_indices_from(omega)] += 1.0 - lam
    return omega


def power_apply(M: np.ndarray, T: int, x: np.ndarray) -> np.ndarray:
    """``M**T @ x`` by repeated squaring, never forming the full power."""
    out = np.asarray(x, dtype=np.float64)
    P = M
    e = int(T)
    while e:
        if e & 1:
            out = P @ out
        e >>= 1
        if e:
            P = P @ P
    return out


def _zero_penalty(state: NetworkState, params: ModelParams) -> float:
    return params.decision_weight(state.clock)


def terminal_value(Y, a0_size: int, state0: NetworkState, params: ModelParams) -> float:
    omega = propagation_matrix(state0, Y)
    xT = power_apply(omega, params.horizon, state0.health)
    return float(xT[state0.target].sum()) - _zero_penalty(state0, params) * a0_size


def omega_gradient(omega: np.ndarray, T: int, target_mask: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """d(1_S^T Omega^T x0)/dOmega = sum_r (Omega^r)^T 1_S x0^T (Omega^(T-1-r))^T."""
    n = omega.shape[0]
    left = np.empty((n, T))
    right = np.empty((n, T))
    a = target_mask.astype(np.float64)
    b = np.asarray(x0, dtype=np.float64)
    for r in range(T):
        left[:, r] = a
        right[:, T - 1 - r] = b
        a = omega.T @ a
        b = omega @ b
    return left @ right.T


def gradient(Y, state0: NetworkState, params: ModelParams, alpha_term: bool = True) -> np.ndarray:
    """Gradient of the terminal value with respect to the edge indicators.

    ``alpha_term`` adds ``-1{Y_ij = 0} * alpha0`` as in the policy's chain
    rule; switch it off to get the health term alone.
    """
    omega = propagation_matrix(state0, Y)
    dF = omega_gradient(omega, params.horizon, state0.target_mask, state0.health)
    deg = state0.in_degree.astype(np.float64)
    scale = np.divide(state0.susceptibility, deg, out=np.zeros(state0.n), where=deg > 0)
    G = scale[:, None] * dF
    if alpha_term:
        G -= (np.asarray(Y) == 0.0) * _zero_penalty(state0, params)
    return G


def linearized_argmax(grad: np.ndarray, state0: NetworkState, params: ModelParams) -> np.ndarray:
    """Heuristic argmax of E_R<Y(A, R), grad> over feasible A.

    Each candidate (u, v) scores ``grad[v, u] - sum_r P[r removed] grad[v, r]``
    (the expectation is exact through the single-removal marginals).
    """
    w = kernels.uniform_weights(state0.indptr) if params.simplified else state0.weight

    def scorer(state, cands):
        return kernels.linearized_scores(state.indptr, state.src, w, np.ascontiguousarray(grad),
                                         cands.targets, cands.cptr, cands.csrc)

    edges, _ = heuristic_select(state0, params, scorer)
    return edges


def run_gradient_policy(state0: NetworkState, params: ModelParams, n: int, L: int, rng,
                        diagnostics: list | None = None) -> np.ndarray:
    Y0 = np.zeros((state0.n, state0.n))
    iterates = [linearized_argmax(gradient(Y0, state0, params), state0, params)]
    f_tilde = []
    for l in range(1, L + 1):
        prev = iterates[-1]
        vals = np.empty(n)
        g_sum = np.zeros_like(Y0)
        for i in range(n):
            rem = sample_removals(state0, prev, rng, simplified=params.simplified)
            Y = perturbation_matrix(state0, prev, rem)
            vals[i] = terminal_value(Y, prev.shape[0], state0, params)
            g_sum += gradient(Y, state0, params)
        f_tilde.append(float(vals.mean()))
        iterates.append(linearized_argmax(g_sum / n, state0, params))
        if diagnostics is not None:
            diagnostics.append({"type": "gradient_iter", "l": l, "f_tilde": f_tilde[-1],
                                "size": int(iterates[-1].shape[0])})
    # the last iterate is never evaluated
    best = int(np.argmax(f_tilde))
    return iterates[best]
