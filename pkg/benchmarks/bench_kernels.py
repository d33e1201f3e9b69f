"""Compiled loop kernels vs their numpy twins on generated networks.

    python3 benchmarks/bench_kernels.py [--sizes 200 800 3200] [--repeat 20]

Prints the best-of-``repeat`` time per call for each kernel and backend.
"""

import argparse
import timeit

import numpy as np

from netrvene import kernels
from netrvene._jit import HAVE_NUMBA
from netrvene.dynamics import no_action_health
from netrvene.model import ModelParams
from netrvene.netgen import GenConfig, generate_network
from netrvene.policies import enumerate_candidates


def cases(state, params, rng):
    x, lam = state.health, state.susceptibility
    x1 = no_action_health(state, params)
    c = enumerate_candidates(state)
    a1, c1, a2, c2 = kernels.coefficients(state.indptr, state.src, state.weight, x, x1, params.mu,
                                          c.targets, False, True)
    scores = rng.standard_normal(c.csrc.size)
    caps = state.in_degree[c.targets]
    grad = rng.standard_normal((state.n, state.n))
    return {
        "drift_weights": (state.indptr, state.weight, params.mu),
        "propagate": (state.indptr, state.src, state.weight, x, lam),
        "candidates": (state.indptr, state.src, state.target, state.healthy, state.n),
        "coefficients": (state.indptr, state.src, state.weight, x, x1, params.mu, c.targets, False, True),
        "score_candidates": (c.targets, c.cptr, c.csrc, x, x1, lam, a1, c1, a2, c2, True, 0.01),
        "linearized_scores": (state.indptr, state.src, state.weight, grad, c.targets, c.cptr, c.csrc),
        "select_topk": (c.cptr, c.csrc, scores, caps),
    }


def best(fn, args, repeat):
    fn(*args)  # compile / warm caches
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 800, 3200])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba not installed: the loop column runs as plain Python")
    rng = np.random.default_rng(0)
    params = ModelParams()
    print(f"{'kernel':<18} {'N':>6} {'loop_us':>10} {'numpy_us':>10} {'speedup':>8}")
    for n in args.sizes:
        state, _ = generate_network(GenConfig(N=n, m=4), np.random.default_rng(n))
        for name, call in cases(state, params, rng).items():
            loop, vec = kernels.KERNELS[name]
            t_loop = best(loop, call, args.repeat) * 1e6
            t_vec = best(vec, call, args.repeat) * 1e6
            print(f"{name:<18} {n:>6} {t_loop:>10.1f} {t_vec:>10.1f} {t_vec / t_loop:>8.2f}")


if __name__ == "__main__":
    main()
