"""Terminal and cumulative objectives with the edge-addition penalty."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ContractError, DomainError, ModelParams


def penalty(t: int, count: int, params: ModelParams) -> float:
    if count < 0:
        raise DomainError(f"negative decision size {count}")
    if count == 0:
        return 0.0
    return params.alpha * params.beta**t * count


@dataclass
class TrajectoryLog:
    """Health snapshots x(0..T) and the decision sizes taken at clocks 0..T-1."""

    health: np.ndarray
    decision_sizes: np.ndarray
    params: ModelParams
    target: np.ndarray

    def complete(self) -> bool:
        T = self.params.horizon
        return self.health.shape[0] == T + 1 and self.decision_sizes.shape[0] == T


def penalty_total(log: TrajectoryLog) -> float:
    p = log.params
    shift = 1 if p.penalty_at_zero == "alpha_beta" else 0
    return float(sum(penalty(c + shift, int(n), p) for c, n in enumerate(log.decision_sizes)))


def health_term(log: TrajectoryLog) -> float:
    xs = log.health[:, log.target]
    if log.params.objective_kind == "terminal":
        return float(xs[-1].sum())
    # x(0) is pre-intervention and never counted
    return float(xs[1:].sum())


def evaluate_objective(log: TrajectoryLog) -> float:
    if not log.complete():
        raise ContractError(
            f"incomplete log: {log.health.shape[0]} snapshots, "
            f"{log.decision_sizes.shape[0]} decisions for horizon {log.params.horizon}"
        )
    return health_term(log) - penalty_total(log)
