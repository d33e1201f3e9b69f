"""Edge-addition interventions on a DeGroot health-influence network.

The public surface is re-exported here; submodules hold the details.
"""

from ._jit import JIT_ENABLED, backend_name
from .dynamics import TransitionRecord, sample_removals, step, update_weights
from .model import (ContractError, DomainError, ModelParams, NetworkState, from_edges,
                    load_snapshot, save_snapshot)
from .objectives import TrajectoryLog, evaluate_objective
from .policies import POLICY_KINDS, PolicySpec, decide, heuristic_select

__version__ = "0.1.0"

__all__ = [
    "JIT_ENABLED", "backend_name", "TransitionRecord", "sample_removals", "step",
    "update_weights", "ContractError", "DomainError", "ModelParams", "NetworkState",
    "from_edges", "load_snapshot", "save_snapshot", "TrajectoryLog", "evaluate_objective",
    "POLICY_KINDS", "PolicySpec", "decide", "heuristic_select", "__version__",
]
