"""Star-network inequalities derived from full-correlation Bell inequalities."""

from .bell import BellMatrix, DeterministicAssignment, bell_value, chsh_matrix, elegant_matrix, local_bound, transformed
from .errors import CapacityError, NumericFailure, PreconditionError, StarcorrError, ValidationError
from .nlocal import (
    NLocalStrategy,
    ReducedStrategy,
    SignClass,
    behavior_from_strategy,
    classical_max,
    reduce,
    sample_strategies,
    saturating_families,
)
from .qnet import QuantumNetworkStrategy, behavior_from_quantum, critical_visibility, preset, tensorize
from .star import NetworkBehavior, NodeSetting, StarScenario, evaluate, network_correlator, product_bound_check, star_bound

__version__ = "0.1.0"

__all__ = [
    "BellMatrix",
    "CapacityError",
    "DeterministicAssignment",
    "NLocalStrategy",
    "NetworkBehavior",
    "NodeSetting",
    "NumericFailure",
    "PreconditionError",
    "QuantumNetworkStrategy",
    "ReducedStrategy",
    "SignClass",
    "StarScenario",
    "StarcorrError",
    "ValidationError",
    "behavior_from_quantum",
    "behavior_from_strategy",
    "bell_value",
    "chsh_matrix",
    "classical_max",
    "critical_visibility",
    "elegant_matrix",
    "evaluate",
    "local_bound",
    "network_correlator",
    "preset",
    "product_bound_check",
    "reduce",
    "sample_strategies",
    "saturating_families",
    "star_bound",
    "tensorize",
    "transformed",
]
