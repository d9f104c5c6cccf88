"""Dual-engine performance analysis of cognitive-radio spectrum handoff.

An analytical engine (three discrete-time Markov chains: PU channel
occupancy, SU contention, and the per-pair handoff chain) and an
independent slot-level Monte Carlo simulator produce the same three
metrics — throughput, SU-PU collision probability, and average handoff
delay — so each can validate the other.  The ``specmarkov`` CLI runs
single points, sweeps, and cross-validations, emitting CSV.
"""

from .chains import (
    BALANCE_TOL,
    ROW_SUM_TOL,
    ChainError,
    StructuralError,
    ValidationError,
    recurrent_classes,
    stationary_distribution,
    stationary_distribution_power,
    validate_transition_matrix,
)
from .config import RunSpec, parse_config
from .contention import (
    ContentionParams,
    ContentionResult,
    contention_result,
    gen_binomial,
    s_count,
    s_count_oracle,
    system_chain,
    t_access,
    u_count,
)
from .handoff import (
    AnalysisResult,
    DerivedMetrics,
    HandoffState,
    InfiniteDelayError,
    ModelParams,
    analyze,
    build_full_chain,
    closed_form_stationary,
    collision_probability,
    enumerate_states,
    handoff_delay,
    numeric_stationary,
    throughput,
)
from .occupancy import Availability, PuParams, availability, build_pu_chain, off_pmf
from .simulator import SimConfig, SimResult, pu_busy_matrix, run, select_channel

__version__ = "0.1.0"

__all__ = [
    "AnalysisResult",
    "Availability",
    "BALANCE_TOL",
    "ChainError",
    "ContentionParams",
    "ContentionResult",
    "DerivedMetrics",
    "HandoffState",
    "InfiniteDelayError",
    "ModelParams",
    "PuParams",
    "ROW_SUM_TOL",
    "RunSpec",
    "SimConfig",
    "SimResult",
    "StructuralError",
    "ValidationError",
    "analyze",
    "availability",
    "build_full_chain",
    "build_pu_chain",
    "closed_form_stationary",
    "collision_probability",
    "contention_result",
    "enumerate_states",
    "gen_binomial",
    "handoff_delay",
    "numeric_stationary",
    "off_pmf",
    "parse_config",
    "pu_busy_matrix",
    "recurrent_classes",
    "run",
    "s_count",
    "s_count_oracle",
    "select_channel",
    "stationary_distribution",
    "stationary_distribution_power",
    "system_chain",
    "t_access",
    "throughput",
    "u_count",
    "validate_transition_matrix",
]
