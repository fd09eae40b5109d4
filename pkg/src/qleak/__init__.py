"""Leakage of quantum embeddings of two-party primitives."""

__version__ = "0.1.0"

from .distributions import (
    JointDistribution,
    Side,
    binary_entropy,
    condition_on,
    conditional_entropy,
    dependent_part,
    dependent_quotient,
    equivalent_up_to_relabeling,
    is_trivial,
    monotone,
    mutual_information,
    shannon_entropy,
)
from .quantum import (
    DensityMatrix,
    Ensemble,
    StateVector,
    holevo_information,
    partial_trace,
    trace_norm,
    von_neumann_entropy,
)
from .embeddings import (
    GeneralEmbedding,
    PhaseFunction,
    RegularEmbedding,
    TripartiteImplementation,
    classical_implementation,
    correctness_check,
    leakage_general,
    leakage_regular,
    make_general,
    make_regular,
    tripartite_leakage,
)
from .primitives import (
    Kind,
    PrimitiveSpec,
    build_primitive,
    otp_lower_bound,
    rot_closed_form_leakage,
    simulate_classical_otp_quarter,
)
from .optimizer import OptimizationResult, OptimizerConfig, gauge_fix, minimize_leakage
from .attacks import Povm, canonical_ot_povms, povm_outcome_distribution

__all__ = [name for name in dir() if not name.startswith("_")]
