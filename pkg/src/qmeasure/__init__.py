"""Finite-dimensional simulator of von Neumann measurement models."""

from .bayes import ClassicalJoint, classical_nonselective, posterior, prior, quantum_contrast
from .engine import Report, emit_report, load_report, run_checks, run_timing_comparison
from .hilbert import (
    DimensionError,
    SpectralObservable,
    ValidityError,
    is_unitary,
    partial_trace_apparatus,
    spectral_decompose,
    tensor,
    von_neumann_entropy,
)
from .kernel import (
    ChainModel,
    JointOutcomeDistribution,
    MeasurementModel,
    NullEventError,
    OutcomeDistribution,
    RepeatabilityReport,
    build_measuring_unitary,
    chain_extend,
    conditional_state,
    joint_simultaneous_distribution,
    luders_update,
    make_model,
    nonselective_channel,
    open_system_nonselective,
    pointer_distribution,
    statistical_formula,
    verify_linearity,
    verify_repeatability,
)
from .scenario import Scenario, ScenarioError, load_scenario, load_stock

__version__ = "0.1.0"

__all__ = [
    "ChainModel",
    "ClassicalJoint",
    "DimensionError",
    "JointOutcomeDistribution",
    "MeasurementModel",
    "NullEventError",
    "OutcomeDistribution",
    "RepeatabilityReport",
    "Report",
    "Scenario",
    "ScenarioError",
    "SpectralObservable",
    "ValidityError",
    "build_measuring_unitary",
    "chain_extend",
    "classical_nonselective",
    "conditional_state",
    "emit_report",
    "is_unitary",
    "joint_simultaneous_distribution",
    "load_report",
    "load_scenario",
    "load_stock",
    "luders_update",
    "make_model",
    "nonselective_channel",
    "open_system_nonselective",
    "partial_trace_apparatus",
    "pointer_distribution",
    "posterior",
    "prior",
    "quantum_contrast",
    "run_checks",
    "run_timing_comparison",
    "spectral_decompose",
    "statistical_formula",
    "tensor",
    "verify_linearity",
    "verify_repeatability",
    "von_neumann_entropy",
]
