from modrel.chain import TransientMatrix, absorption_probability, fundamental_row, neumann_partial_sum
from modrel.estimation import EstimateReport, TestLog, estimate_parameters, estimate_reliability
from modrel.model import (
    BenignModel,
    InputCase,
    InputProfile,
    ModelKind,
    SystemModel,
    TestabilityProfile,
    ValidationReport,
    validate_benign_model,
    validate_system_model,
)
from modrel.reliability import (
    FaultVector,
    ReliabilityResult,
    fault_probability_after_tests,
    pi_benign,
    pi_dependent,
    pi_independent,
    revealed_fault,
    system_reliability,
)
from modrel.simulate import SimConfig, SimStats, generate_log, simulate_benign, simulate_dependent

__all__ = [
    "BenignModel",
    "EstimateReport",
    "FaultVector",
    "InputCase",
    "InputProfile",
    "ModelKind",
    "ReliabilityResult",
    "SimConfig",
    "SimStats",
    "SystemModel",
    "TestLog",
    "TestabilityProfile",
    "TransientMatrix",
    "ValidationReport",
    "absorption_probability",
    "estimate_parameters",
    "estimate_reliability",
    "fault_probability_after_tests",
    "fundamental_row",
    "generate_log",
    "neumann_partial_sum",
    "pi_benign",
    "pi_dependent",
    "pi_independent",
    "revealed_fault",
    "simulate_benign",
    "simulate_dependent",
    "system_reliability",
    "validate_benign_model",
    "validate_system_model",
]
