"""Numerical toolkit for 2x2 canonical systems J Y' = z H Y."""
from .asymptotics import VerificationReport, f_scale, g_scale, rv_index_estimate, verify
from .hamiltonian import (
    Constant,
    DiagonalPower,
    Hamiltonian,
    MeshPolicy,
    PiecewiseConstant,
    Potential,
    PowerLawAlpha,
    Primitive,
    SampledPrimitive,
    StepExample,
    from_json,
    load,
    validate,
)
from .propagator import TransferMatrix, fundamental_matrix, zero_energy_matrix
from .spectral import SpectralFunction, model_rho, stieltjes_invert, tauberian_compare
from .transforms import (
    IndefiniteStringData,
    StringData,
    flip,
    gauge_transform,
    generalized_inverse,
    indefinite_string_to_canonical,
    scale,
    string_to_canonical,
    trace_normalize,
)
from .weyl import (
    Alpha,
    ConstantZeta,
    DiracKappa,
    DomainError,
    MFunctionSample,
    NonConvergence,
    Step,
    TruncationPolicy,
    m_function,
    m_values,
    model_m,
)

__version__ = "0.1.0"

__all__ = [
    "Constant", "DiagonalPower", "Hamiltonian", "MeshPolicy", "PiecewiseConstant", "Potential",
    "PowerLawAlpha", "Primitive", "SampledPrimitive", "StepExample", "from_json", "load", "validate",
    "TransferMatrix", "fundamental_matrix", "zero_energy_matrix",
    "Alpha", "ConstantZeta", "DiracKappa", "DomainError", "MFunctionSample", "NonConvergence", "Step",
    "TruncationPolicy", "m_function", "m_values", "model_m",
    "SpectralFunction", "model_rho", "stieltjes_invert", "tauberian_compare",
    "IndefiniteStringData", "StringData", "flip", "gauge_transform", "generalized_inverse",
    "indefinite_string_to_canonical", "scale", "string_to_canonical", "trace_normalize",
    "VerificationReport", "f_scale", "g_scale", "rv_index_estimate", "verify",
]
