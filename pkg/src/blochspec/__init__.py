"""Floquet-Bloch spectral computations for self-adjoint ordinary
differential operators with periodic matrix coefficients."""

from .coeffs import (
    AveragedMatrix,
    FourierMatrixSeries,
    OperatorSpec,
    b_k_bound,
    constant_series,
    fourier_coefficients,
    load_operator_spec,
    mean_matrix,
    selfadjoint_operator,
    series_from_harmonics,
)
from .galerkin import (
    BlochProblem,
    BlochSolution,
    ConvergenceReport,
    assemble_bloch_matrix,
    convergence_check,
    match_to_predictors,
    reduce_t,
    solve_bloch,
)
from .monodromy import (
    CharPolyInU,
    FiberBisection,
    MonodromyMatrix,
    SpectrumMembership,
    bisect_to_fiber,
    char_poly_in_u,
    companion_system,
    in_spectrum,
    monodromy_matrix,
    root_pairing_defect,
)
from .asymptotics import (
    AsymptoticDiagnostics,
    b_set_intervals,
    b_set_measure,
    b_set_membership,
    case_context,
    error_scales,
    fit_error_constants,
    label_eigenvalues,
    mu_pred,
    residual_identity_14,
    verify_eigenfunction_asymptotics,
    verify_eigenvalue_asymptotics,
)
from .spectrum import (
    Band,
    GapCriteriaReport,
    SpectrumReport,
    band_overlap_check,
    certified_window,
    check_theorem3,
    merge_and_gaps,
    sweep_bands,
)
from .defaults import TOLERANCES, truncation_for

__all__ = [
    "AveragedMatrix",
    "FourierMatrixSeries",
    "OperatorSpec",
    "b_k_bound",
    "constant_series",
    "fourier_coefficients",
    "load_operator_spec",
    "mean_matrix",
    "selfadjoint_operator",
    "series_from_harmonics",
    "BlochProblem",
    "BlochSolution",
    "ConvergenceReport",
    "assemble_bloch_matrix",
    "convergence_check",
    "match_to_predictors",
    "reduce_t",
    "solve_bloch",
    "CharPolyInU",
    "FiberBisection",
    "MonodromyMatrix",
    "SpectrumMembership",
    "bisect_to_fiber",
    "char_poly_in_u",
    "companion_system",
    "in_spectrum",
    "monodromy_matrix",
    "root_pairing_defect",
    "AsymptoticDiagnostics",
    "b_set_intervals",
    "b_set_measure",
    "b_set_membership",
    "case_context",
    "error_scales",
    "fit_error_constants",
    "label_eigenvalues",
    "mu_pred",
    "residual_identity_14",
    "verify_eigenfunction_asymptotics",
    "verify_eigenvalue_asymptotics",
    "Band",
    "GapCriteriaReport",
    "SpectrumReport",
    "band_overlap_check",
    "certified_window",
    "check_theorem3",
    "merge_and_gaps",
    "sweep_bands",
    "TOLERANCES",
    "truncation_for",
]
