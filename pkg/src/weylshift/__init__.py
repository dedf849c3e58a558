"""Weyl m-functions, reflectionless diagnostics and shift dynamics for
one-dimensional Schrodinger operators whose potentials are signed measures.
"""

__version__ = "0.1.0"

from .measures import (DEFAULT_METRIC, MetricConfig, SignedMeasure, Tent,
                       basis_function, basis_integrals, linear_combination,
                       metric_d, metric_from_integrals, restrict, shift,
                       test_integral, vc_membership)
from .schrodinger import (DEFAULT_SOLVER, SolutionState, SolverConfig,
                          TransferMatrix, solution_trace, solve_ivp,
                          transfer_matrix)
from .weyl import (MFunctionSample, WeylDisk, asymptotic_check, boundary_value,
                   free_m, free_wavenumber, green_diagonal, m_continuity_test,
                   m_halfline, weyl_disk)
from .reflectionless import (BorelWindow, ReflectionlessReport,
                             g_decomposition, phase_check,
                             reflectionless_defect, x_independence_check)
from .dynamics import (OmegaEstimate, ShiftTrace, denisov_rakhmanov_check,
                       omega_limit_estimate, omega_reflectionless_scan,
                       shift_trace)
from .oracle import (BlendWeights, OracleModel, blend, blend_weights,
                     build_oracle, calibrate, load_model, predict, save_model)

__all__ = [
    "__version__",
    "DEFAULT_METRIC", "MetricConfig", "SignedMeasure", "Tent",
    "basis_function", "basis_integrals", "linear_combination", "metric_d",
    "metric_from_integrals", "restrict", "shift", "test_integral",
    "vc_membership",
    "DEFAULT_SOLVER", "SolutionState", "SolverConfig", "TransferMatrix",
    "solution_trace", "solve_ivp", "transfer_matrix",
    "MFunctionSample", "WeylDisk", "asymptotic_check", "boundary_value",
    "free_m", "free_wavenumber", "green_diagonal", "m_continuity_test",
    "m_halfline", "weyl_disk",
    "BorelWindow", "ReflectionlessReport", "g_decomposition", "phase_check",
    "reflectionless_defect", "x_independence_check",
    "OmegaEstimate", "ShiftTrace", "denisov_rakhmanov_check",
    "omega_limit_estimate", "omega_reflectionless_scan", "shift_trace",
    "BlendWeights", "OracleModel", "blend", "blend_weights", "build_oracle",
    "calibrate", "load_model", "predict", "save_model",
]
