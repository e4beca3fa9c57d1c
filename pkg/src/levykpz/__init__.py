"""Pseudo-spectral simulation of ``u_t = -L u + lambda |grad u|**q`` with a Levy operator ``L``."""

from __future__ import annotations

from .diagnostics import (
    DiagnosticsRecord,
    ExponentFit,
    MassLimit,
    ben_artzi_koch_gap,
    critical_exponent,
    d_quantity,
    estimate_mass_limit,
    fit_power_law,
    mass_identity_residual,
    p0_exponent,
    self_similar_error,
    smallness_combination,
)
from .oracle import convolve_semigroup, fd_solve
from .semigroup import KernelSpec, apply_semigroup, kernel_at, stable_kernel, verify_self_similarity
from .solver import ProblemSpec, Trajectory, dyadic_times, geometric_times, picard_solve, run, step
from .spectral import Field, PeriodicGrid, SpectralField, forward, gradient, inverse, lp_norm
from .symbol import SymbolKind, SymbolSpec, evaluate, evaluate_radial

__all__ = [
    "DiagnosticsRecord", "ExponentFit", "MassLimit", "ben_artzi_koch_gap", "critical_exponent",
    "d_quantity", "estimate_mass_limit", "fit_power_law", "mass_identity_residual", "p0_exponent",
    "self_similar_error", "smallness_combination", "convolve_semigroup", "fd_solve", "KernelSpec",
    "apply_semigroup", "kernel_at", "stable_kernel", "verify_self_similarity", "ProblemSpec",
    "Trajectory", "dyadic_times", "geometric_times", "picard_solve", "run", "step", "Field",
    "PeriodicGrid", "SpectralField", "forward", "gradient", "inverse", "lp_norm", "SymbolKind",
    "SymbolSpec", "evaluate", "evaluate_radial",
]
