"""Penalized fractional obstacle problems: operators, solvers and diagnostics."""

from ._core import (
    Config,
    beta,
    dft_frac_laplacian,
    diagnostics,
    exponent_ladder,
    flux_scale,
    frac_laplacian,
    halfsphere_rayleigh,
    heat_evolve,
    normalization_constant,
    obstacle,
    poisson_constant,
    solve,
)

__all__ = [
    "Config",
    "beta",
    "dft_frac_laplacian",
    "diagnostics",
    "exponent_ladder",
    "flux_scale",
    "frac_laplacian",
    "halfsphere_rayleigh",
    "heat_evolve",
    "normalization_constant",
    "obstacle",
    "poisson_constant",
    "solve",
]
