"""Eikonal solvers built on a linear screened-Poisson embedding.

The nonlinear arrival-cost equation |grad S| = f is solved by computing a
positive field phi with -hbar^2 lap(phi) + f^2 phi = seed spikes and reading
off S = -hbar log(phi); smaller hbar sharpens the answer.  Backends: an FFT
perturbation series (`perturb`), a sparse five-point system solved by
conjugate gradients (`sparse`), and a Godunov fast-sweeping reference
(`sweep`).  Application layers cover maze path planning (`plan`) and
Lambertian shape from shading (`sfs`).
"""

from ._accel import PURE_NUMPY, USE_NUMBA
from .field import (
    GridSpec,
    PercentErrorResult,
    ScalarField,
    SourceSet,
    gradient_central,
    laplacian_5pt,
    percent_error,
    viscosity_residual_rms,
)
from .kernels import (
    ConvPolicy,
    KernelParams,
    convolve,
    green_1d,
    green_2d,
    green_3d,
    kernel_field,
    modified_green,
)
from .perturb import (
    PerturbConfig,
    c0_upper_bound,
    optimal_ftilde,
    perturb_solve,
    phi_zero,
    scaled_solve,
)
from .plan import MazeCost, PathPolyline, backtrack, maze_to_forcing
from .report import SolveReport
from .sfs import LuminanceImage, render_lambertian, sfs_forcing, sfs_reconstruct
from .sparse import StencilSystem, assemble, solve_cg, sparse_eikonal
from .sweep import SweepConfig, sweep_solve

__version__ = "0.1.0"

__all__ = [
    "PURE_NUMPY",
    "USE_NUMBA",
    "GridSpec",
    "ScalarField",
    "SourceSet",
    "PercentErrorResult",
    "gradient_central",
    "laplacian_5pt",
    "percent_error",
    "viscosity_residual_rms",
    "KernelParams",
    "ConvPolicy",
    "green_1d",
    "green_2d",
    "green_3d",
    "modified_green",
    "kernel_field",
    "convolve",
    "PerturbConfig",
    "optimal_ftilde",
    "c0_upper_bound",
    "phi_zero",
    "perturb_solve",
    "scaled_solve",
    "SolveReport",
    "StencilSystem",
    "assemble",
    "solve_cg",
    "sparse_eikonal",
    "SweepConfig",
    "sweep_solve",
    "MazeCost",
    "PathPolyline",
    "maze_to_forcing",
    "backtrack",
    "LuminanceImage",
    "sfs_forcing",
    "render_lambertian",
    "sfs_reconstruct",
    "__version__",
]
