"""Solver result container shared by every backend."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field, replace

from .field import ScalarField, SourceSet, viscosity_residual_rms


@dataclass
class SolveReport:
    """Recovered field plus diagnostics.

    s_star is the recovered arrival-cost / height field, phi the positive
    wave-like field it was taken from (strictly positive at every node).
    Perturbation solves fill ftilde / c0_bound / term_norms (T+1 entries);
    sparse solves fill the CG fields.  viscosity_residual_rms is the RMS of
    (|grad S|^2 - hbar_eff lap S - f^2)/f^2 away from seeds and boundary.
    """

    s_star: ScalarField
    phi: ScalarField
    backend: str
    hbar: float
    ftilde: float | None = None
    c0_bound: float | None = None
    tau: float = 1.0
    term_norms: tuple[float, ...] = ()
    truncated_counts: tuple[int, ...] = ()
    floored_count: int = 0
    cg_iterations: int | None = None
    cg_residual: float | None = None
    viscosity_residual_rms: float = math.nan
    wall_time: float = 0.0
    warnings: tuple[str, ...] = ()
    gradient_error: float | None = None
    extras: dict = dc_field(default_factory=dict)


def finalize_report(
    rep: SolveReport,
    f: ScalarField,
    sources: SourceSet,
    hbar_eff: float,
    t0: float,
) -> SolveReport:
    rms = math.nan
    if rep.s_star.grid.ndim == 2 and min(rep.s_star.grid.dims) >= 3:
        rms = viscosity_residual_rms(rep.s_star, f, hbar_eff, sources)
    return replace(
        rep,
        viscosity_residual_rms=rms,
        wall_time=time.perf_counter() - t0,
    )


def report_items(rep: SolveReport) -> dict:
    """Flatten a report into the key = value mapping used on disk
    (field data is written separately as EIKF)."""
    items: dict = {
        "backend": rep.backend,
        "hbar": rep.hbar,
        "tau": rep.tau,
    }
    if rep.ftilde is not None:
        items["ftilde"] = rep.ftilde
    if rep.c0_bound is not None:
        items["c0_bound"] = rep.c0_bound
    if rep.term_norms:
        items["term_norms"] = list(rep.term_norms)
    if rep.truncated_counts:
        items["truncated_counts"] = list(rep.truncated_counts)
    if rep.cg_iterations is not None:
        items["cg_iterations"] = rep.cg_iterations
    if rep.cg_residual is not None:
        items["cg_residual"] = rep.cg_residual
    items["floored_count"] = rep.floored_count
    items["viscosity_residual_rms"] = rep.viscosity_residual_rms
    if rep.gradient_error is not None:
        items["gradient_error"] = rep.gradient_error
    for k, v in rep.extras.items():
        items[k] = v
    if rep.warnings:
        items["warnings"] = "; ".join(rep.warnings)
    items["wall_time"] = rep.wall_time
    return items
