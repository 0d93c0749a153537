"""Convergence classification for particle-swarm parameter triples.

The package decides whether a parameter triple (chi, c_l, c_g) makes the
single-particle recurrence contract or diverge, by computing the expected
per-step drift of the log squared magnitude against the stationary angle
distribution, and validates the numerics against closed forms and Monte
Carlo simulation.
"""

from .angle import (
    AngleCdf,
    FixedPointConfig,
    f_minus,
    f_plus,
    prob_step_leq,
    propagate_cdf,
    propagation_case,
    stationary_cdf,
)
from .boundary import (
    BoundaryPoint,
    boundary_curve,
    trace_boundary,
    trelea_bound,
    variance_bound,
)
from .drift import (
    OmegaResult,
    Verdict,
    classify,
    f_inner,
    g_integrand,
    omega_chi_zero,
    omega_general,
)
from .hdensity import HDensity, breakpoints, eval_density, make_h_density
from .montecarlo import SimConfig, SimStats, histogram_distance, simulate_drift, simulate_xv_direct
from .params import SwarmParams
from .splines import CubicSpline, KnotVector, build_spline, l2_distance, refine_knots

__all__ = [
    "AngleCdf",
    "BoundaryPoint",
    "CubicSpline",
    "FixedPointConfig",
    "HDensity",
    "KnotVector",
    "OmegaResult",
    "SimConfig",
    "SimStats",
    "SwarmParams",
    "Verdict",
    "boundary_curve",
    "breakpoints",
    "build_spline",
    "classify",
    "eval_density",
    "f_inner",
    "f_minus",
    "f_plus",
    "g_integrand",
    "histogram_distance",
    "l2_distance",
    "make_h_density",
    "omega_chi_zero",
    "omega_general",
    "prob_step_leq",
    "propagate_cdf",
    "propagation_case",
    "refine_knots",
    "simulate_drift",
    "simulate_xv_direct",
    "stationary_cdf",
    "trace_boundary",
    "trelea_bound",
    "variance_bound",
]
