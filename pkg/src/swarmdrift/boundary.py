"""Tracing the convergence frontier on the diagonal c_l = c_g = c.

For each inertia weight the drift is negative for small positive c and
positive for large c; bisection on the sign locates the frontier.  The two
literature bounds (expectation convergence and variance convergence) are
provided for comparison; the variance region lies strictly inside the
actual convergence region.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .angle import FixedPointConfig
from .drift import omega_chi_zero, omega_general
from .errors import NoBracket
from .params import SwarmParams

_BRACKET_LO = 1e-3


@dataclass(frozen=True)
class BoundaryPoint:
    chi: float
    c_star: float
    bracket_width: float
    omega_at_bracket_ends: tuple[float, float]


def trelea_bound(chi: float) -> float:
    """Diagonal form of the expectation-convergence bound: c < 2(chi + 1)."""
    return 2.0 * (chi + 1.0)


def variance_bound(chi: float) -> float:
    """Diagonal form of the variance-convergence bound: c <= 12(1-chi^2)/(7-5chi)."""
    return 12.0 * (1.0 - chi * chi) / (7.0 - 5.0 * chi)


def _omega_diagonal(chi: float, c: float, cfg: FixedPointConfig) -> float:
    if chi == 0.0:
        return omega_chi_zero(c, c)
    return omega_general(SwarmParams(chi, c, c), cfg).omega


def trace_boundary(chi: float, c_hi: float = 4.5, tol: float = 1e-3,
                   cfg: FixedPointConfig | None = None) -> BoundaryPoint:
    """Bisect the drift's sign change in c over [~0, c_hi].

    Bisection is preferred over faster root finders because each drift
    evaluation is expensive and carries noise near the root; the final
    bracket ends and their drift signs are kept as evidence.
    """
    cfg = cfg or FixedPointConfig()
    lo, hi = _BRACKET_LO, c_hi
    w_lo = _omega_diagonal(chi, lo, cfg)
    w_hi = _omega_diagonal(chi, hi, cfg)
    if not (w_lo < 0.0 < w_hi):
        raise NoBracket(
            f"drift does not change sign on [{lo}, {hi}] at chi={chi}: "
            f"({w_lo:.4g}, {w_hi:.4g})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        w_mid = _omega_diagonal(chi, mid, cfg)
        if w_mid < 0.0:
            lo, w_lo = mid, w_mid
        else:
            hi, w_hi = mid, w_mid
    return BoundaryPoint(chi, 0.5 * (lo + hi), hi - lo, (w_lo, w_hi))


def _trace_one(args) -> Optional[BoundaryPoint]:
    chi, c_hi, tol, cfg = args
    try:
        return trace_boundary(chi, c_hi, tol, cfg)
    except NoBracket:
        return None


def boundary_curve(chi_values, tol: float = 1e-3,
                   cfg: FixedPointConfig | None = None, c_hi: float = 4.5,
                   jobs: int = 1) -> list[Optional[BoundaryPoint]]:
    """Trace the frontier at each chi; failed brackets come back as None.

    Points are independent, so they parallelize across processes; output
    order always matches input order.
    """
    cfg = cfg or FixedPointConfig()
    tasks = [(chi, c_hi, tol, cfg) for chi in chi_values]
    if jobs <= 1 or len(tasks) <= 1:
        return [_trace_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_trace_one, tasks))
