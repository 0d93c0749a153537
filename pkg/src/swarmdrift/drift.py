"""Expected per-step drift of the log squared magnitude, and classification.

The quantity of interest is the stationary expectation of

    ln((x_{t+1}^2 + v_{t+1}^2) / (x_t^2 + v_t^2)),

which depends on the state only through the angle.  A negative drift means
position and velocity contract to the attractor; a positive one means they
diverge.  The general case integrates a per-angle inner quadrature against
the stationary angle density; chi = 0 admits closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import xlogy

from . import hdensity, splines
from .angle import HALF_PI, AngleCdf, FixedPointConfig, stationary_cdf
from .errors import DegenerateCoefficients, NoConvergence
from .params import SwarmParams

GENERAL_SPLINE = "general_spline"
CHI_ZERO_CLOSED_FORM = "chi_zero_closed_form"

CONVERGES = "converges"
DIVERGES = "diverges"
INDETERMINATE = "indeterminate"
DETERMINISTIC_CONVERGES = "deterministic_converges"
DETERMINISTIC_DIVERGES = "deterministic_diverges"

# Round-off allowance for the closed forms; drift magnitudes below this are
# treated as sitting on the knife edge.
_CLOSED_FORM_EPS = 1e-12


@dataclass(frozen=True)
class OmegaResult:
    """Drift value in nats per iteration plus an empirical error estimate."""

    omega: float
    abs_error_estimate: float
    fixed_point_iterations: int
    method: str


@dataclass(frozen=True)
class Verdict:
    kind: str
    omega: Optional[OmegaResult] = None
    note: str = ""


def g_integrand(alpha: float, h, chi: float):
    """Per-step change of the log squared magnitude at a fixed angle and h.

    At alpha = +-pi/2 the analytic limit is ln(2*chi^2); for chi = 0 that
    limit is -inf, returned as a sentinel for the caller to clip.
    """
    if alpha == HALF_PI or alpha == -HALF_PI:
        if chi == 0.0:
            return -math.inf
        return math.log(2.0 * chi * chi)
    m = math.tan(alpha)
    hq = np.asarray(h, dtype=float)
    u = chi * m - hq
    out = np.log(u * u + (u + 1.0) ** 2) - math.log1p(m * m)
    return float(out) if np.isscalar(h) else out


class _InnerKernel:
    """Batched inner quadrature: alpha -> integral of g(alpha, h) f_H(h) dh.

    One natural spline per density piece and per angle, solved in a single
    banded call with the angles as right-hand-side columns.
    """

    def __init__(self, dens: hdensity.HDensity, chi: float, h_total: int):
        self.chi = chi
        edges = hdensity.breakpoints(dens)
        lengths = np.diff(edges)
        span = float(lengths.sum())
        self.grids = []
        for lo, hi, ln in zip(edges[:-1], edges[1:], lengths):
            n = max(6, int(round(h_total * ln / span)))
            g = np.linspace(lo, hi, n)
            self.grids.append((g, hdensity.eval_density(dens, g)))

    def values(self, alphas: np.ndarray, block: int = 2048) -> np.ndarray:
        out = np.empty(len(alphas))
        for start in range(0, len(alphas), block):
            sl = slice(start, min(start + block, len(alphas)))
            m = np.tan(alphas[sl])
            acc = np.zeros(sl.stop - sl.start)
            for g, f_h in self.grids:
                u = self.chi * m[None, :] - g[:, None]
                vals = np.log(u * u + (u + 1.0) ** 2) - np.log1p(m * m)[None, :]
                acc += splines.natural_integrals(g, vals * f_h[:, None])
            out[sl] = acc
        return out


def f_inner(alpha: float, d: hdensity.HDensity, chi: float,
            h_knot_count: int = 8192) -> float:
    """Inner quadrature of the drift at one angle.

    The integrand is splined piecewise between the density breakpoints with
    natural closures and integrated exactly.  At the boundary angles the
    integrand is constant in h, so the value is the analytic limit.
    """
    if alpha == HALF_PI or alpha == -HALF_PI:
        return -math.inf if chi == 0.0 else math.log(2.0 * chi * chi)
    kernel = _InnerKernel(d, chi, h_knot_count)
    return float(kernel.values(np.array([alpha]))[0])


# Deepest geometric ladder offset from the boundary angles.  Below this the
# remaining tail of the log-divergent integrand contributes ~1e-8, while
# knots much closer to +-pi/2 would sit a few float ulps apart and wreck the
# conditioning of the spline solve.
_LADDER_FLOOR = 1e-9


def _ladder(end: float, inward: float, clip: float) -> np.ndarray:
    """Geometrically spaced offsets approaching a clipped endpoint.

    Used when chi = 0: the inner quadrature diverges logarithmically at the
    boundary angles, and midpoint refinement alone cannot reach offsets on
    the order of the clip.  Two knots per decade suffice for a log profile.
    """
    floor = max(clip, _LADDER_FLOOR)
    decades = np.arange(math.floor(-math.log10(inward)), -math.log10(floor) + 0.5)
    offs = np.concatenate([10.0 ** -decades,
                           10.0 ** (-decades - 1.0 / 3.0),
                           10.0 ** (-decades - 2.0 / 3.0)])
    offs = offs[(offs > floor) & (offs < inward)]
    return end - np.sign(end) * np.sort(offs)[::-1 if end > 0 else 1]


def _enforce_min_gap(grid: np.ndarray, min_gap: float) -> np.ndarray:
    """Drop knots crowding their neighbours, preserving both endpoints.

    Knots a few float ulps apart make the spline system ill-conditioned and
    the resulting oscillations pollute integrals far from the crowded spot.
    """
    keep = np.concatenate([[True], np.diff(grid) > min_gap])
    keep[-1] = True
    if len(grid) > 2 and grid[-1] - grid[-2] <= min_gap:
        keep[-2] = False
    return grid[keep]


def _outer_integral(F: AngleCdf, dens: hdensity.HDensity, chi: float,
                    outer_budget: int, h_budget: int, clip: float) -> float:
    """Integral of the inner quadrature against the stationary density.

    The base grid is the union of the stationary CDF's knots (which track
    the density's features) with an equidistant baseline at half the budget
    (which resolves the inner quadrature's own geometry, e.g. its approach
    to the boundary limit over an angle scale of order chi).  The grid is
    then refined toward the budget wherever the third derivative of the
    interpolant jumps most.  For chi = 0 the domain is clipped at the ends
    and pre-seeded with a geometric ladder of knots.
    """
    kernel = _InnerKernel(dens, chi, h_budget)
    grid = np.union1d(F.knots, np.linspace(-HALF_PI, HALF_PI,
                                           max(outer_budget // 2, 4)))
    if chi == 0.0:
        lo = -HALF_PI + clip
        hi = HALF_PI - clip
        grid = grid[(grid > lo) & (grid < hi)]
        # ladders bridge from twice the baseline spacing down to the floor,
        # regardless of whatever stray knots already sit near the ends
        inward = 2.0 * math.pi / max(outer_budget // 2, 4)
        grid = np.concatenate(
            [[lo], _ladder(-HALF_PI, inward, clip), grid,
             _ladder(HALF_PI, inward, clip), [hi]]
        )
        grid = np.unique(grid)
    grid = _enforce_min_gap(grid, 1e-10)

    def integrand_at(pts: np.ndarray) -> np.ndarray:
        vals = np.empty(len(pts))
        interior = (pts > -HALF_PI) & (pts < HALF_PI)
        vals[interior] = kernel.values(pts[interior])
        if not np.all(interior):
            vals[~interior] = math.log(2.0 * chi * chi)
        return vals * F.density(pts)

    integrand = integrand_at(grid)
    while len(grid) < outer_budget:
        s = splines.build_spline(grid, integrand, splines.NATURAL)
        target = min(2 * len(grid), outer_budget)
        refined = splines.refine_knots(s, target).positions
        fresh = np.setdiff1d(refined, grid)
        if len(fresh) == 0:
            break
        fresh_vals = integrand_at(fresh)
        order = np.searchsorted(grid, fresh)
        grid = np.insert(grid, order, fresh)
        integrand = np.insert(integrand, order, fresh_vals)

    s = splines.build_spline(grid, integrand, splines.NATURAL)
    return s.integral(grid[0], grid[-1])


def omega_general(params: SwarmParams, cfg: FixedPointConfig | None = None
                  ) -> OmegaResult:
    """Drift via the stationary angle distribution and spline quadratures.

    The error estimate is the difference against a recomputation with both
    quadrature budgets halved (knot-halving surrogate).
    """
    cfg = cfg or FixedPointConfig()
    if params.c_l == 0.0 and params.c_g == 0.0:
        raise DegenerateCoefficients("drift undefined for c_l = c_g = 0")
    F, iterations = stationary_cdf(params, cfg)
    dens = hdensity.make_h_density(params.c_l, params.c_g)
    full = _outer_integral(F, dens, params.chi, cfg.eval_knots, cfg.eval_knots,
                           cfg.boundary_clip)
    half = _outer_integral(F, dens, params.chi, cfg.eval_knots // 2,
                           cfg.eval_knots // 2, cfg.boundary_clip)
    return OmegaResult(full, abs(full - half), iterations, GENERAL_SPLINE)


def omega_chi_zero(c_l: float, c_g: float) -> float:
    """Closed-form drift for chi = 0.

    Terms of the form 0*ln(0) take their analytic limit 0, so the expression
    is well defined on the whole coefficient plane except the origin.
    """
    if c_l == 0.0 and c_g == 0.0:
        raise DegenerateCoefficients("closed form undefined for c_l = c_g = 0")
    if c_l == 0.0 or c_g == 0.0:
        # -((1-c)/c) * ln((1-c)^2) - 2: the constant is fixed by the limit of
        # the two-coefficient form as the other coefficient vanishes, and by
        # direct quadrature of E[ln((1-c*r)^2)].
        c = c_l + c_g
        return float(-(2.0 / c) * xlogy(1.0 - c, abs(1.0 - c)) - 2.0)

    def sq_log(v: float) -> float:
        return float(xlogy(v * v, v * v))

    total = (
        sq_log(1.0 - c_l - c_g) - sq_log(1.0 - c_g) - sq_log(1.0 - c_l)
    ) / (2.0 * c_l * c_g)
    return total - 3.0


def classify(params: SwarmParams, cfg: FixedPointConfig | None = None) -> Verdict:
    """Convergence verdict for a parameter triple.

    With both coefficients zero the motion is deterministic and the verdict
    depends only on |chi| < 1.  Otherwise the sign of the drift decides; a
    drift within its own error estimate is reported as indeterminate.
    """
    if params.c_l == 0.0 and params.c_g == 0.0:
        if abs(params.chi) < 1.0:
            return Verdict(DETERMINISTIC_CONVERGES)
        return Verdict(DETERMINISTIC_DIVERGES)
    if params.chi == 0.0:
        result = OmegaResult(
            omega_chi_zero(params.c_l, params.c_g),
            _CLOSED_FORM_EPS, 0, CHI_ZERO_CLOSED_FORM,
        )
    else:
        try:
            result = omega_general(params, cfg)
        except NoConvergence as exc:
            return Verdict(INDETERMINATE, None, str(exc))
    if abs(result.omega) <= result.abs_error_estimate:
        return Verdict(INDETERMINATE, result, "drift within error estimate")
    return Verdict(CONVERGES if result.omega < 0 else DIVERGES, result)
