"""Angle recurrence of the single-particle swarm step.

Writing the state as an angle alpha with v = x * tan(alpha), one movement
step updates the tangent m = tan(alpha) through

    m' = 1 - 1/(1 + chi*m - h),

where h is the realized random coefficient.  The law of the angle therefore
evolves on (-pi/2, pi/2) independently of the magnitude.  This module
provides the forward/inverse tangent maps, the one-step push-forward of a
cumulative distribution function, and the fixed-point iteration to the
stationary angle distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from . import hdensity, splines
from .errors import (
    DegenerateCoefficients,
    NoConvergence,
    SingularInverse,
    SingularMap,
)
from .params import SwarmParams

HALF_PI = math.pi / 2.0

# Case tags for the one-step probability dispatch.
CHI_ZERO_LEQ = "chi_zero_leq"
CHI_ZERO_GT = "chi_zero_gt"
M_EQ_ONE_CHI_POS = "m_eq_one_chi_pos"
M_EQ_ONE_CHI_NEG = "m_eq_one_chi_neg"
M_GT_ONE = "m_gt_one"
M_LT_ONE = "m_lt_one"


@dataclass
class FixedPointConfig:
    """Knot budgets and stopping rules for the stationary-distribution solve.

    ``h_knots=None`` ties the inner quadrature grid to the current angle knot
    count.  ``eval_knots`` is the budget for the final drift quadratures
    (both the coefficient-integral grid and the outer angle grid).
    """

    initial_knots: int = 64
    max_knots: int = 2048
    l2_tolerance: float = 1e-7
    blend_factor: float = 0.1
    max_iterations: int = 20000
    h_knots: Optional[int] = None
    eval_knots: int = 8192
    boundary_clip: float = 1e-15

    def __post_init__(self):
        if not (0.0 < self.l2_tolerance):
            raise ValueError("l2_tolerance must be positive")
        if not (0.0 <= self.blend_factor < 1.0):
            raise ValueError("blend_factor must lie in [0, 1)")


@dataclass(frozen=True)
class AngleCdf:
    """Cumulative distribution of the angle on [-pi/2, pi/2].

    Wraps a derivative-matched spline pinned to 0 and 1 at the endpoints.
    The matched-slope closure reflects that the two endpoints are the same
    projective direction, so the density wraps around continuously.
    """

    spline: splines.CubicSpline

    @property
    def knots(self) -> np.ndarray:
        return self.spline.knots

    @property
    def values(self) -> np.ndarray:
        return self.spline.values

    def eval(self, x):
        return self.spline.eval(x)

    __call__ = eval

    def density(self, x):
        """Analytic derivative of the CDF spline (piecewise quadratic)."""
        return self.spline.derivative(x)

    def check(self, atol: float = 1e-9) -> None:
        """Assert endpoint pinning and monotonicity at dense probe points."""
        lo, hi = self.spline.domain
        if abs(self.eval(lo)) > atol or abs(self.eval(hi) - 1.0) > atol:
            raise AssertionError("endpoints not pinned to 0/1")
        probes = np.linspace(lo, hi, 10 * len(self.knots))
        vals = self.eval(probes)
        if np.any(np.diff(vals) < -atol):
            raise AssertionError("CDF decreases beyond tolerance")


@dataclass(frozen=True)
class PropagationCase:
    """Dispatch record for one (m, h) pair of the one-step probability."""

    case_tag: str
    gamma1: Optional[float] = None
    gamma2: Optional[float] = None
    gamma_min: Optional[float] = None
    gamma_max: Optional[float] = None


def f_plus(m: float, h: float, chi: float) -> float:
    """Forward tangent update: the next tangent given the current one and h."""
    den = 1.0 + chi * m - h
    if den == 0.0:
        raise SingularMap("zero denominator in tangent update")
    return 1.0 - 1.0 / den


def f_minus(m: float, h: float, chi: float) -> float:
    """Inverse of the forward tangent update with respect to m."""
    if chi == 0.0 or m == 1.0:
        raise SingularInverse("inverse undefined for chi=0 or m=1")
    return 1.0 / (chi * (1.0 - m)) + (h - 1.0) / chi


def propagation_case(m: float, h: float, chi: float) -> PropagationCase:
    """Classify one (m, h) pair and compute the threshold angles."""
    if chi == 0.0:
        with np.errstate(divide="ignore"):
            step = 1.0 - 1.0 / (1.0 - h) if h != 1.0 else -math.inf
        tag = CHI_ZERO_LEQ if step <= m else CHI_ZERO_GT
        return PropagationCase(tag)
    gamma1 = math.atan((h - 1.0) / chi)
    if m == 1.0:
        tag = M_EQ_ONE_CHI_POS if chi > 0 else M_EQ_ONE_CHI_NEG
        return PropagationCase(tag, gamma1, None, gamma1, gamma1)
    gamma2 = math.atan((h - 1.0) / chi + 1.0 / (chi * (1.0 - m)))
    tag = M_GT_ONE if m > 1.0 else M_LT_ONE
    return PropagationCase(tag, gamma1, gamma2, min(gamma1, gamma2), max(gamma1, gamma2))


def prob_step_leq(F: AngleCdf, m: float, h: float, chi: float) -> float:
    """Probability that the next tangent is at most m, given the angle law F."""
    case = propagation_case(m, h, chi)
    if case.case_tag == CHI_ZERO_LEQ:
        return 1.0
    if case.case_tag == CHI_ZERO_GT:
        return 0.0
    if case.case_tag == M_EQ_ONE_CHI_POS:
        p = 1.0 - F.eval(case.gamma1)
    elif case.case_tag == M_EQ_ONE_CHI_NEG:
        p = F.eval(case.gamma1)
    elif case.case_tag == M_GT_ONE:
        p = 1.0 - F.eval(case.gamma_max) + F.eval(case.gamma_min)
    else:
        p = F.eval(case.gamma_max) - F.eval(case.gamma_min)
    return float(min(1.0, max(0.0, p)))


def uniform_angle_cdf(n_knots: int = 64) -> AngleCdf:
    """The uniform angle distribution on equidistant knots."""
    knots = np.linspace(-HALF_PI, HALF_PI, n_knots)
    values = (knots + HALF_PI) / math.pi
    return AngleCdf(splines.build_spline(knots, values, splines.DERIVATIVE_MATCHED))


def _piece_grids(dens: hdensity.HDensity, total: int) -> list[np.ndarray]:
    """Split the H support at the density breakpoints into equidistant grids.

    The knot budget is distributed proportionally to piece length, at least
    six knots per piece, so each piece can carry its own natural spline.
    """
    edges = hdensity.breakpoints(dens)
    lengths = np.diff(edges)
    span = float(lengths.sum())
    grids = []
    for lo, hi, ln in zip(edges[:-1], edges[1:], lengths):
        n = max(6, int(round(total * ln / span)))
        grids.append(np.linspace(lo, hi, n))
    return grids


class _PropagationKernel:
    """One-step CDF push-forward on a fixed angle grid, with cached geometry.

    Everything that depends only on the grids (threshold angles, interval
    lookups, quadrature weights, the banded systems) is precomputed, so each
    iteration costs a handful of vector operations.  Matrices are laid out
    (h, angle) so the batched natural-spline solves act on contiguous axes.
    """

    def __init__(self, chi: float, dens: hdensity.HDensity, beta: np.ndarray,
                 h_total: int):
        self.chi = chi
        self.beta = beta
        self.n = len(beta)
        m = np.tan(beta[1:-1])
        self.m_leq_one = m <= 1.0

        grids = _piece_grids(dens, h_total)
        self.pieces = []
        offset = 0
        h_all = np.concatenate(grids)
        self.f_h = np.concatenate([hdensity.eval_density(dens, g) for g in grids])
        for g in grids:
            n_g = len(g)
            step = g[1] - g[0]
            ab = np.zeros((3, n_g - 2))
            ab[0, 1:] = step
            ab[1, :] = 4.0 * step
            ab[2, :-1] = step
            w_y = np.full(n_g, step)
            w_y[0] = w_y[-1] = step / 2.0
            self.pieces.append((slice(offset, offset + n_g), step, ab, w_y))
            offset += n_g

        raw = (h_all - 1.0) / chi
        gamma1 = np.arctan(raw)
        with np.errstate(divide="ignore"):
            off = 1.0 / (chi * (1.0 - m))
        gamma2 = np.arctan(raw[:, None] + off[None, :])
        g_lo = np.minimum(gamma1[:, None], gamma2)
        g_hi = np.maximum(gamma1[:, None], gamma2)
        self.idx_lo, self.dx_lo = self._locate(g_lo)
        self.idx_hi, self.dx_hi = self._locate(g_hi)

    def _locate(self, pts: np.ndarray):
        idx = np.searchsorted(self.beta, pts.ravel(), side="right") - 1
        np.clip(idx, 0, self.n - 2, out=idx)
        idx = idx.reshape(pts.shape)
        return idx.astype(np.int32), pts - self.beta[idx]

    @staticmethod
    def _horner(spl: splines.CubicSpline, idx: np.ndarray, dx: np.ndarray):
        return ((spl.d[idx] * dx + spl.c[idx]) * dx + spl.b[idx]) * dx + spl.a[idx]

    def step(self, F: splines.CubicSpline) -> np.ndarray:
        """Push the CDF spline values through one movement step."""
        f_lo = self._horner(F, self.idx_lo, self.dx_lo)
        f_hi = self._horner(F, self.idx_hi, self.dx_hi)
        prob = np.where(self.m_leq_one[None, :], f_hi - f_lo, 1.0 - f_hi + f_lo)
        np.clip(prob, 0.0, 1.0, out=prob)
        prob *= self.f_h[:, None]

        new_interior = np.zeros(self.n - 2)
        for sl, step, ab, w_y in self.pieces:
            q = prob[sl]
            rhs = (6.0 / step) * (q[2:] - 2.0 * q[1:-1] + q[:-2])
            m2 = solve_banded((1, 1), ab, rhs)
            new_interior += w_y @ q - (step**3 / 12.0) * m2.sum(axis=0)

        values = np.empty(self.n)
        values[0] = 0.0
        values[-1] = 1.0
        values[1:-1] = np.clip(new_interior, 0.0, 1.0)
        return values


def _chi_zero_step_values(dens: hdensity.HDensity, beta: np.ndarray) -> np.ndarray:
    """Push-forward CDF values when chi = 0, where the step forgets the angle.

    The next tangent is 1 - 1/(1 - H), a monotone function of H on each side
    of H = 1, so the push-forward probability is an exact expression in the
    closed-form CDF of H; no quadrature is involved.
    """
    m = np.tan(beta[1:-1])
    at_one = hdensity.cdf(dens, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h_star = m / (m - 1.0)
    h_star = np.where(m == 1.0, math.inf, h_star)
    cdf_star = hdensity.cdf(dens, h_star)
    probs = np.where(m < 1.0, at_one - cdf_star, at_one + 1.0 - cdf_star)
    values = np.empty(len(beta))
    values[0] = 0.0
    values[-1] = 1.0
    values[1:-1] = np.clip(probs, 0.0, 1.0)
    return values


def _build_cdf(beta: np.ndarray, values: np.ndarray) -> AngleCdf:
    return AngleCdf(splines.build_spline(beta, values, splines.DERIVATIVE_MATCHED))


def propagate_cdf(F: AngleCdf, d: hdensity.HDensity, chi: float,
                  cfg: FixedPointConfig) -> AngleCdf:
    """One application of the CDF push-forward on F's own knot grid."""
    beta = F.knots
    if chi == 0.0:
        values = _chi_zero_step_values(d, beta)
    else:
        kernel = _PropagationKernel(chi, d, beta, cfg.h_knots or len(beta))
        values = kernel.step(F.spline)
    return _build_cdf(beta, values)


def stationary_cdf(params: SwarmParams, cfg: FixedPointConfig | None = None,
                   start: Callable[[np.ndarray], np.ndarray] | None = None
                   ) -> tuple[AngleCdf, int]:
    """Iterate the push-forward to the stationary angle distribution.

    Starts from the uniform angle law (or ``start``, a callable producing CDF
    values on a knot vector), blends each new iterate with a small portion of
    the old one to damp alternating transients, and refines the knot grid
    whenever the residual stalls or the tolerance is reached on a grid
    coarser than ``max_knots``.  Returns the stationary CDF and the number of
    push-forward steps taken.
    """
    cfg = cfg or FixedPointConfig()
    if params.c_l == 0.0 and params.c_g == 0.0:
        raise DegenerateCoefficients("angle law undefined for c_l = c_g = 0")
    dens = hdensity.make_h_density(params.c_l, params.c_g)
    chi = params.chi

    beta = np.linspace(-HALF_PI, HALF_PI, cfg.initial_knots)
    if start is None:
        values = (beta + HALF_PI) / math.pi
    else:
        values = np.clip(np.asarray(start(beta), dtype=float), 0.0, 1.0)
        values[0], values[-1] = 0.0, 1.0
    F = splines.build_spline(beta, values, splines.DERIVATIVE_MATCHED)

    kernel = None
    history: list[float] = []
    iterations = 0
    blend = cfg.blend_factor

    def refine():
        nonlocal beta, F, kernel, history
        target = min(2 * len(beta), cfg.max_knots)
        new_beta = splines.refine_knots(F, target).positions
        new_values = np.clip(F.eval(new_beta), 0.0, 1.0)
        new_values[0], new_values[-1] = 0.0, 1.0
        beta = new_beta
        F = splines.build_spline(beta, new_values, splines.DERIVATIVE_MATCHED)
        kernel = None
        history = []

    while iterations < cfg.max_iterations:
        if chi == 0.0:
            pushed = _chi_zero_step_values(dens, beta)
        else:
            if kernel is None:
                kernel = _PropagationKernel(chi, dens, beta, cfg.h_knots or len(beta))
            pushed = kernel.step(F)
        blended = (1.0 - blend) * pushed + blend * F.values
        blended[0], blended[-1] = 0.0, 1.0
        F_next = splines.build_spline(beta, blended, splines.DERIVATIVE_MATCHED)
        residual = splines.l2_distance(F, F_next)
        F = F_next
        iterations += 1
        history.append(residual)

        if residual <= cfg.l2_tolerance:
            if len(beta) >= cfg.max_knots:
                return AngleCdf(F), iterations
            refine()
        elif (
            len(history) >= 11
            and history[-1] > 0.9 * history[-11]
            and len(beta) < cfg.max_knots
        ):
            refine()

    raise NoConvergence(iterations, history[-1] if history else math.nan)
