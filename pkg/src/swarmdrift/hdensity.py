"""Closed-form density of the combined random coefficient H = c_l*r + c_g*s.

r and s are independent uniforms on [0, 1], so H has a trapezoidal density:
two linear ramps of width min(|c_l|, |c_g|) around a flat plateau of height
1/max(|c_l|, |c_g|).  Negative coefficients shift the support below zero but
keep the same shape.  When exactly one coefficient is zero the ramps vanish
and the density is uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCoefficients, NonFiniteInput


@dataclass(frozen=True)
class HDensity:
    c_l: float
    c_g: float
    l_h: float
    u_h: float
    c_min: float
    c_max: float


def make_h_density(c_l: float, c_g: float) -> HDensity:
    """Build the density descriptor for H = c_l*r + c_g*s."""
    if not (math.isfinite(c_l) and math.isfinite(c_g)):
        raise NonFiniteInput("coefficients must be finite")
    if c_l == 0.0 and c_g == 0.0:
        raise DegenerateCoefficients("c_l = c_g = 0 has a point-mass H")
    l_h = min(0.0, c_l) + min(0.0, c_g)
    u_h = max(0.0, c_l) + max(0.0, c_g)
    c_min = min(abs(c_l), abs(c_g))
    c_max = max(abs(c_l), abs(c_g))
    return HDensity(c_l, c_g, l_h, u_h, c_min, c_max)


def eval_density(d: HDensity, h):
    """Density value at h (scalar or array)."""
    hq = np.atleast_1d(np.asarray(h, dtype=float))
    if not np.all(np.isfinite(hq)):
        raise NonFiniteInput("h must be finite")
    out = np.zeros_like(hq)
    lo_ramp_end = d.l_h + d.c_min
    hi_ramp_start = d.u_h - d.c_min
    plateau = (hq >= lo_ramp_end) & (hq <= hi_ramp_start)
    out[plateau] = 1.0 / d.c_max
    if d.c_min > 0.0:
        denom = abs(d.c_l * d.c_g)
        lo = (hq > d.l_h) & (hq < lo_ramp_end)
        out[lo] = (hq[lo] - d.l_h) / denom
        hi = (hq > hi_ramp_start) & (hq < d.u_h)
        out[hi] = (d.u_h - hq[hi]) / denom
    return float(out[0]) if np.isscalar(h) else out


def cdf(d: HDensity, h):
    """Cumulative distribution of H, piecewise quadratic in closed form."""
    hq = np.atleast_1d(np.asarray(h, dtype=float))
    lo_ramp_end = d.l_h + d.c_min
    hi_ramp_start = d.u_h - d.c_min
    out = np.empty_like(hq)
    if d.c_min > 0.0:
        denom = abs(d.c_l * d.c_g)
        ramp_mass = d.c_min / (2.0 * d.c_max)
        low = np.clip(hq, d.l_h, lo_ramp_end) - d.l_h
        mid = np.clip(hq, lo_ramp_end, hi_ramp_start) - lo_ramp_end
        high = d.u_h - np.clip(hq, hi_ramp_start, d.u_h)
        out = low * low / (2.0 * denom) + mid / d.c_max
        out += np.where(hq > hi_ramp_start, ramp_mass - high * high / (2.0 * denom), 0.0)
    else:
        out = np.clip((hq - d.l_h) / (d.u_h - d.l_h), 0.0, 1.0)
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if np.isscalar(h) else out


def breakpoints(d: HDensity) -> list[float]:
    """Sorted abscissae where the density changes its analytic form."""
    raw = [d.l_h, d.l_h + d.c_min, d.u_h - d.c_min, d.u_h]
    tol = 1e-12 * max(1.0, d.u_h - d.l_h)
    out = [raw[0]]
    for p in raw[1:]:
        if p - out[-1] > tol:
            out.append(p)
    return out
