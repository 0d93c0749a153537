"""Empirical validation by a single long run of the degenerate recurrence.

The primary simulator walks the angle only: the per-step change of the log
squared magnitude is a function of the current angle and the drawn
coefficient, so no magnitudes are tracked and nothing can overflow.  A
direct x/v simulator with periodic renormalization exists purely as a
cross-check that the two formulations produce identical increment streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCoefficients, NonFiniteInput
from .params import SwarmParams

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

_CHUNK = 1_000_000
_SPARE_DRAWS = 64          # head-room for re-draws after singular denominators
_BURN_IN_FRACTION = 0.01


@dataclass(frozen=True)
class SimConfig:
    iterations: int = 1_000_000
    seed: int = 12345
    histogram_bins: int = 1000
    batch_count: int = 100

    def __post_init__(self):
        if self.histogram_bins < 1:
            raise ValueError("histogram_bins must be >= 1")
        if not (self.iterations >= self.batch_count >= 2):
            raise ValueError("need iterations >= batch_count >= 2")


@dataclass(frozen=True)
class SimStats:
    mean_drift: float
    stderr: float
    histogram: np.ndarray = field(repr=False)
    iterations_used: int
    singular_redraws: int = 0


@njit(cache=True)
def _walk_chunk(m0, rs, n_steps, chi, c_l, c_g, dphi, alpha):
    """Advance the tangent walk n_steps, consuming (r, s) rows from rs.

    Returns (final tangent, rows consumed, singular re-draws).  A zero
    denominator in the tangent update discards that (r, s) pair and draws
    the next row, matching the re-draw contract for measure-zero events.
    """
    m = m0
    j = 0
    singular = 0
    for t in range(n_steps):
        while True:
            h = c_l * rs[j, 0] + c_g * rs[j, 1]
            j += 1
            den = 1.0 + chi * m - h
            if den != 0.0:
                break
            singular += 1
        u = chi * m - h
        dphi[t] = math.log((u * u + (u + 1.0) * (u + 1.0)) / (1.0 + m * m))
        m = 1.0 - 1.0 / den
        alpha[t] = math.atan(m)
    return m, j, singular


def simulate_drift(params: SwarmParams, cfg: SimConfig) -> SimStats:
    """Average drift, batch-means standard error, and the angle histogram.

    Runs a single walk of ``cfg.iterations`` steps from a zero-velocity
    start (angle 0).  The first 1% is burn-in, excluded from both the mean
    and the histogram; what remains is truncated to a whole number of
    batches so the batch means partition it exactly.
    """
    if params.c_l == 0.0 and params.c_g == 0.0:
        raise DegenerateCoefficients("simulation needs a random coefficient")
    burn = int(cfg.iterations * _BURN_IN_FRACTION)
    post = cfg.iterations - burn
    batch_len = post // cfg.batch_count
    used = batch_len * cfg.batch_count
    total = burn + used

    rng = np.random.default_rng(cfg.seed)
    bins = cfg.histogram_bins
    hist = np.zeros(bins, dtype=np.int64)
    batch_sums = np.zeros(cfg.batch_count)
    drift_sum = 0.0
    singular = 0
    m = 0.0
    done = 0
    while done < total:
        k = min(_CHUNK, total - done)
        rs = rng.random((k + _SPARE_DRAWS, 2))
        dphi = np.empty(k)
        alpha = np.empty(k)
        m, _, sing = _walk_chunk(m, rs, k, params.chi, params.c_l, params.c_g,
                                 dphi, alpha)
        singular += sing
        steps = np.arange(done, done + k)
        live = steps >= burn
        if np.any(live):
            drift_sum += float(dphi[live].sum())
            bin_idx = ((alpha[live] + math.pi / 2.0) * (bins / math.pi)).astype(np.int64)
            np.clip(bin_idx, 0, bins - 1, out=bin_idx)
            hist += np.bincount(bin_idx, minlength=bins)
            batch_idx = (steps[live] - burn) // batch_len
            batch_sums += np.bincount(batch_idx, weights=dphi[live],
                                      minlength=cfg.batch_count)
        done += k

    mean_drift = drift_sum / used
    batch_means = batch_sums / batch_len
    stderr = float(np.std(batch_means, ddof=1) / math.sqrt(cfg.batch_count))
    density = hist * (bins / (math.pi * used))
    density.setflags(write=False)
    return SimStats(mean_drift, stderr, density, used, singular)


def simulate_xv_direct(params: SwarmParams, steps: int, seed: int) -> np.ndarray:
    """Per-step log-magnitude increments from the raw x/v recurrence.

    x and v are renormalized to unit magnitude whenever the log magnitude
    leaves [-40, 40]; the removed amount goes to an accumulator, so the
    increment stream is unaffected.  Consumes the same (r, s) stream as the
    angle walk for the same seed.
    """
    if params.c_l == 0.0 and params.c_g == 0.0:
        raise DegenerateCoefficients("simulation needs a random coefficient")
    rng = np.random.default_rng(seed)
    rs = rng.random((steps, 2))
    increments = np.empty(steps)
    x, v = 1.0, 0.0
    removed = 0.0
    for t in range(steps):
        h = params.c_l * rs[t, 0] + params.c_g * rs[t, 1]
        v_next = params.chi * v - h * x
        x_next = x + v_next
        sq_old = x * x + v * v
        sq_new = x_next * x_next + v_next * v_next
        increments[t] = math.log(sq_new / sq_old)
        x, v = x_next, v_next
        log_sq = math.log(x * x + v * v)
        if not (-40.0 <= log_sq <= 40.0):
            scale = math.sqrt(x * x + v * v)
            x /= scale
            v /= scale
            removed += log_sq
    if not np.all(np.isfinite(increments)):
        raise NonFiniteInput("non-finite increment in direct simulation")
    return increments


def angle_increment_stream(params: SwarmParams, steps: int, seed: int) -> np.ndarray:
    """The angle walk's raw increment stream (for equivalence checks)."""
    rng = np.random.default_rng(seed)
    rs = rng.random((steps + _SPARE_DRAWS, 2))
    dphi = np.empty(steps)
    alpha = np.empty(steps)
    _walk_chunk(0.0, rs, steps, params.chi, params.c_l, params.c_g, dphi, alpha)
    return dphi


def histogram_distance(stats: SimStats, F) -> float:
    """L1 distance between the empirical bin densities and F's density.

    The numeric density is the derivative of the CDF spline sampled at bin
    midpoints; both sides integrate to one, so the value lies in [0, 2].
    """
    bins = len(stats.histogram)
    mids = -math.pi / 2.0 + (np.arange(bins) + 0.5) * (math.pi / bins)
    numeric = F.density(mids)
    return float(np.abs(stats.histogram - numeric).sum() * (math.pi / bins))
