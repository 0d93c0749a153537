"""Cubic-spline engine: construction, evaluation, exact integrals, refinement.

Two boundary conditions are supported.  ``natural`` forces the second
derivative to zero at both ends.  ``derivative_matched`` equates the first
and second derivatives at the two endpoints without equating the values,
which is the right closure for cumulative distribution functions of a
wrap-around angle (value 0 at one end, 1 at the other, but matching slopes).

Coefficients come from a direct O(n) solve of the tridiagonal (natural) or
cyclic-bordered tridiagonal (derivative-matched) system on the interior
second derivatives.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import (
    DomainMismatch,
    InsufficientKnots,
    InvalidKnots,
    NonFiniteInput,
    NoRefinementNeeded,
    OutOfDomain,
)

NATURAL = "natural"
DERIVATIVE_MATCHED = "derivative_matched"
NOT_A_KNOT = "not_a_knot"

# 4-point Gauss-Legendre on [-1, 1]: exact for polynomials up to degree 7,
# enough for the squared difference of two cubics (degree 6).
_GAUSS4_X = np.array(
    [
        -0.8611363115940526,
        -0.3399810435848563,
        0.3399810435848563,
        0.8611363115940526,
    ]
)
_GAUSS4_W = np.array(
    [
        0.3478548451374538,
        0.6521451548625461,
        0.6521451548625461,
        0.3478548451374538,
    ]
)


@dataclass(frozen=True)
class KnotVector:
    """Strictly increasing abscissae spanning the interpolation domain."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 1 or len(pos) < 4:
            raise InsufficientKnots(f"need at least 4 knots, got {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise InvalidKnots("knot positions must be finite")
        if not np.all(np.diff(pos) > 0):
            raise InvalidKnots("knot positions must be strictly increasing")
        pos = pos.copy()
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.positions[0]), float(self.positions[-1])


def _second_derivatives_natural(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Interior second derivatives with zero second derivative at the ends.

    ``y`` may be 1-D or (n, k) for a batched solve on shared knots.
    """
    n = len(x)
    h = np.diff(x)
    y2 = y if y.ndim == 2 else y[:, None]
    slopes = np.diff(y2, axis=0) / h[:, None]
    rhs = 6.0 * (slopes[1:] - slopes[:-1])
    ab = np.zeros((3, n - 2))
    ab[0, 1:] = h[1:-1]
    ab[1, :] = 2.0 * (h[:-1] + h[1:])
    ab[2, :-1] = h[1:-1]
    m = np.zeros_like(y2)
    m[1:-1] = solve_banded((1, 1), ab, rhs, overwrite_ab=False, overwrite_b=False)
    return m if y.ndim == 2 else m[:, 0]


def _second_derivatives_not_a_knot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second derivatives with third-derivative continuity at x1 and x_{n-2}.

    This closure reproduces any cubic polynomial exactly, which natural and
    derivative-matched closures cannot (their endpoint constraints are wrong
    for a generic cubic).  The two extra unknowns are eliminated into the
    first and last interior equations, keeping the solve tridiagonal.
    """
    n = len(x)
    h = np.diff(x)
    y2 = y if y.ndim == 2 else y[:, None]
    slopes = np.diff(y2, axis=0) / h[:, None]
    rhs = 6.0 * (slopes[1:] - slopes[:-1])

    r0 = h[0] / h[1]
    rn = h[-1] / h[-2]
    dia = 2.0 * (h[:-1] + h[1:])
    sub = h[1:-1].copy()
    sup = h[1:-1].copy()
    dia[0] += h[0] * (1.0 + r0)
    dia[-1] += h[-1] * (1.0 + rn)
    sup[0] = h[1] - h[0] * r0
    sub[-1] = h[-2] - h[-1] * rn

    ab = np.zeros((3, n - 2))
    ab[0, 1:] = sup
    ab[1, :] = dia
    ab[2, :-1] = sub
    m = np.empty_like(y2)
    m[1:-1] = solve_banded((1, 1), ab, rhs)
    m[0] = (1.0 + r0) * m[1] - r0 * m[2]
    m[-1] = (1.0 + rn) * m[-2] - rn * m[-3]
    return m if y.ndim == 2 else m[:, 0]


def _second_derivatives_matched(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second derivatives with S'(x0)=S'(xn) and S''(x0)=S''(xn).

    The closure couples the first and last unknowns, giving a cyclic
    tridiagonal system solved by Sherman-Morrison with two banded solves.
    """
    n = len(x)
    q = n - 1
    h = np.diff(x)
    y2 = y if y.ndim == 2 else y[:, None]
    slopes = np.diff(y2, axis=0) / h[:, None]

    rhs = np.empty((q, y2.shape[1]))
    rhs[0] = 6.0 * (slopes[0] - slopes[q - 1])
    rhs[1:] = 6.0 * (slopes[1:] - slopes[:-1])

    dia = np.empty(q)
    dia[0] = 2.0 * (h[0] + h[q - 1])
    dia[1:] = 2.0 * (h[:-1] + h[1:])[: q - 1]
    sup = h[: q - 1]
    sub = h[: q - 1]
    corner = h[q - 1]

    gamma = -dia[0]
    ab = np.zeros((3, q))
    ab[0, 1:] = sup
    ab[1, :] = dia
    ab[1, 0] -= gamma
    ab[1, -1] -= corner * corner / gamma
    ab[2, :-1] = sub

    u = np.zeros(q)
    u[0] = gamma
    u[-1] = corner

    z1 = solve_banded((1, 1), ab, rhs)
    z2 = solve_banded((1, 1), ab, u)
    v_z1 = z1[0] + (corner / gamma) * z1[-1]
    v_z2 = z2[0] + (corner / gamma) * z2[-1]
    sol = z1 - np.outer(z2, v_z1 / (1.0 + v_z2))

    m = np.empty_like(y2)
    m[:q] = sol
    m[q] = sol[0]
    return m if y.ndim == 2 else m[:, 0]


def _coefficients(x, y, m):
    """Per-interval local coefficients a + b*t + c*t^2 + d*t^3, t = x - x_i."""
    h = np.diff(x)
    a = y[:-1].copy()
    b = np.diff(y) / h - h * (2.0 * m[:-1] + m[1:]) / 6.0
    c = m[:-1] / 2.0
    d = (m[1:] - m[:-1]) / (6.0 * h)
    return a, b, c, d


@dataclass(frozen=True)
class CubicSpline:
    """Piecewise cubic interpolant with exact integration.

    Immutable after construction; safe to share across workers.
    """

    knots: np.ndarray
    values: np.ndarray
    boundary: str
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)
    second_derivs: np.ndarray = field(repr=False)
    _prefix: np.ndarray = field(repr=False)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def _check_domain(self, x):
        lo, hi = self.knots[0], self.knots[-1]
        if np.any(x < lo) or np.any(x > hi):
            raise OutOfDomain(f"point outside [{lo}, {hi}]")

    def _locate(self, x):
        idx = np.searchsorted(self.knots, x, side="right") - 1
        idx = np.clip(idx, 0, len(self.knots) - 2)
        return idx, x - self.knots[idx]

    def eval(self, x):
        """Value of the spline at x (scalar or array)."""
        xq = np.asarray(x, dtype=float)
        self._check_domain(xq)
        idx, dx = self._locate(xq)
        out = ((self.d[idx] * dx + self.c[idx]) * dx + self.b[idx]) * dx + self.a[idx]
        return float(out) if np.isscalar(x) else out

    __call__ = eval

    def derivative(self, x):
        xq = np.asarray(x, dtype=float)
        self._check_domain(xq)
        idx, dx = self._locate(xq)
        out = (3.0 * self.d[idx] * dx + 2.0 * self.c[idx]) * dx + self.b[idx]
        return float(out) if np.isscalar(x) else out

    def second_derivative(self, x):
        xq = np.asarray(x, dtype=float)
        self._check_domain(xq)
        idx, dx = self._locate(xq)
        out = 6.0 * self.d[idx] * dx + 2.0 * self.c[idx]
        return float(out) if np.isscalar(x) else out

    def third_derivatives(self) -> np.ndarray:
        """Per-interval (constant) third derivative."""
        return 6.0 * self.d

    def _antiderivative_at(self, x):
        idx, dx = self._locate(np.asarray(x, dtype=float))
        local = (
            ((self.d[idx] / 4.0 * dx + self.c[idx] / 3.0) * dx + self.b[idx] / 2.0)
            * dx
            + self.a[idx]
        ) * dx
        return self._prefix[idx] + local

    def integral(self, lo: float, hi: float) -> float:
        """Exact integral of the piecewise cubic over [lo, hi]."""
        if hi < lo:
            raise OutOfDomain("integration limits must satisfy lo <= hi")
        self._check_domain(np.array([lo, hi]))
        return float(self._antiderivative_at(hi) - self._antiderivative_at(lo))

    def to_json(self) -> str:
        return json.dumps(
            {
                "knots": self.knots.tolist(),
                "values": self.values.tolist(),
                "boundary": self.boundary,
            }
        )


def build_spline(knots, values, boundary: str = NATURAL) -> CubicSpline:
    """Interpolate (knot, value) pairs with the requested boundary closure."""
    kv = knots if isinstance(knots, KnotVector) else KnotVector(np.asarray(knots, float))
    x = kv.positions
    y = np.asarray(values, dtype=float)
    if y.shape != x.shape:
        raise InvalidKnots(f"{len(y)} values for {len(x)} knots")
    if not np.all(np.isfinite(y)):
        raise NonFiniteInput("spline values must be finite")
    if boundary == NATURAL:
        m = _second_derivatives_natural(x, y)
    elif boundary == DERIVATIVE_MATCHED:
        m = _second_derivatives_matched(x, y)
    elif boundary == NOT_A_KNOT:
        m = _second_derivatives_not_a_knot(x, y)
    else:
        raise ValueError(f"unknown boundary kind {boundary!r}")
    a, b, c, d = _coefficients(x, y, m)
    h = np.diff(x)
    per_interval = h * (a + h * (b / 2.0 + h * (c / 3.0 + h * d / 4.0)))
    prefix = np.concatenate([[0.0], np.cumsum(per_interval)])[:-1]
    y = y.copy()
    for arr in (y, a, b, c, d, m, prefix):
        arr.setflags(write=False)
    return CubicSpline(x, y, boundary, a, b, c, d, m, prefix)


def spline_from_json(text: str) -> CubicSpline:
    doc = json.loads(text)
    return build_spline(np.asarray(doc["knots"]), np.asarray(doc["values"]), doc["boundary"])


def refine_knots(s: CubicSpline, target_count: int) -> KnotVector:
    """Grow the knot set to ``target_count`` by splitting intervals.

    Intervals are ranked by the largest third-derivative jump of ``s`` at
    their bounding knots (the third derivative of a cubic spline is piecewise
    constant, so its jump at an interior knot signals unresolved structure),
    damped by the interval length so that repeated splits next to one sharp
    feature fall in priority and the budget spreads.  Ties go to the longer
    interval, then to the smaller abscissa.  Each split inserts the interval
    midpoint; freshly inserted knots carry no jump.
    """
    x = s.knots
    n = len(x)
    if target_count <= n:
        raise NoRefinementNeeded(f"target {target_count} <= current {n}")
    d3 = s.third_derivatives()
    jump = {float(x[i]): abs(float(d3[i] - d3[i - 1])) for i in range(1, n - 1)}
    min_width = 1e-12 * float(x[-1] - x[0])

    def entry(left: float, right: float):
        width = right - left
        score = max(jump.get(left, 0.0), jump.get(right, 0.0)) * width
        return (-score, -width, left, right)

    heap = [entry(float(x[i]), float(x[i + 1])) for i in range(n - 1)]
    heapq.heapify(heap)
    inserted: list[float] = []
    while len(inserted) < target_count - n and heap:
        _, _, left, right = heapq.heappop(heap)
        mid = 0.5 * (left + right)
        if not (left < mid < right) or right - left < min_width:
            continue  # too narrow to split further
        inserted.append(mid)
        heapq.heappush(heap, entry(left, mid))
        heapq.heappush(heap, entry(mid, right))
    return KnotVector(np.sort(np.concatenate([x, np.asarray(inserted)])))


def l2_distance(a: CubicSpline, b: CubicSpline) -> float:
    """Root mean square difference under the uniform measure on the domain.

    Evaluated by per-piece Gauss quadrature on the merged knot set; the
    squared difference of two cubics has degree 6, within the quadrature's
    exactness.
    """
    if a.domain != b.domain:
        raise DomainMismatch(f"{a.domain} vs {b.domain}")
    merged = np.union1d(a.knots, b.knots)
    mid = 0.5 * (merged[1:] + merged[:-1])
    half = 0.5 * np.diff(merged)
    pts = (mid[:, None] + half[:, None] * _GAUSS4_X[None, :]).ravel()
    diff = a.eval(pts) - b.eval(pts)
    per = (diff * diff).reshape(-1, 4) @ _GAUSS4_W
    span = merged[-1] - merged[0]
    total = float(np.dot(per, half))
    return float(np.sqrt(max(total, 0.0) / span))


def natural_integrals(x: np.ndarray, columns: np.ndarray) -> np.ndarray:
    """Integrals over the full span of natural splines through each column.

    ``columns`` has shape (n, k): one natural spline per column on the shared
    knots ``x``.  Returns the k exact spline integrals.  This is the batched
    kernel behind the inner quadratures, equivalent to building each spline
    and integrating it, without the per-object overhead.
    """
    h = np.diff(x)
    m = _second_derivatives_natural(x, columns)
    w = np.zeros(len(x))
    w[:-1] += h / 2.0
    w[1:] += h / 2.0
    wm = np.zeros(len(x))
    wm[:-1] += h**3 / 24.0
    wm[1:] += h**3 / 24.0
    return w @ columns - wm @ m
