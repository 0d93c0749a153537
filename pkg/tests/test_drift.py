import math

import numpy as np
import pytest
from scipy.optimize import brentq

from swarmdrift import hdensity
from swarmdrift.angle import FixedPointConfig
from swarmdrift.drift import (
    CHI_ZERO_CLOSED_FORM,
    CONVERGES,
    DETERMINISTIC_CONVERGES,
    DETERMINISTIC_DIVERGES,
    DIVERGES,
    INDETERMINATE,
    classify,
    f_inner,
    g_integrand,
    omega_chi_zero,
    omega_general,
)
from swarmdrift.boundary import variance_bound
from swarmdrift.errors import DegenerateCoefficients
from swarmdrift.params import SwarmParams

HALF_PI = math.pi / 2


def adaptive_simpson(f, a, b, tol=1e-11, depth=40):
    """Independent quadrature oracle (recursive Simpson with halving)."""

    def simpson(lo, hi):
        mid = 0.5 * (lo + hi)
        return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi)), mid

    def recurse(lo, hi, whole, level):
        left, lmid = simpson(lo, 0.5 * (lo + hi))
        right, rmid = simpson(0.5 * (lo + hi), hi)
        if level <= 0 or abs(left + right - whole) < 15 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(lo, 0.5 * (lo + hi), left, level - 1)
                + recurse(0.5 * (lo + hi), hi, right, level - 1))

    whole, _ = simpson(a, b)
    return recurse(a, b, whole, depth)


def test_g_integrand_examples():
    assert g_integrand(0.0, 0.0, 0.7) == pytest.approx(0.0)
    assert g_integrand(0.0, 2.0, 0.7) == pytest.approx(math.log(5.0))
    assert g_integrand(HALF_PI, 0.3, 0.5) == pytest.approx(math.log(0.5))
    assert g_integrand(-HALF_PI, 1.7, 0.5) == pytest.approx(math.log(0.5))
    assert g_integrand(HALF_PI, 0.3, 0.0) == -math.inf


def test_f_inner_boundary_value():
    d = hdensity.make_h_density(1.0, 1.0)
    assert f_inner(HALF_PI, d, 0.5) == pytest.approx(math.log(0.5))
    assert f_inner(-HALF_PI, d, 0.0) == -math.inf


def test_f_inner_against_adaptive_simpson():
    d = hdensity.make_h_density(2.0, 2.0)
    ref = sum(
        adaptive_simpson(
            lambda h: g_integrand(0.0, h, 0.72984) * hdensity.eval_density(d, h),
            a, b,
        )
        for a, b in zip(hdensity.breakpoints(d)[:-1], hdensity.breakpoints(d)[1:])
    )
    assert f_inner(0.0, d, 0.72984, 8192) == pytest.approx(ref, abs=1e-8)


def test_f_inner_chi_zero_against_sampling(rng):
    # E[ln(H^2 + (1-H)^2)] by direct draws
    d = hdensity.make_h_density(1.0, 1.0)
    h = rng.random(10_000_000) + rng.random(10_000_000)
    vals = np.log(h * h + (1.0 - h) ** 2)
    sigma = vals.std(ddof=1) / math.sqrt(len(vals))
    assert f_inner(0.0, d, 0.0, 8192) == pytest.approx(float(vals.mean()), abs=3 * sigma)


def test_omega_chi_zero_values():
    assert omega_chi_zero(1.0, 1.0) == -3.0
    # one coefficient zero: the constant term is -2, fixed by the limit of
    # the two-coefficient form (and by direct quadrature of the expectation)
    assert omega_chi_zero(2.0, 0.0) == -2.0
    assert omega_chi_zero(0.0, 2.0) == -2.0
    assert omega_chi_zero(1.3, 0.7) == pytest.approx(omega_chi_zero(0.7, 1.3), abs=1e-14)
    with pytest.raises(DegenerateCoefficients):
        omega_chi_zero(0.0, 0.0)


def test_omega_chi_zero_against_quadrature_oracle(rng):
    # independent oracle: omega(0, cl, cg) = E[ln((1 - cl*r - cg*s)^2)]
    for c_l, c_g in [(1.3, 0.7), (2.5, 2.5), (0.3, 1.9), (1.7, 0.0)]:
        r = rng.random(8_000_000)
        s = rng.random(8_000_000)
        vals = np.log((1.0 - c_l * r - c_g * s) ** 2)
        sigma = vals.std(ddof=1) / math.sqrt(len(vals))
        assert omega_chi_zero(c_l, c_g) == pytest.approx(float(vals.mean()),
                                                         abs=4 * sigma)


def test_omega_chi_zero_root():
    root = brentq(lambda c: omega_chi_zero(c, c), 2.0, 2.6, xtol=1e-9)
    assert root == pytest.approx(2.3195565, abs=1e-5)


def test_omega_chi_zero_one_zero_limit():
    assert omega_chi_zero(1.3, 1e-6) == pytest.approx(omega_chi_zero(1.3, 0.0),
                                                      abs=1e-4)


def test_omega_general_standard_triple(std_params, medium_cfg):
    result = omega_general(std_params, medium_cfg)
    assert result.omega == pytest.approx(-0.194063, abs=1e-3)
    assert result.abs_error_estimate >= 0.0
    assert result.method == "general_spline"


def test_omega_general_swap_symmetry(medium_cfg):
    a = omega_general(SwarmParams(0.72984, 2.04355, 0.94879), medium_cfg)
    b = omega_general(SwarmParams(0.72984, 0.94879, 2.04355), medium_cfg)
    tol = max(1e-4, a.abs_error_estimate + b.abs_error_estimate)
    assert a.omega == pytest.approx(b.omega, abs=tol)


def test_omega_general_chi_zero_consistency(medium_cfg):
    val = omega_general(SwarmParams(0.0, 1.0, 1.0), medium_cfg)
    assert val.omega == pytest.approx(omega_chi_zero(1.0, 1.0), abs=1e-3)


def test_omega_general_rejects_degenerate(medium_cfg):
    with pytest.raises(DegenerateCoefficients):
        omega_general(SwarmParams(0.5, 0.0, 0.0), medium_cfg)


def test_classify_deterministic_branch():
    assert classify(SwarmParams(0.5, 0.0, 0.0)).kind == DETERMINISTIC_CONVERGES
    assert classify(SwarmParams(-0.5, 0.0, 0.0)).kind == DETERMINISTIC_CONVERGES
    assert classify(SwarmParams(1.0, 0.0, 0.0)).kind == DETERMINISTIC_DIVERGES
    assert classify(SwarmParams(-1.3, 0.0, 0.0)).kind == DETERMINISTIC_DIVERGES


def test_classify_chi_zero_uses_closed_form():
    verdict = classify(SwarmParams(0.0, 1.0, 1.0))
    assert verdict.kind == CONVERGES
    assert verdict.omega.method == CHI_ZERO_CLOSED_FORM
    assert verdict.omega.omega == -3.0


def test_classify_knife_edge_indeterminate():
    root = brentq(lambda c: omega_chi_zero(c, c), 2.0, 2.6, xtol=1e-15)
    verdict = classify(SwarmParams(0.0, root, root))
    assert verdict.kind == INDETERMINATE


def test_classify_divergent_row(cheap_cfg):
    verdict = classify(SwarmParams(0.9, 3.0, 3.0), cheap_cfg)
    assert verdict.kind == DIVERGES
    assert verdict.omega.omega == pytest.approx(0.380623, abs=1e-3)


def test_variance_bound_region_is_sufficient(cheap_cfg):
    # 95% of the variance bound must classify as convergent
    for chi in (-0.9, -0.5, 0.0, 0.5, 0.9):
        c = 0.95 * variance_bound(chi)
        verdict = classify(SwarmParams(chi, c, c), cheap_cfg)
        assert verdict.kind == CONVERGES, f"chi={chi}, c={c}: {verdict}"
