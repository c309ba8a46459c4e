import numpy as np
import pytest

from riccisol import quad, zoo
from riccisol import expr as ex


# ---------------------------------------------------------------------------
# the cutoff bump
# ---------------------------------------------------------------------------

def test_cutoff_endpoint_values():
    c = quad.make_cutoff(1.0)
    assert c.phi(0.0) == 1.0
    assert c.phi(2.0) == 0.0
    assert c.phi(1.0, deriv=1) == pytest.approx(0.0, abs=1e-14)
    assert c.phi(-3.0) == 1.0  # extends by 1 below the threshold
    assert c.phi(7.5) == 0.0


def test_cutoff_joint_continuity():
    for s in (0.5, 1.0, 2.5):
        c = quad.make_cutoff(s)
        res = c.joint_residuals()
        assert max(res.values()) < 1e-10, res


def test_cutoff_monotone_bump():
    c = quad.make_cutoff(1.3)
    t = np.linspace(1.3, 2.6, 501)
    dphi = c.phi(t, deriv=1)
    assert np.all(dphi <= 1e-14)
    assert 0.0 < c.phi(1.5 * 1.3) < 1.0


def test_cutoff_derivative_peak_near_midpoint():
    c = quad.make_cutoff(1.0)
    t = np.linspace(1.0, 2.0, 2001)
    dphi = c.phi(t, deriv=1)
    assert np.isfinite(dphi).all()
    t_peak = t[np.argmin(dphi)]  # most negative slope
    assert t_peak == pytest.approx(1.5, abs=1e-3)


def test_cutoff_requires_positive_s():
    with pytest.raises(ValueError):
        quad.make_cutoff(0.0)


def test_psi_vanishes_outside_support():
    entry = zoo.cigar_cross_circle()
    c = quad.make_cutoff(1.0)
    r_support = np.sqrt(np.exp(2.0) - 1.0)
    rng = np.random.default_rng(3)
    # 100 points strictly outside the support radius
    radius = rng.uniform(r_support * 1.0001, 7.9, 100)
    angle = rng.uniform(0, 2 * np.pi, 100)
    pts = np.column_stack(
        [np.zeros(100), radius * np.cos(angle), radius * np.sin(angle)]
    )
    fvals = ex.eval_float(entry.spec.potential, pts)
    psi = c.psi(fvals, entry.soliton_type)
    assert np.max(np.abs(psi)) == 0.0
    # and is strictly positive well inside
    inner = np.array([[0.0, 0.3, -0.2]])
    fin = ex.eval_float(entry.spec.potential, inner)
    assert c.psi(fin, entry.soliton_type)[0] > 0.0


def test_support_escape_raises():
    entry = zoo.cigar_cross_circle()
    with pytest.raises(quad.SupportError):
        quad.build_grid(entry, quad.make_cutoff(3.0), 8)  # needs |x| ~ 20 > 8


# ---------------------------------------------------------------------------
# the integral identity
# ---------------------------------------------------------------------------

def test_integral_identity_small_grid():
    entry = zoo.cigar_cross_circle()
    res = quad.integral_formula_check(entry, s=1.0, n=64)
    assert res["lhs"] > 0.0
    assert res["rel_gap"] < 1e-6


def test_integral_refinement_and_stability():
    entry = zoo.cigar_cross_circle()
    res = quad.refinement_check(entry, s=1.0, n=64)
    fine, coarse = res["fine"], res["coarse"]
    assert fine["rel_gap"] <= max(coarse["rel_gap"], 1e-12)
    assert res["lhs_refinement_delta"] / fine["lhs"] < 1e-5
    assert res["rhs_refinement_delta"] / abs(fine["rhs"]) < 1e-5


def test_integral_scales_with_circumference():
    # the circle factor is exact, so the integral is linear in the length
    e1 = zoo.cigar_cross_circle(1.0)
    e2 = zoo.cigar_cross_circle(3.0)
    r1 = quad.integral_formula_check(e1, s=0.8, n=24)
    r2 = quad.integral_formula_check(e2, s=0.8, n=24)
    assert r2["lhs"] == pytest.approx(3.0 * r1["lhs"], rel=1e-13)


def test_flat_entry_both_sides_zero():
    entry = zoo.euclidean_gaussian(3, 0.5)  # shrinking cutoff recipe
    res = quad.integral_formula_check(entry, s=0.5, n=12)
    assert res["lhs"] == 0.0
    assert res["rhs"] == 0.0


def test_integral_requires_3d():
    entry = zoo.euclidean_gaussian(4, 0.5)
    with pytest.raises(ValueError):
        quad.integral_formula_check(entry, s=0.5, n=8)
