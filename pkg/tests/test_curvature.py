import numpy as np
import pytest

from riccisol import fuzz, zoo
from riccisol import curvature as cv
from riccisol import tensor as tz
from riccisol.curvature import CurvatureBundle
from riccisol.jet import InsufficientOrderError

from fd_oracle import fd_partial


def conformal_scalar_curvature_2d(u_fn, point):
    """Independent oracle: for g = e^{2u} delta in 2D, R = -2 e^{-2u} Lap(u),
    with the Laplacian taken by Richardson finite differences."""
    lap = fd_partial(u_fn, point, (2, 0), levels=3) + fd_partial(
        u_fn, point, (0, 2), levels=3)
    return -2.0 * np.exp(-2.0 * u_fn(np.asarray(point))) * lap


def cigar_u(p):
    return -0.5 * np.log(1.0 + p[0] ** 2 + p[1] ** 2)


def sphere_u(p, n_dummy=2):
    return np.log(2.0) - np.log(1.0 + np.sum(np.asarray(p) ** 2))


FUZZ_POINTS = 3


def bundle_for(dim, seed, order=5, npts=FUZZ_POINTS):
    spec = fuzz.random_metric_spec(dim, seed)
    return CurvatureBundle(spec, spec.sample_points(npts, seed + 100), order)


# ---------------------------------------------------------------------------
# scalar curvature witnesses
# ---------------------------------------------------------------------------

def test_euclidean_riemann_vanishes():
    spec = tz.MetricSpec.from_strings(
        3, {(i, i): "1" for i in range(1, 4)}, "0", 0.0, domain=[[-3, 3]] * 3
    )
    b = CurvatureBundle(spec, spec.sample_points(4, 0), 5)
    assert np.max(np.abs(b.riemann.values())) == 0.0
    rep = cv.general_identity_suite(b)
    assert rep.all_pass
    assert max(r.residual for r in rep.records) == 0.0


def test_unit_sphere_scalar_curvature_positive():
    # oracle: in 2D the stereographic sphere factor gives R = 2 = n(n-1);
    # the same conformal factor in dimension n gives R = n(n-1)
    oracle_2d = conformal_scalar_curvature_2d(sphere_u, [0.0, 0.0])
    assert oracle_2d == pytest.approx(2.0, abs=1e-9)
    b = CurvatureBundle(zoo.round_sphere(4).spec, np.zeros((1, 4)), 4)
    assert b.scalar.values()[0] == pytest.approx(12.0, abs=1e-11)


def test_cigar_scalar_curvature_at_origin():
    want = conformal_scalar_curvature_2d(cigar_u, [0.0, 0.0])
    assert want == pytest.approx(4.0, abs=1e-9)  # frozen from the oracle
    b = CurvatureBundle(zoo.cigar().spec, np.zeros((1, 2)), 4)
    assert b.scalar.values()[0] == pytest.approx(4.0, abs=1e-12)


def test_cigar_scalar_curvature_off_origin():
    pts = np.array([[0.7, -0.4], [1.5, 2.0]])
    b = CurvatureBundle(zoo.cigar().spec, pts, 4)
    for k, p in enumerate(pts):
        want = conformal_scalar_curvature_2d(cigar_u, p)
        assert b.scalar.values()[k] == pytest.approx(want, rel=1e-6)


def test_cigar_cross_line_ricci_diagonal():
    b = CurvatureBundle(zoo.cigar_cross_line().spec, np.zeros((1, 3)), 4)
    ric = b.ricci.values()[0]
    assert ric[0, 0] == pytest.approx(0.0, abs=1e-13)  # line direction
    assert ric[1, 1] == pytest.approx(2.0, abs=1e-12)  # (1/2) R g at O
    assert abs(ric[0, 1]) + abs(ric[0, 2]) + abs(ric[1, 2]) < 1e-13


def test_cylinder_ricci_eigenvalues():
    entry = zoo.cylinder_shrinker(3)
    b = CurvatureBundle(entry.spec, np.zeros((1, 3)), 4)
    g0 = b.g.values()[0]
    ric0 = b.ricci.values()[0]
    eig = np.sort(np.linalg.eigvals(np.linalg.solve(g0, ric0)).real)
    assert np.allclose(eig, [0.0, 0.5, 0.5], atol=1e-11)


# ---------------------------------------------------------------------------
# the general identity suite on fuzzed metrics
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("dim,seed", [(4, 1), (4, 2), (5, 3), (3, 4), (2, 5)])
def test_identity_suite_fuzzed(dim, seed):
    b = bundle_for(dim, seed, order=cv.required_order(dim))
    rep = cv.general_identity_suite(b)
    assert rep.all_pass, rep.to_text(human=True)


def test_fuzzed_4d_weyl_nonzero_but_trace_free():
    b = bundle_for(4, 7)
    assert np.max(np.abs(b.weyl.values())) > 1e-4  # generic metric is not LCF
    rep = cv.general_identity_suite(b)
    assert rep.max_residual("weyl_trace_free") < 1e-10


def test_weyl_zero_any_3d_metric():
    b = bundle_for(3, 11)
    # pipeline object is zero by definition; the decomposition formula must
    # also cancel numerically
    assert np.max(np.abs(b.weyl.data)) == 0.0
    resid = b.riemann.data - b._weyl_correction()
    scale = 1.0 + np.max(np.abs(b.riemann.values()))
    assert np.max(np.abs(resid[..., 0])) / scale < 1e-12


def test_weyl_needs_dimension_three():
    b = bundle_for(2, 12, order=2)
    with pytest.raises(ValueError):
        _ = b.weyl


def test_cotton_matches_weyl_divergence_4d_5d():
    for dim, seed in ((4, 21), (5, 22)):
        b = bundle_for(dim, seed)
        resid = b.cotton.values() - b.cotton_from_weyl.values()
        scale = 1.0 + np.max(np.abs(b.cotton.values()))
        assert np.max(np.abs(resid)) / scale < 1e-9


def test_bach_divergence_formula_n5_both_sides_nonzero():
    from riccisol import jet

    b = bundle_for(5, 31)
    rc = jet.jet_einsum(
        b.cotton.space, "zkt,zkti->zi",
        jet.truncate_arrays(b.ricci_upper.space, b.ricci_upper.data, b.cotton.order),
        b.cotton.data)
    rhs = rc[..., 0] * ((5 - 4) / (5 - 2) ** 2)
    lhs = b.bach_divergence.values()
    assert np.max(np.abs(rhs)) > 1e-8  # genuinely two-sided at n = 5
    assert np.max(np.abs(lhs - rhs)) / (1 + np.max(np.abs(lhs))) < 1e-8


# ---------------------------------------------------------------------------
# high divergences
# ---------------------------------------------------------------------------

def test_high_divergences_insufficient_order():
    b = bundle_for(3, 41, order=5)
    with pytest.raises(InsufficientOrderError):
        b.high_divergences()


def test_lemma51_div3_cotton_at_origin():
    # div^3(C)(O) = R(O)^3 / 8 on the cigar cross line; R(O) = 4 from the
    # conformal oracle, so the frozen expected value is 8
    r_origin = conformal_scalar_curvature_2d(cigar_u, [0.0, 0.0])
    expected = r_origin**3 / 8.0
    b = CurvatureBundle(zoo.cigar_cross_line().spec, np.zeros((1, 3)), 6)
    got = b.high_divergences()
    assert got["div3_cotton"][0] == pytest.approx(expected, abs=1e-6)
    assert got["div3_cotton"][0] == pytest.approx(8.0, abs=1e-6)
    assert got["div2_bach"][0] == pytest.approx(8.0, abs=1e-8)


def test_gaussian_divergences_vanish():
    entry = zoo.euclidean_gaussian(4, 0.5)
    b = CurvatureBundle(entry.spec, entry.spec.sample_points(3, 2), 6)
    vals = b.high_divergences()
    for key in ("div3_cotton", "div4_weyl", "div2_bach"):
        assert np.max(np.abs(vals[key])) == 0.0


def test_div3_cotton_vs_div4_weyl_4d():
    # brute-force check at several seeded metrics/points: the two full
    # contractions are proportional with coefficient -(n-3)/(n-2)
    for seed in range(1, 6):
        b = bundle_for(4, seed, order=6, npts=2)
        vals = b.high_divergences()
        lhs = vals["div4_weyl"]
        rhs = -0.5 * vals["div3_cotton"]
        assert np.max(np.abs(lhs)) > 1e-8
        assert np.max(np.abs(lhs - rhs)) / (1 + np.max(np.abs(lhs))) < 1e-7


def test_div3_equals_div2_bach_3d():
    b = bundle_for(3, 51, order=6)
    vals = b.high_divergences()
    num = np.max(np.abs(vals["div3_cotton"] - vals["div2_bach"]))
    assert num / (1 + np.max(np.abs(vals["div3_cotton"]))) < 1e-8


def test_div4_weyl_alternative_order_reported():
    b = bundle_for(4, 61, order=6, npts=2)
    vals = b.high_divergences()
    assert "div4_weyl_alt" in vals
    # the alternative contraction order differs by commutator terms; both are
    # reported so any discrepancy is visible
    assert vals["div4_weyl_alt"].shape == vals["div4_weyl"].shape


def test_lemma51_scale_covariance():
    # scaling g -> c^2 g multiplies div3C(O) and R(O)^3 by c^-6 alike
    from riccisol import expr as ex

    c2 = 1.7
    base = zoo.cigar_cross_line().spec
    scaled_comps = {
        (i + 1, j + 1): ex.BinOp(op="*", left=ex.Num(value=c2), right=node)
        for (i, j), node in base.components.items()
    }
    scaled = tz.MetricSpec.from_strings(
        3, scaled_comps, base.potential, 0.0, domain=base.domain
    )
    b0 = CurvatureBundle(base, np.zeros((1, 3)), 6)
    b1 = CurvatureBundle(scaled, np.zeros((1, 3)), 6)
    d0 = b0.high_divergences()["div3_cotton"][0]
    d1 = b1.high_divergences()["div3_cotton"][0]
    r0 = b0.scalar.values()[0]
    r1 = b1.scalar.values()[0]
    assert d1 == pytest.approx(d0 / c2**3, rel=1e-7)
    assert r1 == pytest.approx(r0 / c2, rel=1e-12)
    assert d1 / r1**3 == pytest.approx(d0 / r0**3, rel=1e-7)


def test_divergence_report_passes():
    b = bundle_for(4, 71, order=6, npts=2)
    rep = cv.divergence_report(b)
    assert rep.all_pass


def test_memoization_single_compute():
    b = bundle_for(3, 81, order=5, npts=1)
    assert b.ricci is b.ricci  # cached_property: one instance per bundle
    assert b.gamma is b.gamma


def test_order_ledger_tracks_remaining_depth():
    b = bundle_for(3, 91, order=6, npts=1)
    _ = b.high_divergences()
    ledger = b.order_ledger()
    assert ledger["g"] == 6
    assert ledger["gamma"] == 5
    assert ledger["ricci"] == 4
    assert ledger["cotton"] == 3
    assert ledger["div3_cotton"] == 0
