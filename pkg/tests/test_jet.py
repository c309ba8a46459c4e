import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riccisol import jet
from riccisol.jet import InsufficientOrderError, Jet, JetDomainError, jet_space

from fd_oracle import fd_partial


def rel_err(a, b):
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-30)
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) / scale


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def test_const_basic():
    j = jet.const(5.0, 2, 2)
    assert j.value == 5.0
    assert j.coeff((0, 0)) == 5.0
    assert np.all(j.coeffs[1:] == 0.0)


def test_const_zero_and_one():
    z = jet.const(0.0, 3, 1)
    assert np.all(z.coeffs == 0.0)
    one = jet.const(1.0, 1, 7)
    assert one.coeff((0,)) == 1.0
    assert np.all(one.coeffs[1:] == 0.0)


def test_var_linear():
    j = jet.var(0, 3.0, 1, 2)
    assert np.allclose(j.coeffs, [3.0, 1.0, 0.0])
    k = jet.var(1, -2.0, 2, 1)
    assert k.coeff((0, 0)) == -2.0
    assert k.coeff((0, 1)) == 1.0
    assert k.coeff((1, 0)) == 0.0


def test_coefficient_count():
    for dim in range(1, 6):
        for order in range(0, 8):
            sp = jet_space(dim, order)
            assert sp.ncoeff == math.comb(dim + order, dim)


def test_out_of_range_space():
    with pytest.raises(ValueError):
        jet.const(1.0, 0, 2)
    with pytest.raises(ValueError):
        jet.const(1.0, 6, 2)
    with pytest.raises(ValueError):
        jet.const(1.0, 2, 8)
    with pytest.raises(ValueError):
        jet.var(2, 0.0, 2, 3)


def test_mixing_spaces_rejected():
    a = jet.const(1.0, 2, 3)
    b = jet.const(1.0, 2, 2)
    c = jet.const(1.0, 3, 3)
    for other in (b, c):
        with pytest.raises(ValueError):
            _ = a + other


# ---------------------------------------------------------------------------
# arithmetic
# ---------------------------------------------------------------------------

def test_difference_of_squares():
    x = jet.var(0, 0.0, 1, 2)
    prod = (1 + x) * (1 - x)
    assert np.allclose(prod.coeffs, [1.0, 0.0, -1.0])


def test_geometric_series():
    x = jet.var(0, 0.0, 1, 3)
    g = 1 / (1 - x)
    assert np.allclose(g.coeffs, [1.0, 1.0, 1.0, 1.0])


def test_square_raw_partial():
    x = jet.var(0, 3.0, 1, 2)
    sq = x * x
    assert np.allclose(sq.coeffs, [9.0, 6.0, 1.0])
    assert sq.raw_partial((2,)) == pytest.approx(2.0, abs=1e-14)


def test_self_division_is_one():
    rng = np.random.default_rng(0)
    for _ in range(10):
        sp = jet_space(2, 4)
        c = rng.uniform(-1, 1, sp.ncoeff)
        c[0] = rng.uniform(0.5, 2.0)
        a = Jet(sp, c)
        q = a / a
        assert q.value == pytest.approx(1.0, abs=1e-13)
        assert np.max(np.abs(q.coeffs[1:])) < 1e-13


def test_division_by_pole():
    a = jet.const(1.0, 1, 2)
    b = jet.var(0, 0.0, 1, 2)  # constant term 0
    with pytest.raises(JetDomainError):
        _ = a / b


# ---------------------------------------------------------------------------
# unary functions
# ---------------------------------------------------------------------------

def test_exp_series():
    e = jet.exp(jet.var(0, 0.0, 1, 3))
    assert np.allclose(e.coeffs, [1.0, 1.0, 0.5, 1.0 / 6.0])


def test_log_one_plus_x_squared():
    x = jet.var(0, 0.0, 1, 4)
    l = jet.log(1 + x**2)
    assert np.allclose(l.coeffs, [0.0, 0.0, 1.0, 0.0, -0.5], atol=1e-14)


def test_sqrt_of_constant():
    s = jet.sqrt(jet.const(4.0, 1, 2))
    assert np.allclose(s.coeffs, [2.0, 0.0, 0.0])


def test_exp_raw_partials_at_zero():
    e = jet.exp(jet.var(0, 0.0, 1, 5))
    for k in range(6):
        assert e.raw_partial((k,)) == pytest.approx(1.0, rel=1e-13)


def test_log_domain():
    with pytest.raises(JetDomainError):
        jet.log(jet.var(0, 0.0, 1, 2))
    with pytest.raises(JetDomainError):
        jet.sqrt(jet.const(-1.0, 1, 2))
    with pytest.raises(JetDomainError):
        jet.powf(jet.const(-2.0, 1, 2), 0.5)


def test_exp_log_roundtrip():
    rng = np.random.default_rng(7)
    for _ in range(20):
        sp = jet_space(3, 4)
        c = rng.uniform(-1, 1, sp.ncoeff)
        c[0] = rng.uniform(0.2, 3.0)
        a = Jet(sp, c)
        back = jet.exp(jet.log(a))
        assert rel_err(back.coeffs, a.coeffs) < 1e-12


def test_powi_matches_repeated_mul():
    rng = np.random.default_rng(3)
    sp = jet_space(2, 5)
    c = rng.uniform(-1, 1, sp.ncoeff)
    a = Jet(sp, c)
    assert np.allclose((a**4).coeffs, (a * a * a * a).coeffs, rtol=1e-13, atol=1e-13)
    assert np.allclose((a**0).coeffs, jet.const(1.0, 2, 5).coeffs)


def test_powf_on_positive_base():
    x = jet.var(0, 1.0, 1, 4)
    p = jet.powf(x, 1.5)
    # independent check against the binomial series of (1+t)^{3/2} at t=0
    expected = [1.0, 1.5, 1.5 * 0.5 / 2, 1.5 * 0.5 * (-0.5) / 6, 1.5 * 0.5 * (-0.5) * (-1.5) / 24]
    assert np.allclose(p.coeffs, expected, rtol=1e-12)


# ---------------------------------------------------------------------------
# ring axioms (property tests)
# ---------------------------------------------------------------------------

def _jets(dim, order, seed_lists):
    sp = jet_space(dim, order)
    out = []
    for vals in seed_lists:
        c = np.array([vals[i % len(vals)] for i in range(sp.ncoeff)])
        out.append(Jet(sp, c))
    return out


coeff_lists = st.lists(
    st.floats(min_value=-1.0, max_value=1.0, allow_nan=False), min_size=3, max_size=24
)


@settings(max_examples=60, deadline=None)
@given(coeff_lists, coeff_lists, coeff_lists, st.integers(1, 3), st.integers(1, 4))
def test_ring_axioms(la, lb, lc, dim, order):
    a, b, c = _jets(dim, order, [la, lb, lc])
    assert rel_err((a * b).coeffs, (b * a).coeffs) < 1e-13
    assert rel_err(((a * b) * c).coeffs, (a * (b * c)).coeffs) < 1e-13
    assert rel_err((a * (b + c)).coeffs, (a * b + a * c).coeffs) < 1e-13
    assert rel_err((a + b).coeffs, (b + a).coeffs) < 1e-13


@settings(max_examples=60, deadline=None)
@given(
    coeff_lists,
    coeff_lists,
    st.floats(1e-3, 10.0),
    st.booleans(),
    st.integers(1, 3),
    st.integers(0, 4),
)
def test_mul_div_roundtrip(la, lb, a0, flip, dim, order):
    # |constant term| >= 1e-3 (the spec's pole guard); the nilpotent part is
    # scaled by the constant so the reciprocal series stays well conditioned
    a, b = _jets(dim, order, [la, lb])
    a0 = -a0 if flip else a0
    scaled = a.coeffs * (0.5 * a0)
    scaled = np.concatenate([[a0], scaled[1:]])
    a = Jet(a.space, scaled)
    back = a * (b / a)
    assert rel_err(back.coeffs, b.coeffs) < 1e-12


# ---------------------------------------------------------------------------
# finite-difference oracle
# ---------------------------------------------------------------------------

UNARY_POINTS = {
    "exp": 0.3,
    "log": 1.7,
    "sqrt": 2.1,
    "sin": 0.4,
    "cos": -0.6,
    "sinh": 0.5,
    "cosh": -0.3,
    "tanh": 0.25,
    "atan": 0.8,
}

UNARY_FLOAT = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "atan": np.arctan,
}


@pytest.mark.parametrize("name", sorted(UNARY_POINTS))
def test_unary_against_finite_differences(name):
    x0 = UNARY_POINTS[name]
    j = jet.apply_unary(name, jet.var(0, x0, 1, 4))
    fn = UNARY_FLOAT[name]
    for k in range(5):
        got = j.raw_partial((k,))
        want = fd_partial(lambda p: fn(p[0]), [x0], (k,))
        assert abs(got - want) / max(abs(want), 1.0) < 1e-5


def _poly_trig(p):
    # composite with nontrivial mixed partials in 2 variables
    x, y = p[0], p[1]
    return np.exp(0.3 * x) * np.sin(y) + np.log(1.5 + x * x + 0.5 * y * y) / (2.0 + np.cos(x))


def _poly_trig_jet(dim, order, point):
    x = jet.var(0, point[0], dim, order)
    y = jet.var(1, point[1], dim, order)
    return jet.exp(0.3 * x) * jet.sin(y) + jet.log(1.5 + x * x + 0.5 * (y * y)) / (
        2.0 + jet.cos(x)
    )


def test_composite_against_finite_differences():
    rng = np.random.default_rng(11)
    sp = jet_space(2, 4)
    for _ in range(5):
        point = rng.uniform(-0.8, 0.8, 2)
        j = _poly_trig_jet(2, 4, point)
        for alpha in sp.exps:
            if sum(alpha) > 4:
                continue
            got = j.raw_partial(alpha)
            want = fd_partial(_poly_trig, point, alpha)
            assert abs(got - want) / max(abs(want), 1.0) < 1e-5


# ---------------------------------------------------------------------------
# bookkeeping
# ---------------------------------------------------------------------------

def test_truncate_is_prefix():
    rng = np.random.default_rng(5)
    sp = jet_space(3, 5)
    a = Jet(sp, rng.uniform(-1, 1, sp.ncoeff))
    t = a.truncate(2)
    assert t.order == 2
    assert np.allclose(t.coeffs, a.coeffs[: t.space.ncoeff])
    with pytest.raises(InsufficientOrderError):
        t.truncate(4)


def test_partial_drops_order():
    x = jet.var(0, 2.0, 2, 3)
    d = (x * x * x).partial(0)
    assert d.order == 2
    assert d.value == pytest.approx(12.0)  # d/dx x^3 = 3x^2 at 2
    with pytest.raises(InsufficientOrderError):
        jet.const(1.0, 2, 0).partial(0)


def test_raw_partial_order_guard():
    a = jet.const(1.0, 2, 2)
    with pytest.raises(InsufficientOrderError):
        a.raw_partial((2, 1))
    with pytest.raises(ValueError):
        a.raw_partial((1,))
