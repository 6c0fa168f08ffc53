from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from convlab import convex as cx
from convlab.convolution import tent_value

FAMILIES = [cx.power(2.0), cx.power(3.5), cx.entropy(), cx.negpower(0.5), cx.ft(0.3), cx.linear(2.0),
            cx.piecewise_linear([0, 0.5, 1], [0, 0.1, 0.8])]
IDS = [f.label() for f in FAMILIES]


def tent_rhs_by_quadrature(f, I1, I2, points=200001):
    """``int f(psi)`` over the tent, on a fine grid independent of the closed forms."""
    half = (I1 + I2) / 2
    x = np.linspace(-half, half, points)
    return float(np.trapezoid(f(tent_value(I1, I2, x)), x))


class TestFamilies:
    @pytest.mark.parametrize("f", FAMILIES, ids=IDS)
    def test_convex_on_unit_interval(self, f):
        assert cx.is_convex(f)

    @pytest.mark.parametrize("f", FAMILIES, ids=IDS)
    def test_vanishes_at_zero(self, f):
        assert f(0.0) == 0.0

    def test_concave_rejected(self):
        with pytest.raises(cx.ConvexFnError):
            cx.custom(lambda y: np.sqrt(y))
        with pytest.raises(cx.ConvexFnError):
            cx.piecewise_linear([0, 0.5, 1], [0, 0.8, 1])

    def test_custom_accepts_convex(self):
        f = cx.custom(lambda y: np.asarray(y) ** 3, antiderivative=lambda b: b**4 / 4)
        assert f.integral(1.0) == pytest.approx(0.25)
        assert cx.kemperman_fn()(0.0) == 0.0 and cx.is_convex(cx.kemperman_fn())

    def test_chord_examples(self):
        f = cx.power(2.0)
        assert cx.chord(f, 0, 1, 0.5) == pytest.approx(0.5) and cx.gap(f, 0, 1, 0.5) == pytest.approx(0.25)
        assert cx.gap(cx.linear(3.0), 0.1, 0.9, 0.4) == pytest.approx(0.0, abs=1e-15)

    def test_hinge_values(self):
        assert cx.eval_ft(0.3, 0.5) == pytest.approx(0.2)
        assert cx.eval_ft(0.3, 0.2) == 0.0
        assert cx.eval_ft(0.0, 0.7) == 0.7

    @pytest.mark.parametrize("f", FAMILIES, ids=IDS)
    def test_integral_matches_simpson(self, f):
        assert f.integral(0.8) == pytest.approx(cx.simpson(f.interior, 1e-12, 0.8, 20000), abs=1e-7)

    def test_entropy_endpoint(self):
        assert cx.entropy()(0.0) == 0.0 and cx.entropy()(1.0) == 0.0

    @pytest.mark.parametrize("bad", [lambda: cx.power(0.5), lambda: cx.negpower(1.5), lambda: cx.ft(-0.1),
                                     lambda: cx.piecewise_linear([0.1, 1], [0, 1])])
    def test_rejects_nonconvex_parameters(self, bad):
        with pytest.raises(cx.ConvexFnError):
            bad()

    @pytest.mark.parametrize("f", FAMILIES[:5], ids=IDS[:5])
    def test_spec_roundtrip(self, f):
        g = cx.from_spec(f.to_spec())
        y = np.linspace(0, 1, 11)
        np.testing.assert_allclose(g(y), f(y))

    def test_exact_eval(self):
        f = cx.ft(0.25)
        assert f.exact_capable and f.exact_eval(Fraction(3, 4)) == Fraction(1, 2)
        assert cx.power(2.0).exact_eval(Fraction(1, 3)) == Fraction(1, 9)

    def test_lipschitz(self):
        assert cx.lipschitz(cx.power(2.0), 1.0) == pytest.approx(2.0, rel=1e-2)
        assert cx.lipschitz(cx.ft(0.3), 1.0) == pytest.approx(1.0)


class TestRightHandSide:
    @pytest.mark.parametrize("I1, I2", [(1.0, 2.0), (0.4, 0.9), (1.0, 1.0), (0.25, 3.0)])
    @pytest.mark.parametrize("f", FAMILIES[:5], ids=IDS[:5])
    def test_equals_tent_value(self, f, I1, I2):
        if I1 > 1 and f.family in ("entropy", "negpower"):
            pytest.skip("outside the domain")
        assert cx.rhs_bound(f, I1, I2) == pytest.approx(tent_rhs_by_quadrature(f, I1, I2), abs=1e-5)

    def test_known_values(self):
        assert cx.rhs_bound(cx.power(2.0), 1, 2) == pytest.approx(5 / 3)
        assert cx.rhs_bound(cx.ft(0.3), 1, 2) == pytest.approx(1.19)
        assert cx.rhs_bound(cx.entropy(), 1, 1) == pytest.approx(-0.5)
        assert cx.rhs_bound(cx.negpower(0.5), 1, 1) == pytest.approx(-4 / 3)

    def test_exact(self):
        assert cx.rhs_bound_exact(cx.power(2.0), Fraction(1), Fraction(2)) == Fraction(5, 3)
        assert cx.rhs_bound_exact(cx.ft(0.5), Fraction(1), Fraction(2)) == Fraction(3, 4)
        assert cx.rhs_bound_exact(cx.ft(0.5), Fraction(1, 4), Fraction(2)) == 0

    def test_order_enforced(self):
        with pytest.raises(cx.ConvexFnError):
            cx.rhs_bound(cx.power(2.0), 2, 1)

    @given(st.floats(1.0, 4.0), st.floats(0.05, 1.0), st.floats(0.0, 2.0))
    def test_lp_closed_form_matches_rhs(self, p, I1, extra):
        I2 = I1 + extra
        assert cx.lp_bound(p, I1, I2) == pytest.approx(cx.rhs_bound(cx.power(p), I1, I2), rel=1e-9)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 2))
    def test_hinge_rhs_product_form(self, t, I1, extra):
        if t > I1:
            return
        I2 = I1 + extra
        assert cx.rhs_bound(cx.ft(t), I1, I2) == pytest.approx((I1 - t) * (I2 - t), abs=1e-12)

    def test_lp_p1_branches_coincide(self):
        assert cx.lp_bound(1.0, 0.6, 1.1) == pytest.approx(0.66)
        assert cx.lp_bound(1.0, 0.6, 1.1, "concave") == pytest.approx(0.66)

    def test_lp_concave(self):
        assert cx.lp_bound(0.5, 1, 1, "concave") == pytest.approx(4 / 3)
        assert cx.lp_bound(0.5, 1, 1, "concave") == pytest.approx(-cx.rhs_bound(cx.negpower(0.5), 1, 1))


class TestChords:
    @given(st.floats(0, 0.5), st.floats(0.5, 1), st.floats(0, 1))
    def test_gap_nonnegative(self, y1, y2, s):
        if y2 - y1 < 1e-6:
            return
        y = y1 + s * (y2 - y1)
        for f in FAMILIES:
            assert cx.gap(f, y1, y2, y) >= -1e-12

    def test_chord_endpoints(self):
        f = cx.power(2.0)
        assert cx.chord(f, 0.2, 0.6, 0.2) == pytest.approx(0.04)
        assert cx.chord(f, 0.2, 0.6, 0.6) == pytest.approx(0.36)

    def test_chord_domain(self):
        with pytest.raises(cx.ConvexFnError):
            cx.chord(cx.power(2.0), 0.5, 0.2, 0.3)
        with pytest.raises(cx.ConvexFnError):
            cx.chord(cx.power(2.0), 0.2, 0.5, 0.7)


class TestPiecewiseLinear:
    def test_small_value(self):
        assert cx.pl_approx(cx.power(2.0), 2, 0.25) == pytest.approx(0.125)

    @given(st.integers(1, 64), st.floats(0, 1))
    def test_hinge_sum_equals_chord_form(self, n, y):
        for f in FAMILIES[:5]:
            assert cx.pl_approx(f, n, y) == pytest.approx(cx.pl_approx(f, n, y, "chord"), abs=1e-11)

    @given(st.integers(1, 64), st.floats(0, 1))
    def test_above_function(self, n, y):
        for f in FAMILIES[:5]:
            assert cx.pl_approx(f, n, y) >= f(y) - 1e-12

    @pytest.mark.parametrize("n", [1, 3, 8, 32])
    def test_interpolates_nodes(self, n):
        nodes = np.arange(n + 1) / n
        f = cx.entropy()
        np.testing.assert_allclose(cx.pl_approx(f, n, nodes), f(nodes), atol=1e-12)

    @given(st.integers(1, 64), st.floats(1e-3, 1 - 1e-3))
    def test_close_bound(self, n, y):
        for f in FAMILIES[:5]:
            assert cx.pl_approx(f, n, y) <= cx.pl_close_bound(f, n, y) + 1e-12

    @given(st.integers(1, 32), st.floats(0, 1))
    def test_refinement_is_monotone(self, n, y):
        for f in FAMILIES[:5]:
            assert cx.pl_approx(f, 2 * n, y) <= cx.pl_approx(f, n, y) + 1e-12

    @given(st.integers(1, 64), st.floats(0, 1))
    def test_below_secant_to_one(self, n, y):
        for f in FAMILIES[:5]:
            assert cx.pl_approx(f, n, y) <= f(1.0) * y + 1e-12

    def test_linear_is_reproduced(self):
        y = np.linspace(0, 1, 33)
        np.testing.assert_allclose(cx.pl_approx(cx.linear(2.0), 5, y), 2 * y, atol=1e-12)

    def test_hinge_coefficients_nonnegative(self):
        _, coef = cx.pl_weights(cx.negpower(0.5), 16)
        assert np.all(coef >= 0)
