import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from augtree.exact import (
    Surd,
    exact_sqrt,
    mat_identity,
    mat_is_orthogonal,
    mat_mul,
    parse_scalar,
    scalar_key,
    surd,
)

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=20)


def q5(a, b):
    return surd(a, b, 5)


class TestSurdArithmetic:
    @given(rationals, rationals, rationals, rationals)
    def test_field_ops_match_floats(self, a, b, c, d):
        x, y = q5(a, b), q5(c, d)
        fx, fy = float(x), float(y)
        assert float(x + y) == pytest.approx(fx + fy, abs=1e-9)
        assert float(x - y) == pytest.approx(fx - fy, abs=1e-9)
        assert float(x * y) == pytest.approx(fx * fy, abs=1e-9)
        if not (c == 0 and d == 0):
            assert float(x / y) == pytest.approx(fx / fy, rel=1e-9, abs=1e-12)

    @given(rationals, rationals)
    def test_mul_inverse(self, a, b):
        x = q5(a, b)
        if isinstance(x, Fraction) and x == 0:
            return
        assert x * (1 / x) == 1

    def test_canonical_collapse(self):
        assert surd(Fraction(1, 2), 0, 5) == Fraction(1, 2)
        assert surd(0, 1, 4) == Fraction(2)          # sqrt(4) collapses
        assert surd(0, 1, 8) == Surd(Fraction(0), Fraction(2), 2)  # sqrt(8) = 2 sqrt 2
        assert isinstance(surd(0, 1, 5), Surd)

    def test_golden_ratio_identity(self):
        r = q5(Fraction(-1, 2), Fraction(1, 2))  # (sqrt 5 - 1)/2
        assert r * r == 1 - r
        assert r ** 3 == 2 * r - 1
        assert float(r) == pytest.approx((math.sqrt(5) - 1) / 2)

    def test_pow(self):
        r = q5(Fraction(-1, 2), Fraction(1, 2))
        assert r ** 0 == 1
        p = Fraction(1)
        for k in range(1, 8):
            p = p * r
            assert r ** k == p

    def test_mixed_radicals_rejected(self):
        with pytest.raises(TypeError):
            surd(0, 1, 2) + surd(0, 1, 3)

    def test_division_by_surd(self):
        r = q5(Fraction(-1, 2), Fraction(1, 2))
        assert (1 - r) / r == r  # since r^2 = 1 - r
        assert float(Fraction(1) / r) == pytest.approx(1 / float(r))


class TestOrdering:
    @given(rationals, rationals, rationals, rationals)
    def test_order_matches_floats(self, a, b, c, d):
        x, y = q5(a, b), q5(c, d)
        fx, fy = float(x), float(y)
        if abs(fx - fy) > 1e-9:
            assert (x < y) == (fx < fy)
            assert (x > y) == (fx > fy)

    def test_close_values_exact(self):
        # sqrt(5) vs 161/72: convergent, differs by ~3e-5
        x = surd(0, 1, 5)
        assert x < Fraction(161, 72)
        assert x > Fraction(682, 305)

    def test_irrational_never_equals_rational(self):
        assert surd(0, 1, 5) != Fraction(2)
        assert not (surd(0, 1, 5) == 2.0)


class TestParsing:
    @pytest.mark.parametrize("text, value", [
        ("1/3", Fraction(1, 3)),
        ("2", Fraction(2)),
        ("-3/4", Fraction(-3, 4)),
        ("(sqrt(5)-1)/2", Surd(Fraction(-1, 2), Fraction(1, 2), 5)),
        ("sqrt(3)/4", Surd(Fraction(0), Fraction(1, 4), 3)),
        ("sqrt(4)", Fraction(2)),
        ("sqrt(1/9)", Fraction(1, 3)),
        ("1 - 1/2", Fraction(1, 2)),
        ("2*(1/3 + 1/6)", Fraction(1)),
    ])
    def test_exact_expressions(self, text, value):
        v = parse_scalar(text)
        assert v == value
        assert type(v) is type(value) or isinstance(v, (int, Fraction))

    def test_decimals_are_floats(self):
        v = parse_scalar("0.25")
        assert isinstance(v, float) and v == 0.25
        v = parse_scalar("1e-3")
        assert isinstance(v, float) and v == 1e-3

    def test_float_contaminates_surd(self):
        v = parse_scalar("sqrt(5)*0.5")
        assert isinstance(v, float)
        assert v == pytest.approx(math.sqrt(5) / 2)

    @pytest.mark.parametrize("bad", ["", "1//2", "sqrt(", "1 +", "x+1", "(1"])
    def test_rejects_garbage(self, bad):
        with pytest.raises(ValueError):
            parse_scalar(bad)


class TestKeysAndMatrices:
    def test_keys_equal_iff_values_equal(self):
        vals = [Fraction(1, 2), Fraction(2, 4), surd(0, 1, 5),
                surd(0, Fraction(2, 2), 5), surd(1, 1, 5), Fraction(0)]
        for x in vals:
            for y in vals:
                assert (scalar_key(x) == scalar_key(y)) == (x == y)

    def test_exact_sqrt(self):
        assert exact_sqrt(Fraction(9, 4)) == Fraction(3, 2)
        assert exact_sqrt(2) == Surd(Fraction(0), Fraction(1), 2)
        assert exact_sqrt(0) == 0

    def test_orthogonal_check(self):
        assert mat_is_orthogonal(mat_identity(2))
        flip = ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0)))
        assert mat_is_orthogonal(flip)
        shear = ((Fraction(1), Fraction(1)), (Fraction(0), Fraction(1)))
        assert not mat_is_orthogonal(shear)

    def test_mat_mul_identity(self):
        A = ((Fraction(1, 2), Fraction(1, 3)), (Fraction(0), Fraction(2)))
        assert mat_mul(A, mat_identity(2)) == A
