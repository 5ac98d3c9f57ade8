"""Exact coefficient rings and truncated q-series."""

from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from csres.errors import AlgebraError
from csres.numkernel import theta, working_prec
from csres.qring import (
    FracLaurent,
    LaurentPoly,
    QSeries,
    qpoch_series,
    theta_series,
)

X = LaurentPoly.x


# ---------------------------------------------------------------------------
# LaurentPoly / FracLaurent

small_rats = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def lp_strategy():
    return st.dictionaries(st.integers(-3, 3), small_rats, max_size=4).map(
        LaurentPoly)


@settings(max_examples=50, deadline=None)
@given(lp_strategy(), lp_strategy(), lp_strategy())
def test_laurent_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a + LaurentPoly() == a
    assert a * LaurentPoly.const(1) == a


def test_laurent_eval():
    p = X(2) - 3 * X(-1) + 5
    with working_prec(30):
        v = p.eval(mp.mpf(2))
        assert v == mp.mpf(4) - mp.mpf(3) / 2 + 5


def test_frac_reduction():
    f = (X(2) - 1) / (X(1) - 1)
    assert isinstance(f, LaurentPoly)
    assert f == X(1) + 1
    g = (X(1) - 1) / (X(2) - 1)
    assert isinstance(g, FracLaurent)
    assert g * (X(1) + 1) == LaurentPoly.const(1)


def test_frac_monomial_denominator_folds():
    f = (X(3) + X(1)) / X(2)
    assert isinstance(f, LaurentPoly)
    assert f == X(1) + X(-1)


def test_frac_zero_division():
    with pytest.raises(AlgebraError):
        FracLaurent(X(1), LaurentPoly())


@settings(max_examples=40, deadline=None)
@given(lp_strategy(), lp_strategy())
def test_frac_field_roundtrip(a, b):
    if b.is_zero():
        return
    f = FracLaurent(a, b)
    assert f * b == a


def test_frac_x_inverse():
    f = FracLaurent(X(1) + 2, X(2) - X(1) + 1)
    g = f.subs_x_inverse()
    assert g == FracLaurent(X(-1) + 2, X(-2) - X(-1) + 1)


# ---------------------------------------------------------------------------
# QSeries


def test_qseries_add_order_tracking():
    a = QSeries({0: 1, 1: 2}, order=5)
    b = QSeries({0: 3}, order=3)
    c = a + b
    assert c.order == 3
    assert c.coeff_q(0) == 4


def test_qseries_mul_order_tracking():
    # known through q^5 times series with valuation 2
    a = QSeries({0: 1, 1: 1}, order=5)
    b = QSeries({2: 1}, order=None)
    assert (a * b).order == 7
    c = QSeries({2: 1}, order=4)
    assert (a * c).order == 4


def test_qseries_exact_times_exact_is_exact():
    a = QSeries({0: 1, 3: -2}, order=None)
    assert (a * a).order is None


def test_qseries_invert_roundtrip():
    a = qpoch_series(1, 1, 25)
    assert (a * a.invert() - 1).is_zero()


def test_qseries_invert_with_valuation():
    a = QSeries({2: Fraction(3), 3: Fraction(1)}, order=10)
    ai = a.invert()
    assert ai.val() == -2
    assert ai.order == 6
    prod = a * ai
    assert prod == QSeries.one()


def test_qseries_invert_exact_needs_order():
    a = QSeries({0: 1, 1: 1}, order=None)
    with pytest.raises(AlgebraError):
        a.invert()
    assert a.invert(order=5).order == 5


def test_qseries_halfpow_promotion():
    a = QSeries({1: 1}, order=None)                 # q
    b = QSeries.monomial(1, Fraction(1, 2))          # q^{1/2}
    c = a * b
    assert c.halfpow
    assert c.coeff_q(Fraction(3, 2)) == 1


def test_qseries_q_inverse():
    a = QSeries({-1: X(2), 2: Fraction(5)}, order=None)
    b = a.subs_q_inverse()
    assert b.coeff_q(1) == X(2)
    assert b.coeff_q(-2) == 5
    with pytest.raises(AlgebraError):
        QSeries({0: 1}, order=4).subs_q_inverse()


def test_qseries_x_qshift():
    a = QSeries({0: X(1) + X(-1)}, order=None)
    b = a.subs_x_qshift(1)
    assert b.coeff_q(1) == X(1)
    assert b.coeff_q(-1) == X(-1)


def test_qseries_shift_q():
    a = QSeries({0: 1}, order=3)
    b = a.shift_q(Fraction(1, 2))
    assert b.halfpow and b.coeff_q(Fraction(1, 2)) == 1


def test_qseries_json_roundtrip():
    s = theta_series(3, 1, 8) + qpoch_series(0, Fraction(1, 2), 8)
    t = QSeries.from_json(s.to_json())
    assert (s - t).is_zero()
    assert t.order == s.order and t.halfpow == s.halfpow


def test_qseries_json_fracfield():
    f = FracLaurent(X(1) + 2, X(2) + X(1) + 1)
    s = QSeries({0: f, 2: X(1)}, order=6)
    t = QSeries.from_json(s.to_json())
    assert (s - t).is_zero()


def test_qseries_eval_against_numeric():
    with working_prec(40):
        q = mp.mpf("0.11")
        x = mp.mpf("1.3")
        s = qpoch_series(1, 1, 80)  # (qx;q)_inf
        num = mp.qp(q * x, q)
        assert abs(s.eval(q, x) - num) / abs(num) < mp.mpf(10) ** -30


@settings(max_examples=30, deadline=None)
@given(
    st.dictionaries(st.integers(0, 6), small_rats, max_size=4),
    st.dictionaries(st.integers(0, 6), small_rats, max_size=4),
)
def test_qseries_ring_property(ca, cb):
    a = QSeries(ca, order=8)
    b = QSeries(cb, order=8)
    assert a * b == b * a
    assert (a + b) * b == a * b + b * b


# ---------------------------------------------------------------------------
# builders


def test_qpoch_series_numeric_crosscheck():
    with working_prec(40):
        q = mp.mpf("0.09")
        x = mp.mpc("0.8", "0.3")
        s = qpoch_series(2, 3, 60)  # (q^3 x^2; q)_inf
        num = mp.qp(q**3 * x**2, q)
        assert abs(s.eval(q, x) - num) / abs(num) < mp.mpf(10) ** -28


def test_theta_series_matches_numeric():
    with working_prec(40):
        q = mp.mpf("0.13")
        x = mp.mpf("1.7")
        for (r, s) in [(1, 1), (-1, 1), (3, 2), (-5, 1), (7, 1)]:
            ts = theta_series(r, s, 70)
            num = theta(-(mp.sqrt(q)) ** r * x**s, q, digits=40)
            assert abs(ts.eval(q, x) - num) / abs(num) < mp.mpf(10) ** -25


def test_theta_series_recursion():
    # th(-q^{3/2}x) = -q^{-1} x^{-1} th(-q^{1/2}x)
    N = 20
    lhs = theta_series(3, 1, N)
    rhs = (theta_series(1, 1, N) * X(-1, -1)).shift_q(-1)
    assert (lhs - rhs).is_zero()


def test_theta_series_unit_factorization():
    # th(-q^{1/2}x;q) = (qx;q)_inf (x^{-1};q)_inf has constant term 1 - x^{-1}
    t = theta_series(1, 1, 10)
    assert t.coeff_q(0) == 1 - X(-1)
    # th(-q^{-1/2}x;q) = -x th(-q^{1/2}x;q)
    t2 = theta_series(-1, 1, 10)
    assert (t2 - t * X(1, -1)).is_zero()
