"""Holomorphic blocks, Wronskians and the exact identity suite."""

from fractions import Fraction

import mpmath as mp
import pytest

from csres.blocks import (
    BlockMatrix,
    BlockSpec,
    block_vector,
    blocks41_numeric,
    blocks41_series,
    blocks52_numeric,
    blocks52_series,
    blocks_generic_numeric,
    blocks_generic_series,
    e1_series,
    e2_series,
    e_series,
    g_u0_numeric,
    g_u0_series,
    h_series,
    h_triple,
    h_u0_numeric,
    h_u0_series,
    j_bessel,
    j_series,
    theta_num,
    theta_pow,
    verify_identity,
    wronskian,
    IDENTITY_IDS,
)
from csres.errors import UsageError
from csres.numkernel import working_prec
from csres.qring import LaurentPoly, QSeries

X = LaurentPoly.x


def series_eval(s, q, x=None):
    return s.eval(mp.mpc(q), None if x is None else mp.mpc(x))


def close(a, b, tol=mp.mpf("1e-25")):
    return abs(mp.mpc(a) - mp.mpc(b)) <= tol * (1 + abs(mp.mpc(b)))


# ---------------------------------------------------------------------------
# Eisenstein series: frozen arithmetic facts


def sigma1(n):
    return sum(d for d in range(1, n + 1) if n % d == 0)


def numdiv(n):
    return sum(1 for d in range(1, n + 1) if n % d == 0)


def test_e2_is_divisor_sum():
    # E_2(q) = 1 - 24 sum sigma_1(n) q^n
    s = e2_series(12)
    assert s.coeff_q(0) == 1
    for n in range(1, 13):
        assert s.coeff_q(n) == -24 * sigma1(n)


def test_e1_counts_divisors():
    # E_1(q) = 1 - 4 sum d(n) q^n
    s = e1_series(12)
    assert s.coeff_q(0) == 1
    for n in range(1, 13):
        assert s.coeff_q(n) == -4 * numdiv(n)


def test_e_series_steps():
    # E_l^{(n)} - E_l^{(n-1)} telescopes to a single geometric-type tail
    order = 14
    for n in (1, 2, 3):
        # steps: d1 = -q^n/(1-q^n), d2 = -q^n/(1-q^n)^2
        d1 = e_series(1, n, order) - e_series(1, n - 1, order)
        d2 = e_series(2, n, order) - e_series(2, n - 1, order)
        g = QSeries.one(order) - QSeries.monomial(1, n)
        lhs1 = d1 * g + QSeries.monomial(1, n)
        lhs2 = d2 * g * g + QSeries.monomial(1, n)
        assert all(v == 0 for v in lhs1.c.values())
        assert all(v == 0 for v in lhs2.c.values())


# ---------------------------------------------------------------------------
# theta


def test_theta_pow_matches_numeric():
    with working_prec(35):
        q = mp.mpf("0.11")
        qh = mp.sqrt(q)
        x = mp.mpc("0.7", "0.2")
        # theta(-q^{1/2} x; q)
        s = theta_pow(1, 1, 1, 30)
        assert close(series_eval(s, q, x), theta_num(-qh * x, q, qh, 35),
                     mp.mpf("1e-20"))
        # theta(-q^{-1/2} x; q)^{-2}
        s = theta_pow(-1, 1, -2, 30)
        assert close(series_eval(s, q, x),
                     theta_num(-x / qh, q, qh, 35) ** -2, mp.mpf("1e-20"))
        # theta(-q^{3/2} x^2; q) uses the quasi-periodicity walk
        s = theta_pow(3, 2, 1, 30)
        assert close(series_eval(s, q, x),
                     theta_num(-qh ** 3 * x**2, q, qh, 35), mp.mpf("1e-20"))


def test_theta_pow_quasi_periodicity():
    # theta(q * y; q) = -q^{-1/2} y^{-1} theta(y; q) with y = -q^{1/2} x:
    # theta(-q^{3/2} x) = q^{-1} (-x)^{-1} ... realized as an exact series
    order = 20
    lhs = theta_pow(3, 1, 1, order)
    rhs = theta_pow(1, 1, 1, order) * QSeries.monomial(X(-1, -1), -1)
    d = lhs - rhs
    assert all(_zero(v) for v in d.c.values())


def _zero(v):
    if isinstance(v, LaurentPoly):
        return v.is_zero()
    if isinstance(v, Fraction):
        return v == 0
    return not v


# ---------------------------------------------------------------------------
# q-Hahn Bessel J and the 5_2 kernel H: series vs direct numeric sums


def j_direct(x, y, q, digits=40):
    """Independent J^+ oracle: plain sum without term recycling."""
    with working_prec(digits):
        pref = mp.mpf(1)
        n = 1
        while abs(q) ** n > mp.mpf(10) ** (-digits - 8):
            pref *= 1 - q**n * y
            n += 1
        tot = mp.mpc(0)
        for n in range(0, 60):
            num = (-1) ** n * q ** (n * (n + 1) // 2) * x**n
            den = mp.mpf(1)
            for j in range(1, n + 1):
                den *= (1 - q**j) * (1 - q**j * y)
            tot += num / den
        return pref * tot


def test_j_series_matches_direct_sum():
    with working_prec(40):
        q = mp.mpf("0.13")
        x = mp.mpc("0.83", "0.1")
        # J(q x^2, x; q)
        s = j_series((1, 2), (0, 1), 26)
        want = j_direct(q * x**2, x, q)
        assert close(series_eval(s, q, x), want, mp.mpf("1e-12"))
        # and the packaged numeric evaluator agrees with the direct sum
        assert close(j_bessel(q * x**2, x, q, 1, 40), want, mp.mpf("1e-30"))


def test_j_symmetry_in_x_y():
    # J(x, y; q) = J(y, x; q) on monomial arguments
    a = j_series((1, 1), (2, 0), 18)
    b = j_series((2, 0), (1, 1), 18)
    d = a - b
    assert all(_zero(v) for v in d.c.values())


def h_direct(x, y, z, q, digits=40):
    """Independent H^+ oracle."""
    with working_prec(digits):
        pref = mp.mpf(1)
        n = 1
        while abs(q) ** n > mp.mpf(10) ** (-digits - 8):
            pref *= (1 - q**n * x) * (1 - q**n * y)
            n += 1
        tot = mp.mpc(0)
        for n in range(0, 60):
            num = q ** (n * (n + 1)) * z**n
            den = mp.mpf(1)
            for j in range(1, n + 1):
                den *= (1 - q**j) * (1 - q**j * x) * (1 - q**j * y)
            tot += num / den
        return pref * tot


def test_h_series_matches_direct_sum():
    with working_prec(40):
        q = mp.mpf("0.17")
        x = mp.mpc("0.6", "-0.3")
        # H(x, x^{-1}, q^2; q)
        s = h_series((0, 1), (0, -1), (2, 0), 26)
        want = h_direct(x, 1 / x, q**2, q)
        assert close(series_eval(s, q, x), want, mp.mpf("1e-12"))
        assert close(h_triple(x, 1 / x, q**2, q, 1, 40), want,
                     mp.mpf("1e-30"))


def test_h_at_z_zero():
    # H(x, y, 0; q) = (qx; q)_inf (qy; q)_inf
    with working_prec(35):
        q = mp.mpf("0.19")
        x = mp.mpf("0.55")
        from csres.numkernel import pochhammer
        want = pochhammer(q * x, q, digits=35) * pochhammer(q / x, q,
                                                            digits=35)
        got = h_triple(x, 1 / x, 0, q, 1, 35)
        assert close(got, want, mp.mpf("1e-30"))


# ---------------------------------------------------------------------------
# block vectors: series and numeric evaluations agree in both regimes


def test_blocks41_series_vs_numeric():
    with working_prec(40):
        q = mp.mpf("0.13")
        qh = mp.sqrt(q)
        x = mp.mpc("0.83", "0.21")
        for m in (-1, 0, 2):
            A, B = blocks41_series(m, 24)
            An, Bn = blocks41_numeric(m, x, q, qh, 40)
            assert close(series_eval(A, q, x), An, mp.mpf("1e-12"))
            assert close(series_eval(B, q, x), Bn, mp.mpf("1e-12"))


def test_blocks41_inverse_base():
    # eps = -1 series evaluated at q matches numerics at base 1/q
    with working_prec(40):
        q = mp.mpf("0.13")
        qh = mp.sqrt(q)
        x = mp.mpc("0.83", "0.21")
        for m in (-1, 0, 2):
            A, B = blocks41_series(m, 24, eps=-1)
            An, Bn = blocks41_numeric(m, x, 1 / q, 1 / qh, 40)
            assert close(series_eval(A, q, x), An, mp.mpf("1e-12"))
            assert close(series_eval(B, q, x), Bn, mp.mpf("1e-12"))


def test_blocks52_series_vs_numeric():
    with working_prec(40):
        q = mp.mpf("0.11")
        qh = mp.sqrt(q)
        x = mp.mpc("0.77", "0.15")
        for m, eps in ((0, 1), (1, 1), (-1, -1), (0, -1)):
            vec = blocks52_series(m, 22, eps=eps)
            qq, qqh = (q, qh) if eps > 0 else (1 / q, 1 / qh)
            num = blocks52_numeric(m, x, qq, qqh, 40)
            for s, v in zip(vec, num):
                assert close(series_eval(s, q, x), v, mp.mpf("1e-12"))


def test_blocks52_x_inversion():
    # A_m(x^{-1}) = A_m(x) and B_m(x^{-1}) = C_m(x)
    with working_prec(40):
        q = mp.mpf("0.11")
        qh = mp.sqrt(q)
        x = mp.mpc("0.77", "0.15")
        A1, B1, C1 = blocks52_numeric(0, x, q, qh, 40)
        A2, B2, C2 = blocks52_numeric(0, 1 / x, q, qh, 40)
        assert close(A1, A2, mp.mpf("1e-30"))
        assert close(B1, C2, mp.mpf("1e-30"))
        assert close(C1, B2, mp.mpf("1e-30"))


def test_generic_blocks_series_vs_numeric():
    with working_prec(40):
        q = mp.mpf("0.12")
        x = mp.mpc("0.77", "0.1")
        cases = [("41", 1, 2, [x, 1], x ** -2),
                 ("52", 2, 3, [1, x, 1 / x], 1),
                 ("24", 2, 4, [x, 1, 1 / x, x**2], 1)]
        for tag, A, r, xs, w in cases:
            for m in (0, 1):
                ser = blocks_generic_series(A, r, m, 22, 1, tag)
                num = blocks_generic_numeric(A, r, m, xs, w, q, 40)
                for s, v in zip(ser, num):
                    assert close(series_eval(s, q, x), v, mp.mpf("1e-12"))


def test_generic_series_rejects_inverse_base():
    with pytest.raises(UsageError):
        blocks_generic_series(1, 2, 0, 10, -1, "41")


# ---------------------------------------------------------------------------
# u = 0 families


def g_direct(jj, m, q, digits=40):
    """Independent oracle for the 2-block u=0 series."""
    with working_prec(digits):
        e1 = 1 - 4 * mp.nsum(lambda s: q**s / (1 - q**s), [1, mp.inf])
        tot = mp.mpc(0)
        for n in range(0, 80):
            den = mp.mpf(1)
            harm = mp.mpf(0)
            for j in range(1, n + 1):
                den *= (1 - q**j) ** 2
                harm += (1 + q**j) / (1 - q**j)
            t = (-1) ** n * q ** (n * (n + 1) // 2 + m * n) / den
            if jj == 1:
                t *= 2 * m + e1 + 2 * harm
            tot += t
        return tot


def test_g_u0_series_vs_direct():
    with working_prec(40):
        q = mp.mpf(1) / 7
        for jj in (0, 1):
            for m in (-2, 0, 1):
                s = g_u0_series(jj, m, 24)
                assert close(series_eval(s, q), g_direct(jj, m, q),
                             mp.mpf("1e-12"))


def test_g_u0_numeric_reflection():
    # |q| > 1 evaluation uses G^j_m(q^{-1}) = (-1)^j G^j_{-m}(q)
    with working_prec(40):
        q = mp.mpf(1) / 7
        for jj in (0, 1):
            for m in (-1, 0, 2):
                big = g_u0_numeric(jj, m, 1 / q, 40)
                assert close(big, (-1) ** jj * g_direct(jj, -m, q),
                             mp.mpf("1e-25"))


def test_g_u0_leading_coefficients():
    # G^0_0 = 1 - q - 2q^2 + ...: frozen from the defining sum
    s = g_u0_series(0, 0, 8)
    assert [s.coeff_q(n) for n in range(5)] == [1, -1, -2, -2, -2]
    # three-term contiguity G^j_{m+1} - G^j_m picks up the m-recursion;
    # spot check: G^0_1(q) + G^0_{-1}(q) = G^0_0(q) at q=1/9
    with working_prec(40):
        q = mp.mpf(1) / 9
        assert close(g_direct(0, 1, q) + g_direct(0, -1, q),
                     g_direct(0, 0, q), mp.mpf("1e-30"))


def test_h_u0_series_vs_numeric():
    with working_prec(40):
        q = mp.mpf("0.14")
        for k in (0, 1, 2):
            for m in (-1, 0, 1):
                for eps in (1, -1):
                    s = h_u0_series(k, m, 22, eps)
                    v = h_u0_numeric(k, m, q, 40, eps)
                    assert close(series_eval(s, q), v, mp.mpf("1e-12"))


def test_h_u0_numeric_reflection():
    with working_prec(40):
        q = mp.mpf("0.14")
        for k in (0, 1, 2):
            v_big = h_u0_numeric(k, 1, 1 / q, 40, 1)
            v_ref = (-1) ** k * h_u0_numeric(k, -1, q, 40, -1)
            assert close(v_big, v_ref, mp.mpf("1e-28"))


# ---------------------------------------------------------------------------
# BlockSpec wrappers and matrices


def test_block_spec_validation():
    with pytest.raises(UsageError):
        BlockSpec("granny")
    with pytest.raises(UsageError):
        BlockSpec("generic", A=2, r=2)
    spec = BlockSpec("generic", m=1, A=1, r=2, spec="41")
    assert spec.r > spec.A


def test_block_vector_series_and_numeric_agree():
    with working_prec(40):
        q = mp.mpf("0.13")
        qh = mp.sqrt(q)
        x = mp.mpc("0.8", "0.1")
        spec = BlockSpec("41", m=1)
        ser = block_vector(spec, 20)
        num = block_vector(spec, 20, x=x, q=q, qh=qh, digits=40)
        assert len(ser) == len(num) == 2
        for s, v in zip(ser, num):
            assert close(series_eval(s, q, x), v, mp.mpf("1e-12"))


def test_wronskian_shapes():
    w41 = wronskian(BlockSpec("41", m=0), 10)
    assert len(w41.rows) == 2 and len(w41.rows[0]) == 2
    w52 = wronskian(BlockSpec("52", m=-1), 8)
    assert len(w52.rows) == 3
    wg = wronskian(BlockSpec("generic", m=0, A=2, r=4, spec="24"), 8)
    assert len(wg.rows) == 4
    with pytest.raises(UsageError):
        wronskian(BlockSpec("generic", m=0, A=1, r=2), 8, xw=True)


def test_block_matrix_det():
    M = BlockMatrix([[1, 2], [3, 4]])
    assert M.det() == -2
    N = BlockMatrix([[2, 0, 0], [0, 3, 0], [0, 0, 5]])
    assert N.det() == 30


# ---------------------------------------------------------------------------
# identity driver


def test_identity_table_is_complete():
    assert len(IDENTITY_IDS) == 29
    for idname in ("det41", "WW52b", "rec52x", "annJ", "bkm", "eq:-xWm"):
        assert idname in IDENTITY_IDS


def test_verify_identity_unknown_id():
    with pytest.raises(UsageError):
        verify_identity("nonsense")


@pytest.mark.parametrize("idname", ["det41", "GGformula", "eq:E1n-id",
                                    "rec41m", "W41inv", "WWT52", "annJ",
                                    "eq:-xWm", "bkm"])
def test_verify_identity_smoke(idname):
    rep = verify_identity(idname, order=8, mrange=range(-1, 2))
    assert rep["pass"], rep
    assert rep["max_residual"] == 0.0
    assert rep["order"] >= 8


def test_verify_identity_report_shape():
    rep = verify_identity("det41", order=6, mrange=[0])
    assert set(rep) >= {"id", "params", "order", "max_residual", "pass"}
    assert rep["id"] == "det41"
