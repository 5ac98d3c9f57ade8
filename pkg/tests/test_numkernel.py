"""Scalar special functions: frozen oracles and functional equations."""

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from csres.errors import ConvergenceError, DomainError, PoleError
from csres.numkernel import (
    QPoint,
    eisenstein,
    eisenstein_e1,
    eisenstein_e2,
    eisenstein_tilde,
    faddeev,
    pochhammer,
    theta,
    working_prec,
)

D = 40
TOL = mp.mpf(10) ** (-30)


def close(a, b, tol=TOL):
    scale = max(abs(a), abs(b), 1)
    return abs(a - b) / scale < tol


# ---------------------------------------------------------------------------
# pochhammer


def test_poch_empty_product():
    with working_prec(D):
        assert pochhammer(mp.mpf("0.3"), mp.mpf("0.5"), n=0, digits=D) == 1


def test_poch_single_factor():
    with working_prec(D):
        q = mp.mpc("0.3", "0.1")
        assert close(pochhammer(q, q, n=1, digits=D), 1 - q)


def test_poch_half_tenth_frozen():
    # direct-product oracle computed at 200 bits
    with working_prec(D):
        v = pochhammer(mp.mpf(1) / 2, mp.mpf(1) / 10, digits=D)
        ref = mp.mpf("0.472362443816572236551413383332327353349664296")
        assert close(v, ref)


def test_poch_finite_frozen():
    with working_prec(D):
        v = pochhammer(mp.mpc("0.3", "0.2"), mp.mpc("0.1", "0.05"), n=7, digits=D)
        ref = mp.mpc("0.67789564087428514421529033868506",
                     "-0.22389521438059286147064823470441")
        assert close(v, ref, mp.mpf(10) ** -28)


def test_poch_big_q_continuation_frozen():
    # (3; 10)_inf via (x;q^{-1})_inf = (qx;q)_inf^{-1} with q -> 1/10
    with working_prec(D):
        v = pochhammer(mp.mpf(3), mp.mpf(10), digits=D)
        ref = mp.mpf("1.47767815135210759044638297929762873382182693")
        assert close(v, ref)
        direct = 1 / pochhammer(mp.mpf(3) / 10, mp.mpf(1) / 10, digits=D)
        assert close(v, direct)


def test_poch_q_on_unit_circle_rejected():
    with working_prec(D):
        q = mp.exp(2j * mp.pi * mp.mpf("0.3"))
    with pytest.raises(DomainError):
        pochhammer(mp.mpf("0.5"), q, digits=D)


def test_poch_big_q_pole():
    # continuation singular when qx = q^{-n}, i.e. x in q^{-1-N} for |q|>1
    with pytest.raises(PoleError):
        pochhammer(mp.mpf(100), mp.mpf(10), digits=D)


def test_poch_shift_relation_both_regimes():
    # (1-x)(qx;q)_inf = (x;q)_inf
    with working_prec(D):
        x = mp.mpc("0.7", "0.3")
        for q in (mp.mpc("0.4", "0.2"), 1 / mp.mpc("0.4", "0.2")):
            lhs = (1 - x) * pochhammer(q * x, q, digits=D)
            rhs = pochhammer(x, q, digits=D)
            assert close(lhs, rhs)


@settings(max_examples=25, deadline=None)
@given(
    st.complex_numbers(min_magnitude=0.3, max_magnitude=2.0,
                       allow_nan=False, allow_infinity=False),
    st.complex_numbers(min_magnitude=0.05, max_magnitude=0.45,
                       allow_nan=False, allow_infinity=False),
)
def test_poch_shift_property(xc, qc):
    with working_prec(D):
        x, q = mp.mpc(xc), mp.mpc(qc)
        lhs = (1 - x) * pochhammer(q * x, q, digits=D)
        rhs = pochhammer(x, q, digits=D)
        assert close(lhs, rhs, mp.mpf(10) ** -25)


# ---------------------------------------------------------------------------
# theta


def test_theta_frozen():
    with working_prec(60):
        v = theta(mp.mpc("1.3", "0.4"), mp.mpc("0.2", "0.1"), digits=60)
        ref = mp.mpc("2.33422729553436888161914108555175287965292797",
                     "0.948629882834242614654875968360018814713602409")
        assert close(v, ref)


def test_theta_recursion():
    with working_prec(D):
        q = mp.mpc("0.15", "0.2")
        x = mp.mpc("0.8", "-0.4")
        lhs = theta(q * x, q, digits=D) * mp.sqrt(q) * x
        rhs = theta(x, q, digits=D)
        assert close(lhs, rhs)


def test_theta_zero():
    with working_prec(D):
        q = mp.mpc("0.2", "0.05")
        v = theta(-mp.sqrt(q), q, digits=D)
        assert abs(v) < TOL
        v2 = theta(-mp.sqrt(q) * q**3, q, digits=D)
        assert abs(v2) < TOL


def test_theta_reciprocal():
    with working_prec(D):
        q = mp.mpc("0.3", "0.25")
        x = mp.mpc("1.4", "0.6")
        assert close(theta(x, 1 / q, digits=D) * theta(x, q, digits=D), 1)


def test_theta_pole_big_q():
    q = mp.mpf("0.25")
    with pytest.raises(PoleError):
        theta(-mp.sqrt(q) * q, 1 / q, digits=D)


@settings(max_examples=25, deadline=None)
@given(
    st.complex_numbers(min_magnitude=0.5, max_magnitude=1.8,
                       allow_nan=False, allow_infinity=False),
    st.complex_numbers(min_magnitude=0.05, max_magnitude=0.45,
                       allow_nan=False, allow_infinity=False),
)
def test_theta_recursion_property(xc, qc):
    with working_prec(D):
        x, q = mp.mpc(xc), mp.mpc(qc)
        lhs = theta(q * x, q, digits=D) * mp.sqrt(q) * x
        rhs = theta(x, q, digits=D)
        assert close(lhs, rhs, mp.mpf(10) ** -25)


# ---------------------------------------------------------------------------
# faddeev


def test_faddeev_frozen_upper():
    with working_prec(60):
        b = mp.sqrt(mp.mpc("0.25", "0.25"))
        v = faddeev(mp.mpc("0.2", "0.3"), b, digits=60)
        ref = mp.mpc("0.705516816348658050535745014657305136590816755",
                     "0.388570180614203378589796850897158461630194336")
        assert close(v, ref)


def test_faddeev_frozen_lower():
    with working_prec(60):
        b = mp.sqrt(mp.mpc("0.25", "-0.25"))
        v = faddeev(mp.mpc("0.2", "0.3"), b, digits=60)
        ref = mp.mpc("0.410196225438418347032888493586945260191339544",
                     "0.122232944767986066793147218737379522456069691")
        assert close(v, ref)


def test_faddeev_value_at_zero():
    with working_prec(D):
        for tau in (mp.mpc("0.3", "0.4"), mp.mpc("0.3", "-0.4")):
            b = mp.sqrt(tau)
            v0 = faddeev(mp.mpf(0), b, digits=D)
            ref = mp.exp(mp.pi * 1j / 12 * (tau + 1 / tau) / 2)
            assert close(v0**2, ref**2)


def test_faddeev_inversion():
    with working_prec(D):
        tau = mp.mpc("0.2", "0.6")
        b = mp.sqrt(tau)
        z = mp.mpc("0.35", "-0.1")
        lhs = faddeev(z, b, digits=D) * faddeev(-z, b, digits=D)
        rhs = mp.exp(mp.pi * 1j * z**2) * mp.exp(mp.pi * 1j / 12 * (tau + 1 / tau))
        assert close(lhs, rhs)


def test_faddeev_quasi_periodicity():
    # derived oracle: Phi_b(z - ib/2)/Phi_b(z + ib/2) = 1 + e^{2 pi b z}
    with working_prec(D):
        for tau in (mp.mpc("0.3", "0.5"), mp.mpc("0.4", "-0.3")):
            b = mp.sqrt(tau)
            z = mp.mpc("0.21", "0.13")
            lhs = faddeev(z - 1j * b / 2, b, digits=D) / faddeev(
                z + 1j * b / 2, b, digits=D)
            rhs = 1 + mp.exp(2 * mp.pi * b * z)
            assert close(lhs, rhs)


def test_faddeev_b_inverse_symmetry():
    with working_prec(D):
        b = mp.sqrt(mp.mpc("0.3", "0.4"))
        z = mp.mpc("0.1", "0.2")
        assert close(faddeev(z, b, digits=D), faddeev(z, 1 / b, digits=D))


def test_faddeev_real_tau_rejected():
    with pytest.raises(DomainError):
        faddeev(mp.mpf("0.1"), mp.sqrt(mp.mpf("0.5")), digits=D)


def test_faddeev_pole_detected():
    with working_prec(D):
        b = mp.sqrt(mp.mpc("0.4", "0.4"))
        cb = 1j * (b + 1 / b) / 2
        with pytest.raises(PoleError):
            faddeev(cb, b, digits=D)
        with pytest.raises(PoleError):
            faddeev(cb + 1j * b + 2j / b, b, digits=D)


@settings(max_examples=20, deadline=None)
@given(
    st.floats(min_value=-0.4, max_value=0.4),
    st.floats(min_value=-0.3, max_value=0.3),
    st.floats(min_value=0.15, max_value=0.9),
    st.floats(min_value=0.1, max_value=1.0),
)
def test_faddeev_inversion_property(zr, zi, tr, ti):
    with working_prec(D):
        tau = mp.mpc(tr, ti)
        b = mp.sqrt(tau)
        z = mp.mpc(zr, zi)
        try:
            lhs = faddeev(z, b, digits=D) * faddeev(-z, b, digits=D)
        except PoleError:
            return
        rhs = mp.exp(mp.pi * 1j * z**2) * mp.exp(
            mp.pi * 1j / 12 * (tau + 1 / tau))
        assert close(lhs, rhs, mp.mpf(10) ** -25)


# ---------------------------------------------------------------------------
# theta factorization of Gaussians (r, s in {-2..2})


def test_theta_factorizes_gaussian_quadratic():
    # With x = e^{2 pi b u}:  e^{pi i (u + r c_b)^2}
    #   = e^{-pi i (tau + 1/tau)/12} th((-q^{1/2})^r x; q) th((-qt^{-1/2})^r xt; qt^{-1})
    with working_prec(D):
        tau = mp.mpc("0.23", "0.41")
        p = QPoint(tau, mp.mpc("0.17", "0.05"), digits=D)
        b = p.b
        cb = p.cb
        u = p.u / (2 * mp.pi * b)
        for r in range(-2, 3):
            lhs = mp.exp(mp.pi * 1j * (u + r * cb) ** 2)
            rhs = (mp.exp(-mp.pi * 1j / 12 * (tau + 1 / tau))
                   * theta((-p.qh) ** r * p.x, p.q, digits=D, qhalf=p.qh)
                   * theta((-1 / p.qth) ** r * p.xt, 1 / p.qt, digits=D,
                           qhalf=1 / p.qth))
            assert close(lhs, rhs)


def test_theta_factorizes_gaussian_mixed():
    # With x = e^{2 pi b u}:  e^{pi i r u^2 + 2 pi i s c_b u}
    #   = i^s e^{pi i (3s - r)(tau+1/tau)/12}
    #     th(x;q)^{r-s} th(-q^{1/2}x;q)^s th(xt;qt^{-1})^{r-s} th(-qt^{-1/2}xt;qt^{-1})^s
    with working_prec(D):
        tau = mp.mpc("0.31", "0.27")
        p = QPoint(tau, mp.mpc("0.11", "0.07"), digits=D)
        cb = p.cb
        u = p.u / (2 * mp.pi * p.b)
        for r in range(-2, 3):
            for s in range(-2, 3):
                lhs = mp.exp(mp.pi * 1j * r * u**2 + 2 * mp.pi * 1j * s * cb * u)
                rhs = (1j**s
                       * mp.exp(mp.pi * 1j / 12 * (3 * s - r) * (tau + 1 / tau))
                       * theta(p.x, p.q, digits=D, qhalf=p.qh) ** (r - s)
                       * theta(-p.qh * p.x, p.q, digits=D, qhalf=p.qh) ** s
                       * theta(p.xt, 1 / p.qt, digits=D, qhalf=1 / p.qth) ** (r - s)
                       * theta(-p.xt / p.qth, 1 / p.qt, digits=D,
                               qhalf=1 / p.qth) ** s)
                assert close(lhs, rhs)


# ---------------------------------------------------------------------------
# eisenstein


def test_eisenstein_zero_q():
    with working_prec(D):
        assert eisenstein(1, 0, mp.mpf(0), digits=D) == 0
        assert eisenstein(2, 3, mp.mpf(0), digits=D) == 0


def test_eisenstein_recursion():
    with working_prec(D):
        q = mp.mpc("0.12", "0.07")
        for n in range(1, 5):
            lhs = eisenstein(1, n, q, digits=D) - eisenstein(1, n - 1, q, digits=D)
            rhs = -(q**n) / (1 - q**n)
            assert close(lhs, rhs)


def test_eisenstein_e1_frozen():
    with working_prec(D):
        v = eisenstein_e1(mp.mpf(1) / 7, digits=D)
        ref = mp.mpf("0.236359750358953687191201422329235324922872574")
        assert close(v, ref)


def test_eisenstein_e2_frozen():
    with working_prec(D):
        v = eisenstein_e2(mp.mpf(1) / 7, digits=D)
        ref = mp.mpf("-4.25913427593060698756009162749943350323332266")
        assert close(v, ref)


def test_eisenstein_e2_modular_anomaly():
    # 1/(2 pi i) = -(1/12)(tau E_2(q) - (1/tau) E_2(qt))
    with working_prec(D):
        tau = mp.mpc("0.1", "0.9")
        p = QPoint(tau, digits=D)
        lhs = 1 / (2 * mp.pi * 1j)
        rhs = -(tau * eisenstein_e2(p.q, digits=D)
                - eisenstein_e2(p.qt, digits=D) / tau) / 12
        assert close(lhs, rhs)


def test_eisenstein_tilde_cases():
    with working_prec(D):
        qt = mp.mpc("0.2", "0.1")
        n = 3
        assert close(eisenstein_tilde(1, n, qt, digits=D),
                     -n + eisenstein(1, n, qt, digits=D))
        assert close(eisenstein_tilde(3, n, qt, digits=D),
                     eisenstein(3, n, qt, digits=D))
        assert close(eisenstein_tilde(2, n, qt, digits=D),
                     2 * eisenstein(2, 0, qt, digits=D)
                     - eisenstein(2, n, qt, digits=D))


def test_eisenstein_domain():
    with pytest.raises(DomainError):
        eisenstein(1, 0, mp.mpf("1.2"), digits=D)


# ---------------------------------------------------------------------------
# QPoint


def test_qpoint_fields():
    with working_prec(D):
        tau = mp.mpc("0.25", "0.5")
        u = mp.mpc("0.1", "0.0")
        p = QPoint(tau, u, digits=D)
        assert close(p.q, mp.exp(2j * mp.pi * tau))
        assert close(p.qt, mp.exp(-2j * mp.pi / tau))
        assert close(p.qh**2, p.q)
        assert close(p.qth**2, p.qt)
        assert close(p.x, mp.exp(u))
        assert close(p.xt, mp.exp(u / tau))
        assert abs(p.q) < 1 and mp.im(tau) > 0
