"""Arbitrary-precision scalar kernel.

Precision policy: a caller asks for D decimal digits; internally we work at
ceil(3.5*D) bits plus a fixed guard.  Infinite sums and products stop once
the next term is below 10^(-D-10) in magnitude *and* terms are decreasing;
a hard cap of 10^6 terms raises ConvergenceError.  Points closer than
10^(-D/2) to a pole raise PoleError instead of returning a huge number.

All functions are pure; nothing here keeps mutable state between calls.
"""

import math
from dataclasses import dataclass, field

from mpmath import mp, mpc, mpf

from .errors import ConvergenceError, DomainError, PoleError

GUARD_BITS = 30
MAX_TERMS = 10**6


def bits_for(digits):
    """Working precision in bits for a target of `digits` decimal digits."""
    return int(math.ceil(3.5 * digits)) + GUARD_BITS


def working_prec(digits):
    """Context manager setting mpmath precision for a digit target."""
    return mp.workprec(bits_for(digits))


def term_tol(digits):
    return mpf(10) ** (-(digits + 10))


def pole_tol(digits):
    return mpf(10) ** (-mpf(digits) / 2)


@dataclass(frozen=True)
class QPoint:
    """The coupled exponentials of a modular parameter tau and log-variable u.

    q = e^{2 pi i tau},  qt = e^{-2 pi i / tau},  x = e^u,  xt = e^{u/tau},
    with coherent half-powers qh = e^{pi i tau}, qth = e^{-pi i / tau}
    (needed because sqrt(q) is otherwise only defined up to sign).
    """

    tau: mpc
    u: mpc = mpc(0)
    digits: int = 30
    q: mpc = field(init=False)
    qt: mpc = field(init=False)
    qh: mpc = field(init=False)
    qth: mpc = field(init=False)
    x: mpc = field(init=False)
    xt: mpc = field(init=False)

    def __post_init__(self):
        with working_prec(self.digits):
            tau = mpc(self.tau)
            u = mpc(self.u)
            object.__setattr__(self, "tau", tau)
            object.__setattr__(self, "u", u)
            qh = mp.exp(mp.pi * 1j * tau)
            qth = mp.exp(-mp.pi * 1j / tau)
            object.__setattr__(self, "qh", qh)
            object.__setattr__(self, "qth", qth)
            object.__setattr__(self, "q", qh * qh)
            object.__setattr__(self, "qt", qth * qth)
            object.__setattr__(self, "x", mp.exp(u))
            object.__setattr__(self, "xt", mp.exp(u / tau))

    @property
    def b(self):
        with working_prec(self.digits):
            return mp.sqrt(self.tau)

    @property
    def cb(self):
        b = self.b
        with working_prec(self.digits):
            return 1j * (b + 1 / b) / 2


def _qpoch_in(x, q, digits, watch_poles=False):
    """(x;q)_inf for |q|<1 by direct truncated product.

    With watch_poles, a factor within pole tolerance of zero raises
    PoleError (used when the caller is about to invert the product).
    """
    tol = term_tol(digits)
    ptol = pole_tol(digits)
    prod = mpc(1)
    term = mpc(x)
    prev = mp.inf
    for j in range(MAX_TERMS):
        fac = 1 - term
        if watch_poles and abs(fac) < ptol:
            raise PoleError(f"q-Pochhammer factor 1 - q^{j} x vanishes")
        prod *= fac
        mag = abs(term)
        if mag < tol and mag < prev:
            return prod
        prev = mag
        term *= q
    raise ConvergenceError("q-Pochhammer product did not converge")


def pochhammer(x, q, n=None, digits=30):
    """(x;q)_n.  n=None means the infinite product.

    For |q|>1 the infinite product is defined by the continuation
    (x;q)_inf := 1/(x/q; 1/q)_inf, which reproduces the q-difference
    equation (1-x)(qx;q)_inf = (x;q)_inf on both sides of |q|=1.
    """
    with working_prec(digits):
        x = mpc(x)
        q = mpc(q)
        if n is not None:
            if n < 0:
                raise DomainError("pochhammer: n must be a natural number")
            prod = mpc(1)
            term = x
            for _ in range(n):
                prod *= 1 - term
                term *= q
            return prod
        aq = abs(q)
        if abs(aq - 1) < pole_tol(digits):
            raise DomainError("pochhammer: |q| = 1 has no convergent product")
        if aq < 1:
            return _qpoch_in(x, q, digits)
        # |q| > 1: (x;q)_inf = 1/(q^{-1} x; q^{-1})_inf
        qi = 1 / q
        return 1 / _qpoch_in(qi * x, qi, digits, watch_poles=True)


def theta(x, q, digits=30, qhalf=None):
    """theta(x;q) = (-q^{1/2} x; q)_inf (-q^{1/2}/x; q)_inf for |q|<1,
    extended by theta(x;q^{-1}) = 1/theta(x;q) to |q|>1.

    `qhalf` fixes the square root of q; defaults to the principal one.
    Satisfies theta(qx;q) = q^{-1/2} x^{-1} theta(x;q) with the same root.
    """
    with working_prec(digits):
        x = mpc(x)
        q = mpc(q)
        if x == 0:
            raise DomainError("theta: x must be nonzero")
        aq = abs(q)
        if abs(aq - 1) < pole_tol(digits):
            raise DomainError("theta: |q| = 1 not supported")
        if aq < 1:
            qh = mp.sqrt(q) if qhalf is None else mpc(qhalf)
            a = _qpoch_in(-qh * x, q, digits)
            b = _qpoch_in(-qh / x, q, digits)
            return a * b
        qi = 1 / q
        qih = mp.sqrt(qi) if qhalf is None else 1 / mpc(qhalf)
        a = _qpoch_in(-qih * x, qi, digits, watch_poles=True)
        b = _qpoch_in(-qih / x, qi, digits, watch_poles=True)
        return 1 / (a * b)


def faddeev(z, b, digits=30):
    """Faddeev quantum dilogarithm Phi_b(z) by the product formula.

    Valid for tau = b^2 off the real axis.  Convention (pinned by the
    bilinear factorization of the u=0 state integral):

        Phi_b(z) = (-q^{1/2} e^{2 pi b z}; q)_inf
                 / (-qt^{1/2} e^{2 pi z / b}; qt)_inf,   Im tau > 0,

        with q^{1/2} = e^{pi i tau}, qt^{1/2} = e^{-pi i / tau};
        for Im tau < 0 both Pochhammers are continued across |q| = 1,
        which exchanges numerator and denominator with b -> 1/b.

    Poles lie on c_b + i b N + i b^{-1} N, zeros on the negated lattice.
    """
    with working_prec(digits):
        z = mpc(z)
        b = mpc(b)
        tau = b * b
        if abs(tau.imag) < pole_tol(digits):
            raise DomainError("faddeev: b^2 must have nonzero imaginary part")
        qh = mp.exp(mp.pi * 1j * tau)
        qth = mp.exp(-mp.pi * 1j / tau)
        q = qh * qh
        qt = qth * qth
        eb = mp.exp(2 * mp.pi * b * z)
        ebi = mp.exp(2 * mp.pi * z / b)
        if tau.imag > 0:
            num = _qpoch_in(-qh * eb, q, digits)
            den = _qpoch_in(-qth * ebi, qt, digits, watch_poles=True)
            return num / den
        # Im tau < 0: |q| > 1 and |qt| > 1; continue both products via
        # (x; Q)_inf = ((1/Q) x; 1/Q)_inf^{-1}, which swaps num and den.
        num = _qpoch_in(-qth * ebi / qt, 1 / qt, digits)
        den = _qpoch_in(-qh * eb / q, 1 / q, digits, watch_poles=True)
        return num / den


def eisenstein(l, n, q, digits=30):
    """E_l^{(n)}(q) = sum_{s>=1} s^{l-1} q^{s(n+1)} / (1 - q^s), |q|<1."""
    with working_prec(digits):
        q = mpc(q)
        if abs(q) >= 1:
            raise DomainError("eisenstein: requires |q| < 1")
        if q == 0:
            return mpc(0)
        tol = term_tol(digits)
        total = mpc(0)
        prev = mp.inf
        qn1 = q ** (n + 1)
        num = qn1  # q^{s(n+1)}
        qs = q     # q^s
        for s in range(1, MAX_TERMS):
            term = mpf(s) ** (l - 1) * num / (1 - qs)
            total += term
            mag = abs(term)
            if mag < tol and mag < prev:
                return total
            prev = mag
            num *= qn1
            qs *= q
        raise ConvergenceError("eisenstein sum did not converge")


def eisenstein_e1(q, digits=30):
    """E_1(q) = 1 - 4 sum_{n>=1} q^n/(1-q^n)."""
    return 1 - 4 * eisenstein(1, 0, q, digits=digits)


def eisenstein_e2(q, digits=30):
    """E_2(q) = 1 - 24 sum_{n>=1} n q^n/(1-q^n) (quasi-modular weight 2)."""
    return 1 - 24 * eisenstein(2, 0, q, digits=digits)


def eisenstein_tilde(l, n, qt, digits=30):
    """The companion weights appearing in expansions at the dual nome:
    l=1: -n + E_l^{(n)};  l>1 odd: E_l^{(n)};  l>1 even: 2E_l^{(0)} - E_l^{(n)}.
    """
    if l < 1:
        raise DomainError("eisenstein_tilde: l >= 1 required")
    base = eisenstein(l, n, qt, digits=digits)
    if l == 1:
        return -n + base
    if l % 2 == 1:
        return base
    return 2 * eisenstein(l, 0, qt, digits=digits) - base
