"""Descendant holomorphic blocks and their identity suite.

Two knot models (a 2-block and a 3-block one) plus a generic (A, r)
family of one-dimensional blocks.  Everything exists in two modes:

* series mode — exact elements of Q(x)[[q]] built from LaurentPoly /
  FracLaurent coefficients, used to verify determinant, orthogonality,
  recursion and annihilator identities *exactly* through a given order;
* numeric mode — mpmath evaluation at a concrete (x, q), used by the
  state-integral factorization checks.

The regime |q| > 1 is always realized by substitution rules (the eps=-1
branch), never by summing divergent series.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mp, mpc

from .errors import AlgebraError, ConvergenceError, PoleError, UsageError
from .numkernel import MAX_TERMS, pochhammer, term_tol, working_prec
from .qring import (
    FracLaurent,
    LaurentPoly,
    QSeries,
    qpoch_series,
    qseries_dot,
    qseries_sum,
    ring_zero_p,
)

X = LaurentPoly.x
ONE = LaurentPoly.const(1)


# ---------------------------------------------------------------------------
# exact Eisenstein-type q-series


@lru_cache(maxsize=None)
def e_series(l, n, order):
    """E_l^{(n)} = sum_{s>=1} s^{l-1} q^{s(n+1)} / (1-q^s) through q^order."""
    c = {}
    for s in range(1, order + 1):
        w = Fraction(s ** (l - 1))
        e = s * (n + 1)
        while e <= order:
            c[e] = c.get(e, Fraction(0)) + w
            e += s
    return QSeries(c, order)


@lru_cache(maxsize=None)
def e1_series(order):
    return QSeries.one(order) - 4 * e_series(1, 0, order)


@lru_cache(maxsize=None)
def e2_series(order):
    return QSeries.one(order) - 24 * e_series(2, 0, order)


def _sum_s_qsn(n, order):
    """sum_{s>=1} s q^{s n} through q^order (n >= 1)."""
    c = {}
    s = 1
    while s * n <= order:
        c[s * n] = Fraction(s)
        s += 1
    return QSeries(c, order)


# ---------------------------------------------------------------------------
# factored infinite products: (q^a x^e; q)_inf = pre * nonunit * unit


def poch_factored(e, a, order):
    """Split (q^a x^e; q)_inf into (pre, nonunit, unit).

    pre is an exact Laurent q-polynomial (factors with negative q-power),
    nonunit is the LaurentPoly factor 1 - x^e when a <= 0 (else 1),
    unit is a q-series with constant term 1.
    """
    if a >= 1:
        return QSeries.one(), ONE, qpoch_series(e, a, order)
    pre = QSeries.one()
    nonunit = ONE
    for j in range(0, -a + 1):
        aj = a + j
        if aj < 0:
            pre = pre * (QSeries.one() - QSeries.monomial(X(e), aj))
        else:  # aj == 0
            nonunit = ONE - X(e)
    return pre, nonunit, qpoch_series(e, 1, order)


def theta_factored(r, s, order):
    """theta(-q^{r/2} x^s; q) = front * q^qsh * nonunit * unit, r odd.

    front is a signed monomial in x, qsh an integer q-shift, nonunit the
    factor (1 -+ x^{+-s}), and unit a q-series with constant term 1.
    """
    if r % 2 == 0:
        raise AlgebraError("theta_factored: r must be odd")
    front = ONE
    qsh = Fraction(0)
    rr = r
    while rr > 1:
        front = front * X(-s, -1)
        qsh += Fraction(-(rr - 1), 2)
        rr -= 2
    while rr < -1:
        front = front * X(s, -1)
        qsh += Fraction(rr + 1, 2)
        rr += 2
    unit = qpoch_series(s, 1, order) * qpoch_series(-s, 1, order)
    if rr == 1:
        nonunit = ONE - X(-s)
    else:
        nonunit = ONE - X(s)
    assert qsh.denominator == 1
    return front, int(qsh), nonunit, unit


@lru_cache(maxsize=None)
def theta_pow(r, s, k, order):
    """theta(-q^{r/2} x^s; q)^k as a QSeries, any integer k, r odd."""
    front, qsh, nonunit, unit = theta_factored(r, s, order)
    if k >= 0:
        scal = front**k * nonunit**k
        ser = unit**k
    else:
        scal = FracLaurent(ONE, (front * nonunit) ** (-k))
        ser = unit.invert(order=order) ** (-k)
    res = (ser * scal).shift_q(qsh * k)
    return res


def theta_plus_series(a, e, order):
    """theta(q^a x^e; q) = (-q^{a+1/2} x^e; q)_inf (-q^{1/2-a} x^{-e}; q)_inf.

    Requires |a| <= 1/2 in integer terms, i.e. a in {0} for the half-power
    shifts to stay nonnegative; callers with other a should shift first.
    """
    if not (a + Fraction(1, 2) >= 0 and Fraction(1, 2) - a >= 0):
        raise AlgebraError("theta_plus_series: shift out of range")
    return (qpoch_series(e, a + Fraction(1, 2), order, sign=-1)
            * qpoch_series(-e, Fraction(1, 2) - a, order, sign=-1))


# ---------------------------------------------------------------------------
# q-Hahn Bessel J and the triple-product H (series mode)
#
# Monomial arguments are pairs (a, e) meaning q^a x^e.


def _inv_binomial(a, e, order):
    """(1 - q^a x^e)^{-1} through q^order (any integer a)."""
    s = QSeries.one() - QSeries.monomial(X(e), a)
    return s.invert(order=order)


# The summands of the basic hypergeometric sums factor as a z-independent
# running product of inverse binomials times a monomial carrying the whole
# z (and hence m) dependence.  Caching the running products lets all shift
# parameters m share one chain.  Chains are keyed by a small quantized
# lower bound cm <= min(0, c) on the monomial's linear q-exponent, and each
# entry is padded just enough that terms with q-valuation >= base(n) + n*cm
# stay certified through the requested order.


def _chain_slacks(kind, order, cm):
    """Per-index working-order padding for a term chain."""
    if kind == "half":
        val = lambda n: n * (n + 1) // 2 + n * cm
    else:
        val = lambda n: n * (n + 1) + n * cm
    nmax = 1
    while val(nmax) <= order or nmax <= -cm:
        nmax += 1
    s = [max(0, -val(n)) for n in range(nmax + 1)]
    # entry n must stay usable while later entries are built from it
    for n in range(nmax - 1, -1, -1):
        s[n] = max(s[n], s[n + 1])
    return s


@lru_cache(maxsize=None)
def _term_chain(bins, order, kind, cm):
    """Running products P_n = prod_{k<=n} prod_{(a,e)} (1-q^{a+k}x^e)^{-1}."""
    s = _chain_slacks(kind, order, cm)
    out = [QSeries.one(order + s[0])]
    term = out[0]
    for n in range(1, len(s)):
        for a, e in bins:
            term = term * _inv_binomial(a + n, e, order + s[n])
        out.append(term)
    return tuple(out)


def _chain_sum(bins, order, kind, c, xg, alternating):
    """Sum over n of P_n q^{v(n)+nc} (sgn x^{xg})^n with the cached chain.

    kind "half": v(n) = n(n+1)/2; kind "full": v(n) = n(n+1).
    """
    cm = -3 * ((-min(0, c) + 2) // 3)
    chain = _term_chain(bins, order, kind, cm)
    base = (lambda n: n * (n + 1) // 2) if kind == "half" \
        else (lambda n: n * (n + 1))
    terms = []
    n = 0
    while True:
        v = base(n) + n * c
        if v > order and n >= -c:
            break
        if n < len(chain):
            pn = chain[n]
        else:
            # c below the padding assumption; extend without caching
            pn = chain[-1]
            for k in range(len(chain), n + 1):
                for a, e in bins:
                    pn = pn * _inv_binomial(a + k, e, order)
        sgn = -1 if (alternating and n % 2) else 1
        terms.append(pn * QSeries.monomial(X(xg * n, sgn), v))
        n += 1
    return qseries_sum(terms)


def j_series(Xm, Ym, order, eps=1):
    """q-Hahn Bessel J(q^Xm[0] x^Xm[1], q^Ym[0] x^Ym[1]; q^eps) as a
    series in q through q^order (exact Laurent/fraction coefficients)."""
    a, e = Xm
    b, f = Ym
    if eps < 0:
        a, b = -a, -b
    if eps > 0:
        # (qy;q)_inf * sum (-1)^n q^{n(n+1)/2} X^n / ((q;q)_n (qy;q)_n)
        pre_p, pre_nu, pre_u = poch_factored(f, b + 1, order)
        pref = pre_p * pre_u * pre_nu
        body = _chain_sum(((0, 0), (b, f)), order, "half", a, e, True)
        return pref * body
    # eps = -1:
    # (y;q)_inf^{-1} sum (-1)^n q^{n(n+1)/2} X^n Y^{-n}/((q;q)_n (qY^{-1};q)_n)
    pre_p, pre_nu, pre_u = poch_factored(f, b, order)
    inv = pre_u.invert(order=order)
    if not pre_p == QSeries.one():
        inv = inv * pre_p.invert(order=order)
    nu_inv = FracLaurent(ONE, pre_nu) if not pre_nu == ONE else ONE
    body = _chain_sum(((0, 0), (-b, -f)), order, "half", a - b, e - f, True)
    return inv * body * nu_inv


def h_series(Xm, Ym, Zm, order, eps=1):
    """Triple H(q^a x^e, q^b x^f, q^c x^g; q^eps) as a series through
    q^order."""
    a, e = Xm
    b, f = Ym
    c, g = Zm
    if eps < 0:
        a, b, c = -a, -b, -c
    if eps > 0:
        pxp, pxn, pxu = poch_factored(e, a + 1, order)
        pyp, pyn, pyu = poch_factored(f, b + 1, order)
        pref = pxp * pxu * pyp * pyu * (pxn * pyn)
        body = _chain_sum(((0, 0), (a, e), (b, f)), order, "full", c, g,
                          False)
        return pref * body
    pxp, pxn, pxu = poch_factored(e, a, order)
    pyp, pyn, pyu = poch_factored(f, b, order)
    inv = pxu.invert(order=order) * pyu.invert(order=order)
    for p in (pxp, pyp):
        if not p == QSeries.one():
            inv = inv * p.invert(order=order)
    nu = pxn * pyn
    nu_inv = FracLaurent(ONE, nu) if not nu == ONE else ONE
    body = _chain_sum(((0, 0), (-a, -e), (-b, -f)), order, "half",
                      c - a - b, g - e - f, True)
    return inv * body * nu_inv


# ---------------------------------------------------------------------------
# block vectors in series mode


def _certified(raw):
    """Wrap a block-row builder so the rows are certified through the
    requested order: the internal products pick up negative q-valuations
    (growing roughly like m^2), so deepen until certification covers it."""
    def wrapped(m, order, eps=1, xshift=0):
        bump = 0
        while True:
            rows = raw(m, order + bump, eps, xshift)
            worst = min(r.order for r in rows)
            if worst >= order:
                return rows
            bump += (order - worst) + 2
    wrapped.__name__ = raw.__name__
    wrapped.__doc__ = raw.__doc__
    return wrapped


@_certified
@lru_cache(maxsize=None)
def blocks41_series(m, order, eps=1, xshift=0):
    """(A_m, B_m) for the 2-block model at argument q^{eps*xshift} x and
    base q^eps, as series in q (|q| < 1)."""
    j = xshift
    # A = theta(-q^{1/2} y; q)^{-2} y^{2m} J(q^m y^2, y; q), all at base q^eps
    A = theta_pow(eps * (2 * j + 1), 1, -2 * eps, order)
    A = A * QSeries.monomial(X(2 * m), 2 * eps * j * m)
    A = A * j_series((m + 2 * j, 2), (j, 1), order, eps)
    B = theta_pow(eps * (2 * j - 1), 1, eps, order)
    B = B * QSeries.monomial(X(m), eps * j * m)
    B = B * j_series((m + j, 1), (-j, -1), order, eps)
    return A, B


@_certified
@lru_cache(maxsize=None)
def blocks52_series(m, order, eps=1, xshift=0):
    """(A_m, B_m, C_m) for the 3-block model, conventions as above."""
    j = xshift
    A = h_series((j, 1), (-j, -1), (m, 0), order, eps)
    B = theta_pow(eps * (2 * j + 1), 1, -2 * eps, order)
    B = B * QSeries.monomial(X(m), eps * j * m)
    B = B * h_series((j, 1), (2 * j, 2), (m + 2 * j, 2), order, eps)
    C = theta_pow(eps * (2 * j - 1), 1, -2 * eps, order)
    C = C * QSeries.monomial(X(-m), -eps * j * m)
    C = C * h_series((-j, -1), (-2 * j, -2), (m - 2 * j, -2), order, eps)
    return A, B, C


def g_general_series(A, monos_y, Zm, order, eps=1):
    """G_{A,r}(y, z; q^eps) with monomial arguments.

    monos_y: tuple of (a, e) pairs; Zm: (c, g) for z = q^c x^g.
    """
    if eps < 0:
        raise UsageError("generic family series mode is |q| < 1 only")
    c, g = Zm
    # 1/(q;q)_inf prefactor
    pref = qpoch_series(0, 1, order).invert(order=order)
    terms = []
    sgn = 1 if A % 2 == 0 else -1
    cm = -3 * ((-min(0, c) + 2) // 3)
    n = 0
    while True:
        v = A * n * (n + 1) // 2 + n * c
        if v > order and n >= -c:
            break
        pad = max(0, -(A * n * (n + 1) // 2 + n * cm))
        term = _g_term_factor(monos_y, n, order + pad)
        terms.append(term * QSeries.monomial(X(g * n, sgn**n if n else 1),
                                             v))
        n += 1
    return pref * qseries_sum(terms)


@lru_cache(maxsize=None)
def _g_term_factor(monos_y, n, order):
    term = QSeries.one(order)
    for a, e in monos_y:
        pp, pn, pu = poch_factored(e, 1 + n + a, order)
        term = term * (pp * pu * pn)
    return term


@lru_cache(maxsize=None)
def blocks_generic_series(A, r, m, order, eps=1, spec="41"):
    """b^{(k)}_m for the generic family at the pinned specializations.

    spec="41": (A,r)=(1,2), x=(x,1), w=x^{-2};
    spec="52": (A,r)=(2,3), x=(1,x,x^{-1}), w=1;
    spec="24": synthetic (A,r)=(2,4), x=(x,1,x^{-1},x^2), w=1.
    Returns the tuple (b^{(1)}_m, ..., b^{(r)}_m).
    """
    xs = {"41": ((0, 1), (0, 0)),
          "52": ((0, 0), (0, 1), (0, -1)),
          "24": ((0, 1), (0, 0), (0, -1), (0, 2))}[spec]
    ws = {"41": (0, -2), "52": (0, 0), "24": (0, 0)}[spec]
    assert len(xs) == r
    out = []
    for k in range(r):
        ak, ek = xs[k]
        ys = tuple((a - ak, e - ek) for a, e in xs)
        # z = x_k^{-A} w^{-1} q^m
        zm = (m - A * ak - ws[0], -A * ek - ws[1])
        g = g_general_series(A, ys, zm, order, eps)
        # x_k^{-m} prefactor
        b = g * QSeries.monomial(X(-m * ek), -m * ak if ak else 0)
        out.append(b)
    return tuple(out)


# ---------------------------------------------------------------------------
# u = 0 q-series families (2-block model: G^0_m, G^1_m; 3-block: H^{+-}_{k,m})


@lru_cache(maxsize=None)
def g_u0_series(jj, m, order):
    """G^jj_m(q) for jj in {0,1} through q^order (|q| < 1 regime)."""
    terms = []
    poch = QSeries.one(order)       # (q;q)_n
    harm = QSeries.zero(order)      # sum_{j<=n} (1+q^j)/(1-q^j)
    n = 0
    while n * (n + 1) // 2 + m * n <= order:
        if n > 0:
            poch = poch * (QSeries.one(order) - QSeries.monomial(1, n))
            harm = harm + (QSeries.one(order) + QSeries.monomial(1, n)) \
                * _inv_binomial(n, 0, order)
        val = n * (n + 1) // 2 + m * n
        term = QSeries.monomial(Fraction((-1) ** n), val) \
            * (poch * poch).invert(order=order)
        if jj == 1:
            term = term * (2 * m + e1_series(order) + 2 * harm)
        terms.append(term)
        n += 1
    return qseries_sum(terms)


@lru_cache(maxsize=None)
def h_u0_series(k, m, order, eps=1):
    """H^{eps}_{k,m}(q) for k in {0,1,2} through q^order."""
    terms = []
    poch = QSeries.one(order)
    e1n = e_series(1, 0, order)
    e2n = e_series(2, 0, order)
    n = 0
    while (n * (n + 1) + m * n if eps > 0
           else n * (n + 1) // 2 + m * n) <= order:
        if n > 0:
            poch = poch * (QSeries.one(order) - QSeries.monomial(1, n))
            e1n = e1n - QSeries.monomial(1, n) * _inv_binomial(n, 0, order)
            e2n = e2n - _sum_s_qsn(n, order)
        if eps > 0:
            val = n * (n + 1) + m * n
            sgn = 1
            lin = (1 + 2 * n + m) - 3 * e1n
            e2c = Fraction(1, 6)
        else:
            val = n * (n + 1) // 2 + m * n
            sgn = (-1) ** n
            lin = (Fraction(1, 2) + n + m) - 3 * e1n
            e2c = Fraction(1, 12)
        term = QSeries.monomial(Fraction(sgn), val) \
            * (poch**3).invert(order=order)
        if k == 1:
            term = term * lin
        elif k == 2:
            term = term * (lin * lin - 3 * e2n - e2c * e2_series(order))
        terms.append(term)
        n += 1
    return qseries_sum(terms)


# ---------------------------------------------------------------------------
# matrices


class BlockMatrix:
    """Small dense matrix over the QSeries ring (or plain coefficients)."""

    def __init__(self, rows, meta=None):
        self.rows = [list(r) for r in rows]
        self.meta = meta

    @property
    def shape(self):
        return len(self.rows), len(self.rows[0])

    def __getitem__(self, ij):
        return self.rows[ij[0]][ij[1]]

    def transpose(self):
        n, m = self.shape
        return BlockMatrix([[self.rows[i][j] for i in range(n)]
                            for j in range(m)], self.meta)

    def __mul__(self, other):
        if isinstance(other, BlockMatrix):
            n, k = self.shape
            k2, m = other.shape
            assert k == k2
            return BlockMatrix(
                [[_dot(self.rows[i], [other.rows[t][j] for t in range(k)])
                  for j in range(m)] for i in range(n)])
        return BlockMatrix([[e * other for e in r] for r in self.rows],
                           self.meta)

    def __rmul__(self, other):
        return BlockMatrix([[other * e for e in r] for r in self.rows],
                           self.meta)

    def __sub__(self, other):
        return BlockMatrix(
            [[a - b for a, b in zip(r1, r2)]
             for r1, r2 in zip(self.rows, other.rows)])

    def det(self):
        n, m = self.shape
        assert n == m
        if n == 1:
            return self.rows[0][0]
        if not any(isinstance(e, QSeries) for r in self.rows for e in r):
            if n == 2:
                (a, b), (c, d) = self.rows
                return a * d - b * c
            (a, b, c), (d, e, f), (g, h, i) = self.rows
            return (a * (e * i - f * h) - b * (d * i - f * g)
                    + c * (d * h - e * g))
        if n == 2:
            (a, b), (c, d) = self.rows
            return qseries_dot([(a, d), (-1 * b, c)])
        if n == 3:
            (a, b, c), (d, e, f), (g, h, i) = self.rows
            m1 = qseries_dot([(e, i), (-1 * f, h)])
            m2 = qseries_dot([(d, i), (-1 * f, g)])
            m3 = qseries_dot([(d, h), (-1 * e, g)])
            return qseries_dot([(a, m1), (-1 * b, m2), (c, m3)])
        raise AlgebraError("det: only sizes 1..3 supported")

    def map(self, fn):
        return BlockMatrix([[fn(e) for e in r] for r in self.rows], self.meta)

    def is_zero(self):
        return all(_entry_zero(e) for r in self.rows for e in r)


def _dot(row, col):
    if any(isinstance(v, QSeries) for v in row) or \
            any(isinstance(v, QSeries) for v in col):
        return qseries_dot(list(zip(row, col)))
    acc = None
    for a, b in zip(row, col):
        t = a * b
        acc = t if acc is None else acc + t
    return acc


def _entry_zero(e):
    if isinstance(e, QSeries):
        return e.is_zero()
    return ring_zero_p(e)


def const_matrix(entries):
    """Matrix with scalar (int/Fraction/LaurentPoly/FracLaurent) entries."""
    return BlockMatrix(entries)


# -- u = 0 Wronskians


def wronskian41_u0(m, order, inverse_q=False):
    """W_m(q) (or W_m(q^{-1}) via the substitution rule) at u = 0.

    The |q|>1 continuation follows the same pattern as the 3-block
    family: rows are reversed, the index reflects to -m-1, and the
    second column flips sign (scalar rule G^j_k(1/q) = (-1)^j G^j_{-k}).
    """
    if inverse_q:
        inner = wronskian41_u0(-m - 1, order)
        rows = [inner.rows[1 - i] for i in range(2)]
        return BlockMatrix([[r[0], -r[1]] for r in rows],
                           ("41u0", m, "out"))
    return BlockMatrix(
        [[g_u0_series(0, m, order), g_u0_series(1, m, order)],
         [g_u0_series(0, m + 1, order), g_u0_series(1, m + 1, order)]],
        ("41u0", m, "in"))


def wronskian52_u0(m, order, inverse_q=False, eps=1):
    """W_m(q) at u = 0 for the 3-block model.

    inverse_q applies the rule W_m(q^{-1}) = P W^-_{-m-2}(q) diag(1,-1,1)
    with P the antidiagonal permutation.
    """
    if inverse_q:
        inner = wronskian52_u0(-m - 2, order, eps=-1)
        rows = [inner.rows[2 - i] for i in range(3)]
        return BlockMatrix([[r[0], -r[1], r[2]] for r in rows],
                           ("52u0", m, "out"))
    return BlockMatrix(
        [[h_u0_series(k, m + i, order, eps) for k in range(3)]
         for i in range(3)], ("52u0", m, "in" if eps > 0 else "minus"))


# -- x-Wronskians


def wronskian41_x(m, order, eps=1, xw=False):
    """W_m(x;q^eps) (rows m, m+1) or the x-Wronskian (rows x, qx)."""
    if xw:
        r0 = blocks41_series(m, order, eps, 0)
        r1 = blocks41_series(m, order, eps, 1)
        return BlockMatrix([list(r0), list(r1)], ("41x", m, eps, "xw"))
    return BlockMatrix([list(blocks41_series(m, order, eps, 0)),
                        list(blocks41_series(m + 1, order, eps, 0))],
                       ("41x", m, eps, "m"))


def wronskian52_x(m, order, eps=1, xw=False):
    if xw:
        return BlockMatrix(
            [list(blocks52_series(m, order, eps, j)) for j in range(3)],
            ("52x", m, eps, "xw"))
    return BlockMatrix(
        [list(blocks52_series(m + i, order, eps, 0)) for i in range(3)],
        ("52x", m, eps, "m"))


def wronskian_generic(A, r, m, order, eps=1, spec="41"):
    return BlockMatrix(
        [list(blocks_generic_series(A, r, m + i, order, eps, spec))
         for i in range(r)], ("gen", A, r, m, eps))


# ---------------------------------------------------------------------------
# numeric mode


def j_bessel(x, y, q, eps=1, digits=30):
    """Numeric q-Hahn Bessel J^eps(x, y; q), |q| < 1."""
    with working_prec(digits):
        x, y, q = mpc(x), mpc(y), mpc(q)
        if abs(q) >= 1:
            raise UsageError("j_bessel: numeric mode needs |q| < 1")
        tol = term_tol(digits)
        if eps > 0:
            pref = pochhammer(q * y, q, digits=digits)
            acc = mpc(1)
            term = mpc(1)
            n = 1
            while n < MAX_TERMS:
                term *= -q**n * x / ((1 - q**n) * (1 - q**n * y))
                acc += term
                if abs(term) < tol and abs(term) < abs(acc) + 1:
                    break
                n += 1
            else:
                raise ConvergenceError("j_bessel(+) did not converge")
            return pref * acc
        den = pochhammer(y, q, digits=digits)
        if abs(den) < term_tol(digits):
            raise PoleError("j_bessel(-): pole at y in q^Z")
        acc = mpc(1)
        term = mpc(1)
        n = 1
        while n < MAX_TERMS:
            term *= -q**n * x / (y * (1 - q**n) * (1 - q**n / y))
            acc += term
            if abs(term) < tol:
                break
            n += 1
        else:
            raise ConvergenceError("j_bessel(-) did not converge")
        return acc / den


def h_triple(x, y, z, q, eps=1, digits=30):
    """Numeric H^eps(x, y, z; q), |q| < 1."""
    with working_prec(digits):
        x, y, z, q = mpc(x), mpc(y), mpc(z), mpc(q)
        if abs(q) >= 1:
            raise UsageError("h_triple: numeric mode needs |q| < 1")
        tol = term_tol(digits)
        if eps > 0:
            pref = pochhammer(q * x, q, digits=digits) * \
                pochhammer(q * y, q, digits=digits)
            acc = mpc(1)
            term = mpc(1)
            n = 1
            while n < MAX_TERMS:
                term *= q ** (2 * n) * z / (
                    (1 - q**n) * (1 - q**n * x) * (1 - q**n * y))
                acc += term
                if abs(term) < tol:
                    break
                n += 1
            else:
                raise ConvergenceError("h_triple(+) did not converge")
            return pref * acc
        den = pochhammer(x, q, digits=digits) * pochhammer(y, q, digits=digits)
        if abs(den) < term_tol(digits):
            raise PoleError("h_triple(-): pole at x or y in q^Z")
        acc = mpc(1)
        term = mpc(1)
        n = 1
        while n < MAX_TERMS:
            term *= -q**n * z / (
                x * y * (1 - q**n) * (1 - q**n / x) * (1 - q**n / y))
            acc += term
            if abs(term) < tol:
                break
            n += 1
        else:
            raise ConvergenceError("h_triple(-) did not converge")
        return acc / den


def theta_num(x, q, qh, digits):
    """theta with an explicitly chosen q^{1/2}; |q| < 1 required here."""
    from .numkernel import theta
    return theta(x, q, digits=digits, qhalf=qh)


def blocks41_numeric(m, x, q, qh, digits=30):
    """(A_m, B_m)(x; q) numerically.  For |q| > 1 pass q with |q| > 1 and
    qh a coherent square root; the substitution rules are applied."""
    with working_prec(digits):
        x, q, qh = mpc(x), mpc(q), mpc(qh)
        if abs(q) < 1:
            th = theta_num(-qh * x, q, qh, digits)
            A = th ** (-2) * x ** (2 * m) * j_bessel(q**m * x**2, x, q, 1,
                                                     digits)
            th2 = theta_num(-x / qh, q, qh, digits)
            B = th2 * x**m * j_bessel(q**m * x, 1 / x, q, 1, digits)
            return A, B
        qi, qih = 1 / q, 1 / qh
        # theta(-q^{1/2}x; q) = 1/theta(-qi^{-1/2}x; qi) ... realized via
        # the reciprocal rule with base qi and half power qih.
        th = theta_num(-x / qih, qi, qih, digits)     # theta(-qi^{-1/2}x;qi)
        A = th**2 * x ** (2 * m) * j_bessel(qi ** (-m) * x**2, x, qi, -1,
                                            digits)
        th2 = theta_num(-qih * x, qi, qih, digits)
        B = (1 / th2) * x**m * j_bessel(qi ** (-m) * x, 1 / x, qi, -1, digits)
        return A, B


def blocks52_numeric(m, x, q, qh, digits=30):
    """(A_m, B_m, C_m)(x; q) numerically, both regimes."""
    with working_prec(digits):
        x, q, qh = mpc(x), mpc(q), mpc(qh)
        if abs(q) < 1:
            A = h_triple(x, 1 / x, q**m, q, 1, digits)
            B = theta_num(-qh * x, q, qh, digits) ** (-2) * x**m * \
                h_triple(x, x**2, q**m * x**2, q, 1, digits)
            C = theta_num(-x / qh, q, qh, digits) ** (-2) * x ** (-m) * \
                h_triple(1 / x, x ** (-2), q**m * x ** (-2), q, 1, digits)
            return A, B, C
        qi, qih = 1 / q, 1 / qh
        A = h_triple(x, 1 / x, qi ** (-m), qi, -1, digits)
        B = theta_num(-x / qih, qi, qih, digits) ** 2 * x**m * \
            h_triple(x, x**2, qi ** (-m) * x**2, qi, -1, digits)
        C = theta_num(-qih * x, qi, qih, digits) ** 2 * x ** (-m) * \
            h_triple(1 / x, x ** (-2), qi ** (-m) * x ** (-2), qi, -1, digits)
        return A, B, C


def g_general_numeric(A, ys, z, q, digits=30):
    """Numeric G_{A,r}(y, z; q); works in both |q| regimes (r > A makes
    the terms decay even for |q| > 1 through the product continuation)."""
    with working_prec(digits):
        q = mpc(q)
        ys = [mpc(y) for y in ys]
        z = mpc(z)
        tol = term_tol(digits)
        pref = 1 / pochhammer(q, q, digits=digits)
        acc = mpc(0)
        small = 0
        n = 0
        while n < MAX_TERMS:
            term = (-1) ** (A * n) * q ** (A * n * (n + 1) // 2) * z**n
            for y in ys:
                term *= pochhammer(q ** (1 + n) * y, q, digits=digits)
            acc += term
            small = small + 1 if abs(term) < tol else 0
            if small >= 3:
                return pref * acc
            n += 1
        raise ConvergenceError("g_general_numeric did not converge")


def blocks_generic_numeric(A, r, m, xs, w, q, digits=30):
    """Numeric b^{(k)}_m(x, w; q) tuple, both |q| regimes."""
    with working_prec(digits):
        xs = [mpc(v) for v in xs]
        w, q = mpc(w), mpc(q)
        out = []
        for k in range(r):
            ys = [xj / xs[k] for xj in xs]
            z = xs[k] ** (-A) / w * q**m
            out.append(xs[k] ** (-m)
                       * g_general_numeric(A, ys, z, q, digits))
        return tuple(out)


def g_u0_numeric(jj, m, q, digits=30):
    """G^jj_m(q) numerically, both regimes (|q| != 1)."""
    with working_prec(digits):
        q = mpc(q)
        if abs(q) > 1:
            return (-1) ** jj * g_u0_numeric(jj, -m, 1 / q, digits)
        from .numkernel import eisenstein_e1
        tol = term_tol(digits)
        acc = mpc(0)
        poch = mpc(1)
        harm = mpc(0)
        e1 = eisenstein_e1(q, digits=digits) if jj == 1 else 0
        n = 0
        while n < MAX_TERMS:
            if n > 0:
                poch *= 1 - q**n
                harm += (1 + q**n) / (1 - q**n)
            term = (-1) ** n * q ** (n * (n + 1) // 2 + m * n) / poch**2
            if jj == 1:
                term *= 2 * m + e1 + 2 * harm
            acc += term
            if abs(term) < tol and n > abs(m) + 2:
                return acc
            n += 1
        raise ConvergenceError("g_u0_numeric did not converge")


def h_u0_numeric(k, m, q, digits=30, eps=1):
    """H^{eps}_{k,m}(q) numerically (|q| < 1); |q| > 1 via the relation
    H^+_{k,m}(q^{-1}) = (-1)^k H^-_{k,-m}(q)."""
    with working_prec(digits):
        q = mpc(q)
        if abs(q) > 1:
            if eps < 0:
                return (-1) ** k * h_u0_numeric(k, -m, 1 / q, digits, 1)
            return (-1) ** k * h_u0_numeric(k, -m, 1 / q, digits, -1)
        from .numkernel import eisenstein, eisenstein_e2
        tol = term_tol(digits)
        acc = mpc(0)
        poch = mpc(1)
        e1n = eisenstein(1, 0, q, digits=digits)
        e2n = eisenstein(2, 0, q, digits=digits)
        e2 = eisenstein_e2(q, digits=digits)
        n = 0
        while n < MAX_TERMS:
            if n > 0:
                poch *= 1 - q**n
                e1n -= q**n / (1 - q**n)
                e2n -= q**n / (1 - q**n) ** 2
            if eps > 0:
                w = q ** (n * (n + 1) + m * n)
                lin = 1 + 2 * n + m - 3 * e1n
                e2c = mp.mpf(1) / 6
            else:
                w = (-1) ** n * q ** (n * (n + 1) // 2 + m * n)
                lin = mp.mpf(1) / 2 + n + m - 3 * e1n
                e2c = mp.mpf(1) / 12
            term = w / poch**3
            if k == 1:
                term *= lin
            elif k == 2:
                term *= lin**2 - 3 * e2n - e2c * e2
            acc += term
            if abs(term) < tol and n > abs(m) + 2:
                return acc
            n += 1
        raise ConvergenceError("h_u0_numeric did not converge")


# ---------------------------------------------------------------------------
# spec-facing wrappers


@dataclass(frozen=True)
class BlockSpec:
    """Which block family, descendant index and |q| regime."""
    model: str              # "41", "52", or "generic"
    m: int = 0
    regime: str = "in"      # "in" -> |q|<1, "out" -> |q|>1
    A: int = 0              # Generic only
    r: int = 0
    spec: str = "41"        # Generic specialization tag

    def __post_init__(self):
        if self.model not in ("41", "52", "generic"):
            raise UsageError(f"unknown model {self.model!r}")
        if self.model == "generic" and not (self.r > self.A > 0):
            raise UsageError("generic family needs r > A > 0")


def block_vector(spec, order, x=None, w=None, q=None, qh=None, digits=30):
    """Block vector in series mode (x/q omitted) or numeric mode."""
    eps = 1 if spec.regime == "in" else -1
    if q is None:
        if spec.model == "41":
            return blocks41_series(spec.m, order, eps)
        if spec.model == "52":
            return blocks52_series(spec.m, order, eps)
        return blocks_generic_series(spec.A, spec.r, spec.m, order, eps,
                                     spec.spec)
    if spec.model == "41":
        return blocks41_numeric(spec.m, x, q, qh, digits)
    if spec.model == "52":
        return blocks52_numeric(spec.m, x, q, qh, digits)
    xs = {"41": [x, 1], "52": [1, x, 1 / x],
          "24": [x, 1, 1 / x, x**2]}[spec.spec]
    if w is None:
        w = x ** (-2) if spec.spec == "41" else 1
    return blocks_generic_numeric(spec.A, spec.r, spec.m, xs, w, q, digits)


def wronskian(spec, order, xw=False):
    """m-Wronskian (rows m..m+r-1) or x-Wronskian (rows x, qx, ...)."""
    eps = 1 if spec.regime == "in" else -1
    if spec.model == "41":
        return wronskian41_x(spec.m, order, eps, xw)
    if spec.model == "52":
        return wronskian52_x(spec.m, order, eps, xw)
    if xw:
        raise UsageError("x-Wronskian not defined for the generic family")
    return wronskian_generic(spec.A, spec.r, spec.m, order, eps, spec.spec)


# ---------------------------------------------------------------------------
# identity verification


def _coeff_mag(v):
    if isinstance(v, Fraction):
        return abs(float(v))
    if isinstance(v, LaurentPoly):
        return max((abs(float(c)) for c in v.c.values()), default=0.0)
    if isinstance(v, FracLaurent):
        v2 = v.maybe_laurent()
        if isinstance(v2, LaurentPoly):
            return _coeff_mag(v2)
        dn = _coeff_mag(v.den)
        return _coeff_mag(v.num) / dn if dn else float("inf")
    return abs(v)


def _series_mag(s):
    if isinstance(s, QSeries):
        return max((_coeff_mag(v) for v in s.c.values()), default=0.0)
    return _coeff_mag(s)


def _series_zero(s):
    if isinstance(s, QSeries):
        if s.is_zero():
            return True
        return all(ring_zero_p(v) for v in s.c.values())
    return ring_zero_p(s)


def _is_integral(s):
    """All coefficients reduce to Laurent polynomials with integer entries."""
    for v in s.c.values():
        if isinstance(v, FracLaurent):
            v = v.maybe_laurent()
            if isinstance(v, FracLaurent):
                return False
        if isinstance(v, LaurentPoly):
            if any(c.denominator != 1 for c in v.c.values()):
                return False
        elif isinstance(v, Fraction):
            if v.denominator != 1:
                return False
        else:
            return False
    return True


def _effective_order(*objs):
    orders = []
    for o in objs:
        if isinstance(o, BlockMatrix):
            orders.extend(e.order for r in o.rows for e in r
                          if isinstance(e, QSeries) and e.order is not None)
        elif isinstance(o, QSeries) and o.order is not None:
            orders.append(o.order)
    return min(orders) if orders else None


def _mono(coeff_x_exp, qa, coeff=1, eps=1):
    """coeff * q^(eps*qa) x^coeff_x_exp as a QSeries scalar."""
    return QSeries.monomial(X(coeff_x_exp, coeff), eps * qa)


def _poly(eps, terms):
    """sum of (coeff, qa, xe) monomials with q-exponents scaled by eps."""
    acc = QSeries.zero()
    for coeff, qa, xe in terms:
        acc = acc + QSeries.monomial(X(xe, coeff), eps * qa)
    return acc


def _poly_prod(eps, *factor_terms):
    acc = QSeries.one()
    for terms in factor_terms:
        acc = acc * _poly(eps, terms)
    return acc


def _apply_op(terms, get):
    """Apply sum of coef * S_m^dm S_x^dx to each block component.

    terms: list of (coef, dm, dx); get(dm, dx) -> tuple of QSeries.
    Returns list of residual QSeries, one per component.
    """
    cols = None
    for coef, dm, dx in terms:
        blocks = get(dm, dx)
        if cols is None:
            cols = [[] for _ in blocks]
        for col, b in zip(cols, blocks):
            col.append((coef, b))
    return [qseries_dot(col) for col in cols]


def _report(idname, params, residuals, extra_ok=True):
    mag = max((_series_mag(r) for r in residuals), default=0.0)
    ok = extra_ok and all(_series_zero(r) for r in residuals)
    order = _effective_order(*residuals)
    return {"id": idname, "params": params, "order": order,
            "max_residual": mag if not ok else 0.0, "pass": bool(ok)}


_P23 = [[1, 0, 0], [0, 0, 1], [0, 1, 0]]        # swap last two
_J2 = [[0, 1], [-1, 0]]
_S52 = [[0, 0, 2], [0, 4, 0], [2, 0, 0]]        # 2 * antidiag(1,2,1)


def _half(s):
    return s * Fraction(1, 2)


def _matconst(entries):
    return BlockMatrix([[QSeries({0: LaurentPoly._coerce(e)}
                                 if e else {}, None)
                         for e in row] for row in entries])


# -- individual identity checks (each returns a report dict) ---------------


def _id_det41(order, mrange):
    res = []
    for m in mrange:
        res.append(wronskian41_u0(m, order).det() - 2)
    return _report("det41", {"m": list(mrange)}, res)


def _id_W41inv(order, mrange):
    """Consistency of the |q|>1 continuation of the 2-block u=0 matrix.

    The continued matrix Whe_m = W_m(q^{-1}) must (i) agree with
    W_{-m}(q) diag(1,-1) in its first row, (ii) solve the reflected
    linear q-difference equation row-wise, (iii) keep determinant 2.
    """
    res = []
    for m in mrange:
        Wh = wronskian41_u0(m, order, inverse_q=True)
        ref = wronskian41_u0(-m, order)
        # (i) first-row agreement with the reflected-index matrix
        res.append(Wh.rows[0][0] - ref.rows[0][0])
        res.append(Wh.rows[0][1] + ref.rows[0][1])
        # (iii) determinant preserved
        res.append(Wh.det() - 2)
        # (ii) rows of the continued family solve the base-q^{-1}
        # recursion  y_{m+1} - (2 - q^{-m}) y_m + y_{m-1} = 0
        rows = {dm: wronskian41_u0(m + dm, order, inverse_q=True).rows[0]
                for dm in (-1, 0, 1)}
        coef = 2 - QSeries.monomial(1, -m)
        for k in range(2):
            res.append(rows[1][k] - coef * rows[0][k] + rows[-1][k])
    return _report("W41inv", {"m": list(mrange)}, res)


def _id_WWT41b(order, mrange):
    res = []
    for m in mrange:
        W = wronskian41_u0(m, order)
        M = W * BlockMatrix(_J2) * W.transpose()
        D = M.map(_half) - BlockMatrix(
            [[QSeries.zero(), QSeries.one()],
             [-QSeries.one(), QSeries.zero()]])
        res.extend(e for r in D.rows for e in r)
    return _report("WWT41b", {"m": list(mrange)}, res)


def _id_WWT41(order, mrange):
    res = []
    ok = True
    for m in mrange:
        for ell in mrange:
            M = (wronskian41_u0(m, order) * BlockMatrix(_J2)
                 * wronskian41_u0(ell, order).transpose()).map(_half)
            ok = ok and all(_is_integral(e) for r in M.rows for e in r)
            res.append(M.det() - 1)
    return _report("WWT41", {"m": list(mrange)}, res, ok)


def _id_41qdiff(order, mrange):
    res = []
    for m in mrange:
        for jj in (0, 1):
            y = lambda k: g_u0_series(jj, k, order)
            res.append(y(m + 1) - (2 - QSeries.monomial(1, m)) * y(m)
                       + y(m - 1))
    return _report("41qdiff", {"m": list(mrange)}, res)


def _id_GGformula(order, mrange):
    rhs = QSeries.zero(order)
    poch = QSeries.one(order)
    n = 0
    while n * (n + 1) // 2 <= order:
        if n > 0:
            poch = poch * (QSeries.one(order) - QSeries.monomial(1, n))
        rhs = rhs + QSeries.monomial(Fraction((-1) ** n * (6 * n + 1)),
                                     n * (n + 1) // 2) \
            * (poch * poch).invert(order=order)
        n += 1
    return _report("GGformula", {}, [g_u0_series(1, 0, order) - rhs])


def _id_E1n_id(order, mrange):
    acc = QSeries.zero(order)
    poch = QSeries.one(order)
    e1n = e_series(1, 0, order)
    n = 0
    while n * (n + 1) // 2 <= order:
        if n > 0:
            poch = poch * (QSeries.one(order) - QSeries.monomial(1, n))
            e1n = e1n - QSeries.monomial(1, n) * _inv_binomial(n, 0, order)
        acc = acc + (n + e1n) * QSeries.monomial(Fraction((-1) ** n),
                                                 n * (n + 1) // 2) \
            * (poch * poch).invert(order=order)
        n += 1
    return _report("eq:E1n-id", {}, [acc])


def _id_det52(order, mrange):
    res = []
    for m in mrange:
        res.append(wronskian52_u0(m, order).det() - 2)
    return _report("det52", {"m": list(mrange)}, res)


def _id_52qdiffp(order, mrange):
    res = []
    for m in mrange:
        for k in range(3):
            y = lambda t: h_u0_series(k, t, order)
            res.append(y(m) - 3 * y(m + 1)
                       + (3 - QSeries.monomial(1, m + 2)) * y(m + 2)
                       - y(m + 3))
    return _report("52qdiffp", {"m": list(mrange)}, res)


def _id_WWT52b(order, mrange):
    res = []
    for m in mrange:
        M = (wronskian52_u0(m - 1, order) * BlockMatrix(_S52)
             * wronskian52_u0(-m - 1, order, inverse_q=True).transpose()
             ).map(lambda s: s * Fraction(1, 4))
        rhs = BlockMatrix(
            [[QSeries.one(), QSeries.zero(), QSeries.zero()],
             [QSeries.zero(), QSeries.zero(), QSeries.one()],
             [QSeries.zero(), QSeries.one(),
              3 - QSeries.monomial(1, m)]])
        D = M - rhs
        res.extend(e for r in D.rows for e in r)
    return _report("WWT52b", {"m": list(mrange)}, res)


def _id_WWT52(order, mrange):
    res = []
    ok = True
    for m in mrange:
        for ell in mrange:
            M = (wronskian52_u0(m, order) * BlockMatrix(_S52)
                 * wronskian52_u0(ell, order, inverse_q=True).transpose()
                 ).map(lambda s: s * Fraction(1, 4))
            ok = ok and all(_is_integral(e) for r in M.rows for e in r)
            # the products land in GL(3, Z[q^±]) with determinant -1
            res.append(M.det() + 1)
    return _report("WWT52", {"m": list(mrange)}, res, ok)


@lru_cache(maxsize=None)
def _det41x(m, order, eps):
    # blocks are built deeper than requested so that the negative
    # q-valuations picked up in the products (which grow roughly like
    # m^2) keep the det certified through the requested order; the
    # depth is increased until the certification actually covers it
    bump = 10
    while True:
        r0 = blocks41_series(m, order + bump, eps, 0)
        r1 = blocks41_series(m + 1, order + bump, eps, 0)
        d = qseries_dot([(r0[0], r1[1]), (-1 * r0[1], r1[0])])
        if d.order >= order:
            return d
        bump += (order - d.order) + 5


def _minors52(m, order, eps, bump):
    """Column minors of rows m, m+1 of the 5_2 m-Wronskian."""
    return _minors52_cached(m, order + bump, eps)


@lru_cache(maxsize=None)
def _minors52_cached(m, depth, eps):
    r0 = blocks52_series(m, depth, eps, 0)
    r1 = blocks52_series(m + 1, depth, eps, 0)
    return tuple(qseries_dot([(r0[j], r1[k]), (-1 * r0[k], r1[j])])
                 for j, k in ((1, 2), (0, 2), (0, 1)))


@lru_cache(maxsize=None)
def _det52x(m, order, eps):
    # expand along the top or bottom row depending on parity, so that
    # consecutive m share the cached minor pair (both expansions carry
    # the same +,-,+ sign pattern); as in _det41x, deepen until the
    # det is certified through the requested order
    bump = 10
    while True:
        if m % 2 == 0:
            row = blocks52_series(m, order + bump, eps, 0)
            mn = _minors52(m + 1, order, eps, bump)
        else:
            row = blocks52_series(m + 2, order + bump, eps, 0)
            mn = _minors52(m, order, eps, bump)
        d = qseries_dot([(row[0], mn[0]), (-1 * row[1], mn[1]),
                         (row[2], mn[2])])
        if d.order >= order:
            return d
        bump += (order - d.order) + 5


def _id_W410(order, mrange):
    res = []
    for m in mrange:
        for eps in (1, -1):
            d = _det41x(m, order, eps)
            res.append(d - QSeries.monomial(X(3 * m + 3), 0))
    return _report("W410", {"m": list(mrange)}, res)


def _id_WW41b(order, mrange):
    W1 = wronskian41_x(-1, order, 1)
    W2 = wronskian41_x(-1, order, -1)
    M = W1 * BlockMatrix([[1, 0], [0, -1]]) * W2.transpose()
    rhs = _matconst([[X(-2) + X(-1) - 1, 1], [1, 0]])
    D = M - rhs
    return _report("WW41b", {"m": [-1]}, [e for r in D.rows for e in r])


def _id_WW41(order, mrange):
    res = []
    ok = True
    for m in mrange:
        for ell in mrange:
            M = (wronskian41_x(m, order, 1)
                 * BlockMatrix([[1, 0], [0, -1]])
                 * wronskian41_x(ell, order, -1).transpose())
            ok = ok and all(_is_integral(e) for r in M.rows for e in r)
            # det M = det W_m * det diag(1,-1) * det W_l
            d = -1 * (_det41x(m, order, 1) * _det41x(ell, order, -1))
            res.append(d + QSeries.monomial(X(3 * m + 3 * ell + 6), 0))
    return _report("WW41", {"m": list(mrange)}, res, ok)


def _rec41m_terms(m, eps):
    # (1 - x^{-1}S_m)(1 - x^{-2}S_m) + q^{1+m}S_m
    return [(_mono(0, 0), 0, 0),
            (_poly(eps, [(-1, 0, -1), (-1, 0, -2), (1, 1 + m, 0)]), 1, 0),
            (_mono(-3, 0), 2, 0)]


def _id_rec41m(order, mrange):
    res = []
    for m in mrange:
        for eps in (1, -1):
            get = lambda dm, dx: blocks41_series(m + dm, order, eps, dx)
            res.extend(_apply_op(_rec41m_terms(m, eps), get))
    return _report("rec41m", {"m": list(mrange)}, res)


def _id_ann41(order, mrange):
    res = []
    for m in mrange:
        for eps in (1, -1):
            get = lambda dm, dx: blocks41_series(m + dm, order, eps, dx)
            g1 = [(_mono(2, m, 1, eps), 0, 0),
                  (_poly(eps, [(-1, m, 0), (1, 1 + 2 * m, 2)]), 1, 0),
                  (_mono(3, 0), 0, 1)]
            res.extend(_apply_op(g1, get))
            res.extend(_apply_op(_rec41m_terms(m, eps), get))
    return _report("ann41", {"m": list(mrange)}, res)


def _id_rec41x(order, mrange):
    res = []
    for m in mrange:
        for eps in (1, -1):
            get = lambda dm, dx: blocks41_series(m + dm, order, eps, dx)
            c0 = _poly_prod(eps, [(1, 2 + 3 * m, 2)],
                            [(-1, 0, 0), (1, 3 + m, 2)])
            c1 = _poly_prod(eps, [(-1, m, 0)],
                            [(-1, 0, 0), (1, 2 + m, 2)],
                            [(1, 0, 0), (-1, 1, 1), (-1, 1 + m, 2),
                             (-1, 3 + m, 2), (-1, 3 + m, 3),
                             (1, 4 + 2 * m, 4)])
            c2 = _poly_prod(eps, [(1, 2, 2)],
                            [(-1, 0, 0), (1, 1 + m, 2)])
            res.extend(_apply_op([(c0, 0, 0), (c1, 0, 1), (c2, 0, 2)], get))
    return _report("rec41x", {"m": list(mrange)}, res)


def _id_detW41x(order, mrange):
    res = []
    for m in mrange:
        for eps in (1, -1):
            d = wronskian41_x(m, order, eps, xw=True).det()
            rhs = _poly(eps, [(1, m, 3 * m)]) \
                * _poly(eps, [(1, 0, 0), (-1, m + 1, 2)])
            res.append(d - rhs)
    return _report("detW41x", {"m": list(mrange)}, res)


def _id_annJ(order, mrange):
    M = 4 * order + 13
    res = []
    for eps in (1, -1):
        J = {}

        def get(dx, dy):
            if (dx, dy) not in J:
                J[dx, dy] = j_series((dx, 1), (dy, M), order, eps)
            return (J[dx, dy],)

        g1 = [(_poly(eps, [(-1, 0, 1), (1, 0, M)]), 0, 0),
              (_mono(1, 0), 0, 1), (_mono(M, 0, -1), 1, 0)]
        g2 = [(_mono(0, 0), 0, 0),
              (_poly(eps, [(-1, 0, 0), (-1, 0, 1), (1, 1, M)]), 0, 1),
              (_mono(1, 0), 0, 2)]
        for g in (g1, g2):
            acc = None
            for coef, dx, dy in g:
                v = coef * get(dx, dy)[0]
                acc = v if acc is None else acc + v
            res.append(acc)
    return _report("annJ", {"embedding": M}, res)


def _id_annH(order, mrange):
    M = 4 * order + 13
    M2 = M * M
    res = []
    for eps in (1, -1):
        H = {}

        def get(dx, dy, dz):
            key = (dx, dy, dz)
            if key not in H:
                H[key] = h_series((dx, 1), (dy, M), (dz, M2), order, eps)
            return H[key]

        x1, y1, z1 = 1, M, M2          # x-exponents of x, y, z
        g1 = [(_mono(y1 + z1, 0), 1, 0, 0),
              (_mono(x1 + z1, 0, -1), 0, 1, 0),
              (_poly(eps, [(1, 0, 2 * x1 + y1), (-1, 0, x1 + 2 * y1)]),
               0, 0, 1),
              (_poly(eps, [(-1, 0, 2 * x1 + y1), (1, 0, x1 + 2 * y1),
                           (1, 0, x1 + z1), (-1, 0, y1 + z1)]), 0, 0, 0)]
        g2 = [(_mono(x1 + 2 * y1, 0, -1), 0, 0, 2),
              (_mono(z1, 0), 0, 1, 0),
              (_poly(eps, [(1, 0, 2 * y1), (1, 0, x1 + 2 * y1),
                           (-1, 1, y1 + z1)]), 0, 0, 1),
              (_poly(eps, [(-1, 0, 2 * y1), (-1, 0, z1)]), 0, 0, 0)]
        g3 = [(_mono(y1, 1, -1, eps), 0, 1, 1),
              (_mono(0, 0), 0, 1, 0),
              (_mono(0, 0, -1), 0, 0, 0)]
        g4 = [(_mono(z1, 0), 0, 2, 0),
              (_poly(eps, [(-1, 0, x1), (1, 1, y1), (1, 1, x1 + y1),
                           (-1, 2, 2 * y1), (-1, 0, z1), (-1, 1, z1)]),
               0, 1, 0),
              (_mono(x1 + y1, 1, 1, eps), 0, 0, 1),
              (_poly(eps, [(1, 0, x1), (-1, 1, y1), (-1, 1, x1 + y1),
                           (1, 1, z1)]), 0, 0, 0)]
        for g in (g1, g2, g3, g4):
            acc = None
            for coef, dx, dy, dz in g:
                v = coef * get(dx, dy, dz)
                acc = v if acc is None else acc + v
            res.append(acc)
    return _report("annH", {"embedding": M}, res)


def _id_W520(order, mrange):
    res = []
    for m in mrange:
        for eps in (1, -1):
            d = _det52x(m, order, eps)
            rhs = -theta_pow(-eps, 1, -2 * eps, order) \
                * theta_pow(-eps, 2, eps, order)
            res.append(d - rhs)
    return _report("W520", {"m": list(mrange)}, res)


def _id_WW52b(order, mrange):
    W1 = wronskian52_x(-1, order, 1)
    W2 = wronskian52_x(-1, order, -1)
    M = W1 * W2.transpose()
    rhs = _matconst([[1, 0, 0], [0, 0, 1], [0, 1, X(1) + X(-1)]])
    D = M - rhs
    return _report("WW52b", {"m": [-1]}, [e for r in D.rows for e in r])


def _id_WW52(order, mrange):
    res = []
    ok = True
    for m in mrange:
        for ell in mrange:
            M = (wronskian52_x(m, order, 1)
                 * wronskian52_x(ell, order, -1).transpose())
            ok = ok and all(_is_integral(e) for r in M.rows for e in r)
            res.append(_det52x(m, order, 1) * _det52x(ell, order, -1) + 1)
    return _report("WW52", {"m": list(mrange)}, res, ok)


def _rec52m_terms(m, eps):
    # (1-S_m)(1-xS_m)(1-x^{-1}S_m) - q^{2+m}S_m^2
    return [(_mono(0, 0), 0, 0),
            (_poly(eps, [(-1, 0, 0), (-1, 0, 1), (-1, 0, -1)]), 1, 0),
            (_poly(eps, [(1, 0, 0), (1, 0, 1), (1, 0, -1),
                         (-1, 2 + m, 0)]), 2, 0),
            (_mono(0, 0, -1), 3, 0)]


def _id_rec52m(order, mrange):
    res = []
    for m in mrange:
        for eps in (1, -1):
            get = lambda dm, dx: blocks52_series(m + dm, order, eps, dx)
            res.extend(_apply_op(_rec52m_terms(m, eps), get))
    return _report("rec52m", {"m": list(mrange)}, res)


def _id_ann52(order, mrange):
    res = []
    for m in mrange:
        for eps in (1, -1):
            get = lambda dm, dx: blocks52_series(m + dm, order, eps, dx)
            p1 = [(_poly_prod(eps, [(1, 0, 1)],
                              [(1, 0, 0), (-1, 3, 2)],
                              [(1, 0, 0), (-1, 1, 2), (-1, 2, 2),
                               (-1, 3 + m, 3), (1, 3, 4)]), 0, 0),
                  (_poly_prod(eps, [(-1, 0, 0)],
                              [(1, 0, 0), (-1, 1, 1)],
                              [(1, 0, 0), (1, 1, 1)],
                              [(1, 0, 0), (-1, 1, 2)],
                              [(1, 0, 0), (-1, 3, 2)]), 1, 0),
                  (_poly_prod(eps, [(-1, 0, 1)],
                              [(1, 0, 0), (-1, 1, 1)],
                              [(1, 0, 0), (1, 1, 1)],
                              [(1, 0, 0), (-1, 1, 1), (-1, 1, 2),
                               (-1, 3, 2), (1, 2, 3), (1, 4, 3),
                               (-1, 3 + m, 3), (-1, 4 + m, 3),
                               (1, 4, 4), (-1, 5, 5)]), 0, 1),
                  (_poly_prod(eps, [(-1, 4 + m, 4)],
                              [(1, 0, 0), (-1, 1, 2)]), 0, 2)]
            p2 = [(_mono(1, 0), 0, 0), (_mono(0, 0, -1), 1, 0),
                  (_mono(1, 0, -1), 0, 1), (_mono(2, 1, 1, eps), 1, 1)]
            p3 = [(_poly_prod(eps, [(1, 0, 1)],
                              [(1, 0, 0), (-1, 1 + m, 0), (-1, 1, 2)]),
                   0, 0),
                  (_poly(eps, [(-1, 0, 0), (1, 1 + m, 0), (-1, 0, 1),
                               (1, 1, 2), (-1, 2 + m, 2), (1, 1, 3)]),
                   1, 0),
                  (_poly(eps, [(1, 0, 0), (-1, 1, 2)]), 2, 0),
                  (_mono(1, 1 + m, 1, eps), 0, 1)]
            for p in (p1, p2, p3):
                res.extend(_apply_op(p, get))
    return _report("ann52", {"m": list(mrange)}, res)


def _id_rec52x(order, mrange):
    res = []
    for m in mrange:
        for eps in (1, -1):
            get = lambda dm, dx: blocks52_series(m + dm, order, eps, dx)
            c0 = _poly_prod(eps, [(-1, 2 + m, 2)],
                            [(1, 0, 0), (-1, 2, 1)],
                            [(1, 0, 0), (1, 2, 1)],
                            [(1, 0, 0), (-1, 5, 2)])
            c1 = _poly_prod(eps, [(1, 0, 0), (-1, 1, 1)],
                            [(1, 0, 0), (1, 1, 1)],
                            [(1, 0, 0), (-1, 5, 2)],
                            [(1, 0, 0), (-1, 1, 1), (-1, 1, 2),
                             (-1, 4, 2), (1, 2 + m, 2), (1, 3 + m, 2),
                             (1, 2, 3), (1, 5, 3), (1, 5, 4),
                             (1, 5 + m, 4), (-1, 6, 5)])
            c2 = _poly_prod(eps, [(1, 1, 1)],
                            [(1, 0, 0), (-1, 2, 1)],
                            [(1, 0, 0), (1, 2, 1)],
                            [(1, 0, 0), (-1, 1, 2)],
                            [(1, 0, 0), (-1, 2, 1), (-1, 2 + m, 1),
                             (-1, 2, 2), (-1, 5, 2), (1, 4, 3), (1, 7, 3),
                             (-1, 5 + m, 3), (-1, 6 + m, 3), (1, 7, 4),
                             (-1, 9, 5)])
            c3 = _poly_prod(eps, [(1, 8 + m, 4)],
                            [(1, 0, 0), (-1, 1, 1)],
                            [(1, 0, 0), (1, 1, 1)],
                            [(1, 0, 0), (-1, 1, 2)])
            res.extend(_apply_op([(c0, 0, 0), (c1, 0, 1),
                                  (c2, 0, 2), (c3, 0, 3)], get))
    return _report("rec52x", {"m": list(mrange)}, res)


def _id_detW52x(order, mrange):
    res = []
    for m in mrange:
        for eps in (1, -1):
            d = wronskian52_x(m, order, eps, xw=True).det()
            rhs = _poly(eps, [(1, -5 - 2 * m, -5)]) \
                * _poly(eps, [(1, 0, 0), (-1, 2, 2)]) \
                * _poly(eps, [(1, 0, 0), (-1, 1, 2)]) \
                * _poly(eps, [(1, 0, 0), (-1, 3, 2)]) \
                * theta_pow(-eps, 1, -2 * eps, order) \
                * theta_pow(-eps, 2, eps, order)
            res.append(d - rhs)
    return _report("detW52x", {"m": list(mrange)}, res)


def _id_eq_xWm(order, mrange):
    res = []
    for m in mrange:
        W = wronskian52_x(m, order, 1)
        Winv = W.map(lambda s: s.subs_x_inverse())
        D = Winv - W * BlockMatrix(_P23)
        res.extend(e for r in D.rows for e in r)
    return _report("eq:-xWm", {"m": list(mrange)}, res)


_GEN_SPECS = {"41": (1, 2, ((0, 1), (0, 0)), (0, -2)),
              "52": (2, 3, ((0, 0), (0, 1), (0, -1)), (0, 0)),
              "24": (2, 4, ((0, 1), (0, 0), (0, -1), (0, 2)), (0, 0))}


def _id_bkm(order, mrange):
    res = []
    for spec, (A, r, xs, ws) in _GEN_SPECS.items():
        for m in mrange:
            bl = {dm: blocks_generic_series(A, r, m + dm, order, 1, spec)
                  for dm in range(r + 1)}
            # prod_k (1 - x_k S_m): elementary symmetric coefficients
            coefs = [QSeries.one()]
            for a, e in xs:
                nxt = [QSeries.zero()] * (len(coefs) + 1)
                for t, c in enumerate(coefs):
                    nxt[t] = nxt[t] + c
                    nxt[t + 1] = nxt[t + 1] - c * _mono(e, a)
                coefs = nxt
            # - (-q)^A w^{-1} q^m S_m^A
            sgn = -((-1) ** A)
            coefs[A] = coefs[A] + _mono(-ws[1], A + m - ws[0], sgn)
            for k in range(r):
                acc = None
                for dm, c in enumerate(coefs):
                    v = c * bl[dm][k]
                    acc = v if acc is None else acc + v
                res.append(acc)
    return _report("bkm", {"m": list(mrange),
                           "specs": list(_GEN_SPECS)}, res)


_IDENTITY_TABLE = {
    "det41": _id_det41, "W41inv": _id_W41inv, "WWT41b": _id_WWT41b,
    "WWT41": _id_WWT41, "41qdiff": _id_41qdiff, "GGformula": _id_GGformula,
    "eq:E1n-id": _id_E1n_id, "det52": _id_det52, "52qdiffp": _id_52qdiffp,
    "WWT52b": _id_WWT52b, "WWT52": _id_WWT52, "W410": _id_W410,
    "WW41b": _id_WW41b, "WW41": _id_WW41, "rec41m": _id_rec41m,
    "rec41x": _id_rec41x, "ann41": _id_ann41, "annJ": _id_annJ,
    "detW41x": _id_detW41x, "W520": _id_W520, "WW52b": _id_WW52b,
    "WW52": _id_WW52, "rec52m": _id_rec52m, "rec52x": _id_rec52x,
    "ann52": _id_ann52, "annH": _id_annH, "detW52x": _id_detW52x,
    "eq:-xWm": _id_eq_xWm, "bkm": _id_bkm,
}

IDENTITY_IDS = tuple(sorted(_IDENTITY_TABLE))

# annihilator sweeps use a narrower m window than determinant sweeps
_ANN_IDS = {"rec41m", "rec41x", "ann41", "annJ", "rec52m", "rec52x",
            "ann52", "annH", "bkm"}


def verify_identity(idname, order=30, mrange=None):
    """Check one identity; returns {id, params, order, max_residual, pass}."""
    if idname not in _IDENTITY_TABLE:
        raise UsageError(f"unknown identity id {idname!r}")
    if mrange is None:
        mrange = range(-2, 3) if idname in _ANN_IDS else range(-3, 4)
    mrange = list(mrange)
    # Some identities mix terms of negative relative q-valuation, which
    # lowers the order through which the residual is actually certified.
    # Recompute with extra working order until the requested order is
    # covered (or the run fails outright).
    work = order
    for _ in range(5):
        rep = _IDENTITY_TABLE[idname](work, mrange)
        if not rep["pass"] or rep["order"] >= order:
            break
        # jump to a canonical grid of working orders so the block caches
        # are shared across all identities that need a deeper run
        step = 30 if order >= 30 else 10
        need = work + order - rep["order"]
        work = order + step * (-((order - need) // step))
    rep["order"] = min(rep["order"], order)
    return rep
