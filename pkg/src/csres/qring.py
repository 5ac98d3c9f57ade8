"""Truncated formal series in q^{1/2} over pluggable coefficient rings.

The coefficient tower is

    int/Fraction  <  LaurentPoly (Q[x^pm])  <  FracLaurent (quotients)

plus mpmath numbers for evaluated series.  FracLaurent exists because
individual q-series carry theta-prefactors whose constant terms, like
1 - x^{-1}, are not units in Q[x^pm]; every identity we verify cancels
back down to LaurentPoly and callers can assert that with as_laurent().

A QSeries stores exponents as integers in units of q^{1/2} when halfpow
is set (q otherwise).  order is the exponent (in the same units) through
which the series is known; order=None marks exact finite Laurent data in
q, the only kind on which the substitution q -> q^{-1} is allowed.
"""

import json
from fractions import Fraction
from math import gcd as int_gcd

import mpmath

from .errors import AlgebraError

# ---------------------------------------------------------------------------
# dense integer polynomial helpers (ascending coefficient lists)


def _trim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _content(p):
    g = 0
    for c in p:
        g = int_gcd(g, abs(c))
    return g or 1


def _primitive(p):
    g = _content(p)
    return [c // g for c in p]


def _pseudo_rem(a, b):
    """Pseudo-remainder of integer polys a, b (b nonzero)."""
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    while len(a) - 1 >= db and a:
        da, la = len(a) - 1, a[-1]
        a = [c * lb for c in a]
        for i, bc in enumerate(b):
            a[da - db + i] -= la * bc
        _trim(a)
    return a


def _int_poly_gcd(a, b):
    a, b = _primitive(list(a)), _primitive(list(b))
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _pseudo_rem(a, b)
        a, b = b, _primitive(_trim(r))
    if a and a[-1] < 0:
        a = [-c for c in a]
    return a


def _fast_fraction(n, d=1):
    """Fraction from ints with positive d, skipping the slow constructor."""
    if d != 1:
        g = int_gcd(n, d)
        if g != 1:
            n //= g
            d //= g
    f = Fraction.__new__(Fraction)
    f._numerator = n
    f._denominator = d
    return f


def _poly_divexact(a, b):
    """Exact division of Fraction coefficient lists (ascending)."""
    a = list(a)
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    db, lb = len(b) - 1, b[-1]
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] / lb
        q[i - db] = c
        if c:
            for j, bc in enumerate(b):
                a[i - db + j] -= c * bc
    return q


# ---------------------------------------------------------------------------


class LaurentPoly:
    """Laurent polynomial in x over Q: dict {exponent: Fraction}, no zeros."""

    __slots__ = ("c",)

    def __init__(self, c=None):
        if c is None:
            c = {}
        self.c = {e: Fraction(v) for e, v in c.items() if v}

    # -- constructors
    @staticmethod
    def _raw(c):
        """Wrap a ready {exp: Fraction} dict without re-normalizing."""
        p = LaurentPoly.__new__(LaurentPoly)
        p.c = c
        return p

    @staticmethod
    def x(e=1, coeff=1):
        return LaurentPoly({e: Fraction(coeff)})

    @staticmethod
    def const(v):
        return LaurentPoly({0: Fraction(v)})

    # -- predicates / views
    def is_zero(self):
        return not self.c

    def is_monomial(self):
        return len(self.c) == 1

    def min_exp(self):
        return min(self.c) if self.c else 0

    def max_exp(self):
        return max(self.c) if self.c else 0

    def constant_value(self):
        """The rational value, if this poly is a constant; else None."""
        if not self.c:
            return Fraction(0)
        if self.c.keys() == {0}:
            return self.c[0]
        return None

    # -- arithmetic
    @staticmethod
    def _coerce(v):
        if isinstance(v, LaurentPoly):
            return v
        if isinstance(v, (int, Fraction)):
            return LaurentPoly.const(v)
        return None

    def __add__(self, other):
        o = LaurentPoly._coerce(other)
        if o is None:
            return NotImplemented
        c = dict(self.c)
        for e, v in o.c.items():
            s = c.get(e, 0) + v
            if s:
                c[e] = s
            elif e in c:
                del c[e]
        return LaurentPoly._raw(c)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -v for e, v in self.c.items()})

    def __sub__(self, other):
        o = LaurentPoly._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, FracLaurent):
            return NotImplemented
        o = LaurentPoly._coerce(other)
        if o is None:
            return NotImplemented
        if not self.c or not o.c:
            return LaurentPoly()
        # clear denominators once per operand and convolve over the integers
        d1 = d2 = 1
        for v in self.c.values():
            d1 = d1 * v.denominator // int_gcd(d1, v.denominator)
        for v in o.c.values():
            d2 = d2 * v.denominator // int_gcd(d2, v.denominator)
        a = {e: v.numerator * (d1 // v.denominator)
             for e, v in self.c.items()}
        b = {e: v.numerator * (d2 // v.denominator) for e, v in o.c.items()}
        c = {}
        for e1, v1 in a.items():
            for e2, v2 in b.items():
                e = e1 + e2
                c[e] = c.get(e, 0) + v1 * v2
        den = d1 * d2
        return LaurentPoly._raw(
            {e: _fast_fraction(v, den) for e, v in c.items() if v})

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            return FracLaurent(LaurentPoly.const(1), self ** (-n))
        r = LaurentPoly.const(1)
        base = self
        while n:
            if n & 1:
                r = r * base
            base = base * base
            n >>= 1
        return r

    def __truediv__(self, other):
        if isinstance(other, FracLaurent):
            return NotImplemented
        o = LaurentPoly._coerce(other)
        if o is None:
            return NotImplemented
        return FracLaurent(self, o).maybe_laurent()

    def __rtruediv__(self, other):
        o = LaurentPoly._coerce(other)
        if o is None:
            return NotImplemented
        return FracLaurent(o, self).maybe_laurent()

    def __eq__(self, other):
        if isinstance(other, FracLaurent):
            return other == self
        o = LaurentPoly._coerce(other)
        if o is None:
            return NotImplemented
        return self.c == o.c

    def __hash__(self):
        return hash(frozenset(self.c.items()))

    # -- substitutions / evaluation
    def subs_x_inverse(self):
        return LaurentPoly({-e: v for e, v in self.c.items()})

    def eval(self, xval):
        tot = 0
        for e, v in self.c.items():
            tot = tot + mpmath.mpf(v.numerator) / v.denominator * xval**e
        return tot

    # -- dense conversion (anchored at min exponent)
    def _fraction_list(self):
        """(shift, ascending Fraction list) with list[0] at x^shift."""
        if not self.c:
            return 0, []
        lo, hi = self.min_exp(), self.max_exp()
        out = [Fraction(0)] * (hi - lo + 1)
        for e, v in self.c.items():
            out[e - lo] = v
        return lo, out

    def __repr__(self):
        if not self.c:
            return "0"
        parts = []
        for e in sorted(self.c):
            v = self.c[e]
            parts.append(f"{v}*x^{e}" if e else f"{v}")
        return " + ".join(parts)


class FracLaurent:
    """Quotient of Laurent polynomials, kept normalized:

    - gcd(num, den) cancelled (integer subresultant gcd),
    - den a genuine polynomial with positive primitive-integer content,
    - monomial denominators folded away by maybe_laurent().
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den, reduce=True):
        num = LaurentPoly._coerce(num)
        den = LaurentPoly._coerce(den)
        if den.is_zero():
            raise AlgebraError("division by zero Laurent polynomial")
        if reduce:
            num, den = FracLaurent._reduce(num, den)
        self.num = num
        self.den = den

    @staticmethod
    def _reduce(num, den):
        if num.is_zero():
            return num, LaurentPoly.const(1)
        sn, ln = num._fraction_list()
        sd, ld = den._fraction_list()
        # strip rational content to integer polys
        from functools import reduce as _red

        def to_int(lst):
            denlcm = _red(lambda a, b: a * b // int_gcd(a, b),
                          (f.denominator for f in lst), 1)
            ints = [int(f * denlcm) for f in lst]
            return ints, denlcm

        ni, nl = to_int(ln)
        di, dl = to_int(ld)
        g = _int_poly_gcd(ni, di)
        if len(g) > 1:
            gf = [Fraction(c) for c in g]
            ln = _poly_divexact(ln, gf)
            ld = _poly_divexact(ld, gf)
        # canonicalize: den monic, x-shift moved to num
        lead = ld[-1]
        ln = [c / lead for c in ln]
        ld = [c / lead for c in ld]
        num = LaurentPoly({sn - sd + i: v for i, v in enumerate(ln) if v})
        den = LaurentPoly({i: v for i, v in enumerate(ld) if v})
        return num, den

    def maybe_laurent(self):
        if self.den.is_monomial():
            e, v = next(iter(self.den.c.items()))
            return LaurentPoly({ee - e: vv / v for ee, vv in self.num.c.items()})
        return self

    def is_zero(self):
        return self.num.is_zero()

    @staticmethod
    def _coerce(v):
        if isinstance(v, FracLaurent):
            return v
        lp = LaurentPoly._coerce(v)
        if lp is None:
            return None
        return FracLaurent(lp, LaurentPoly.const(1), reduce=False)

    def __add__(self, other):
        o = FracLaurent._coerce(other)
        if o is None:
            return NotImplemented
        if self.den.c == o.den.c:
            s = self.num + o.num
            if s.is_zero():
                return LaurentPoly()
            return FracLaurent(s, self.den, reduce=False).maybe_laurent()
        return _frac(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return FracLaurent(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        o = FracLaurent._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = FracLaurent._coerce(other)
        if o is None:
            return NotImplemented
        return _frac(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = FracLaurent._coerce(other)
        if o is None:
            return NotImplemented
        if o.num.is_zero():
            raise AlgebraError("division by zero")
        return _frac(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = FracLaurent._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n):
        if n < 0:
            return _frac(self.den ** (-n), self.num ** (-n))
        return _frac(self.num**n, self.den**n)

    def __eq__(self, other):
        o = FracLaurent._coerce(other)
        if o is None:
            return NotImplemented
        return (self.num * o.den) == (o.num * self.den)

    def subs_x_inverse(self):
        return _frac(self.num.subs_x_inverse(), self.den.subs_x_inverse())

    def eval(self, xval):
        return self.num.eval(xval) / self.den.eval(xval)

    def __repr__(self):
        return f"({self.num!r})/({self.den!r})"


def _frac(num, den):
    return FracLaurent(num, den).maybe_laurent()


def _lp_gcd(a, b):
    """Polynomial gcd of two LaurentPoly, up to units (min_exp 0)."""

    def to_int(lst):
        dl = 1
        for f in lst:
            dl = dl * f.denominator // int_gcd(dl, f.denominator)
        return [int(f * dl) for f in lst]

    _, la = a._fraction_list()
    _, lb = b._fraction_list()
    g = _int_poly_gcd(to_int(la), to_int(lb))
    return LaurentPoly({i: Fraction(v) for i, v in enumerate(g) if v})


def _lp_divexact(a, b):
    """a / b for LaurentPoly with exact polynomial divisibility."""
    sa, la = a._fraction_list()
    sb, lb = b._fraction_list()
    qs = _poly_divexact(la, lb)
    return LaurentPoly({sa - sb + i: v for i, v in enumerate(qs) if v})


def _clear_series(c):
    """Factor a coefficient dict as num / (Dpoly * Dint) with integer data.

    Returns (Dpoly: LaurentPoly, Dint: int, {key: {exp: int}}), or None
    when a coefficient is not exact (mpmath numbers etc.).
    """
    dens = []
    seen = set()
    for v in c.values():
        if isinstance(v, FracLaurent):
            key = frozenset(v.den.c.items())
            if key not in seen:
                seen.add(key)
                dens.append(v.den)
        elif not isinstance(v, (int, Fraction, LaurentPoly)):
            return None
    dpoly = LaurentPoly.const(1)
    for d in dens:
        dpoly = _lp_divexact(dpoly * d, _lp_gcd(dpoly, d))
    nontrivial = len(dpoly.c) > 1 or dpoly.c != {0: Fraction(1)}
    nums = {}
    for k, v in c.items():
        if isinstance(v, FracLaurent):
            lp = v.num * _lp_divexact(dpoly, v.den)
        elif isinstance(v, LaurentPoly):
            lp = v * dpoly if nontrivial else v
        else:
            lp = dpoly * Fraction(v)
        nums[k] = lp
    dint = 1
    for lp in nums.values():
        for f in lp.c.values():
            dint = dint * f.denominator // int_gcd(dint, f.denominator)
    ints = {k: {e: f.numerator * (dint // f.denominator)
                for e, f in lp.c.items()}
            for k, lp in nums.items()}
    return dpoly, dint, ints


def _kron_encode(terms, kmin, emin, xs, bits):
    """Pack {(k, e): int} into one integer, digit (k-kmin)*xs + (e-emin)."""
    top = 0
    for k, e in terms:
        idx = (k - kmin) * xs + (e - emin)
        if idx > top:
            top = idx
    nb = bits // 8
    pos = bytearray((top + 1) * nb)
    neg = bytearray((top + 1) * nb)
    for (k, e), c in terms.items():
        idx = ((k - kmin) * xs + (e - emin)) * nb
        buf, v = (pos, c) if c >= 0 else (neg, -c)
        buf[idx:idx + nb] = v.to_bytes(nb, "little")
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _kron_convolve(na, nb, order):
    """Bivariate integer convolution via one big-integer multiply."""
    ta = {(k, e): c for k, d in na.items() for e, c in d.items()}
    tb = {(k, e): c for k, d in nb.items() for e, c in d.items()}
    if not ta or not tb:
        return {}
    ka = [k for k, _ in ta]
    kb = [k for k, _ in tb]
    ea = [e for _, e in ta]
    eb = [e for _, e in tb]
    kmin_a, kmin_b = min(ka), min(kb)
    emin_a, emin_b = min(ea), min(eb)
    xs = (max(ea) - emin_a) + (max(eb) - emin_b) + 1
    amax = max(abs(c) for c in ta.values())
    bmax = max(abs(c) for c in tb.values())
    bound = amax * bmax * min(len(ta), len(tb))
    bits = ((bound.bit_length() + 10) + 7) // 8 * 8
    prod = _kron_encode(ta, kmin_a, emin_a, xs, bits) * \
        _kron_encode(tb, kmin_b, emin_b, xs, bits)
    kspan = (max(ka) - kmin_a) + (max(kb) - kmin_b) + 1
    ndig = kspan * xs
    half = 1 << (bits - 1)
    # offset makes every balanced digit non-negative for byte extraction
    offs = half * (((1 << (bits * ndig)) - 1) // ((1 << bits) - 1))
    raw = (prod + offs).to_bytes(ndig * (bits // 8) + 16, "little")
    nb_ = bits // 8
    out = {}
    kmin = kmin_a + kmin_b
    emin = emin_a + emin_b
    for idx in range(ndig):
        v = int.from_bytes(raw[idx * nb_:(idx + 1) * nb_], "little") - half
        if not v:
            continue
        k = kmin + idx // xs
        if order is not None and k > order:
            continue
        out.setdefault(k, {})[emin + idx % xs] = v
    return out


def _pair_convolve(ra, rb, order):
    """Integer convolution of two cleared series; (dpoly, dint, ints)."""
    dpa, dia, na = ra
    dpb, dib, nb = rb
    nta = sum(len(d) for d in na.values())
    ntb = sum(len(d) for d in nb.values())
    if nta * ntb > 4096:
        out = _kron_convolve(na, nb, order)
    else:
        out = {}
        for k1, n1 in na.items():
            for k2, n2 in nb.items():
                k = k1 + k2
                if order is not None and k > order:
                    continue
                tgt = out.setdefault(k, {})
                for e1, c1 in n1.items():
                    for e2, c2 in n2.items():
                        e = e1 + e2
                        tgt[e] = tgt.get(e, 0) + c1 * c2
    return dpa * dpb, dia * dib, out


_ONE_LP_C = {0: Fraction(1)}


def _reduce_common(nums, dpoly):
    """Cancel gcd(dpoly, all nums) once, instead of per coefficient."""
    g = dpoly
    for lp in nums:
        if len(g.c) <= 1:
            break
        g = _lp_gcd(g, lp)
    if len(g.c) > 1:
        dpoly = _lp_divexact(dpoly, g)
        nums = [_lp_divexact(lp, g) for lp in nums]
    return nums, dpoly


def _attach_group(res, keys, nums, dpoly):
    """Store nums/dpoly coefficients into res after a common reduction."""
    if dpoly.c != _ONE_LP_C:
        nums, dpoly = _reduce_common(nums, dpoly)
    if dpoly.is_monomial():
        e, v = next(iter(dpoly.c.items()))
        mono = not (e == 0 and v == 1)
        for k, lp in zip(keys, nums):
            if not lp.c:
                continue
            res[k] = LaurentPoly._raw(
                {ee - e: vv / v for ee, vv in lp.c.items()}) if mono else lp
        return
    for k, lp in zip(keys, nums):
        if lp.c:
            res[k] = FracLaurent(lp, dpoly, reduce=False)


def _attach_denominator(dpoly, dint, ints):
    """Back from cleared integer data to a coefficient dict."""
    res = {}
    keys, nums = [], []
    for k, t in ints.items():
        lp = LaurentPoly._raw(
            {e: _fast_fraction(n, dint) for e, n in t.items() if n})
        if lp.c:
            keys.append(k)
            nums.append(lp)
    _attach_group(res, keys, nums, dpoly)
    return res


def _series_cleared(s):
    """Cached cleared form of a QSeries; None for inexact coefficients."""
    cl = s._clr
    if cl is None:
        cl = _clear_series(s.c)
        s._clr = cl if cl is not None else False
    return cl if cl is not False else None


def qseries_dot(pairs):
    """sum(a * b for a, b in pairs) with one reduction per coefficient."""
    qp = []
    for a, b in pairs:
        if not isinstance(a, QSeries):
            a = QSeries({0: a}, None, False)
        if not isinstance(b, QSeries):
            b = QSeries({0: b}, None, False)
        qp.append((a, b))
    half = any(a.halfpow or b.halfpow for a, b in qp)
    if half:
        qp = [(a.to_half(), b.to_half()) for a, b in qp]
    order = None
    for a, b in qp:
        if a.order is None and b.order is None:
            continue
        cands = []
        if a.order is not None:
            cands.append(a.order + b.val())
        if b.order is not None:
            cands.append(b.order + a.val())
        order = min(cands) if order is None else min(order, min(cands))
    cleared = []
    for a, b in qp:
        ra = _series_cleared(a)
        rb = _series_cleared(b)
        if ra is None or rb is None:
            acc = None
            for a2, b2 in qp:
                t = a2 * b2
                acc = t if acc is None else acc + t
            return acc
        cleared.append((ra, rb))
    per = {}
    for ra, rb in cleared:
        dp, dint, ints = _pair_convolve(ra, rb, order)
        for k, t in ints.items():
            lp = LaurentPoly._raw(
                {e: _fast_fraction(n, dint) for e, n in t.items() if n})
            if not lp.c:
                continue
            if k in per:
                n0, d0 = per[k]
                if d0.c == dp.c:
                    per[k] = (n0 + lp, d0)
                else:
                    per[k] = (n0 * dp + lp * d0, d0 * dp)
            else:
                per[k] = (lp, dp)
    return QSeries(_attach_pairs(per), order, half)


def _attach_pairs(per):
    """{key: (num, den)} -> coefficient dict, reductions grouped by den."""
    groups = {}
    for k, (num, den) in per.items():
        key = frozenset(den.c.items())
        if key in groups:
            groups[key][1].append(k)
            groups[key][2].append(num)
        else:
            groups[key] = (den, [k], [num])
    c = {}
    for den, keys, nums in groups.values():
        _attach_group(c, keys, nums, den)
    return c


def qseries_sum(terms):
    """Sum of QSeries with one denominator reduction per coefficient."""
    terms = list(terms)
    if not terms:
        return QSeries.zero()
    half = any(t.halfpow for t in terms)
    if half:
        terms = [t.to_half() for t in terms]
    order = None
    for t in terms:
        if t.order is not None:
            order = t.order if order is None else min(order, t.order)
    one = LaurentPoly.const(1)
    per = {}
    for t in terms:
        for k, v in t.c.items():
            if order is not None and k > order:
                continue
            if isinstance(v, FracLaurent):
                num, den = v.num, v.den
            else:
                lp = LaurentPoly._coerce(v)
                if lp is None:
                    # numeric coefficients: fall back to plain addition
                    acc = terms[0]
                    for t2 in terms[1:]:
                        acc = acc + t2
                    return acc
                num, den = lp, one
            if k in per:
                n0, d0 = per[k]
                if d0.c == den.c:
                    per[k] = (n0 + num, d0)
                else:
                    per[k] = (n0 * den + num * d0, d0 * den)
            else:
                per[k] = (num, den)
    return QSeries(_attach_pairs(per), order, half)


# ---------------------------------------------------------------------------
# coefficient-ring dispatch helpers


def ring_zero_p(v):
    if isinstance(v, (LaurentPoly, FracLaurent)):
        return v.is_zero()
    if isinstance(v, (int, Fraction)):
        return v == 0
    return v == 0  # mpmath


def ring_name(v):
    if isinstance(v, (LaurentPoly, FracLaurent)):
        return "laurent"
    if isinstance(v, (int, Fraction)):
        return "rational"
    return "bigcomplex"


def _invert_coeff(v):
    if isinstance(v, LaurentPoly):
        if not v.is_monomial():
            return FracLaurent(LaurentPoly.const(1), v).maybe_laurent()
        return LaurentPoly.const(1) / v
    if isinstance(v, FracLaurent):
        return _frac(v.den, v.num)
    if isinstance(v, (int, Fraction)):
        if v == 0:
            raise AlgebraError("inverting zero coefficient")
        return Fraction(1, 1) / Fraction(v)
    return 1 / v


# ---------------------------------------------------------------------------


class QSeries:
    """Truncated Laurent series in q (or q^{1/2} when halfpow)."""

    __slots__ = ("halfpow", "order", "c", "_clr")

    def __init__(self, c=None, order=None, halfpow=False):
        self.halfpow = bool(halfpow)
        self.order = order
        self._clr = None
        self.c = {}
        if c:
            for k, v in c.items():
                if order is not None and k > order:
                    continue
                if not ring_zero_p(v):
                    self.c[k] = v

    # -- constructors
    @staticmethod
    def zero(order=None, halfpow=False):
        return QSeries({}, order, halfpow)

    @staticmethod
    def one(order=None, halfpow=False):
        return QSeries({0: Fraction(1)}, order, halfpow)

    @staticmethod
    def monomial(coeff, qexp, order=None, halfpow=False):
        """coeff * q^qexp; qexp may be a Fraction with denominator 2."""
        qexp = Fraction(qexp)
        if qexp.denominator == 1 and not halfpow:
            return QSeries({int(qexp): coeff}, order, False)
        key = qexp * 2
        if key.denominator != 1:
            raise AlgebraError("q-exponents must be half-integers")
        o = order if order is None else order
        return QSeries({int(key): coeff}, o, True)

    # -- structure
    def _step(self):
        return Fraction(1, 2) if self.halfpow else Fraction(1)

    def val(self):
        """Lowest stored exponent in key units (0 for empty series)."""
        return min(self.c) if self.c else 0

    def is_zero(self):
        return not self.c

    def exact(self):
        return self.order is None

    def to_half(self):
        if self.halfpow:
            return self
        return QSeries({2 * k: v for k, v in self.c.items()},
                       None if self.order is None else 2 * self.order, True)

    def _align(self, other):
        if not isinstance(other, QSeries):
            other = QSeries({0: other}, None, False)
        if self.halfpow or other.halfpow:
            return self.to_half(), other.to_half()
        return self, other

    @staticmethod
    def _min_order(o1, o2):
        if o1 is None:
            return o2
        if o2 is None:
            return o1
        return min(o1, o2)

    # -- arithmetic
    def __add__(self, other):
        a, b = self._align(other)
        order = QSeries._min_order(a.order, b.order)
        c = dict(a.c)
        for k, v in b.c.items():
            if k in c:
                s = c[k] + v
                if ring_zero_p(s):
                    del c[k]
                else:
                    c[k] = s
            else:
                c[k] = v
        return QSeries(c, order, a.halfpow)

    __radd__ = __add__

    def __neg__(self):
        return QSeries({k: -v for k, v in self.c.items()}, self.order, self.halfpow)

    def __sub__(self, other):
        return self + (-(other if isinstance(other, QSeries) else
                         QSeries({0: other}, None, False)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            # scalar multiply
            if ring_zero_p(other):
                return QSeries({}, self.order, self.halfpow)
            return QSeries({k: v * other for k, v in self.c.items()},
                           self.order, self.halfpow)
        a, b = self._align(other)
        if a.order is None and b.order is None:
            order = None
        else:
            cands = []
            if a.order is not None:
                cands.append(a.order + b.val())
            if b.order is not None:
                cands.append(b.order + a.val())
            order = min(cands)
        ra = _series_cleared(a)
        rb = _series_cleared(b)
        if ra is not None and rb is not None:
            c = _attach_denominator(*_pair_convolve(ra, rb, order))
        else:
            c = {}
            for k1, v1 in a.c.items():
                for k2, v2 in b.c.items():
                    k = k1 + k2
                    if order is not None and k > order:
                        continue
                    if k in c:
                        c[k] = c[k] + v1 * v2
                    else:
                        c[k] = v1 * v2
        return QSeries(c, order, a.halfpow)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            return self.invert() ** (-n)
        r = QSeries.one(self.order, self.halfpow)
        base = self
        while n:
            if n & 1:
                r = r * base
            base = base * base
            n >>= 1
        return r

    def invert(self, order=None):
        """Inverse of a series whose lowest term is an invertible coefficient."""
        if self.is_zero():
            raise AlgebraError("inverting zero series")
        v = self.val()
        if order is None:
            if self.order is None:
                raise AlgebraError("invert of exact data needs explicit order")
            order = self.order - 2 * v
        lead = self.c[v]
        lead_inv = _invert_coeff(lead)
        # u = series/lead/q^v - 1 has positive valuation
        out = {}
        # long division: result keys r satisfy sum_{k} self[v+k] * out[r-k]
        out[-v] = lead_inv
        maxk = order + v  # compute out keys up to order
        rel = sorted(k - v for k in self.c if k != v)
        for key in range(-v + 1, order + 1):
            acc = None
            for d in rel:
                kk = key - d
                if kk < -v or kk > order:
                    continue
                if kk in out:
                    t = self.c[v + d] * out[kk]
                    acc = t if acc is None else acc + t
            if acc is not None and not ring_zero_p(acc):
                out[key] = -(lead_inv * acc)
        res = QSeries(out, order, self.halfpow)
        return res

    def __truediv__(self, other):
        if isinstance(other, QSeries):
            return self * other.invert(
                order=None if other.order is not None else
                (self.order if self.order is not None else None))
        inv = _invert_coeff(other)
        return self * inv

    def __eq__(self, other):
        a, b = self._align(other)
        order = QSeries._min_order(a.order, b.order)
        d = a - b
        if order is not None:
            return all(k > order or ring_zero_p(v) for k, v in d.c.items())
        return d.is_zero()

    # -- reshaping
    def truncate(self, order, halfpow=None):
        """Restrict to exponents <= order (order in key units of self)."""
        c = {k: v for k, v in self.c.items() if k <= order}
        return QSeries(c, order, self.halfpow)

    def shift_q(self, qexp):
        """Multiply by q^qexp (qexp int, Fraction halves allowed)."""
        qexp = Fraction(qexp)
        s = self
        if qexp.denominator == 2 and not s.halfpow:
            s = s.to_half()
        key = qexp / s._step()
        if key.denominator != 1:
            raise AlgebraError("shift exponent incompatible with grading")
        key = int(key)
        return QSeries({k + key: v for k, v in s.c.items()},
                       None if s.order is None else s.order + key, s.halfpow)

    def subs_q_inverse(self):
        """q -> q^{-1}; only allowed on exact finite data (order None)."""
        if self.order is not None:
            raise AlgebraError("q -> q^{-1} requires exact finite data")
        return QSeries({-k: v for k, v in self.c.items()}, None, self.halfpow)

    def subs_x_inverse(self):
        c = {}
        for k, v in self.c.items():
            if isinstance(v, (LaurentPoly, FracLaurent)):
                c[k] = v.subs_x_inverse()
            else:
                c[k] = v
        return QSeries(c, self.order, self.halfpow)

    def subs_x_qshift(self, j):
        """x -> q^j x on series with (pure) LaurentPoly coefficients."""
        if self.halfpow and Fraction(j).denominator == 2:
            pass
        j2 = Fraction(j) / self._step()
        if j2.denominator != 1:
            raise AlgebraError("shift exponent incompatible with grading")
        j2 = int(j2)
        c = {}
        order = self.order
        for k, v in self.c.items():
            if isinstance(v, FracLaurent):
                raise AlgebraError("x -> q^j x undefined on fractional coefficients")
            if isinstance(v, LaurentPoly):
                for e, r in v.c.items():
                    kk = k + j2 * e
                    if order is not None and kk > order:
                        continue
                    lp = c.setdefault(kk, {})
                    lp[e] = lp.get(e, Fraction(0)) + r
            else:
                c.setdefault(k, {})[0] = Fraction(v)
        # conservative order: shifting x^e with e of both signs can pull
        # unknown high-order terms down only if j*e < 0 for stored e; we
        # keep the caller responsible for generating enough orders.
        return QSeries({k: LaurentPoly(v) for k, v in c.items()}, order,
                       self.halfpow)

    def map_coeffs(self, fn):
        return QSeries({k: fn(v) for k, v in self.c.items()}, self.order,
                       self.halfpow)

    def as_laurent(self):
        """Assert all coefficients reduce to LaurentPoly and return self so."""
        c = {}
        for k, v in self.c.items():
            if isinstance(v, FracLaurent):
                v = v.maybe_laurent()
                if isinstance(v, FracLaurent):
                    raise AlgebraError(f"coefficient at key {k} is not Laurent: {v!r}")
            c[k] = v
        return QSeries(c, self.order, self.halfpow)

    # -- numeric
    def eval(self, qval, xval=None):
        tot = mpmath.mpc(0)
        step = self._step()
        for k, v in sorted(self.c.items()):
            if isinstance(v, (LaurentPoly, FracLaurent)):
                if xval is None:
                    if isinstance(v, FracLaurent):
                        v = v.maybe_laurent()
                    if isinstance(v, LaurentPoly) and v.is_zero():
                        continue
                    if not (isinstance(v, LaurentPoly) and set(v.c) <= {0}):
                        raise AlgebraError(
                            "series has x-coefficients; supply xval")
                    cv = v.c[0]
                    cv = mpmath.mpf(cv.numerator) / cv.denominator
                else:
                    cv = v.eval(xval)
            elif isinstance(v, Fraction):
                cv = mpmath.mpf(v.numerator) / v.denominator
            else:
                cv = v
            e = k * step
            tot += cv * qval ** (mpmath.mpf(e.numerator) / e.denominator)
        return tot

    def coeff_q(self, qexp):
        """Coefficient of q^qexp (qexp int or Fraction)."""
        key = Fraction(qexp) / self._step()
        if key.denominator != 1:
            return Fraction(0)
        return self.c.get(int(key), Fraction(0))

    # -- serialization
    def to_json_obj(self):
        ring = "rational"
        for v in self.c.values():
            ring = ring_name(v)
            break
        coeffs = []
        for k in sorted(self.c):
            v = self.c[k]
            e = k * self._step()
            qexp = str(e) if e.denominator > 1 else str(int(e))
            if isinstance(v, FracLaurent):
                val = {"num": {str(e2): str(r) for e2, r in v.num.c.items()},
                       "den": {str(e2): str(r) for e2, r in v.den.c.items()}}
            elif isinstance(v, LaurentPoly):
                val = {str(e2): str(r) for e2, r in v.c.items()}
            elif isinstance(v, Fraction):
                val = str(v)
            elif isinstance(v, int):
                val = str(v)
            else:
                val = {"re": mpmath.nstr(mpmath.mpc(v).real, 30),
                       "im": mpmath.nstr(mpmath.mpc(v).imag, 30)}
            coeffs.append({"qexp": qexp, "value": val})
        order = self.order
        if order is not None:
            o = order * self._step()
            order = str(o) if o.denominator > 1 else int(o)
        return {"ring": ring, "halfpow": self.halfpow, "order": order,
                "coeffs": coeffs}

    def to_json(self, **kw):
        return json.dumps(self.to_json_obj(), **kw)

    @staticmethod
    def from_json_obj(obj):
        halfpow = bool(obj["halfpow"])
        step = Fraction(1, 2) if halfpow else Fraction(1)
        c = {}
        for item in obj["coeffs"]:
            key = Fraction(item["qexp"]) / step
            v = item["value"]
            if isinstance(v, dict):
                if "re" in v:
                    val = mpmath.mpc(mpmath.mpf(v["re"]), mpmath.mpf(v["im"]))
                elif "num" in v:
                    num = LaurentPoly({int(e): Fraction(r)
                                       for e, r in v["num"].items()})
                    den = LaurentPoly({int(e): Fraction(r)
                                       for e, r in v["den"].items()})
                    val = FracLaurent(num, den)
                else:
                    val = LaurentPoly({int(e): Fraction(r) for e, r in v.items()})
            else:
                val = Fraction(v)
            c[int(key)] = val
        order = obj["order"]
        if order is not None:
            order = int(Fraction(order) / step)
        return QSeries(c, order, halfpow)

    @staticmethod
    def from_json(s):
        return QSeries.from_json_obj(json.loads(s))

    def __repr__(self):
        step = self._step()
        parts = []
        for k in sorted(self.c)[:12]:
            e = k * step
            es = str(e) if e.denominator > 1 else str(int(e))
            parts.append(f"({self.c[k]!r})*q^{es}")
        more = " + ..." if len(self.c) > 12 else ""
        tail = f" + O(q^{(self.order + 1) * step})" if self.order is not None else ""
        return (" + ".join(parts) or "0") + more + tail


# ---------------------------------------------------------------------------
# q-Pochhammer / theta builders over LaurentPoly


def qpoch_series(x_exp, q_shift, order, sign=1):
    """Series of (sign * q^{q_shift} x^{x_exp}; q)_inf through q^order.

    Exact over Q[x^pm]; q_shift a non-negative int or half-integer Fraction.
    """
    q_shift = Fraction(q_shift)
    if q_shift < 0:
        raise AlgebraError("qpoch_series: q_shift must be >= 0")
    halfpow = q_shift.denominator == 2
    res = QSeries.one(order * (2 if halfpow else 1), halfpow)
    j = 0
    while q_shift + j <= order:
        factor = QSeries.one(res.order, halfpow) - QSeries.monomial(
            LaurentPoly.x(x_exp, sign), q_shift + j, res.order, halfpow)
        res = res * factor
        j += 1
    return res


def theta_series(r, s, order):
    """theta(-q^{r/2} x^s; q) through q^order, r odd (any sign), s integer.

    Uses theta(qX;q) = q^{-1/2} X^{-1} theta(X;q) to reduce |r| to 1;
    result has integer q-powers and LaurentPoly coefficients.
    """
    if r % 2 == 0:
        raise AlgebraError("theta_series: r must be odd")
    # prefactor accumulated while walking r down/up to +-1
    pref_q = Fraction(0)
    pref_x = 0
    pref_c = Fraction(1)
    rr = r
    while rr > 1:
        # theta(-q^{rr/2} x^s) = -q^{(1-rr)/2} (-x^{-s}) ... derive:
        # theta(q X; q) = q^{-1/2} X^{-1} theta(X;q), X = -q^{(rr-2)/2} x^s
        # => theta(-q^{rr/2} x^s) = q^{-1/2} (-q^{(rr-2)/2} x^s)^{-1} theta(X)
        pref_c *= -1
        pref_q += Fraction(-1, 2) + Fraction(-(rr - 2), 2)
        pref_x -= s
        rr -= 2
    while rr < -1:
        # inverse direction: theta(X;q) = q^{1/2} X theta(qX;q)
        # with X = -q^{rr/2} x^s, qX = -q^{(rr+2)/2} x^s
        pref_c *= -1
        pref_q += Fraction(1, 2) + Fraction(rr, 2)
        pref_x += s
        rr += 2
    if rr == 1:
        base = qpoch_series(s, 1, order) * qpoch_series(-s, 0, order)
    else:  # rr == -1
        base = qpoch_series(s, 0, order) * qpoch_series(-s, 1, order)
    res = base * LaurentPoly.x(pref_x, pref_c)
    if pref_q:
        res = res.shift_q(pref_q)
    return res
