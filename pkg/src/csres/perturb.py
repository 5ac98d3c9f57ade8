"""Asymptotic series at the saddle points of the state integrals.

Each branch sigma of the spectral curve carries a series
Phi_sigma(x; tau) = exp(V / (2 pi i tau)) * phi_sigma(x; tau).  We compute
the coefficients c_n of sqrt(i delta) * phi in powers of hbar = 2 pi i tau
(so that c_0 = 1) by formal Gaussian expansion: the integrand's exponent is
expanded around the critical point v_c in powers of s = sqrt(hbar) with the
all-orders quantum-dilogarithm input, and Gaussian moments close the
integral.  All the expansion data are values of negative-index polylogs,
i.e. rational functions of the curve point, evaluated once at high
precision.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from mpmath import mp, mpc, mpf

from .errors import ConvergenceError, DegenerateError, UsageError
from .geometry import MODELS, branch_data, delta_value
from .numkernel import bits_for, term_tol, working_prec

# ---------------------------------------------------------------------------
# exact expansion inputs


@lru_cache(maxsize=None)
def _euler_poly(i):
    """Integer coefficients of Li_{-i}(z) as a polynomial in t = 1/(1-z).

    Li_0 = t - 1 and the ladder Li_{-i-1} = z d/dz Li_{-i} acts on t-space
    as t(t-1) d/dt.
    """
    if i == 0:
        return (-1, 1)
    prev = _euler_poly(i - 1)
    der = [k * c for k, c in enumerate(prev)][1:]
    # multiply by t^2 - t
    out = [0] * (len(der) + 2)
    for k, c in enumerate(der):
        out[k + 2] += c
        out[k + 1] -= c
    return tuple(out)


@lru_cache(maxsize=None)
def _bernoulli_half(k):
    """B_{2k}(1/2) as an exact Fraction."""
    from sympy import Rational, bernoulli
    b = Rational(bernoulli(2 * k)) * (Fraction(1, 2 ** (2 * k - 1)) - 1)
    return Fraction(int(b.p), int(b.q))


def _li_values(t, imax):
    """[Li_0, Li_{-1}, ..., Li_{-imax}] at t = 1/(1-z)."""
    tp = [mpc(1)]
    for _ in range(imax + 1):
        tp.append(tp[-1] * t)
    out = []
    for i in range(imax + 1):
        coeffs = _euler_poly(i)
        out.append(sum(c * tp[k] for k, c in enumerate(coeffs) if c))
    return out


def _quad_const(model):
    # second v-derivative of the elementary quadratic part of the potential
    return 1 if model == "41" else 2


# The factorization of each state integral carries an overall factor
# (q/qtilde)^{lam/24}.  We normalize the asymptotic series so that this
# factor is absorbed: its qtilde-part shifts V by lam*pi^2/6 (making V
# purely imaginary at the geometric branch) and its q-part contributes
# the constant -lam*hbar/24 to the exponent of phi.
_NORM_POW = {"41": 1, "52": 3}


def _z_args(model, x, y):
    return (y, x * y) if model == "41" else (y, x * y, y / x)


# ---------------------------------------------------------------------------
# the Gaussian engine


def _phi_from_inputs(vss, gks, delta, nmax, prec):
    """Coefficients c_0..c_nmax of sqrt(i delta) phi in powers of hbar.

    vss[j] is the j-th v-derivative of the potential for j >= 3 (index
    offset: vss[0] = V_3); gks[k][j] is the j-th derivative of the order
    2k-1 quantum-dilogarithm correction g_k, for k >= 1.
    """
    smax = 2 * nmax
    with mp.workprec(prec):
        # U[k] = polynomial in w (dense list) multiplying s^k
        U = [None] * (smax + 1)

        def add(k, j, val):
            if k < 1 or k > smax or val == 0:
                return
            if U[k] is None:
                U[k] = {}
            U[k][j] = U[k].get(j, mpc(0)) + val

        fact = [mpf(1)]
        for n in range(1, smax + 3):
            fact.append(fact[-1] * n)
        for j in range(3, smax + 3):
            add(j - 2, j, vss[j - 3] / fact[j])
        for k in range(1, len(gks)):
            for j, gv in enumerate(gks[k]):
                add(4 * k - 2 + j, j, gv / fact[j])

        # F = exp(sum_k U_k s^k) via n F_n = sum k U_k F_{n-k}
        F = [{0: mpc(1)}]
        for n in range(1, smax + 1):
            acc = {}
            for k in range(1, n + 1):
                if U[k] is None:
                    continue
                Fm = F[n - k]
                for j1, u in U[k].items():
                    ku = k * u
                    for j2, f in Fm.items():
                        j = j1 + j2
                        acc[j] = acc.get(j, mpc(0)) + ku * f
            inv_n = mpf(1) / n
            F.append({j: v * inv_n for j, v in acc.items()})

        # Gaussian moments <w^{2m}> = (2m-1)!! (-delta)^{-m}
        jmax = max(max(f) for f in F[::2])
        mom = [mpf(1)]
        dinv = -1 / mpc(delta)
        for m in range(1, jmax // 2 + 1):
            mom.append(mom[-1] * (2 * m - 1) * dinv)
        out = []
        for n in range(nmax + 1):
            tot = mpc(0)
            for j, v in F[2 * n].items():
                if j % 2 == 0:
                    tot += v * mom[j // 2]
            out.append(tot)
        return out


def _expansion_inputs(model, x, y, nmax, prec):
    """Numeric vss, gks, delta for the saddle at (x, y)."""
    with mp.workprec(prec):
        x, y = mpc(x), mpc(y)
        smax = 2 * nmax
        imax = smax + 1
        li = [_li_values(1 / (1 - z), imax) for z in _z_args(model, x, y)]
        # V_j for j >= 3 equals sum_z Li_{2-j}(z); index 2-j <= -1
        vss = [sum(lz[j - 2] for lz in li) for j in range(3, smax + 3)]
        gks = [None]
        for k in range(1, smax // 4 + 2):
            if 4 * k - 2 > smax:
                break
            bk = _bernoulli_half(k)
            bkv = mpf(bk.numerator) / bk.denominator / int(_factorial(2 * k))
            row = []
            for j in range(0, smax - (4 * k - 2) + 1):
                idx = 2 * k + j - 2  # Li index 2-2k-j = -idx
                row.append(bkv * sum(lz[idx] for lz in li))
            gks.append(row)
        delta = delta_value(model, x, y)
        return vss, gks, delta


@lru_cache(maxsize=None)
def _factorial(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


# ---------------------------------------------------------------------------
# public interface


@dataclass
class AsymptoticSeries:
    """sqrt(i delta) phi_sigma as a power series in hbar = 2 pi i tau."""
    model: str
    branch: str
    x: object
    V: complex
    delta: complex
    coeffs: list
    digits: int

    @property
    def order(self):
        return len(self.coeffs) - 1


_DEFAULT_TERMS = {"41": 120, "52": 90}


def phi_coefficients(model, branch, x, order=None, digits=300,
                     validate=False, path=None):
    """Asymptotic series of the given branch at x.

    Returns an AsymptoticSeries whose coeffs[n] multiplies (2 pi i tau)^n,
    normalized so coeffs[0] = 1.  With validate=True the run is repeated at
    25% higher precision and compared (raising ConvergenceError on
    mismatch).
    """
    if model not in MODELS:
        raise UsageError(f"unknown model {model!r}")
    if order is None:
        order = _DEFAULT_TERMS[model]
    labels = ["sigma1", "sigma2"] + (["sigma3"] if model == "52" else [])
    if branch not in labels:
        raise UsageError(f"unknown branch {branch!r} for model {model}")

    def run(dg):
        prec = bits_for(dg) + 8 * order.bit_length()
        br = {b.sigma: b for b in branch_data(model, x, dg, path=path)}
        b = br[branch]
        vss, gks, delta = _expansion_inputs(model, b.x, b.y, order, prec)
        if len(gks) > 1:
            with mp.workprec(prec):
                gks[1][0] -= mpf(_NORM_POW[model]) / 24
        coeffs = _phi_from_inputs(vss, gks, delta, order, prec)
        return b, coeffs

    b, coeffs = run(digits)
    if validate:
        _, coeffs2 = run(digits + (digits + 3) // 4)
        tol = term_tol(digits)
        for n, (a, c2) in enumerate(zip(coeffs, coeffs2)):
            scale = max(mpf(1), abs(c2))
            if abs(a - c2) > tol * scale * mpf(10) ** (n // 2):
                raise ConvergenceError(
                    f"phi coefficient {n} unstable under precision increase")
    with mp.workprec(bits_for(digits)):
        V = b.V + _NORM_POW[model] * mp.pi ** 2 / 6
    return AsymptoticSeries(model, branch, x, V, b.delta,
                            list(coeffs), digits)


# ---------------------------------------------------------------------------
# series cache (shared with the resummation stages)


def _num_str(z, digits):
    with mp.workdps(digits + 10):
        return mp.nstr(mpc(z), digits + 5, strip_zeros=False)


def save_series(series, cache_dir):
    """Write an AsymptoticSeries to a JSON cache file; returns the path."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    xkey = str(series.x).replace("/", "over").replace(" ", "")
    name = (f"phi_{series.model}_{series.branch}_{xkey}"
            f"_{series.order}_{series.digits}.json")
    doc = {
        "model": series.model,
        "branch": series.branch,
        "x": str(series.x),
        "digits": series.digits,
        "V": _num_str(series.V, series.digits),
        "delta": _num_str(series.delta, series.digits),
        "coeffs": [_num_str(c, series.digits) for c in series.coeffs],
    }
    out = cache_dir / name
    out.write_text(json.dumps(doc))
    return out


def load_series(path):
    doc = json.loads(Path(path).read_text())
    with mp.workdps(doc["digits"] + 10):
        return AsymptoticSeries(
            doc["model"], doc["branch"], doc["x"],
            mpc(doc["V"]), mpc(doc["delta"]),
            [mpc(c) for c in doc["coeffs"]], doc["digits"])


def cached_phi(model, branch, x, order=None, digits=300, cache_dir=None,
               path=None):
    """phi_coefficients with a read-through JSON cache."""
    if order is None:
        order = _DEFAULT_TERMS[model]
    if cache_dir is not None:
        xkey = str(x).replace("/", "over").replace(" ", "")
        name = f"phi_{model}_{branch}_{xkey}_{order}_{digits}.json"
        f = Path(cache_dir) / name
        if f.exists():
            return load_series(f)
    s = phi_coefficients(model, branch, x, order, digits, path=path)
    if cache_dir is not None:
        save_series(s, cache_dir)
    return s


# ---------------------------------------------------------------------------
# exact low-order data


def order1_symbolic(model):
    """The hbar-coefficient c_1 of sqrt(i delta) phi as a sympy expression.

    Returned as a rational function of (x, y); y is understood to satisfy
    the curve equation (no reduction is applied here).
    """
    import sympy as sp
    x, y = sp.symbols("x y")
    zs = (y, x * y) if model == "41" else (y, x * y, y / x)
    li = {}
    for i in range(3):
        li[i] = sum(sum(c * (1 / (1 - z)) ** k
                        for k, c in enumerate(_euler_poly(i)) if c)
                    for z in zs)
    delta = _quad_const(model) + li[0]
    v3, v4 = li[1], li[2]
    b1 = sp.Rational(_bernoulli_half(1).numerator,
                     _bernoulli_half(1).denominator)
    # the -lam*hbar/24 normalization constant joins the g_1 term
    g1 = b1 / 2 * li[0] - sp.Rational(_NORM_POW[model], 24)
    c1 = v4 / (8 * delta ** 2) - sp.Rational(5, 24) * v3 ** 2 / delta ** 3 \
        + g1
    return sp.together(c1)


def curve_poly_sympy(model):
    """The defining polynomial p(x, y) as a sympy expression."""
    import sympy as sp
    x, y = sp.symbols("x y")
    if model == "41":
        return x * y ** 2 + (x ** 2 - x - 1) * y + 1
    return x * y ** 3 - (x ** 2 + 1) * y ** 2 + (x ** 2 + x + 1) * y - x
