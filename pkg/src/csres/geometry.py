"""Spectral curves of the two knot models: branches, volumes, 1-loop data.

Each model carries a plane curve p(x, y) = 0 whose y-fiber over generic x
has r points (r = 2 for the two-term model "41", r = 3 for "52").  On the
exponentiated curve the function V (a dilogarithm sum) is holomorphic with
values in C / 2 pi^2 Z; we compute a definite lift by tracking branch and
logarithm choices along a path from the base point x = 1.  The 1-loop
quantity delta is a rational function on the curve that vanishes exactly
over the roots of the y-discriminant.
"""

from dataclasses import dataclass

from mpmath import mp, mpc, mpf, polyroots, polyval

from .errors import DegenerateError, NumericalError, UsageError
from .numkernel import pole_tol, working_prec

MODELS = ("41", "52")

# y-discriminant of the curve, as integer coefficient lists (highest first)
_DISC_FACTORS = {
    "41": [[1, -3, 1], [1, 1, 1]],
    "52": [[1, -6, 11, -12, -11, -12, 11, -6, 1]],
}


def _check_model(model):
    if model not in MODELS:
        raise UsageError(f"unknown model {model!r}")


def y_polynomial(model, x):
    """Coefficients (highest degree first) of the y-fiber polynomial at x."""
    _check_model(model)
    if model == "41":
        # -x^2 y = (1 - y)(1 - x y)  <=>  x y^2 + (x^2 - x - 1) y + 1 = 0
        return [x, x * x - x - 1, mpf(1)]
    # y^2 = (1 - y)(1 - x y)(1 - y/x)
    #   <=>  y^3 - (x + 1/x) y^2 + (1 + x + 1/x) y - 1 = 0
    return [mpf(1), -(x + 1 / x), 1 + x + 1 / x, mpf(-1)]


def curve_value(model, x, y):
    """Residual of the defining polynomial at (x, y)."""
    return polyval(y_polynomial(model, x), y)


def delta_value(model, x, y):
    """The 1-loop invariant as a rational function of a curve point."""
    _check_model(model)
    if model == "41":
        return -(1 - x * y * y) / (x * x * y)
    return y - (1 + x + 1 / x) / y + 2 / (y * y)


def disc_roots(model, digits=30):
    """All roots of the y-discriminant of the curve."""
    _check_model(model)
    with working_prec(digits + 10):
        roots = []
        for fac in _DISC_FACTORS[model]:
            roots.extend(polyroots([mpf(c) for c in fac], extraprec=50))
        return [mpc(r) for r in roots]


def _fiber_roots(model, x, digits):
    coeffs = y_polynomial(model, mpc(x))
    tol = pole_tol(digits)
    dmag = mpf(1)
    for fac in _DISC_FACTORS[model]:
        dmag *= abs(polyval([mpf(c) for c in fac], mpc(x)))
    if dmag / (1 + abs(mpc(x))) ** 8 < tol:
        raise DegenerateError(f"x={x} is within tolerance of a branch point")
    try:
        roots = polyroots(coeffs, extraprec=80, maxsteps=200)
    except mp.libmp.NoConvergence as exc:  # pragma: no cover
        raise DegenerateError(f"fiber roots did not separate at x={x}") from exc
    roots = [mpc(r) for r in roots]
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) < tol:
                raise DegenerateError(f"colliding fiber roots at x={x}")
    return roots


def critical_points(model, x, digits=30):
    """The r points of the y-fiber over x, as unlabeled Branch records."""
    with working_prec(digits):
        return [Branch("", mpc(x), y, None, delta_value(model, mpc(x), y))
                for y in _fiber_roots(model, x, digits)]


@dataclass
class Branch:
    """One sheet of the curve over a given x."""
    sigma: str
    x: complex
    y: complex
    V: complex
    delta: complex


# ---------------------------------------------------------------------------
# V and its continuation
#
# V is a sum of dilogarithms of the arguments z_j (z = (y, xy) for "41",
# z = (y, xy, y/x) for "52") plus elementary terms in u = log x and
# v = log(-y).  Along a continuation path we keep u and v continuous and,
# for each z_j, count signed crossings of the dilogarithm cut (1, oo)
# (winding w_j) and of the logarithm cut (-oo, 0) while w_j != 0 (acc_j).
# The continued dilogarithm is then Li2(z) - 2 pi i w Log(z) + 4 pi^2 acc,
# an exact closed form at the endpoint.


def _li2_args(model, x, y):
    if model == "41":
        return (y, x * y)
    return (y, x * y, y / x)


class _SheetState:
    def __init__(self, model, x, y):
        self.model = model
        self.x = mpc(x)
        self.y = mpc(y)
        self.u = mp.log(self.x)
        self.v = mp.log(-self.y)
        self.z = list(_li2_args(model, self.x, self.y))
        self.w = [0] * len(self.z)
        self.acc = [0] * len(self.z)

    def advance(self, x1, y1):
        """Move to the adjacent fiber point (x1, y1); steps must be small."""
        x1, y1 = mpc(x1), mpc(y1)
        self.u += mp.log(x1 / self.x)
        self.v += mp.log(y1 / self.y)
        z1 = list(_li2_args(self.model, x1, y1))
        for j, (z0, zn) in enumerate(zip(self.z, z1)):
            i0, i1 = mp.im(z0), mp.im(zn)
            if (i0 > 0) != (i1 > 0) and i0 != i1:
                t = i0 / (i0 - i1)
                xc = mp.re(z0) + t * (mp.re(zn) - mp.re(z0))
                up = i1 > i0
                if xc > 1:
                    # dilogarithm cut
                    self.w[j] += 1 if up else -1
                elif xc < 0:
                    # principal Log jump under the -2 pi i w Log(z) term
                    self.acc[j] += -self.w[j] if up else self.w[j]
        self.x, self.y, self.z = x1, y1, z1

    def v_value(self):
        """The continued lift of V at the current point."""
        total = mpc(0)
        for z, w, a in zip(self.z, self.w, self.acc):
            total += mp.polylog(2, z) - 2j * mp.pi * w * mp.log(z) \
                + 4 * mp.pi ** 2 * a
        u, v = self.u, self.v
        if self.model == "41":
            total += v * v / 2 + 2 * u * v
        else:
            total += v * v
        return total

    def crit_residual(self):
        """Saddle equation with the continued logarithm choices."""
        r = (2 * self.u if self.model == "41" else self.v) + self.v
        for z, w in zip(self.z, self.w):
            r -= mp.log(1 - z) + 2j * mp.pi * w
        return r


def _continue_sheets(model, path, digits):
    """Track all sheets along `path` (list of x waypoints, starting at 1)."""
    roots = _fiber_roots(model, path[0], digits)
    states = [_SheetState(model, path[0], y) for y in roots]
    for s in states:
        # at the base point x = 1 all dilogarithm arguments coincide, so
        # the saddle equation fixes only the total winding; park it on w[0]
        k = mp.nint(mp.im(s.crit_residual()) / (2 * mp.pi))
        if abs(s.crit_residual() - 2j * mp.pi * k) > pole_tol(digits):
            raise NumericalError("base-point saddle equation not integral")
        s.w[0] += int(k)
    for a, b in zip(path, path[1:]):
        t, step = mpf(0), mpf(1) / 8
        while t < 1:
            x1 = a + min(t + step, mpf(1)) * (b - a)
            try:
                roots = _fiber_roots(model, x1, digits)
            except DegenerateError:
                if step < mpf(2) ** -40:
                    raise
                step /= 2
                continue
            gap = min(abs(roots[i] - roots[j])
                      for i in range(len(roots))
                      for j in range(i + 1, len(roots)))
            move = max(min(abs(r - s.y) for r in roots) for s in states)
            rel = max(max(abs(zz / z0 - 1) for zz, z0 in
                          zip(_li2_args(model, x1, min(roots, key=lambda r:
                                                       abs(r - s.y))), s.z))
                      for s in states)
            if move > gap / 4 or rel > mpf("0.5"):
                if step < mpf(2) ** -40:
                    raise DegenerateError(
                        f"continuation stalled near x={x1}")
                step /= 2
                continue
            taken = []
            for s in states:
                y1 = min(roots, key=lambda r: abs(r - s.y))
                s.advance(x1, y1)
                taken.append(y1)
            if len({min(range(len(roots)), key=lambda i: abs(roots[i] - y))
                    for y in taken}) != len(states):
                raise NumericalError("sheet tracking lost injectivity")
            t = min(t + step, mpf(1))
            step = min(2 * step, mpf(1) / 8)
    return states


def branch_data(model, x, digits=30, path=None):
    """Labeled branches over x with V and delta, continued from x = 1.

    The labels sigma1 (geometric: largest Im V at the base point), sigma2
    (conjugate) and, for "52", sigma3 (real) are assigned at x = 1 and
    carried along the path, which defaults to the straight segment and must
    avoid the discriminant roots.
    """
    _check_model(model)
    with working_prec(digits + 10):
        if path is None:
            path = [mpc(1), mpc(x)]
        else:
            path = [mpc(p) for p in path]
            if abs(path[0] - 1) > pole_tol(digits):
                raise UsageError("continuation paths must start at x = 1")
        states = _continue_sheets(model, path, digits)
        base = sorted(states, key=lambda s: -mp.im(s.v_value()))
        if model == "52":
            base = [base[0], base[2], base[1]]
        tol = pole_tol(digits)
        out = []
        for i, s in enumerate(base):
            V = s.v_value()
            if abs(s.crit_residual()) > tol:
                raise NumericalError(
                    "continued saddle equation failed on sheet "
                    f"{i + 1} at x={x}")
            if abs(curve_value(model, s.x, s.y)) > tol * (1 + abs(s.x)) ** 3:
                raise NumericalError(f"point left the curve at x={x}")
            out.append(Branch(f"sigma{i + 1}", s.x, s.y, V,
                              delta_value(model, s.x, s.y)))
        return out


def reflection_residuals(x, digits=30):
    """Probe the two candidate forms of the sigma2 reflection rule.

    For the two-sheet model, compares V(sigma2) at 1/x against V(sigma2)
    at x minus each of 2 pi i x and 2 pi i log x, returning both residuals
    (taken mod 2 pi^2, as V itself is only defined up to that lattice).
    """
    with working_prec(digits):
        va = branch_data("41", x, digits)[1].V
        vb = branch_data("41", 1 / mpc(x), digits)[1].V
        period = 2 * mp.pi ** 2

        def modres(r):
            n = mp.nint(mp.re(r) / period)
            return abs(r - n * period)

        return {
            "linear": modres(vb - va + 2j * mp.pi * mpc(x)),
            "log": modres(vb - va + 2j * mp.pi * mp.log(mpc(x))),
        }
