"""Legendre transform analysis and degeneracy detection.

The transform is numeric-first: for each velocity sample v on a box grid,
p = grad L(v) and H = p.v - L(v), producing a scattered (p, H) table.  A
closed-form H is emitted only in a narrow recognizable case (see
`closed_form_transform`); general symbolic inversion of grad L is out of
scope.  Degeneracy (vanishing Hessian determinant) is the central
diagnostic: a degenerate point is where the transform stops preserving the
differential.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import expr as ex
from .expr import Expr, differentiate, simplify, is_identically_zero
from .characteristics import PdeProblem

DEGENERACY_TOL = 1e-12


class LegendreError(Exception):
    pass


class DegeneracyError(LegendreError):
    def __init__(self, location, det):
        super().__init__(
            f"Hessian determinant {det:.3e} below {DEGENERACY_TOL:.0e} at v = {location}")
        self.location = location
        self.det = det


class NameCollisionError(LegendreError):
    pass


def default_velocity_names(m):
    return ("v",) if m == 1 else tuple(f"v{i + 1}" for i in range(m))


def default_momentum_names(m):
    return ("p",) if m == 1 else tuple(f"p{i + 1}" for i in range(m))


def hessian_determinant(L, names):
    """Symbolic determinant of the velocity Hessian (m <= 2)."""
    m = len(names)
    if m not in (1, 2):
        raise LegendreError("only m in {1, 2} is supported")
    grads = [differentiate(L, v) for v in names]
    H = [[differentiate(grads[i], names[j]) for j in range(m)] for i in range(m)]
    if m == 1:
        return H[0][0]
    return simplify(H[0][0] * H[1][1] - H[0][1] * H[1][0])


@dataclass
class LegendreResult:
    m: int
    velocity_names: tuple
    momentum_names: tuple
    v_samples: np.ndarray       # (N, m)
    p_samples: np.ndarray       # (N, m)
    h_values: np.ndarray        # (N,)
    hessian_det: Expr
    closed_form: Expr | None    # H as Expr over momentum names, when known


def _grid_points(domain, grid):
    axes = [np.linspace(lo, hi, grid) for lo, hi in domain]
    if len(axes) == 1:
        return axes[0][:, None]
    A, B = np.meshgrid(axes[0], axes[1], indexing="ij")
    return np.column_stack([A.ravel(), B.ravel()])


def closed_form_transform(L, name):
    """Decision rule for a symbolic H: L must simplify to a single monomial
    c*v^k with rational c > 0 and integer k in {2, 3, 4}.  Then v(p) =
    (p/(c k))^(1/(k-1)) and H = (1 - 1/k) (c k)^(-1/(k-1)) p^(k/(k-1)),
    valid on the branch v > 0 (all v for k = 2).  Returns None otherwise."""
    s = simplify(L)
    c, k = None, None
    if isinstance(s, ex.Pow) and s.base == ex.Var(name) and \
            isinstance(s.exponent, ex.Const) and s.exponent.value.denominator == 1:
        c, k = Fraction(1), int(s.exponent.value)
    elif isinstance(s, ex.Mul) and len(s.factors) == 2 and \
            isinstance(s.factors[0], ex.Const):
        inner = s.factors[1]
        if isinstance(inner, ex.Pow) and inner.base == ex.Var(name) and \
                isinstance(inner.exponent, ex.Const) and \
                inner.exponent.value.denominator == 1:
            c, k = s.factors[0].value, int(inner.exponent.value)
    if c is None or not (2 <= k <= 4) or c <= 0:
        return None
    p = ex.Var(default_momentum_names(1)[0])
    ck = ex.Const(c * k)
    scale = ex.Const(Fraction(k - 1, k))
    expo = ex.Const(Fraction(k, k - 1))
    inv = ex.Pow(ck, ex.Const(Fraction(-1, k - 1)))
    return simplify(ex.Mul((scale, inv, ex.Pow(p, expo))))


def legendre_transform(L, domain, grid, velocity_names=None):
    """Numeric Legendre transform of L over a box in velocity space.

    Raises DegeneracyError at the first sample where |det Hess L| falls
    below 1e-12 (the transform is not invertible there)."""
    m = len(domain)
    names = tuple(velocity_names) if velocity_names else default_velocity_names(m)
    if len(names) != m:
        raise LegendreError("velocity name count must match domain")
    det = hessian_determinant(L, names)
    grads = [differentiate(L, v) for v in names]
    points = _grid_points(domain, grid)
    N = len(points)
    p_samples = np.empty((N, m))
    h_values = np.empty(N)
    for row, v in enumerate(points):
        bindings = dict(zip(names, v))
        dval = ex.evaluate(det, bindings)
        if abs(dval) < DEGENERACY_TOL:
            raise DegeneracyError(tuple(float(c) for c in v), dval)
        p = np.array([ex.evaluate(g, bindings) for g in grads])
        p_samples[row] = p
        h_values[row] = float(np.dot(p, v)) - ex.evaluate(L, bindings)
    closed = closed_form_transform(L, names[0]) if m == 1 else None
    return LegendreResult(m, names, default_momentum_names(m),
                          points, p_samples, h_values, det, closed)


@dataclass
class DegeneracyReport:
    hessian_det: Expr
    identically_degenerate: bool
    zeros: list   # locations in v-space where det changes sign


def degeneracy_check(L, domain=None, velocity_names=None, seed=ex.ZERO_TEST_SEED):
    """Symbolic Hessian determinant plus a verdict.

    "Identically degenerate" when the determinant passes the zero test
    (symbolic path overrides sampling).  Otherwise, when a domain is given,
    sign-change zeros are located by bisection on a 101-point per-axis grid
    to a tolerance of 1e-10 in v."""
    m = len(domain) if domain is not None else (len(velocity_names) if velocity_names else 1)
    names = tuple(velocity_names) if velocity_names else default_velocity_names(m)
    det = hessian_determinant(L, names)
    if is_identically_zero(det, seed=seed):
        return DegeneracyReport(det, True, [])
    zeros = []
    if domain is not None:
        zeros = _scan_zeros(det, names, domain)
    return DegeneracyReport(det, False, zeros)


def _scan_zeros(det, names, domain, grid=101, tol=1e-10):
    m = len(domain)
    zeros = []
    if m == 1:
        axis = np.linspace(domain[0][0], domain[0][1], grid)
        zeros = [(z,) for z in _bisect_line(det, names, axis, {}, names[0], tol)]
        return zeros
    # m == 2: scan along each axis with the other coordinate at grid nodes
    ax0 = np.linspace(domain[0][0], domain[0][1], grid)
    ax1 = np.linspace(domain[1][0], domain[1][1], grid)
    for v1 in ax1:
        for z in _bisect_line(det, names, ax0, {names[1]: v1}, names[0], tol):
            zeros.append((z, float(v1)))
    for v0 in ax0:
        for z in _bisect_line(det, names, ax1, {names[0]: v0}, names[1], tol):
            zeros.append((float(v0), z))
    return sorted(set(zeros))


def _bisect_line(det, names, axis, fixed, scan_name, tol):
    vals = []
    for v in axis:
        bindings = dict(fixed)
        bindings[scan_name] = float(v)
        vals.append(ex.evaluate(det, bindings))
    found = []
    for i in range(len(axis) - 1):
        a, b = float(axis[i]), float(axis[i + 1])
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            found.append(a)
            continue
        if fa * fb >= 0.0:
            continue
        while b - a > tol:
            mid = 0.5 * (a + b)
            bindings = dict(fixed)
            bindings[scan_name] = mid
            fm = ex.evaluate(det, bindings)
            if fm == 0.0:
                a = b = mid
                break
            if fa * fm < 0.0:
                b, fb = mid, fm
            else:
                a, fa = mid, fm
        found.append(0.5 * (a + b))
    if vals and vals[-1] == 0.0:
        found.append(float(axis[-1]))
    return found


def involution_error(L, domain, grid, velocity_names=None):
    """max |L(v) - Legendre(Legendre(L))(v)| over the sample grid (m = 1).

    The double transform is evaluated through the scattered (p, H) table:
    slopes w_i = dH/dp at the table nodes come from local quadratic fits
    (exact H values at the nodes, no interpolation of H itself), giving
    L2_i = w_i p_i - H_i compared against L(w_i)."""
    if len(domain) != 1:
        raise LegendreError("involution check supports m = 1 only")
    result = legendre_transform(L, domain, grid, velocity_names)
    name = result.velocity_names[0]
    p = result.p_samples[:, 0]
    H = result.h_values
    order = np.argsort(p)
    p, H = p[order], H[order]
    w = _nonuniform_derivative(p, H)
    L2 = w * p - H
    err = 0.0
    for wi, l2 in zip(w, L2):
        err = max(err, abs(ex.evaluate(L, {name: float(wi)}) - float(l2)))
    return err


def _nonuniform_derivative(x, y):
    """Node derivatives from three-point quadratic fits (2nd order on a
    non-uniform grid, one-sided at the ends)."""
    n = len(x)
    d = np.empty(n)
    for i in range(n):
        j = min(max(i, 1), n - 2)
        x0, x1, x2 = x[j - 1], x[j], x[j + 1]
        y0, y1, y2 = y[j - 1], y[j], y[j + 1]
        xi = x[i]
        d[i] = (y0 * (2 * xi - x1 - x2) / ((x0 - x1) * (x0 - x2))
                + y1 * (2 * xi - x0 - x2) / ((x1 - x0) * (x1 - x2))
                + y2 * (2 * xi - x0 - x1) / ((x2 - x0) * (x2 - x1)))
    return d


def hamilton_jacobi_problem(H, n, x_names=None, u_name="u", p_names=None):
    """PdeProblem with F = p1 + H(x2..xn, p2..pn), ready for the
    characteristic machinery (x1 is time-like)."""
    x_names = tuple(x_names) if x_names else tuple(f"x{i + 1}" for i in range(n))
    p_names = tuple(p_names) if p_names else tuple(f"p{i + 1}" for i in range(n))
    allowed = set(x_names[1:]) | set(p_names[1:])
    used = ex.variables(H)
    bad = used - allowed
    if bad:
        raise NameCollisionError(
            f"H may only reference {sorted(allowed)}; found {sorted(bad)}")
    F = simplify(ex.Var(p_names[0]) + H)
    return PdeProblem(n, x_names, u_name, p_names, F)
