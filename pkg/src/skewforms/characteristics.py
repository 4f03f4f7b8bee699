"""First-order-PDE consistency analysis via characteristic strips.

For F(x^1..x^n, u, p_1..p_n) = 0 the characteristic system is the standard
strip normalization of the ratio condition:

    dx^i/ds = dF/dp_i
    dp_i/ds = -(dF/dx^i + p_i dF/du)
    du/ds   = sum_i p_i dF/dp_i

so the consistency condition du = sum p_i dx^i holds identically along the
integrated curve.  Integration is classical 4th-order fixed step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .expr import Expr, differentiate, simplify

STRIP_TOLERANCE = 1e-10
DEFAULT_STEP = 1e-3


class CharacteristicsError(Exception):
    pass


class InadmissibleStripError(CharacteristicsError):
    def __init__(self, residual, tolerance):
        super().__init__(
            f"initial strip violates F = 0: |F| = {residual:.3e} > {tolerance:.1e}")
        self.residual = residual
        self.tolerance = tolerance


@dataclass(frozen=True)
class PdeProblem:
    n: int
    x_names: tuple
    u_name: str
    p_names: tuple
    F: Expr

    def __post_init__(self):
        if self.n < 1:
            raise CharacteristicsError("dimension must be >= 1")
        if len(self.x_names) != self.n or len(self.p_names) != self.n:
            raise CharacteristicsError("variable name counts must equal n")
        declared = set(self.x_names) | {self.u_name} | set(self.p_names)
        if len(declared) != 2 * self.n + 1:
            raise CharacteristicsError("variable names must be distinct")
        undeclared = ex.variables(self.F) - declared
        if undeclared:
            raise CharacteristicsError(
                f"F references undeclared names: {sorted(undeclared)}")

    @property
    def all_names(self):
        return self.x_names + (self.u_name,) + self.p_names


@dataclass(frozen=True)
class CharacteristicStrip:
    x: tuple
    u: float
    p: tuple


@dataclass(frozen=True)
class CharacteristicSystem:
    """Symbolic right-hand sides over (x, u, p)."""

    dx: tuple   # n Exprs
    dp: tuple   # n Exprs
    du: Expr


@dataclass
class Trajectory:
    s: np.ndarray            # (N,)
    x: np.ndarray            # (N, n)
    u: np.ndarray            # (N,)
    p: np.ndarray            # (N, n)
    f_residual: np.ndarray   # (N,)
    strip_residual: np.ndarray
    aborted: str | None = None

    def __len__(self):
        return len(self.s)


@dataclass
class Bundle:
    trajectories: list
    labels: list
    transverse: int
    errors: dict = field(default_factory=dict)  # strip index -> message
    jacobian_s: np.ndarray | None = None        # (M,)
    jacobians: np.ndarray | None = None         # (n_interior, M)

    def interior_labels(self):
        return self.labels[1:-1]


def characteristic_system(problem):
    F = problem.F
    dx = tuple(differentiate(F, p) for p in problem.p_names)
    Fu = differentiate(F, problem.u_name)
    dp = tuple(
        simplify(-(differentiate(F, xi) + ex.Var(pi) * Fu))
        for xi, pi in zip(problem.x_names, problem.p_names))
    du = simplify(ex.Add(tuple(ex.Var(pi) * di
                               for pi, di in zip(problem.p_names, dx))))
    return CharacteristicSystem(dx, dp, du)


def _compiled_rhs(problem, system, du_override=None):
    names = problem.all_names
    du = system.du if du_override is None else du_override
    # state order is (x, u, p)
    fns = [ex.compile_expr(e, names) for e in system.dx] + \
          [ex.compile_expr(du, names)] + \
          [ex.compile_expr(e, names) for e in system.dp]

    def rhs(state):
        args = tuple(state)
        return np.array([fn(*args) for fn in fns])

    return rhs


def f_residual_fn(problem):
    fn = ex.compile_expr(problem.F, problem.all_names)
    return lambda state: abs(fn(*state))


def integrate_strip(problem, strip0, s_max, h=DEFAULT_STEP,
                    strip_tolerance=STRIP_TOLERANCE, du_override=None):
    """RK4 integration of the characteristic system.

    The state vector is (x, u, p).  Each sample records |F| and the
    consistency residual |du/ds - sum p_i dx^i/ds| recomputed from the
    right-hand sides actually used (so a user-supplied du/ds override is
    checked too).  Domain errors or non-finite values abort the trajectory,
    returning the partial result with an `aborted` marker."""
    if h <= 0 or s_max < h:
        raise CharacteristicsError("need h > 0 and s_max >= h")
    n = problem.n
    f_res = f_residual_fn(problem)
    state0 = np.array(list(strip0.x) + [strip0.u] + list(strip0.p), dtype=float)
    res0 = f_res(state0)
    if res0 >= strip_tolerance:
        raise InadmissibleStripError(res0, strip_tolerance)

    system = characteristic_system(problem)
    rhs = _compiled_rhs(problem, system, du_override)
    steps = max(int(math.floor(s_max / h + 1e-9)), 1)

    samples = [state0]
    aborted = None
    y = state0
    # momenta may legitimately diverge (e.g. at a gradient catastrophe);
    # overflow then shows up as a non-finite state and aborts the trajectory
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(steps):
            try:
                k1 = rhs(y)
                if np.all(np.abs(k1[:n]) < 1e-14):
                    aborted = "singular direction: all dF/dp_i vanish"
                    break
                k2 = rhs(y + 0.5 * h * k1)
                k3 = rhs(y + 0.5 * h * k2)
                k4 = rhs(y + h * k3)
            except (ex.EvalDomainError, ZeroDivisionError) as err:
                aborted = f"domain error during integration: {err}"
                break
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(y)):
                aborted = "state became non-finite"
                break
            samples.append(y)

        arr = np.array(samples)
        N = len(samples)
        s = np.arange(N) * h
        x = arr[:, :n]
        u = arr[:, n]
        p = arr[:, n + 1:]
        f_residual = np.empty(N)
        strip_res = np.empty(N)
        for m in range(N):
            state = arr[m]
            try:
                f_residual[m] = f_res(state)
                k = rhs(state)
                strip_res[m] = abs(k[n] - float(np.dot(state[n + 1:], k[:n])))
            except (ex.EvalDomainError, ZeroDivisionError):
                f_residual[m] = np.nan
                strip_res[m] = np.nan
    return Trajectory(s, x, u, p, f_residual, strip_res, aborted)


def strip_residual(trajectory):
    """Per-sample consistency residuals (recorded during integration)."""
    return trajectory.strip_residual


def dual_residual(trajectory):
    """max |F| over the trajectory: certifies dF = 0 along the realized
    structure within integration tolerance."""
    if len(trajectory) == 0:
        raise CharacteristicsError("empty trajectory")
    vals = trajectory.f_residual
    vals = vals[np.isfinite(vals)]
    if len(vals) == 0:
        raise CharacteristicsError("no finite F-residual samples")
    return float(np.max(vals))


def solve_bundle(problem, strips, labels, transverse, s_max, h=DEFAULT_STEP,
                 strip_tolerance=STRIP_TOLERANCE):
    """Integrate a 1-parameter family of strips and attach scalar transverse
    Jacobian samples J(s; k) = (x_t(s; k+1) - x_t(s; k-1)) / (label_{k+1} -
    label_{k-1}) for each interior index k.

    Per-strip failures are isolated in `errors`; Jacobian samples cover the
    range of s where all needed trajectories are still alive."""
    if len(strips) < 3:
        raise CharacteristicsError("a bundle needs at least 3 strips")
    if len(labels) != len(strips):
        raise CharacteristicsError("labels and strips must align")
    if not 0 <= transverse < problem.n:
        raise CharacteristicsError(f"transverse index {transverse} out of range")
    trajectories = []
    errors = {}
    for k, strip in enumerate(strips):
        try:
            trajectories.append(
                integrate_strip(problem, strip, s_max, h, strip_tolerance))
        except InadmissibleStripError as err:
            trajectories.append(None)
            errors[k] = str(err)
    bundle = Bundle(trajectories, list(labels), transverse, errors)

    interior = range(1, len(strips) - 1)
    rows = []
    min_len = None
    for k in interior:
        lo, hi = trajectories[k - 1], trajectories[k + 1]
        if lo is None or hi is None:
            rows.append(None)
            continue
        m = min(len(lo), len(hi))
        min_len = m if min_len is None else min(min_len, m)
        rows.append((lo, hi, labels[k + 1] - labels[k - 1]))
    if min_len is None or min_len == 0:
        return bundle
    J = np.full((len(rows), min_len), np.nan)
    for r, row in enumerate(rows):
        if row is None:
            continue
        lo, hi, dlabel = row
        J[r] = (hi.x[:min_len, transverse] - lo.x[:min_len, transverse]) / dlabel
    bundle.jacobian_s = np.arange(min_len) * h
    bundle.jacobians = J
    return bundle
