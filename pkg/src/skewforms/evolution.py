"""Evolutionary relations for conservation-law data and event detection.

A relation d(psi) = A1 d(xi1) + A2 d(xi2) built from energy/momentum
components is *identical* exactly when the commutator field
K12 = dA2/dxi1 - dA1/dxi2 vanishes; a nonzero K12 is the obstruction to the
right-hand side being a differential.  On characteristic bundles, the first
vanishing of the transverse Jacobian marks a degenerate-transformation
event; each detected event carries the transported u as its conserved
quantity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .expr import Expr, differentiate, simplify, is_identically_zero

IDENTITY_TOL = 1e-8
EVENT_BRACKET_WIDTH = 1e-6

XI_NAMES = ("xi1", "xi2")


class EvolutionError(Exception):
    pass


class UnsupportedDegreeError(EvolutionError):
    def __init__(self, degree):
        super().__init__(
            f"unsupported degree {degree}: only degree-1 relations are implemented")
        self.degree = degree


@dataclass(frozen=True)
class GridField:
    """Uniform 2-d grid (xi1 time-like along axis 0, xi2 space-like along
    axis 1) carrying named scalar component arrays."""

    origin: tuple
    spacing: tuple
    shape: tuple
    components: dict

    def __post_init__(self):
        if len(self.origin) != 2 or len(self.spacing) != 2 or len(self.shape) != 2:
            raise EvolutionError("grid fields are 2-dimensional")
        if any(h <= 0 for h in self.spacing):
            raise EvolutionError("grid spacings must be positive")
        for name, arr in self.components.items():
            if arr.shape != tuple(self.shape):
                raise EvolutionError(
                    f"component '{name}' shape {arr.shape} != grid shape {self.shape}")

    def axes(self):
        return tuple(self.origin[a] + self.spacing[a] * np.arange(self.shape[a])
                     for a in (0, 1))


@dataclass
class EvolutionaryRelation:
    kind: str                  # "symbolic" or "grid"
    a1: object                 # Expr or ndarray
    a2: object
    commutator: object         # Expr or ndarray (K12)
    grid: GridField | None = None
    identity_tolerance: float = IDENTITY_TOL


@dataclass
class NonidentityReport:
    verdict: str               # "identical" or "non-identical"
    max_abs: float
    location: tuple            # (xi1, xi2) of the maximum
    tolerance: float


@dataclass
class StructureEvent:
    s_star: float
    label: float
    label_index: int
    functional: str            # "jacobian"
    conserved_u: float
    pre_sign: int
    post_sign: int
    bracket: float


def build_relation(a1, a2, degree=1, grid=None, identity_tolerance=None,
                   variables=XI_NAMES):
    """Construct the 1-form relation and its commutator field.

    Symbolic inputs (two Exprs over `variables`) get a symbolic K12; a
    GridField with named components gets 2nd-order central differences on
    interior nodes and one-sided 2nd-order stencils on edges."""
    if degree != 1:
        raise UnsupportedDegreeError(degree)
    if grid is not None:
        try:
            A1 = grid.components[a1] if isinstance(a1, str) else np.asarray(a1, float)
            A2 = grid.components[a2] if isinstance(a2, str) else np.asarray(a2, float)
        except KeyError as err:
            raise EvolutionError(f"unknown grid component {err}") from None
        if A1.shape != tuple(grid.shape) or A2.shape != tuple(grid.shape):
            raise EvolutionError("component shapes must match the grid")
        h1, h2 = grid.spacing
        K = np.gradient(A2, h1, axis=0, edge_order=2) \
            - np.gradient(A1, h2, axis=1, edge_order=2)
        tol = IDENTITY_TOL if identity_tolerance is None else identity_tolerance
        return EvolutionaryRelation("grid", A1, A2, K, grid, tol)
    if not (isinstance(a1, Expr) and isinstance(a2, Expr)):
        raise EvolutionError("symbolic relations need Expr components")
    K = simplify(differentiate(a2, variables[0]) - differentiate(a1, variables[1]))
    tol = IDENTITY_TOL if identity_tolerance is None else identity_tolerance
    return EvolutionaryRelation("symbolic", a1, a2, K, None, tol)


_DEFAULT_SYMBOLIC_GRID = 11
_DEFAULT_SYMBOLIC_BOX = (0.0, 1.0)


def nonidentity_report(rel, seed=ex.ZERO_TEST_SEED, variables=XI_NAMES):
    """Verdict plus the maximum |K12| and its location.

    Grid relations take the maximum over interior nodes (edge stencils are
    one-sided and noisier); ties resolve to the lowest flat index.  Symbolic
    relations are judged by the zero test first, with the magnitude sampled
    on a default 11x11 grid over [0,1]^2."""
    if rel.kind == "grid":
        K = rel.commutator[1:-1, 1:-1]
        if K.size == 0:
            raise EvolutionError("grid too small for interior nodes")
        flat = int(np.argmax(np.abs(K)))
        i, j = np.unravel_index(flat, K.shape)
        max_abs = float(abs(K[i, j]))
        ax1, ax2 = rel.grid.axes()
        location = (float(ax1[i + 1]), float(ax2[j + 1]))
        verdict = "identical" if max_abs < rel.identity_tolerance else "non-identical"
        return NonidentityReport(verdict, max_abs, location, rel.identity_tolerance)
    lo, hi = _DEFAULT_SYMBOLIC_BOX
    axis = np.linspace(lo, hi, _DEFAULT_SYMBOLIC_GRID)
    max_abs, location = 0.0, (float(axis[0]), float(axis[0]))
    for v1 in axis:
        for v2 in axis:
            val = abs(ex.evaluate(rel.commutator,
                                  {variables[0]: float(v1), variables[1]: float(v2)}))
            if val > max_abs:
                max_abs, location = float(val), (float(v1), float(v2))
    if is_identically_zero(rel.commutator, seed=seed):
        return NonidentityReport("identical", max_abs, location,
                                 rel.identity_tolerance)
    verdict = "identical" if max_abs < rel.identity_tolerance else "non-identical"
    return NonidentityReport(verdict, max_abs, location, rel.identity_tolerance)


def jacobian_scan(bundle, bracket_width=EVENT_BRACKET_WIDTH):
    """Detect the first sign change of J along s for each interior label.

    The crossing is refined by bisection on the linear interpolant of J to
    the requested interval width.  The conserved-quantity payload is the
    transported u of the crossing trajectory, read at the last sample at or
    before s* (momenta may diverge at the event itself, but u is carried
    unchanged up to it).  Events sort by s*, ties by label index."""
    if bundle.jacobians is None:
        return []
    s = bundle.jacobian_s
    events = []
    for r in range(bundle.jacobians.shape[0]):
        k = r + 1  # interior label index
        J = bundle.jacobians[r]
        traj = bundle.trajectories[k]
        if traj is None:
            continue
        finite = np.isfinite(J)
        for m in range(len(J) - 1):
            if not (finite[m] and finite[m + 1]):
                break
            if J[m] * J[m + 1] < 0.0:
                a, b = float(s[m]), float(s[m + 1])
                fa, fb = float(J[m]), float(J[m + 1])
                while b - a > bracket_width:
                    mid = 0.5 * (a + b)
                    fm = fa + (fb - fa) * (mid - s[m]) / (s[m + 1] - s[m])
                    if fa * fm < 0.0:
                        b, fb = mid, fm
                    else:
                        a, fa = mid, fm
                s_star = 0.5 * (a + b)
                idx = int(np.searchsorted(traj.s, s_star, side="right")) - 1
                idx = min(max(idx, 0), len(traj) - 1)
                events.append(StructureEvent(
                    s_star=s_star,
                    label=float(bundle.labels[k]),
                    label_index=k,
                    functional="jacobian",
                    conserved_u=float(traj.u[idx]),
                    pre_sign=1 if J[m] > 0 else -1,
                    post_sign=1 if J[m + 1] > 0 else -1,
                    bracket=b - a,
                ))
                break
    events.sort(key=lambda e: (e.s_star, e.label_index))
    return events


def identity_on_structure(trajectory, a1=None, a2=None, use_carried_momenta=False,
                          variables=XI_NAMES):
    """Residual |(u_end - u_start) - trapezoid integral of omega| along a
    realized trajectory (n = 2).

    omega's coefficients come either from Exprs over (xi1, xi2) evaluated at
    the trajectory samples, or (use_carried_momenta) from the transported
    momenta themselves.  A residual near zero certifies that the relation is
    identical on the structure."""
    x = trajectory.x
    if x.shape[1] != 2:
        raise EvolutionError("identity check supports 2-dimensional trajectories")
    N = len(trajectory)
    if N < 2:
        raise EvolutionError("trajectory too short")
    if use_carried_momenta:
        A = trajectory.p
    else:
        if a1 is None or a2 is None:
            raise EvolutionError("need omega components or use_carried_momenta")
        A = np.empty((N, 2))
        for m in range(N):
            bindings = {variables[0]: float(x[m, 0]), variables[1]: float(x[m, 1])}
            A[m, 0] = ex.evaluate(a1, bindings)
            A[m, 1] = ex.evaluate(a2, bindings)
    integral = 0.0
    for m in range(N - 1):
        dx = x[m + 1] - x[m]
        integral += 0.5 * float(np.dot(A[m] + A[m + 1], dx))
    return abs((float(trajectory.u[-1]) - float(trajectory.u[0])) - integral)


# ---------------------------------------------------------------------------
# file formats


def grid_field_to_dict(gf):
    return {
        "origin": list(gf.origin),
        "spacing": list(gf.spacing),
        "shape": list(gf.shape),
        "components": {name: [float(v) for v in arr.ravel()]
                       for name, arr in sorted(gf.components.items())},
    }


def grid_field_from_dict(doc):
    shape = tuple(doc["shape"])
    comps = {name: np.array(vals, float).reshape(shape)
             for name, vals in doc["components"].items()}
    return GridField(tuple(doc["origin"]), tuple(doc["spacing"]), shape, comps)


def events_to_dicts(events):
    return [
        {"s_star": e.s_star, "label": e.label, "functional": e.functional,
         "conserved_u": e.conserved_u, "bracket": e.bracket}
        for e in events
    ]
