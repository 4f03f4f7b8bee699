"""Skew-symmetric differential form algebra.

Forms are stored canonically: a map from strictly increasing 0-based index
tuples to Expr coefficients.  Arbitrary-order input indices are normalized
with the permutation-parity sign rule; repeated indices vanish.

A FrameSpec carries structure coefficients c^k_{ij} (i < j) modeling a
non-closed basis, d(dx^k) = sum_{i<j} c^k_{ij} dx^i ^ dx^j.  The all-zero
frame is the integrable case where basis differentials vanish.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import expr as ex
from .expr import Expr, simplify, differentiate, is_identically_zero


class FormError(Exception):
    pass


class DimensionMismatchError(FormError):
    pass


class DegreeError(FormError):
    pass


def _normalize_index(index):
    """Sort an index tuple, returning (sorted tuple, parity sign) or
    (None, 0) when an index repeats."""
    idx = list(index)
    if len(set(idx)) != len(idx):
        return None, 0
    sign = 1
    # insertion sort, counting swaps
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return tuple(idx), sign


@dataclass(frozen=True)
class ExteriorForm:
    n: int
    variables: tuple
    degree: int
    terms: dict = field(default_factory=dict)

    def coefficient(self, index):
        idx, sign = _normalize_index(index)
        if sign == 0:
            return ex.ZERO
        coeff = self.terms.get(idx)
        if coeff is None:
            return ex.ZERO
        return coeff if sign == 1 else simplify(-coeff)

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        _check_compatible(self, other)
        if self.degree != other.degree:
            raise DegreeError("cannot add forms of different degree")
        terms = dict(self.terms)
        for idx, c in other.terms.items():
            terms[idx] = terms[idx] + c if idx in terms else c
        return make_form(self.n, self.variables, self.degree, terms)

    def scale(self, factor):
        return make_form(self.n, self.variables, self.degree,
                         {idx: factor * c for idx, c in self.terms.items()})


def make_form(n, variables, degree, terms):
    """Build a form, normalizing index order/parity and dropping structurally
    zero coefficients."""
    variables = tuple(variables)
    if len(variables) != n:
        raise DimensionMismatchError(f"{len(variables)} names for dimension {n}")
    if not 0 <= degree <= n:
        raise DegreeError(f"degree {degree} outside [0, {n}]")
    canon = {}
    for index, coeff in terms.items():
        index = tuple(index)
        if len(index) != degree:
            raise DegreeError(f"index {index} has length != degree {degree}")
        if any(not 0 <= i < n for i in index):
            raise DimensionMismatchError(f"index {index} outside dimension {n}")
        idx, sign = _normalize_index(index)
        if sign == 0:
            continue
        signed = coeff if sign == 1 else -coeff
        canon[idx] = canon[idx] + signed if idx in canon else signed
    cleaned = {}
    for idx, coeff in canon.items():
        s = simplify(coeff)
        if isinstance(s, ex.Const) and s.value == 0:
            continue
        cleaned[idx] = s
    return ExteriorForm(n, variables, degree, cleaned)


def zero_form(n, variables, degree):
    return make_form(n, variables, degree, {})


def basis_one_form(n, variables, i):
    """dx^i (0-based)."""
    return make_form(n, variables, 1, {(i,): ex.ONE})


def scalar_form(n, variables, coeff):
    """Degree-0 form with the given coefficient."""
    return make_form(n, variables, 0, {(): coeff})


@dataclass(frozen=True)
class FrameSpec:
    """Structure coefficients of the basis: c maps (k, i, j) with i < j to an
    Expr.  Missing entries are zero; the empty frame is the integrable one."""

    n: int
    c: dict = field(default_factory=dict)

    def is_zero(self):
        return not self.c

    def basis_differential(self, variables, k):
        """d(dx^k) as a 2-form."""
        terms = {}
        for (kk, i, j), coeff in self.c.items():
            if kk == k:
                terms[(i, j)] = coeff
        return make_form(self.n, tuple(variables), 2, terms)


ZERO_FRAME_CACHE = {}


def zero_frame(n):
    if n not in ZERO_FRAME_CACHE:
        ZERO_FRAME_CACHE[n] = FrameSpec(n, {})
    return ZERO_FRAME_CACHE[n]


@dataclass(frozen=True)
class Loop:
    """Closed polygon in R^n; the last vertex connects back to the first."""

    vertices: tuple
    samples_per_edge: int = 16

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise FormError("a loop needs at least 3 vertices")
        if self.samples_per_edge < 1:
            raise FormError("samples_per_edge must be positive")
        m = len(self.vertices)
        for a in range(m):
            b = (a + 1) % m
            if tuple(self.vertices[a]) == tuple(self.vertices[b]):
                raise FormError("consecutive loop vertices must be distinct")


def _check_compatible(a, b):
    if a.n != b.n or a.variables != b.variables:
        raise DimensionMismatchError(
            f"incompatible forms: n={a.n}/{b.n}, vars {a.variables}/{b.variables}")


def wedge(a, b):
    """Exterior product.  Bilinear; terms with repeated indices vanish and
    reordering contributes the permutation-parity sign."""
    _check_compatible(a, b)
    if a.degree + b.degree > a.n:
        raise DegreeError(
            f"wedge degree {a.degree}+{b.degree} exceeds dimension {a.n}")
    terms = {}
    for ia, ca in a.terms.items():
        for ib, cb in b.terms.items():
            combined = ia + ib
            idx, sign = _normalize_index(combined)
            if sign == 0:
                continue
            contrib = ca * cb if sign == 1 else -(ca * cb)
            terms[idx] = terms[idx] + contrib if idx in terms else contrib
    return make_form(a.n, a.variables, a.degree + b.degree, terms)


def exterior_derivative(theta, frame=None):
    """d(theta): the coefficient-differential term plus, for a non-zero
    frame, the basis term a_I * d(dx^I) expanded by the product rule."""
    if frame is None:
        frame = zero_frame(theta.n)
    if frame.n != theta.n:
        raise DimensionMismatchError(f"frame n={frame.n} vs form n={theta.n}")
    if theta.degree >= theta.n:
        return make_form(theta.n, theta.variables, theta.n, {})
    out = zero_form(theta.n, theta.variables, theta.degree + 1)
    for idx, coeff in theta.terms.items():
        # da_I ^ dx^I
        da_terms = {}
        for i, name in enumerate(theta.variables):
            d = differentiate(coeff, name)
            if not (isinstance(d, ex.Const) and d.value == 0):
                da_terms[(i,)] = d
        da = make_form(theta.n, theta.variables, 1, da_terms)
        basis = make_form(theta.n, theta.variables, len(idx),
                          {idx: ex.ONE})
        out = out + wedge(da, basis)
        if not frame.is_zero():
            out = out + _basis_term(theta, frame, idx).scale(coeff)
    return out


def _basis_term(theta, frame, idx):
    """d(dx^{i_1} ^ ... ^ dx^{i_p}) via the graded Leibniz rule."""
    n, variables = theta.n, theta.variables
    out = zero_form(n, variables, len(idx) + 1)
    for t, k in enumerate(idx):
        ddxk = frame.basis_differential(variables, k)
        if ddxk.is_zero():
            continue
        left = make_form(n, variables, t, {idx[:t]: ex.ONE}) if t else None
        right_idx = idx[t + 1:]
        piece = ddxk
        if left is not None:
            piece = wedge(left, piece)
        if right_idx:
            piece = wedge(piece, make_form(n, variables, len(right_idx),
                                           {right_idx: ex.ONE}))
        if t % 2 == 1:
            piece = piece.scale(ex.MINUS_ONE)
        out = out + piece
    return out


def is_closed(theta, frame=None, seed=ex.ZERO_TEST_SEED):
    """(closed?, d theta).  Closed iff every residual coefficient passes the
    two-stage zero test; the residual form is always returned."""
    residual = exterior_derivative(theta, frame)
    closed = True
    for idx, coeff in residual.terms.items():
        try:
            if not is_identically_zero(coeff, seed=seed):
                closed = False
        except ex.InconclusiveZeroTest as err:
            raise ex.InconclusiveZeroTest(
                f"zero test inconclusive for residual coefficient {idx}: {err}")
    return closed, residual


def commutator_coefficients(theta):
    """K_{ij} = d a_j / d x^i - d a_i / d x^j for a degree-1 form; equals the
    dx^i ^ dx^j coefficient of d theta.  Antisymmetric by construction."""
    if theta.degree != 1:
        raise DegreeError("commutator is defined for degree-1 forms")
    n = theta.n
    K = [[ex.ZERO for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            a_i = theta.coefficient((i,))
            a_j = theta.coefficient((j,))
            kij = simplify(differentiate(a_j, theta.variables[i])
                           - differentiate(a_i, theta.variables[j]))
            K[i][j] = kij
            K[j][i] = simplify(-kij)
    return K


def loop_integral(theta, loop):
    """Composite-midpoint line integral of a degree-1 form around a closed
    polygon.  Near zero for exact forms; a nonzero value certifies
    inexactness of a closed form."""
    if theta.degree != 1:
        raise DegreeError("loop integrals are defined for degree-1 forms")
    coeffs = [theta.coefficient((i,)) for i in range(theta.n)]
    total = 0.0
    m = len(loop.vertices)
    for a in range(m):
        start = loop.vertices[a]
        end = loop.vertices[(a + 1) % m]
        delta = [e - s for s, e in zip(start, end)]
        k = loop.samples_per_edge
        for j in range(k):
            t = (j + 0.5) / k
            point = {name: s + t * d
                     for name, s, d in zip(theta.variables, start, delta)}
            for i in range(theta.n):
                if delta[i] != 0.0:
                    total += ex.evaluate(coeffs[i], point) * delta[i] / k
    return total


# ---------------------------------------------------------------------------
# file formats (1-based indices on disk)


def form_to_dict(theta):
    return {
        "n": theta.n,
        "vars": list(theta.variables),
        "degree": theta.degree,
        "terms": [
            {"index": [i + 1 for i in idx], "coeff": ex.to_string(coeff)}
            for idx, coeff in sorted(theta.terms.items())
        ],
    }


def form_from_dict(doc):
    n = doc["n"]
    variables = list(doc["vars"])
    terms = {}
    for entry in doc["terms"]:
        idx = tuple(i - 1 for i in entry["index"])
        coeff = ex.parse(entry["coeff"], variables)
        terms[idx] = terms[idx] + coeff if idx in terms else coeff
    return make_form(n, variables, doc["degree"], terms)


def frame_to_dict(frame, variables):
    return {
        "n": frame.n,
        "c": [
            {"k": k + 1, "i": i + 1, "j": j + 1, "coeff": ex.to_string(coeff)}
            for (k, i, j), coeff in sorted(frame.c.items())
        ],
    }


def frame_from_dict(doc, variables):
    c = {}
    for entry in doc["c"]:
        k, i, j = entry["k"] - 1, entry["i"] - 1, entry["j"] - 1
        if not i < j:
            raise FormError(f"frame coefficients need i < j, got i={i + 1}, j={j + 1}")
        c[(k, i, j)] = ex.parse(entry["coeff"], list(variables))
    return FrameSpec(doc["n"], c)


def loop_to_dict(loop):
    return {"vertices": [list(v) for v in loop.vertices],
            "samples_per_edge": loop.samples_per_edge}


def loop_from_dict(doc):
    return Loop(tuple(tuple(v) for v in doc["vertices"]),
                doc.get("samples_per_edge", 16))


def load_form(path):
    with open(path) as fh:
        return form_from_dict(json.load(fh))


def load_frame(path, variables):
    with open(path) as fh:
        return frame_from_dict(json.load(fh), variables)


def load_loop(path):
    with open(path) as fh:
        return loop_from_dict(json.load(fh))
