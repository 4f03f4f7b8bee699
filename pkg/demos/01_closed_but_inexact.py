"""The angular form: closed everywhere it is defined, yet not exact.

The 1-form

    theta = -x2/(x1^2 + x2^2) dx1 + x1/(x1^2 + x2^2) dx2

has d(theta) = 0 away from the origin, but its integral around a loop
enclosing the origin is 2*pi, not 0 -- so no global potential exists.  This
script walks both halves of that story: the closure test (which needs the
randomized numeric stage, because the cancellation is invisible to the
simplifier) and loop integrals that do and do not enclose the defect.
"""

import math

from skewforms import expr as ex
from skewforms.expr import parse
from skewforms.forms import Loop, is_closed, loop_integral, make_form

VARS = ("x1", "x2")


def angular_form():
    a1 = parse("-x2/(x1^2+x2^2)", list(VARS))
    a2 = parse("x1/(x1^2+x2^2)", list(VARS))
    return make_form(2, VARS, 1, {(0,): a1, (1,): a2})


def circle(radius, sides=64, samples=16):
    verts = tuple((radius * math.cos(2 * math.pi * k / sides),
                   radius * math.sin(2 * math.pi * k / sides))
                  for k in range(sides))
    return Loop(verts, samples)


def main():
    theta = angular_form()
    print("theta components:")
    for idx, coeff in sorted(theta.terms.items()):
        print(f"  dx{idx[0] + 1}: {ex.to_string(coeff)}")

    closed, residual = is_closed(theta)
    print(f"\nclosed: {closed} (residual has {len(residual.terms)} terms)")

    print("\nloop integrals:")
    for r in (0.5, 1.0, 2.0):
        value = loop_integral(theta, circle(r))
        print(f"  circle of radius {r}: {value:+.6f}  "
              f"(2*pi = {2 * math.pi:.6f})")

    offset_square = Loop(((2.5, 2.5), (3.5, 2.5), (3.5, 3.5), (2.5, 3.5)), 512)
    print(f"  square away from the origin: "
          f"{loop_integral(theta, offset_square):+.2e}")

    # contrast: an exact form integrates to zero around every loop
    exact = make_form(2, VARS, 1, {(0,): ex.Var("x2"), (1,): ex.Var("x1")})
    print(f"\nexact form d(x1*x2) around the unit circle: "
          f"{loop_integral(exact, circle(1.0)):+.2e}")


if __name__ == "__main__":
    main()
