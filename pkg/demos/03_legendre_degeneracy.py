"""Legendre transforms, and where they break.

The transform L(v) -> H(p) = p*v - L(v) with p = L'(v) is invertible only
while the Hessian L'' stays away from zero.  This script runs three
Lagrangians through the numeric transform:

  * v^2/2 is self-dual (H = p^2/2) and passes the double-transform
    (involution) check to machine precision;
  * v^4/4 has the closed form H = (3/4) p^(4/3) on v > 0;
  * v^3/3 degenerates at v = 0, where the transform is refused.
"""

import numpy as np

from skewforms import expr as ex
from skewforms.expr import parse
from skewforms.legendre import (
    DegeneracyError,
    degeneracy_check,
    involution_error,
    legendre_transform,
)


def main():
    quad = legendre_transform(parse("v^2/2", ["v"]), [(-1.0, 1.0)], 201)
    p = quad.p_samples[:, 0]
    print("L = v^2/2:")
    print(f"  closed form H = {ex.to_string(quad.closed_form)}")
    print(f"  max |H - p^2/2| over 201 samples = "
          f"{np.max(np.abs(quad.h_values - p ** 2 / 2)):.2e}")
    print(f"  involution error = "
          f"{involution_error(parse('v^2/2', ['v']), [(-1.0, 1.0)], 201):.2e}")

    quart = legendre_transform(parse("v^4/4", ["v"]), [(0.1, 2.0)], 20)
    print("\nL = v^4/4 on v > 0:")
    print(f"  closed form H = {ex.to_string(quart.closed_form)}")
    row = int(np.argmin(np.abs(quart.p_samples[:, 0] - 1.0)))
    print(f"  H at p = 1: {quart.h_values[row]:.12f} (exact 0.75)")

    print("\nL = v^3/3 on [-1, 1]:")
    report = degeneracy_check(parse("v^3/3", ["v"]), [(-1.0, 1.0)])
    print(f"  Hessian determinant: {ex.to_string(report.hessian_det)}")
    print(f"  sign-change zeros: {report.zeros}")
    try:
        legendre_transform(parse("v^3/3", ["v"]), [(-1.0, 1.0)], 11)
    except DegeneracyError as err:
        print(f"  transform refused: {err}")

    print("\nL = v1 + 3*v2 (linear):")
    report = degeneracy_check(parse("v1 + 3*v2", ["v1", "v2"]),
                              velocity_names=("v1", "v2"))
    print(f"  identically degenerate: {report.identically_degenerate}")


if __name__ == "__main__":
    main()
