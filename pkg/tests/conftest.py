"""Shared helpers: seeded random expression/form generators and a central
finite-difference oracle."""

import random

import pytest

from skewforms import expr as ex


def random_polynomial(rng, names, max_terms=3, max_degree=2, coeff_range=3):
    """Random small polynomial over `names` with integer coefficients."""
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        c = rng.randint(-coeff_range, coeff_range)
        if c == 0:
            c = 1
        factors = [ex.const(c)]
        for _ in range(rng.randint(0, max_degree)):
            factors.append(ex.Var(rng.choice(names)))
        terms.append(ex.Mul(tuple(factors)))
    return ex.simplify(ex.Add(tuple(terms)))


_FUNCS = ("sin", "cos", "exp", "tanh")


def random_expression(rng, names, depth=3):
    """Random expression mixing polynomials and transcendentals; avoids
    ln/sqrt so that random sample points stay inside the domain."""
    if depth == 0 or rng.random() < 0.3:
        choice = rng.random()
        if choice < 0.4:
            return ex.Var(rng.choice(names))
        if choice < 0.7:
            return ex.const(rng.randint(-3, 3))
        return ex.const(rng.choice((1, 2)) / rng.choice((2, 3, 4)))
    op = rng.random()
    if op < 0.25:
        return random_expression(rng, names, depth - 1) + \
            random_expression(rng, names, depth - 1)
    if op < 0.45:
        return random_expression(rng, names, depth - 1) - \
            random_expression(rng, names, depth - 1)
    if op < 0.7:
        return random_expression(rng, names, depth - 1) * \
            random_expression(rng, names, depth - 1)
    if op < 0.85:
        return ex.Pow(random_expression(rng, names, depth - 1),
                      ex.const(rng.randint(2, 3)))
    return ex.Func(rng.choice(_FUNCS),
                   random_expression(rng, names, depth - 1))


def random_point(rng, names):
    return {n: rng.uniform(0.2, 1.5) * rng.choice((-1, 1)) for n in names}


def central_difference(e, name, bindings, h=1e-5):
    up = dict(bindings)
    down = dict(bindings)
    up[name] = bindings[name] + h
    down[name] = bindings[name] - h
    return (ex.evaluate(e, up) - ex.evaluate(e, down)) / (2 * h)


@pytest.fixture
def rng():
    return random.Random(20240817)
