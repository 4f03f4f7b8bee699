"""Symbolic expression trees: parsing, differentiation, simplification, evaluation.

Every other module uses Expr for coefficient functions, PDE functionals and
Lagrangians.  Expressions are immutable; all operations return new trees.

Zero testing is symbolic-first with a seeded randomized numeric fallback
(threshold 1e-9, 32 sample points drawn from [-2,-0.1] u [0.1,2] per
variable, default seed 42).  Full canonical simplification of transcendental
expressions is undecidable, so this two-stage probabilistic contract is the
documented behaviour of `is_identically_zero`.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from fractions import Fraction

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "tanh")

ZERO_TEST_SEED = 42
ZERO_TEST_POINTS = 32
ZERO_TEST_TOL = 1e-9


class ExprError(Exception):
    pass


class ParseError(ExprError):
    """Syntax error; `offset` is the byte offset into the input text."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ParseError):
    def __init__(self, name, offset):
        super().__init__(f"unknown identifier '{name}'", offset)
        self.name = name


class EvalDomainError(ExprError):
    """Division by zero, ln of a non-positive value, sqrt of a negative value,
    zero raised to a negative power, or floating overflow."""


class UnboundVariableError(ExprError):
    def __init__(self, name):
        super().__init__(f"variable '{name}' is not bound")
        self.name = name


class InconclusiveZeroTest(ExprError):
    """More than half of the numeric sample points hit domain errors."""


@dataclass(frozen=True)
class Expr:
    """Base node.  Operator overloads build unsimplified trees."""

    def __add__(self, other):
        return Add((self, _coerce(other)))

    def __radd__(self, other):
        return Add((_coerce(other), self))

    def __sub__(self, other):
        return Add((self, Mul((Const(Fraction(-1)), _coerce(other)))))

    def __rsub__(self, other):
        return Add((_coerce(other), Mul((Const(Fraction(-1)), self))))

    def __mul__(self, other):
        return Mul((self, _coerce(other)))

    def __rmul__(self, other):
        return Mul((_coerce(other), self))

    def __truediv__(self, other):
        return Mul((self, Pow(_coerce(other), Const(Fraction(-1)))))

    def __rtruediv__(self, other):
        return Mul((_coerce(other), Pow(self, Const(Fraction(-1)))))

    def __pow__(self, other):
        return Pow(self, _coerce(other))

    def __neg__(self):
        return Mul((Const(Fraction(-1)), self))

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Expr


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
MINUS_ONE = Const(Fraction(-1))


def _coerce(value):
    if isinstance(value, Expr):
        return value
    return Const(Fraction(value))


def const(value):
    return Const(Fraction(value))


def var(name):
    return Var(name)


def variables(e):
    """Set of variable names occurring in `e`."""
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Add):
        out = frozenset()
        for t in e.terms:
            out |= variables(t)
        return out
    if isinstance(e, Mul):
        out = frozenset()
        for f in e.factors:
            out |= variables(f)
        return out
    if isinstance(e, Pow):
        return variables(e.base) | variables(e.exponent)
    return variables(e.arg)


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e, bindings):
    """Evaluate at a full variable binding.  Raises EvalDomainError at the
    declared singularities and UnboundVariableError for missing names."""
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        try:
            return float(bindings[e.name])
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if isinstance(e, Add):
        return math.fsum(evaluate(t, bindings) for t in e.terms)
    if isinstance(e, Mul):
        out = 1.0
        for f in e.factors:
            out *= evaluate(f, bindings)
        return out
    if isinstance(e, Pow):
        return _pow_value(evaluate(e.base, bindings), evaluate(e.exponent, bindings))
    return _func_value(e.name, evaluate(e.arg, bindings))


def _pow_value(b, x):
    if b == 0.0 and x < 0.0:
        raise EvalDomainError("division by zero (zero raised to a negative power)")
    if b < 0.0:
        if x != round(x):
            raise EvalDomainError("negative base raised to a non-integer power")
        x = int(round(x))
    try:
        out = b ** x
    except OverflowError:
        raise EvalDomainError("floating overflow in power") from None
    if isinstance(out, complex):  # pragma: no cover - guarded above
        raise EvalDomainError("complex result in power")
    return out


def _func_value(name, x):
    if name == "ln":
        if x <= 0.0:
            raise EvalDomainError(f"ln of non-positive value {x}")
        return math.log(x)
    if name == "sqrt":
        if x < 0.0:
            raise EvalDomainError(f"sqrt of negative value {x}")
        return math.sqrt(x)
    if name == "exp":
        try:
            return math.exp(x)
        except OverflowError:
            raise EvalDomainError("floating overflow in exp") from None
    return getattr(math, name)(x)


# ---------------------------------------------------------------------------
# canonical ordering


def _key(e):
    if isinstance(e, Const):
        return (0, float(e.value))
    if isinstance(e, Var):
        return (1, e.name)
    if isinstance(e, Func):
        return (2, e.name, _key(e.arg))
    if isinstance(e, Pow):
        return (3, _key(e.base), _key(e.exponent))
    if isinstance(e, Mul):
        return (4, tuple(_key(f) for f in e.factors))
    return (5, tuple(_key(t) for t in e.terms))


# ---------------------------------------------------------------------------
# simplification


def simplify(e):
    """Bottom-up rewriting: neutral-element removal, constant folding over
    exact rationals, flattening of nested sums/products, like-term collection
    under a canonical ordering.  Idempotent."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Add):
        return _simplify_add(e)
    if isinstance(e, Mul):
        return _simplify_mul(e)
    if isinstance(e, Pow):
        return _simplify_pow(e)
    return _simplify_func(e)


def _split_coeff(e):
    """e -> (rational coefficient, residual factor or None for pure constants)."""
    if isinstance(e, Const):
        return e.value, None
    if isinstance(e, Mul) and e.factors and isinstance(e.factors[0], Const):
        rest = e.factors[1:]
        if not rest:
            return e.factors[0].value, None
        residual = rest[0] if len(rest) == 1 else Mul(rest)
        return e.factors[0].value, residual
    return Fraction(1), e


def _with_coeff(c, rest):
    if c == 1:
        return rest
    if isinstance(rest, Mul):
        return Mul((Const(c),) + rest.factors)
    return Mul((Const(c), rest))


def _simplify_add(e):
    flat = []
    for t in e.terms:
        st = simplify(t)
        if isinstance(st, Add):
            flat.extend(st.terms)
        else:
            flat.append(st)
    const_acc = Fraction(0)
    buckets = {}  # key -> [coeff, residual]
    for part in flat:
        coeff, rest = _split_coeff(part)
        if rest is None:
            const_acc += coeff
            continue
        k = _key(rest)
        if k in buckets:
            buckets[k][0] += coeff
        else:
            buckets[k] = [coeff, rest]
    terms = [
        _with_coeff(c, rest)
        for _, (c, rest) in sorted(buckets.items())
        if c != 0
    ]
    if const_acc != 0:
        terms.insert(0, Const(const_acc))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(tuple(terms))


def _split_pow(e):
    if isinstance(e, Pow):
        return e.base, e.exponent
    return e, ONE


def _simplify_mul(e):
    flat = []
    for f in e.factors:
        sf = simplify(f)
        if isinstance(sf, Mul):
            flat.extend(sf.factors)
        else:
            flat.append(sf)
    const_acc = Fraction(1)
    buckets = {}  # key(base) -> [base, [exponents]]
    for part in flat:
        if isinstance(part, Const):
            if part.value == 0:
                return ZERO
            const_acc *= part.value
            continue
        base, exp = _split_pow(part)
        k = _key(base)
        if k in buckets:
            buckets[k][1].append(exp)
        else:
            buckets[k] = [base, [exp]]
    factors = []
    for _, (base, exps) in sorted(buckets.items()):
        exp = exps[0] if len(exps) == 1 else _simplify_add(Add(tuple(exps)))
        if isinstance(exp, Const):
            if exp.value == 0:
                continue
            if isinstance(base, Const) and exp.value.denominator == 1:
                const_acc *= base.value ** int(exp.value)
                continue
            if exp.value == 1:
                factors.append(base)
                continue
        factors.append(Pow(base, exp))
    if const_acc == 0:
        return ZERO
    if const_acc != 1:
        factors.insert(0, Const(const_acc))
    if not factors:
        return ONE
    if len(factors) == 1:
        return factors[0]
    return Mul(tuple(factors))


def _simplify_pow(e):
    base = simplify(e.base)
    exp = simplify(e.exponent)
    if isinstance(base, Const) and base.value == 1:
        return ONE
    if isinstance(exp, Const):
        if exp.value == 0:
            return ONE
        if exp.value == 1:
            return base
        if isinstance(base, Const):
            if exp.value.denominator == 1 and not (base.value == 0 and exp.value < 0):
                return Const(base.value ** int(exp.value))
            return Pow(base, exp)
        if exp.value.denominator == 1 and exp.value > 0 and isinstance(base, Mul):
            # distribute integer powers over products so like bases merge
            n = int(exp.value)
            return _simplify_mul(Mul(tuple(Pow(f, Const(Fraction(n))) for f in base.factors)))
    return Pow(base, exp)


_FUNC_AT_ZERO = {"sin": ZERO, "exp": ONE, "tanh": ZERO, "sqrt": ZERO}


def _simplify_func(e):
    arg = simplify(e.arg)
    if isinstance(arg, Const):
        if arg.value == 0 and e.name in _FUNC_AT_ZERO:
            return _FUNC_AT_ZERO[e.name]
        if arg.value == 0 and e.name == "cos":
            return ONE
        if arg.value == 1 and e.name == "ln":
            return ZERO
        if arg.value == 1 and e.name == "sqrt":
            return ONE
    return Func(e.name, arg)


# ---------------------------------------------------------------------------
# differentiation


def differentiate(e, name):
    """Exact symbolic partial derivative with respect to `name`, simplified."""
    return simplify(_d(e, name))


def _d(e, name):
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == name else ZERO
    if isinstance(e, Add):
        return Add(tuple(_d(t, name) for t in e.terms))
    if isinstance(e, Mul):
        terms = []
        for i, f in enumerate(e.factors):
            rest = e.factors[:i] + e.factors[i + 1:]
            terms.append(Mul((_d(f, name),) + rest))
        return Add(tuple(terms))
    if isinstance(e, Pow):
        b, x = e.base, e.exponent
        if name not in variables(x):
            # x * b^(x-1) * b'
            return Mul((x, Pow(b, Add((x, MINUS_ONE))), _d(b, name)))
        # b^x * (x' ln b + x b'/b), via the exp/ln rewriting
        inner = Add((
            Mul((_d(x, name), Func("ln", b))),
            Mul((x, _d(b, name), Pow(b, MINUS_ONE))),
        ))
        return Mul((Pow(b, x), inner))
    return Mul((_func_derivative(e.name, e.arg), _d(e.arg, name)))


def _func_derivative(name, a):
    if name == "sin":
        return Func("cos", a)
    if name == "cos":
        return Mul((MINUS_ONE, Func("sin", a)))
    if name == "exp":
        return Func("exp", a)
    if name == "ln":
        return Pow(a, MINUS_ONE)
    if name == "sqrt":
        return Mul((Const(Fraction(1, 2)), Pow(Func("sqrt", a), MINUS_ONE)))
    # tanh' = 1 - tanh^2
    return Add((ONE, Mul((MINUS_ONE, Pow(Func("tanh", a), Const(Fraction(2)))))))


# ---------------------------------------------------------------------------
# zero testing


def is_identically_zero(e, seed=ZERO_TEST_SEED, tol=ZERO_TEST_TOL,
                        points=ZERO_TEST_POINTS):
    """True if simplify(e) is the zero constant, or if e evaluates below
    `tol` in magnitude at `points` seeded pseudo-random sample points.

    Sample coordinates are drawn uniformly from [0.1, 2] with a random sign,
    avoiding the origin-adjacent singularities; a point hitting a domain
    error is redrawn up to 10 times.  Raises InconclusiveZeroTest when more
    than half of the points could not be evaluated."""
    s = simplify(e)
    if isinstance(s, Const):
        return s.value == 0
    names = sorted(variables(s))
    rng = random.Random(seed)
    failures = 0
    for _ in range(points):
        value = None
        for _ in range(10):
            bindings = {
                n: rng.uniform(0.1, 2.0) * (1 if rng.random() < 0.5 else -1)
                for n in names
            }
            try:
                value = evaluate(s, bindings)
            except EvalDomainError:
                continue
            break
        if value is None:
            failures += 1
            continue
        if abs(value) >= tol:
            return False
    if failures > points // 2:
        raise InconclusiveZeroTest(
            f"{failures} of {points} sample points hit domain errors")
    return True


# ---------------------------------------------------------------------------
# printing

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def to_string(e):
    """Render to the ASCII grammar accepted by `parse`.  Round-trips by value."""
    return _fmt(e, 0)


def _fmt(e, parent_prec):
    if isinstance(e, Const):
        v = e.value
        if v.denominator == 1:
            text = str(v.numerator)
            prec = _PREC_ATOM if v >= 0 else _PREC_ADD
        else:
            text = f"{v.numerator}/{v.denominator}"
            prec = _PREC_MUL if v >= 0 else _PREC_ADD
        return _wrap(text, prec, parent_prec)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({_fmt(e.arg, 0)})"
    if isinstance(e, Pow):
        base = _fmt(e.base, _PREC_ATOM)
        exp = _fmt(e.exponent, _PREC_ATOM)
        return _wrap(f"{base}^{exp}", _PREC_POW, parent_prec)
    if isinstance(e, Mul):
        coeff, rest = _split_coeff(e)
        if coeff < 0 and rest is not None:
            inner = _fmt(_with_coeff(-coeff, rest), _PREC_MUL)
            return _wrap("-" + inner, _PREC_ADD, parent_prec)
        return _wrap("*".join(_fmt(f, _PREC_MUL) for f in e.factors),
                     _PREC_MUL, parent_prec)
    parts = [_fmt(e.terms[0], _PREC_ADD)]
    for t in e.terms[1:]:
        coeff, rest = _split_coeff(t)
        if coeff < 0:
            flipped = Const(-coeff) if rest is None else _with_coeff(-coeff, rest)
            parts.append(" - " + _fmt(flipped, _PREC_MUL))
        else:
            parts.append(" + " + _fmt(t, _PREC_MUL))
    return _wrap("".join(parts), _PREC_ADD, parent_prec)


def _wrap(text, prec, parent_prec):
    if prec < parent_prec:
        return f"({text})"
    return text


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+\.\d*|\.\d+|\d+)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9]*)"
    r"|(?P<op>[-+*/^()]))")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character '{stripped[0]}'",
                             len(text) - len(stripped))
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens, allowed_vars):
        self.tokens = tokens
        self.i = 0
        self.allowed = set(allowed_vars)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, offset = self.peek()
        if kind != "op" or text != op:
            raise ParseError(f"expected '{op}'", offset)
        self.take()

    def expr(self):
        left = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.take()
                right = self.term()
                left = left + right if text == "+" else left - right
            else:
                return left

    def term(self):
        left = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.take()
                right = self.factor()
                left = left * right if text == "*" else left / right
            else:
                return left

    def factor(self):
        base = self.unary()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return Pow(base, self.factor())
        return base

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return -self.atom()
        return self.atom()

    def atom(self):
        kind, text, offset = self.take()
        if kind == "number":
            return Const(Fraction(text))
        if kind == "ident":
            if text in FUNCTIONS:
                self.expect_op("(")
                inner = self.expr()
                self.expect_op(")")
                return Func(text, inner)
            if text not in self.allowed:
                raise UnknownIdentifierError(text, offset)
            return Var(text)
        if kind == "op" and text == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ParseError(f"unexpected token '{text}'" if text else "unexpected end of input",
                         offset)


def parse(text, allowed_vars):
    """Parse `text` against the expression grammar.  Every identifier that is
    not a function name must appear in `allowed_vars`."""
    p = _Parser(_tokenize(text), allowed_vars)
    out = p.expr()
    kind, text_, offset = p.peek()
    if kind != "end":
        raise ParseError(f"trailing input '{text_}'", offset)
    return out


# ---------------------------------------------------------------------------
# compilation to plain Python callables (used by the ODE integrator)


def compile_expr(e, arg_names):
    """Compile to a positional-argument callable.  Domain errors surface as
    EvalDomainError exactly like `evaluate`."""
    src = _py_src(e)
    ns = {
        "_pow": _pow_value,
        "_fn": _func_value,
        "sin": math.sin,
        "cos": math.cos,
        "tanh": math.tanh,
    }
    return eval(f"lambda {', '.join(arg_names)}: {src}", ns)  # noqa: S307


def _py_src(e):
    if isinstance(e, Const):
        return f"({float(e.value)!r})"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        return "(" + "+".join(_py_src(t) for t in e.terms) + ")"
    if isinstance(e, Mul):
        return "(" + "*".join(_py_src(f) for f in e.factors) + ")"
    if isinstance(e, Pow):
        return f"_pow({_py_src(e.base)}, {_py_src(e.exponent)})"
    if e.name in ("sin", "cos", "tanh"):
        return f"{e.name}({_py_src(e.arg)})"
    return f"_fn({e.name!r}, {_py_src(e.arg)})"
