"""Exact multivariate rational functions over action-name variables.

Values are pairs of expanded sparse polynomials with arbitrary-precision
rational coefficients.  Equality is semantic over the positive orthant and
is decided by cross-multiplication, so no GCD normalization is ever needed.
Floating point is rejected everywhere.
"""

from __future__ import annotations

import random
import re
from fractions import Fraction

#: Reserved success symbol; never a variable name and never an action name.
OMEGA = "omega"

#: Default cap on the number of terms a polynomial product may produce.
DEFAULT_TERM_LIMIT = 10**6


class TermLimitError(RuntimeError):
    """An operation would exceed the polynomial term budget."""


class ParseError(ValueError):
    """Malformed rational-function text."""


def as_fraction(value) -> Fraction:
    """Coerce to an exact rational, rejecting floats outright."""
    if isinstance(value, float):
        raise TypeError("floating point is not allowed in exact arithmetic: %r" % value)
    return Fraction(value)


def check_variable_name(name: str) -> str:
    if name == OMEGA:
        raise ValueError("%r is the reserved success symbol" % name)
    if not name:
        raise ValueError("empty variable name")
    return name


def _mul_monomials(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    powers = dict(m1)
    for var, exp in m2:
        powers[var] = powers.get(var, 0) + exp
    return tuple(sorted(powers.items()))


class Polynomial:
    """Sparse polynomial: map from monomial to nonzero rational coefficient.

    A monomial is a tuple of (variable, exponent) pairs sorted by variable
    name; the empty tuple is the constant monomial.  Instances are treated
    as immutable.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms) if terms else {}

    @classmethod
    def const(cls, value) -> "Polynomial":
        value = as_fraction(value)
        if value == 0:
            return cls()
        return cls({(): value})

    @classmethod
    def var(cls, name: str) -> "Polynomial":
        check_variable_name(name)
        return cls({((name, 1),): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> frozenset:
        return frozenset(v for mono in self.terms for v, _ in mono)

    def __len__(self):
        return len(self.terms)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self.terms)
        for mono, coeff in other.terms.items():
            acc = out.get(mono)
            if acc is None:
                out[mono] = coeff
            else:
                acc = acc + coeff
                if acc == 0:
                    del out[mono]
                else:
                    out[mono] = acc
        return Polynomial(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if not self.terms or not other.terms:
            return Polynomial()
        if len(self.terms) * len(other.terms) > DEFAULT_TERM_LIMIT:
            raise TermLimitError(
                "product of %d x %d terms exceeds the %d-term budget"
                % (len(self.terms), len(other.terms), DEFAULT_TERM_LIMIT)
            )
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = _mul_monomials(m1, m2)
                acc = out.get(mono)
                if acc is None:
                    out[mono] = c1 * c2
                else:
                    acc = acc + c1 * c2
                    if acc == 0:
                        del out[mono]
                    else:
                        out[mono] = acc
        if len(out) > DEFAULT_TERM_LIMIT:
            raise TermLimitError("result has %d terms, over budget" % len(out))
        return Polynomial(out)

    def scale(self, value) -> "Polynomial":
        value = as_fraction(value)
        if value == 0:
            return Polynomial()
        return Polynomial({m: c * value for m, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def evaluate(self, assignment) -> Fraction:
        total = Fraction(0)
        for mono, coeff in self.terms.items():
            val = coeff
            for var, exp in mono:
                val *= assignment[var] ** exp
            total += val
        return total

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms):
            coeff = self.terms[mono]
            factors = []
            for var, exp in mono:
                factors.extend([var] * exp)
            if not factors:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append("*".join(factors))
            else:
                parts.append("*".join([str(coeff)] + factors))
        return " + ".join(parts)

    def __repr__(self):
        return "Polynomial(%s)" % self.render()


_ONE_POLY = Polynomial({(): Fraction(1)})


class RationalFn:
    """A rational function stored as an expanded numerator/denominator pair.

    The denominator is never the zero polynomial.  Semantic equality over
    the positive orthant is `equal`; `==` aliases it so instances behave
    like values.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial = _ONE_POLY):
        if den.is_zero():
            raise ZeroDivisionError("zero polynomial as denominator")
        self.num = num
        self.den = den

    @classmethod
    def const(cls, value) -> "RationalFn":
        return cls(Polynomial.const(value))

    @classmethod
    def var(cls, name: str) -> "RationalFn":
        return cls(Polynomial.var(name))

    @staticmethod
    def _coerce(value) -> "RationalFn":
        if isinstance(value, RationalFn):
            return value
        return RationalFn.const(value)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def variables(self) -> frozenset:
        return self.num.variables() | self.den.variables()

    def __add__(self, other):
        other = self._coerce(other)
        if self.den == other.den:
            return RationalFn(self.num + other.num, self.den)
        return RationalFn(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return RationalFn(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def __mul__(self, other):
        other = self._coerce(other)
        return RationalFn(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return RationalFn(self.num * other.den, self.den * other.num)

    def equal(self, other) -> bool:
        """Semantic equality on the positive orthant (cross-multiplication)."""
        other = self._coerce(other)
        return self.num * other.den == other.num * self.den

    def __eq__(self, other):
        if isinstance(other, (RationalFn, int, Fraction)):
            return self.equal(other)
        return NotImplemented

    def __hash__(self):
        raise TypeError("RationalFn is not hashable; bucket via equal()")

    def evaluate(self, assignment) -> Fraction:
        """Exact evaluation at a strictly positive rational point."""
        point = {}
        for var in sorted(self.variables()):
            if var not in assignment:
                raise ValueError("no value assigned to variable %r" % var)
            val = as_fraction(assignment[var])
            if val <= 0:
                raise ValueError("variable %r must be strictly positive, got %s" % (var, val))
            point[var] = val
        den = self.den.evaluate(point)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at %r" % (point,))
        return self.num.evaluate(point) / den

    def constant_value(self):
        """The Fraction c if this is the constant function c, else None."""
        if self.num.is_zero():
            return Fraction(0)
        mono = next(iter(sorted(self.den.terms)))
        c = self.num.terms.get(mono, Fraction(0)) / self.den.terms[mono]
        if self.num == self.den.scale(c):
            return c
        return None

    def render(self) -> str:
        """Deterministic textual form, parseable by `parse`.

        Constants render as plain rationals; otherwise both polynomials are
        scaled so the denominator's leading coefficient is 1.
        """
        c = self.constant_value()
        if c is not None:
            return str(c)
        lead = self.den.terms[next(iter(sorted(self.den.terms)))]
        num = self.num.scale(Fraction(1) / lead)
        den = self.den.scale(Fraction(1) / lead)
        return "(%s)/(%s)" % (num.render(), den.render())

    def __repr__(self):
        return "RationalFn(%s)" % self.render()


RF_ZERO = RationalFn(Polynomial())
RF_ONE = RationalFn(Polynomial.const(1))


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|([()+*/-]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ParseError("unexpected character %r at position %d" % (rest[0], pos))
        number, name, op = m.groups()
        if number is not None:
            tokens.append(("num", int(number)))
        elif name is not None:
            tokens.append(("name", name))
        else:
            tokens.append(("op", op))
        pos = m.end()
    return tokens


def parse(text: str) -> RationalFn:
    """Parse the fully parenthesized infix grammar: scalars, variables, + * /."""
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty expression")
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None)

    def take(expected=None):
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of expression")
        tok = tokens[pos]
        if expected is not None and tok != ("op", expected):
            raise ParseError("expected %r, got %r" % (expected, tok[1]))
        pos += 1
        return tok

    def parse_sum():
        value = parse_product()
        while peek() == ("op", "+"):
            take("+")
            value = value + parse_product()
        return value

    def parse_product():
        value = parse_factor()
        while True:
            kind, sym = peek()
            if (kind, sym) == ("op", "*"):
                take("*")
                value = value * parse_factor()
            elif (kind, sym) == ("op", "/"):
                take("/")
                value = value / parse_factor()
            else:
                return value

    def parse_factor():
        kind, sym = peek()
        if (kind, sym) == ("op", "-"):
            take("-")
            return RF_ZERO - parse_factor()
        if (kind, sym) == ("op", "("):
            take("(")
            value = parse_sum()
            take(")")
            return value
        if kind == "num":
            take()
            return RationalFn.const(sym)
        if kind == "name":
            take()
            try:
                return RationalFn.var(sym)
            except ValueError as exc:
                raise ParseError(str(exc)) from None
        raise ParseError("unexpected token %r" % (sym,))

    value = parse_sum()
    if pos != len(tokens):
        raise ParseError("trailing input after position %d" % pos)
    return value


# ---------------------------------------------------------------------------
# Almost-triangular synchronization-weight matrices and their determinants.
# Row 1 holds fractions a1/(a1 + sum of a column-dependent subset of the b's);
# every other row has exactly two 1 entries at column indices whose binary
# representations differ in one bit.  Nonsingularity of these matrices is what
# makes deterministic escape tests sufficient, so we probe the determinant
# numerically at random positive points.
# ---------------------------------------------------------------------------


def _escape_subrows(n: int):
    if n == 1:
        return [[1, 1]]
    prev = _escape_subrows(n - 1)
    half = 2 ** (n - 1)
    rows = [r + [0] * half for r in prev]
    bridge = [0] * (2 * half)
    bridge[half - 1] = 1
    bridge[2 * half - 1] = 1
    rows.append(bridge)
    rows.extend([[0] * half + r for r in prev])
    return rows


def escape_matrix(n: int):
    """The 2^n x 2^n matrix of escape-test synchronization weights.

    Column j of the first row carries a1/(a1 + sum of b_(i+1) over the set
    bits i of j); the remaining rows are the recursive 0/1 block pattern.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a1 = RationalFn.var("a1")
    bs = [RationalFn.var("b%d" % (i + 1)) for i in range(n)]
    size = 2**n
    first = []
    for j in range(size):
        den = a1
        for i in range(n):
            if j >> i & 1:
                den = den + bs[i]
        first.append(a1 / den)
    rows = [first]
    for subrow in _escape_subrows(n):
        rows.append([RF_ONE if e else RF_ZERO for e in subrow])
    return rows

def _fraction_det(matrix) -> Fraction:
    # Gaussian elimination with exact rationals.
    m = [row[:] for row in matrix]
    size = len(m)
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = Fraction(1) / m[col][col]
        for r in range(col + 1, size):
            factor = m[r][col] * inv
            if factor == 0:
                continue
            for c in range(col, size):
                m[r][c] -= factor * m[col][c]
    return det


def escape_matrix_determinant(n: int, seed=None, assignment=None) -> Fraction:
    """Evaluate det of escape_matrix(n) at a (random) positive point.

    n is capped at 3 since the matrix is 2^n x 2^n.  The determinant is a
    nonzero rational function, so the value is nonzero for almost every
    sampled point.
    """
    if not 1 <= n <= 3:
        raise ValueError("n must be in {1, 2, 3}; the matrix has 2^n rows")
    names = ["a1"] + ["b%d" % (i + 1) for i in range(n)]
    if assignment is None:
        rng = random.Random(seed)
        assignment = {
            name: Fraction(rng.randint(1, 10**6), rng.randint(1, 10**6))
            for name in names
        }
    numeric = [
        [entry.evaluate(assignment) for entry in row] for row in escape_matrix(n)
    ]
    return _fraction_det(numeric)
