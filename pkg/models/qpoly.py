"""
qpoly.py - Exact multivariate polynomials over the rationals with pluggable monomial orders.

Polynomials are immutable values: a fixed ambient variable list and a map from exponent
tuples to nonzero Fractions. Text is parsed with sympy and normalised into this form, so
every later computation is pure Python rational arithmetic.
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, Literal, Mapping, Optional, Sequence, Tuple

import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

Monomial = Tuple[int, ...]

_ALLOWED_TEXT = re.compile(r"^[\w\s+\-*/^().]*$")
_IDENTIFIER = re.compile(r"[A-Za-z_]\w*")
_NEGATIVE_POWER = re.compile(r"(\^|\*\*)\s*\(?\s*-")


class PolynomialError(Exception):
    """Polynomial text or arithmetic that cannot be represented."""


class UnknownVariableError(PolynomialError):
    """An identifier outside the declared variable list."""


class NegativeExponentError(PolynomialError):
    """A variable raised to a negative power, or divided by."""


class ZeroPolynomialError(PolynomialError):
    """An operation that needs a nonzero polynomial received zero."""


class PolynomialSyntaxError(PolynomialError):
    """Text that is not a polynomial expression."""


#
## Monomial helpers, shared with the Groebner engine
def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    """Product of two monomials."""
    return tuple(x + y for x, y in zip(a, b))


def mono_divides(a: Monomial, b: Monomial) -> bool:
    """True if a divides b."""
    return all(x <= y for x, y in zip(a, b))


def mono_div(a: Monomial, b: Monomial) -> Monomial:
    """a / b, assuming b divides a."""
    return tuple(x - y for x, y in zip(a, b))


def mono_lcm(a: Monomial, b: Monomial) -> Monomial:
    """Least common multiple of two monomials."""
    return tuple(max(x, y) for x, y in zip(a, b))


@dataclass(frozen=True)
class TermOrder:
    """A monomial order. `precedence` lists variable indices from highest to lowest.

    For `block`, the first `elim` variables of the precedence form the block to eliminate;
    each block is compared by grevlex.
    """

    kind: Literal["lex", "grevlex", "block"] = "grevlex"
    nvars: int = 0
    elim: int = 0
    precedence: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind not in ("lex", "grevlex", "block"):
            raise ValueError(f"Unknown term order {self.kind!r}")
        if self.precedence is None:
            object.__setattr__(self, "precedence", tuple(range(self.nvars)))
        if sorted(self.precedence) != list(range(self.nvars)):
            raise ValueError("precedence must be a permutation of the variable indices")
        if self.kind == "block" and not 0 <= self.elim <= self.nvars:
            raise ValueError(f"block size {self.elim} outside 0..{self.nvars}")

    @classmethod
    def parse(cls, text: str, nvars: int) -> "TermOrder":
        """Read `lex`, `grevlex` or `block:<k>`."""
        text = text.strip()
        if text.startswith("block:"):
            return cls("block", nvars, elim=int(text.split(":", 1)[1]))
        return cls(text, nvars)  # type: ignore[arg-type]

    def label(self) -> str:
        """Inverse of `parse`."""
        return f"block:{self.elim}" if self.kind == "block" else self.kind

    def key(self, m: Monomial) -> tuple:
        """Sort key: a larger key is a larger monomial."""
        if self.kind == "lex":
            return tuple(m[i] for i in self.precedence)
        if self.kind == "grevlex":
            return _grevlex_key(m, self.precedence)
        head, tail = self.precedence[: self.elim], self.precedence[self.elim :]
        return _grevlex_key(m, head) + _grevlex_key(m, tail)

    def with_nvars(self, nvars: int) -> "TermOrder":
        """Same kind over a longer variable list; new variables rank lowest."""
        extra = tuple(range(self.nvars, nvars))
        return TermOrder(self.kind, nvars, self.elim, self.precedence + extra)


def _grevlex_key(m: Monomial, indices: Sequence[int]) -> tuple:
    return (sum(m[i] for i in indices),) + tuple(-m[i] for i in reversed(indices))


class Polynomial:
    """Immutable polynomial with Fraction coefficients over a fixed variable list."""

    def __init__(self, terms: Mapping[Monomial, Fraction], variables: Sequence[str]):
        variables = tuple(variables)
        clean: Dict[Monomial, Fraction] = {}
        for mono, coeff in terms.items():
            if len(mono) != len(variables):
                raise PolynomialError(
                    f"monomial {mono} does not match {len(variables)} variables"
                )
            coeff = Fraction(coeff)
            if coeff:
                clean[tuple(mono)] = coeff
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    #
    ## Constructors
    @classmethod
    def zero(cls, variables: Sequence[str]) -> "Polynomial":
        return cls({}, variables)

    @classmethod
    def constant(cls, value, variables: Sequence[str]) -> "Polynomial":
        return cls({(0,) * len(variables): Fraction(value)}, variables)

    @classmethod
    def variable(cls, name: str, variables: Sequence[str]) -> "Polynomial":
        """The polynomial consisting of a single declared variable."""
        if name not in variables:
            raise UnknownVariableError(f"{name!r} is not one of {list(variables)}")
        idx = list(variables).index(name)
        mono = tuple(1 if i == idx else 0 for i in range(len(variables)))
        return cls({mono: Fraction(1)}, variables)

    @classmethod
    def monomial(cls, mono: Monomial, variables: Sequence[str], coeff=1) -> "Polynomial":
        return cls({tuple(mono): Fraction(coeff)}, variables)

    #
    ## Queries
    @property
    def nvars(self) -> int:
        return len(self.variables)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_value(self) -> Fraction:
        """The coefficient of 1."""
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for zero."""
        return max((sum(m) for m in self.terms), default=-1)

    def support(self) -> set:
        """Indices of variables that occur."""
        return {i for m in self.terms for i, e in enumerate(m) if e}

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def leading_term(self, order: TermOrder) -> Tuple[Monomial, Fraction]:
        return leading_term(self, order)

    #
    ## Arithmetic
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.variables != self.variables:
                raise PolynomialError(
                    f"variable lists differ: {self.variables} vs {other.variables}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(other, self.variables)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for mono, coeff in other.terms.items():
            out[mono] = out.get(mono, 0) + coeff
        return Polynomial(out, self.variables)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({m: -c for m, c in self.terms.items()}, self.variables)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = mono_mul(m1, m2)
                out[mono] = out.get(mono, 0) + c1 * c2
        return Polynomial(out, self.variables)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            raise NegativeExponentError("polynomials have no negative powers")
        result = Polynomial.constant(1, self.variables)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def scale(self, factor) -> "Polynomial":
        factor = Fraction(factor)
        return Polynomial({m: c * factor for m, c in self.terms.items()}, self.variables)

    def monic(self, order: TermOrder) -> "Polynomial":
        """Divide by the leading coefficient."""
        _, coeff = leading_term(self, order)
        return self.scale(1 / coeff)

    def diff(self, name: str) -> "Polynomial":
        """Partial derivative."""
        idx = self.variables.index(name)
        out = {}
        for mono, coeff in self.terms.items():
            if mono[idx]:
                lowered = mono[:idx] + (mono[idx] - 1,) + mono[idx + 1 :]
                out[lowered] = coeff * mono[idx]
        return Polynomial(out, self.variables)

    #
    ## Variable lists
    def extend(self, variables: Sequence[str]) -> "Polynomial":
        """Re-express over a variable list that contains the current one."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        missing = [v for v in self.variables if v not in variables]
        if missing:
            raise UnknownVariableError(f"{missing} not in {list(variables)}")
        where = [variables.index(v) for v in self.variables]
        out = {}
        for mono, coeff in self.terms.items():
            wide = [0] * len(variables)
            for src, dst in enumerate(where):
                wide[dst] = mono[src]
            out[tuple(wide)] = coeff
        return Polynomial(out, variables)

    def restrict(self, variables: Sequence[str]) -> "Polynomial":
        """Re-express over a sub-list; every dropped variable must be absent."""
        variables = tuple(variables)
        where = []
        for i, v in enumerate(self.variables):
            if v in variables:
                where.append((i, variables.index(v)))
            elif i in self.support():
                raise PolynomialError(f"{v} occurs in {self} and cannot be dropped")
        out = {}
        for mono, coeff in self.terms.items():
            narrow = [0] * len(variables)
            for src, dst in where:
                narrow[dst] = mono[src]
            out[tuple(narrow)] = coeff
        return Polynomial(out, variables)

    #
    ## Value semantics
    @cached_property
    def _frozen(self):
        return frozenset(self.terms.items())

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other, self.variables)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        return hash((self.variables, self._frozen))

    def __bool__(self):
        return bool(self.terms)

    def sort_key(self) -> tuple:
        """Deterministic ordering for output, highest grevlex term first."""
        order = TermOrder("grevlex", self.nvars)
        keys = sorted((order.key(m) for m in self.terms), reverse=True)
        return (self.degree(), keys, str(self))

    def __str__(self):
        if not self.terms:
            return "0"
        order = TermOrder("grevlex", self.nvars)
        out = ""
        for i, mono in enumerate(sorted(self.terms, key=order.key, reverse=True)):
            coeff = self.terms[mono]
            sign = "-" if coeff < 0 else "+"
            body = _format_term(abs(coeff), mono, self.variables)
            if i == 0:
                out = f"-{body}" if sign == "-" else body
            else:
                out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"Polynomial({str(self)!r}, {list(self.variables)})"


def _format_term(coeff: Fraction, mono: Monomial, variables: Sequence[str]) -> str:
    factors = [
        name if exp == 1 else f"{name}^{exp}" for name, exp in zip(variables, mono) if exp
    ]
    if not factors:
        return str(coeff)
    if coeff == 1:
        return "*".join(factors)
    return "*".join([str(coeff)] + factors)


def leading_term(f: Polynomial, order: TermOrder) -> Tuple[Monomial, Fraction]:
    """The order-maximal term of f."""
    if f.is_zero():
        raise ZeroPolynomialError("zero has no leading term")
    mono = max(f.terms, key=order.key)
    return mono, f.terms[mono]


#
## Parsing
def _symbols(variables: Sequence[str]) -> Dict[str, sympy.Symbol]:
    return {name: sympy.Symbol(name) for name in variables}


def poly_normalize(expr: sympy.Expr, variables: Sequence[str]) -> Polynomial:
    """Canonical Polynomial for a sympy expression over the declared variables."""
    variables = tuple(variables)
    syms = _symbols(variables)
    unknown = sorted(str(s) for s in expr.free_symbols if str(s) not in syms)
    if unknown:
        raise UnknownVariableError(f"undeclared variable(s) {unknown}; declared {list(variables)}")
    for atom in expr.atoms(sympy.Pow):
        if atom.base.free_symbols and atom.exp.is_number and atom.exp.is_negative:
            raise NegativeExponentError(f"negative exponent in {atom}")

    if not variables:
        value = sympy.Rational(sympy.nsimplify(expr))
        return Polynomial.constant(Fraction(int(value.p), int(value.q)), variables)

    try:
        poly = sympy.Poly(sympy.expand(expr), *[syms[v] for v in variables], domain="QQ")
    except sympy.PolynomialError as e:
        if any(s in syms.values() for s in sympy.denom(sympy.together(expr)).free_symbols):
            raise NegativeExponentError(f"division by a variable in {expr}") from e
        raise PolynomialSyntaxError(f"{expr} is not a polynomial: {e}") from e

    terms = {}
    for mono, coeff in poly.terms():
        coeff = sympy.Rational(coeff)
        terms[tuple(int(e) for e in mono)] = Fraction(int(coeff.p), int(coeff.q))
    return Polynomial(terms, variables)


def parse_polynomial(text: str, variables: Sequence[str]) -> Polynomial:
    """Parse text in the polynomial grammar, e.g. `3/2*x^2*y - u*v`."""
    text = str(text).strip()
    if not text:
        raise PolynomialSyntaxError("empty polynomial")
    if not _ALLOWED_TEXT.match(text):
        raise PolynomialSyntaxError(f"unexpected character in {text!r}")
    unknown = sorted({name for name in _IDENTIFIER.findall(text) if name not in variables})
    if unknown:
        raise UnknownVariableError(
            f"undeclared variable(s) {unknown} in {text!r}; declared {list(variables)}"
        )
    if _NEGATIVE_POWER.search(text):
        raise NegativeExponentError(f"negative exponent in {text!r}")

    try:
        expr = parse_expr(
            text,
            local_dict=_symbols(variables),
            transformations=standard_transformations + (convert_xor,),
        )
    except (SyntaxError, TypeError, ValueError, AttributeError, sympy.SympifyError) as e:
        raise PolynomialSyntaxError(f"cannot parse {text!r}: {e}") from e
    if not isinstance(expr, sympy.Expr) or expr.has(sympy.Float):
        raise PolynomialSyntaxError(f"{text!r} is not a rational polynomial")
    return poly_normalize(expr, variables)


def parse_many(texts: Iterable[str], variables: Sequence[str]) -> Tuple[Polynomial, ...]:
    return tuple(parse_polynomial(t, variables) for t in texts)
