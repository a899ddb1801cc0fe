"""Exact multivariate polynomials over the rationals.

Sparse representation: a mapping from exponent tuples to nonzero Fraction
coefficients, over a fixed tuple of variable names shared by every
polynomial in a model.  The canonical string form orders terms by total
degree, then lexicographically in the declared variable order, leading
term first; this is the form used in model files and reports, and it
round-trips through :func:`parse_poly`.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ExactDivisionError, ParseError

Monomial = tuple[int, ...]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<rat>\d+/\d+)|(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*^()]))"
)


def _grlex_key(mono: Monomial) -> tuple:
    return (sum(mono), mono)


class Poly:
    """Sparse exact polynomial over Q in a fixed variable tuple."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[Monomial, Fraction]):
        self.variables = tuple(variables)
        clean: dict[Monomial, Fraction] = {}
        for mono, coeff in terms.items():
            if len(mono) != len(self.variables):
                raise ValueError("monomial arity does not match variable count")
            frac = Fraction(coeff)
            if frac != 0:
                clean[tuple(mono)] = frac
        self.terms = clean

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "Poly":
        return cls(variables, {})

    @classmethod
    def constant(cls, variables: Sequence[str], value) -> "Poly":
        value = Fraction(value)
        if value == 0:
            return cls.zero(variables)
        return cls(variables, {tuple([0] * len(variables)): value})

    @classmethod
    def variable(cls, variables: Sequence[str], index: int) -> "Poly":
        mono = [0] * len(variables)
        mono[index] = 1
        return cls(variables, {tuple(mono): Fraction(1)})

    # -- predicates ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self.terms)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(m) for m in self.terms)

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Poly") -> None:
        if self.variables != other.variables:
            raise ValueError("polynomials over different variable tuples")

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            acc = terms.get(mono, Fraction(0)) + coeff
            if acc == 0:
                terms.pop(mono, None)
            else:
                terms[mono] = acc
        out = Poly.__new__(Poly)
        out.variables = self.variables
        out.terms = terms
        return out

    def __neg__(self) -> "Poly":
        out = Poly.__new__(Poly)
        out.variables = self.variables
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            scale = Fraction(other)
            if scale == 0:
                return Poly.zero(self.variables)
            out = Poly.__new__(Poly)
            out.variables = self.variables
            out.terms = {m: c * scale for m, c in self.terms.items()}
            return out
        self._check(other)
        terms: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = tuple(a + b for a, b in zip(m1, m2))
                acc = terms.get(mono, Fraction(0)) + c1 * c2
                if acc == 0:
                    terms.pop(mono, None)
                else:
                    terms[mono] = acc
        out = Poly.__new__(Poly)
        out.variables = self.variables
        out.terms = terms
        return out

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Poly":
        if exponent < 0:
            raise ValueError("negative exponent")
        result = Poly.constant(self.variables, 1)
        base = self
        n = exponent
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Poly)
            and self.variables == other.variables
            and self.terms == other.terms
        )

    def __hash__(self) -> int:
        return hash((self.variables, frozenset(self.terms.items())))

    # -- calculus ----------------------------------------------------------

    def partial(self, index: int) -> "Poly":
        """Partial derivative with respect to the index-th variable."""
        terms: dict[Monomial, Fraction] = {}
        for mono, coeff in self.terms.items():
            e = mono[index]
            if e == 0:
                continue
            lowered = list(mono)
            lowered[index] = e - 1
            key = tuple(lowered)
            acc = terms.get(key, Fraction(0)) + coeff * e
            if acc == 0:
                terms.pop(key, None)
            else:
                terms[key] = acc
        out = Poly.__new__(Poly)
        out.variables = self.variables
        out.terms = terms
        return out

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        if len(point) != len(self.variables):
            raise ValueError("point arity does not match variable count")
        total = Fraction(0)
        for mono, coeff in self.terms.items():
            value = coeff
            for base, e in zip(point, mono):
                if e:
                    value *= Fraction(base) ** e
            total += value
        return total

    def evaluate_float(self, point: Sequence[float]) -> float:
        total = 0.0
        for mono, coeff in self.terms.items():
            value = float(coeff)
            for base, e in zip(point, mono):
                if e:
                    value *= float(base) ** e
            total += value
        return total

    def div_exact(self, divisor: "Poly") -> "Poly":
        """Exact quotient self / divisor; raises if the division is inexact."""
        self._check(divisor)
        if divisor.is_zero():
            raise ExactDivisionError("division by zero polynomial")
        quotient = Poly.zero(self.variables)
        remainder = self
        lead_d = max(divisor.terms, key=_grlex_key)
        cd = divisor.terms[lead_d]
        while not remainder.is_zero():
            lead_r = max(remainder.terms, key=_grlex_key)
            diff = tuple(a - b for a, b in zip(lead_r, lead_d))
            if any(e < 0 for e in diff):
                raise ExactDivisionError("inexact polynomial division")
            t = Poly(self.variables, {diff: remainder.terms[lead_r] / cd})
            quotient = quotient + t
            remainder = remainder - t * divisor
        return quotient

    # -- formatting ----------------------------------------------------------

    def _format_monomial(self, mono: Monomial) -> str:
        parts = []
        for name, e in zip(self.variables, mono):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return "*".join(parts)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        ordered = sorted(self.terms, key=_grlex_key, reverse=True)
        pieces: list[str] = []
        for mono, first in zip(ordered, [True] + [False] * len(ordered)):
            coeff = self.terms[mono]
            m = self._format_monomial(mono)
            mag = abs(coeff)
            if m and mag == 1:
                body = m
            elif m:
                body = f"{mag}*{m}"
            else:
                body = str(mag)
            if first:
                pieces.append(body if coeff > 0 else f"-{body}")
            else:
                pieces.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(pieces)

    def __repr__(self) -> str:
        return f"Poly({str(self)!r})"


# -- parsing -------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.variables = tuple(variables)
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text: str) -> list[tuple[str, str]]:
        tokens = []
        pos = 0
        while pos < len(text):
            match = _TOKEN_RE.match(text, pos)
            if match is None:
                stray = text[pos:].strip()
                if not stray:
                    break
                raise ParseError(f"unexpected character in expression: {stray[0]!r}")
            pos = match.end()
            kind = match.lastgroup
            tokens.append((kind, match.group(kind)))
        return tokens

    def _peek(self) -> tuple[str, str] | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return None

    def _next(self) -> tuple[str, str]:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of expression")
        self.pos += 1
        return tok

    def parse(self) -> Poly:
        value = self._expr()
        if self._peek() is not None:
            raise ParseError(f"trailing input near {self._peek()[1]!r}")
        return value

    def _expr(self) -> Poly:
        value = self._term()
        while True:
            tok = self._peek()
            if tok is None or tok[0] != "op" or tok[1] not in "+-":
                return value
            self._next()
            rhs = self._term()
            value = value + rhs if tok[1] == "+" else value - rhs

    def _term(self) -> Poly:
        value = self._factor()
        while True:
            tok = self._peek()
            if tok is None or tok[0] != "op" or tok[1] != "*":
                return value
            self._next()
            value = value * self._factor()

    def _factor(self) -> Poly:
        tok = self._peek()
        if tok is not None and tok == ("op", "-"):
            self._next()
            return -self._factor()
        base = self._atom()
        tok = self._peek()
        if tok is not None and tok == ("op", "^"):
            self._next()
            kind, text = self._next()
            if kind != "int":
                raise ParseError("exponent must be a nonnegative integer")
            return base ** int(text)
        return base

    def _atom(self) -> Poly:
        kind, text = self._next()
        if kind == "rat":
            num, den = text.split("/")
            return Poly.constant(self.variables, Fraction(int(num), int(den)))
        if kind == "int":
            return Poly.constant(self.variables, int(text))
        if kind == "name":
            try:
                index = self.variables.index(text)
            except ValueError:
                raise ParseError(f"unknown variable {text!r}") from None
            return Poly.variable(self.variables, index)
        if kind == "op" and text == "(":
            value = self._expr()
            kind, text = self._next()
            if (kind, text) != ("op", ")"):
                raise ParseError("unbalanced parentheses")
            return value
        raise ParseError(f"unexpected token {text!r}")


def parse_poly(text: str, variables: Sequence[str]) -> Poly:
    """Parse an expression over + - * ^ with rational literals.

    Rational literals are written without spaces (``1/2``); ``^`` takes a
    nonnegative integer exponent; parentheses group.  Only the declared
    variable names are accepted.
    """
    if not text.strip():
        raise ParseError("empty expression")
    return _Parser(text, variables).parse()


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational literal {text!r}") from exc


def polyseq_str(polys: Iterable[Poly]) -> list[str]:
    return [str(p) for p in polys]
