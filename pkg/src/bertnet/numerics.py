"""Exact rationals and the tolerance policy used by the float code paths.

All closed-form and LP work is done with :class:`fractions.Fraction`.  Floats
only show up in the boundary search and the fictitious-play oracle; values
coming from those paths are compared with an absolute tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Union

Scalar = Union[Fraction, float]

DEFAULT_TOL = 1e-9


class MalformedNumber(ValueError):
    pass


def rat_arith(a: Fraction, b: Fraction, op: str) -> Fraction:
    """Apply ``op`` in {add, sub, mul, div} to two rationals."""
    a, b = Fraction(a), Fraction(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ZeroDivisionError("rational division by zero")
        return a / b
    raise ValueError(f"unknown op {op!r}")


def is_exact(x) -> bool:
    return isinstance(x, (int, _RationalABC)) and not isinstance(x, bool)


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, ``"p"``, decimal strings, ints or floats into a Fraction.

    Decimal strings are converted exactly ("0.5" -> 1/2).  Floats are first
    rendered with ``repr`` so that 0.1 becomes 1/10 rather than its binary
    expansion.
    """
    if isinstance(value, bool):
        raise MalformedNumber(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise MalformedNumber(f"non-finite value {value!r}")
        return Fraction(Decimal(repr(value)))
    if isinstance(value, str):
        s = value.strip()
        if "/" in s:
            num, _, den = s.partition("/")
            try:
                n, d = int(num.strip()), int(den.strip())
            except ValueError as exc:
                raise MalformedNumber(f"bad rational {value!r}") from exc
            if d == 0:
                raise MalformedNumber(f"zero denominator in {value!r}")
            return Fraction(n, d)
        try:
            dec = Decimal(s)
        except InvalidOperation as exc:
            raise MalformedNumber(f"bad number {value!r}") from exc
        if not dec.is_finite():
            raise MalformedNumber(f"non-finite value {value!r}")
        return Fraction(dec)
    raise MalformedNumber(f"cannot parse {value!r} as a rational")


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def format_scalar(x: Scalar) -> str | float:
    """JSON-friendly rendering: exact values as strings, floats as floats."""
    if is_exact(x):
        return format_rational(Fraction(x))
    return float(x)


def parse_scalar(value, exact: bool = True) -> Scalar:
    if exact:
        return parse_rational(value)
    if isinstance(value, str):
        return float(parse_rational(value))
    return float(value)


def snap_rational(x: float, max_denominator: int = 10**6, tol: float = 1e-10) -> Fraction | None:
    """Best rational approximation with bounded denominator, if it is close.

    Returns ``None`` when the continued-fraction candidate is farther than
    ``tol`` from ``x``.
    """
    cand = Fraction(x).limit_denominator(max_denominator)
    if abs(float(cand) - x) <= tol:
        return cand
    return None


@dataclass(frozen=True)
class Tolerance:
    """Comparison policy.  ``abs_tol == 0`` means exact comparison."""

    abs_tol: float = DEFAULT_TOL

    @classmethod
    def exact(cls) -> "Tolerance":
        return cls(0.0)

    def eq(self, a: Scalar, b: Scalar) -> bool:
        if self.abs_tol == 0:
            return a == b
        return abs(a - b) <= self.abs_tol

    def le(self, a: Scalar, b: Scalar) -> bool:
        return a <= b + self.abs_tol if self.abs_tol else a <= b

    def lt(self, a: Scalar, b: Scalar) -> bool:
        """Strictly less, by more than the tolerance."""
        return a < b - self.abs_tol if self.abs_tol else a < b

    def cmp(self, a: Scalar, b: Scalar) -> int:
        if self.eq(a, b):
            return 0
        return -1 if a < b else 1


def to_float(x: Scalar) -> float:
    return float(x)
