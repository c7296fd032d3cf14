"""Exact arithmetic on polygonal numbers and weighted (shifted) polygonal forms.

A form ``<a_1^(r_1), ..., a_n^(r_n)>_m`` is the weighted sum
``a_1 P_m^(r_1)(x_1) + ... + a_n P_m^(r_n)(x_n)`` with

    P_m^(r)(x) = ((m-2) x^2 - (m-2-2r) x) / 2.

Level ``r = 1`` gives the ordinary m-gonal numbers.  Everything here is
integer or ``Fraction`` arithmetic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

from sympy import totient


class FormError(ValueError):
    """Raised when a form or one of its parameters is malformed."""


class Domain(str, enum.Enum):
    """Variable domain of a form: all integers, or non-negative integers."""

    GENERALIZED = "Z"
    NON_NEGATIVE = "N"


def _check_m(m: int) -> None:
    if m < 3:
        raise FormError(f"m must be >= 3, got {m}")


def polygonal(m: int, x: int) -> int:
    """Return the (generalized) ``x``-th m-gonal number."""
    _check_m(m)
    return ((m - 2) * x * x - (m - 4) * x) // 2


def shifted_polygonal(m: int, r: int, x: int) -> int:
    """Return the shifted m-gonal number of level ``r`` at ``x``.

    Raises ``FormError`` unless ``gcd(r, m-2) == 1``.
    """
    _check_m(m)
    if gcd(r, m - 2) != 1:
        raise FormError(f"level {r} is not coprime to m-2={m - 2}")
    # (m-2)x^2 - (m-2-2r)x = (m-2)x(x-1) + 2rx is always even
    return ((m - 2) * x * x - (m - 2 - 2 * r) * x) // 2


@dataclass(frozen=True)
class ShiftedForm:
    """An m-gonal form with per-variable coefficients and levels.

    ``levels`` default to all ones (an ordinary m-gonal form).  Instances are
    validated on construction and immutable afterwards.
    """

    m: int
    coefficients: tuple[int, ...]
    levels: tuple[int, ...] = ()
    domain: Domain = Domain.GENERALIZED

    def __post_init__(self) -> None:
        coeffs = tuple(int(a) for a in self.coefficients)
        levels = tuple(int(r) for r in self.levels) or (1,) * len(coeffs)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "domain", Domain(self.domain))
        _check_m(self.m)
        if not coeffs:
            raise FormError("a form needs at least one variable")
        if len(levels) != len(coeffs):
            raise FormError("coefficients and levels differ in length")
        if any(a < 1 for a in coeffs):
            raise FormError(f"coefficients must be positive: {coeffs}")
        for r in levels:
            if gcd(r, self.m - 2) != 1:
                raise FormError(f"level {r} is not coprime to m-2={self.m - 2}")
            if self.domain is Domain.GENERALIZED and not 0 <= r <= self.m - 2:
                raise FormError(f"generalized level {r} outside [0, {self.m - 2}]")
            if self.domain is Domain.NON_NEGATIVE and r < 1:
                raise FormError(f"non-negative level {r} must be >= 1")

    @classmethod
    def ordinary(cls, m: int, coefficients: Sequence[int],
                 domain: Domain = Domain.GENERALIZED) -> "ShiftedForm":
        return cls(m, tuple(coefficients), (1,) * len(coefficients), domain)

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    @property
    def is_ordinary(self) -> bool:
        return all(r == 1 for r in self.levels)

    def spec(self) -> str:
        """Canonical text encoding, e.g. ``m=16;a=1,3,3,3;r=1,1,1,1;domain=Z``."""
        a = ",".join(map(str, self.coefficients))
        r = ",".join(map(str, self.levels))
        return f"m={self.m};a={a};r={r};domain={self.domain.value}"

    @classmethod
    def parse(cls, text: str) -> "ShiftedForm":
        """Inverse of :meth:`spec`; ``r`` and ``domain`` are optional."""
        fields: dict[str, str] = {}
        for part in text.strip().split(";"):
            if not part.strip():
                continue
            key, sep, value = part.partition("=")
            if not sep:
                raise FormError(f"malformed form field {part!r} in {text!r}")
            fields[key.strip()] = value.strip()
        unknown = set(fields) - {"m", "a", "r", "domain"}
        if unknown or "m" not in fields or "a" not in fields:
            raise FormError(f"malformed form spec {text!r}")
        try:
            m = int(fields["m"])
            a = tuple(int(v) for v in fields["a"].split(","))
            r = tuple(int(v) for v in fields["r"].split(",")) if "r" in fields else ()
            domain = Domain(fields.get("domain", "Z"))
        except ValueError as exc:
            raise FormError(f"malformed form spec {text!r}: {exc}") from None
        return cls(m, a, r, domain)

    def with_coefficients(self, coefficients: Sequence[int],
                          levels: Sequence[int] | None = None) -> "ShiftedForm":
        return ShiftedForm(self.m, tuple(coefficients),
                           tuple(self.levels if levels is None else levels), self.domain)

    def sorted(self) -> "ShiftedForm":
        """Same form with variables ordered by (coefficient, level)."""
        pairs = sorted(zip(self.coefficients, self.levels))
        return self.with_coefficients([a for a, _ in pairs], [r for _, r in pairs])

    def normalized_levels(self) -> "ShiftedForm":
        """Replace each level by ``min(r, m-2-r)``, which has the same type.

        Only meaningful for the generalized domain, where
        ``P^(r)(-x) = P^(m-2-r)(x)``.
        """
        if self.domain is not Domain.GENERALIZED:
            raise FormError("level normalization needs the generalized domain")
        return self.with_coefficients(
            self.coefficients, [min(r, self.m - 2 - r) for r in self.levels])

    def __str__(self) -> str:
        if self.is_ordinary:
            inner = ",".join(map(str, self.coefficients))
        else:
            inner = ",".join(f"{a}^({r})" for a, r in zip(self.coefficients, self.levels))
        suffix = "" if self.domain is Domain.GENERALIZED else "+"
        return f"<{inner}>_{self.m}{suffix}"


def evaluate_form(form: ShiftedForm, x: Sequence[int]) -> int:
    if len(x) != form.rank:
        raise FormError(f"expected {form.rank} variables, got {len(x)}")
    if form.domain is Domain.NON_NEGATIVE and any(v < 0 for v in x):
        raise FormError(f"negative variable in non-negative domain: {tuple(x)}")
    return sum(a * shifted_polygonal(form.m, r, v)
               for a, r, v in zip(form.coefficients, form.levels, x))


@dataclass(frozen=True)
class QuadraticDecomposition:
    """``form(x) = weight * sum a_i (x_i - s_i)^2 - constant``."""

    weight: Fraction
    shifts: tuple[Fraction, ...]
    constant: Fraction

    def evaluate(self, coefficients: Sequence[int], x: Sequence[int]) -> Fraction:
        total = sum((a * (v - s) ** 2 for a, v, s in zip(coefficients, x, self.shifts)),
                    Fraction(0))
        return self.weight * total - self.constant


def quadratic_decomposition(form: ShiftedForm) -> QuadraticDecomposition:
    m2 = form.m - 2
    shifts = tuple(Fraction(m2 - 2 * r, 2 * m2) for r in form.levels)
    constant = sum((Fraction(a * (m2 - 2 * r) ** 2, 8 * m2)
                    for a, r in zip(form.coefficients, form.levels)), Fraction(0))
    return QuadraticDecomposition(Fraction(m2, 2), shifts, constant)


def coefficient_gcd(form: ShiftedForm) -> int:
    g = 0
    for a in form.coefficients:
        g = gcd(g, a)
    return g


def is_primitive(form: ShiftedForm) -> bool:
    return coefficient_gcd(form) == 1


def primitive_rescale(form: ShiftedForm) -> ShiftedForm:
    g = coefficient_gcd(form)
    if g == 1:
        return form
    return form.with_coefficients([a // g for a in form.coefficients])


def same_type(m: int, r: int, r2: int) -> bool:
    """True iff levels ``r`` and ``r2`` give the same set of generalized values."""
    for level in (r, r2):
        if gcd(level, m - 2) != 1 or not 0 <= level <= m - 2:
            raise FormError(f"level {level} invalid for m={m}")
    return r2 in (r, m - 2 - r)


def count_shifted_types(m: int) -> int:
    """Number of distinct types of generalized shifted m-gonal numbers."""
    if m < 5:
        raise FormError(f"type count needs m >= 5, got {m}")
    return int(totient(m - 2)) // 2
