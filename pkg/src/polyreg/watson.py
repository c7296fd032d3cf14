"""Watson-style lambda transformations of shifted m-gonal forms.

For an odd prime ``p`` coprime to ``m-2`` (or ``p = 2`` when ``m = 0 mod 4``)
the substitution ``x_i -> p x_i + j_i`` on the p-unit coefficients gives

    form(l(x)) = sum_unit p^2 a_i P^(r_i')(x_i) + sum_rest a_i P^(r_i)(x_i) + C,

and dividing the quadratic part by ``p**k`` yields a new primitive shifted
form.  :func:`lambda_tilde` iterates this until the local target condition
holds at ``p``; :func:`lambda_full` does so over every bad prime.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor, gcd

from polyreg.localsolve import Status, is_zp_universal, ord_p, relevant_primes
from polyreg.polynumber import Domain, ShiftedForm, evaluate_form, shifted_polygonal

DEFAULT_MAX_ITER = 64


class LambdaError(ValueError):
    """The transformation does not apply to this (form, prime)."""


class IterationLimit(RuntimeError):
    """Iterated transformation did not reach its target within ``max_iter`` steps."""

    def __init__(self, message: str, trail: list["LambdaRecord"]):
        super().__init__(message)
        self.trail = trail


@dataclass(frozen=True)
class LambdaRecord:
    p: int
    unit_indices: tuple[int, ...]
    j: tuple[int, ...]
    new_levels: tuple[int, ...]
    constant: int
    scale_exponent: int
    source: ShiftedForm
    result: ShiftedForm

    def substitute(self, x: tuple[int, ...] | list[int]) -> tuple[int, ...]:
        """The point ``l(x)`` of the source form corresponding to ``x``."""
        out = list(x)
        for i, j in zip(self.unit_indices, self.j):
            out[i] = self.p * x[i] + j
        return tuple(out)

    def unscaled_value(self, x: tuple[int, ...] | list[int]) -> int:
        """``p**k * result(x)``: the quadratic part before rescaling."""
        return self.p ** self.scale_exponent * evaluate_form(self.result, x)

    def to_json(self) -> dict:
        return {
            "prime": self.p,
            "unit_indices": list(self.unit_indices),
            "j": list(self.j),
            "new_levels": list(self.new_levels),
            "constant": self.constant,
            "scale_exponent": self.scale_exponent,
            "result": self.result.spec(),
        }


def _choose_j(m: int, r: int, p: int, domain: Domain) -> int:
    """The offset ``j`` with ``2(m-2) j = m-2-2r (mod p)`` in the admissible window.

    Generalized domain: the unique such integer in
    ``[-p/2 + c, p/2 + c]`` with ``c = (m-2-2r)/(2(m-2))``; non-negative
    domain: the one in ``[0, p-1]``.
    """
    m2 = m - 2
    b = m2 - 2 * r
    if p == 2:
        # membership in Lambda_2 reads a_i (4 x_i - b) = 0 mod 8 on odd a_i
        residue = (b // 4) % 2
    else:
        residue = b * pow(2 * m2, -1, p) % p
    if domain is Domain.NON_NEGATIVE:
        return residue
    c = Fraction(b, 2 * m2)
    lo, hi = c - Fraction(p, 2), c + Fraction(p, 2)
    start = floor(lo)
    hits = [j for j in range(start, start + p + 2) if lo <= j <= hi and (j - residue) % p == 0]
    # both endpoints qualify only when m-2 = 1; they give levels 0 and m-2,
    # which have the same type, so take the lower one
    if len(hits) != 1 and not (m == 3 and len(hits) == 2):
        raise ArithmeticError(f"expected a unique j for m={m}, r={r}, p={p}, got {hits}")
    return hits[0]


def _check_applicable(form: ShiftedForm, p: int) -> None:
    if p == 2:
        if form.m % 4:
            raise LambdaError(f"lambda_2 needs m = 0 mod 4, got m={form.m}")
    elif p < 3 or gcd(p, form.m - 2) != 1:
        raise LambdaError(f"lambda_{p} needs an odd prime coprime to m-2={form.m - 2}")


def _lambda_step(form: ShiftedForm, p: int) -> tuple[ShiftedForm, LambdaRecord]:
    _check_applicable(form, p)
    m, m2 = form.m, form.m - 2
    a, r = form.coefficients, form.levels
    units = tuple(i for i, ai in enumerate(a) if ai % p)
    if not units:
        raise LambdaError(f"form {form} has no {p}-unit coefficient; rescale first")
    js = tuple(_choose_j(m, r[i], p, form.domain) for i in units)
    new_r = list(r)
    new_levels = []
    for i, j in zip(units, js):
        num = m2 * (p + 2 * j) - (m2 - 2 * r[i])
        if num % (2 * p):
            raise ArithmeticError(f"non-integral new level for index {i}")
        rp = num // (2 * p)
        new_r[i] = rp
        new_levels.append(rp)
    constant = sum(a[i] * shifted_polygonal(m, r[i], j) for i, j in zip(units, js))
    others = [ord_p(a[i], p) for i in range(len(a)) if i not in units]
    k = min([2] + others)
    new_a = [(p * p * ai if i in units else ai) // p ** k for i, ai in enumerate(a)]
    result = ShiftedForm(m, tuple(new_a), tuple(new_r), form.domain)
    record = LambdaRecord(p, units, js, tuple(new_levels), constant, k, form, result)
    return result, record


def lambda_p(form: ShiftedForm, p: int) -> tuple[ShiftedForm, LambdaRecord]:
    """One lambda step at an odd prime ``p`` coprime to ``m-2``."""
    if p == 2:
        raise LambdaError("use lambda_2 for p = 2")
    return _lambda_step(form, p)


def lambda_2(form: ShiftedForm) -> tuple[ShiftedForm, LambdaRecord]:
    """One lambda step at 2 (requires ``m = 0 mod 4``)."""
    return _lambda_step(form, 2)


def condition_3_7(form: ShiftedForm) -> bool:
    """Whether the odd coefficients include both a 1 mod 4 and a 3 mod 4 entry."""
    if form.m % 4:
        raise LambdaError(f"needs m = 0 mod 4, got m={form.m}")
    residues = {a % 4 for a in form.coefficients if a % 2}
    return residues == {1, 3}


def at_target(form: ShiftedForm, p: int, cap: int | None = None) -> bool:
    """Local stopping condition of :func:`lambda_tilde` at ``p``."""
    v = is_zp_universal(form, p, cap)
    if v.status is Status.UNDETERMINED:
        raise ArithmeticError(f"Z_{p}-universality of {form} undetermined: {v.note}")
    if v.yes:
        return True
    return p == 2 and condition_3_7(form)


def lambda_tilde(form: ShiftedForm, p: int, max_iter: int = DEFAULT_MAX_ITER,
                 cap: int | None = None) -> tuple[ShiftedForm, list[LambdaRecord]]:
    """Iterate lambda_p until the form is Z_p-universal (or, at 2, satisfies
    the 1-and-3-mod-4 condition)."""
    _check_applicable(form, p)
    trail: list[LambdaRecord] = []
    current = form
    while not at_target(current, p, cap):
        if len(trail) >= max_iter:
            raise IterationLimit(
                f"lambda_{p} did not reach its target within {max_iter} steps", trail)
        current, record = _lambda_step(current, p)
        trail.append(record)
    return current, trail


def bad_primes(form: ShiftedForm, cap: int | None = None) -> list[int]:
    """Ascending primes where the form misses its local target."""
    if form.rank < 3:
        raise LambdaError("bad-prime set is infinite for rank < 3")
    return [p for p in relevant_primes(form) if not at_target(form, p, cap)]


def lambda_full(form: ShiftedForm, max_iter: int = DEFAULT_MAX_ITER,
                cap: int | None = None) -> tuple[ShiftedForm, list[LambdaRecord]]:
    """Compose :func:`lambda_tilde` over the bad primes in ascending order."""
    trail: list[LambdaRecord] = []
    current = form
    for p in bad_primes(form, cap):
        current, steps = lambda_tilde(current, p, max_iter, cap)
        trail.extend(steps)
    return current, trail
