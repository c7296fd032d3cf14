"""Bounded global representation: sumset sieves, witnesses, truants, regularity."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from polyreg.localsolve import Status, local_represents, locally_represents, relevant_primes
from polyreg.polynumber import (Domain, ShiftedForm, coefficient_gcd, evaluate_form,
                                primitive_rescale, quadratic_decomposition, shifted_polygonal)
from polyreg.residues import bit_mask, bits_to_list, lowest_missing, summarize

# bits per accumulator; about 25 MB worth of Python ints
MAX_BOUND = 200_000_000


class BoundTooLarge(ValueError):
    pass


def _domain(form: ShiftedForm, domain: Domain | str | None) -> Domain:
    return form.domain if domain is None else Domain(domain)


def term_values(m: int, r: int, a: int, bound: int, domain: Domain) -> list[int]:
    """Sorted distinct values ``a * P^(r)(x) <= bound`` over the domain.

    ``P^(r)`` is non-negative and increasing in ``|x|`` on each side of 0,
    so walking outwards until the bound is exceeded is exhaustive.
    """
    out = set()
    steps = (1, -1) if domain is Domain.GENERALIZED else (1,)
    for step in steps:
        x = 0
        while True:
            v = a * shifted_polygonal(m, r, x)
            if v > bound:
                break
            out.add(v)
            x += step
    return sorted(out)


def _term_tables(form: ShiftedForm, bound: int, domain: Domain) -> list[tuple[int, list[int]]]:
    return [(i, term_values(form.m, r, a, bound, domain))
            for i, (a, r) in enumerate(zip(form.coefficients, form.levels))]


def sumset(acc: int, values: Sequence[int], mask: int) -> int:
    out = 0
    for v in values:
        out |= acc << v
    return out & mask


def represented_set(form: ShiftedForm, bound: int, domain: Domain | str | None = None) -> int:
    """Bitset of the N <= bound represented by the form."""
    if bound < 0:
        raise ValueError("bound must be non-negative")
    if bound > MAX_BOUND:
        raise BoundTooLarge(f"bound {bound} exceeds {MAX_BOUND}")
    dom = _domain(form, domain)
    mask = bit_mask(bound)
    acc = 1
    # ascending coefficients keep early accumulators sparse
    order = sorted(range(form.rank), key=lambda i: form.coefficients[i])
    tables = dict(_term_tables(form, bound, dom))
    for i in order:
        acc = sumset(acc, tables[i], mask)
    return acc


def represents(form: ShiftedForm, n: int, domain: Domain | str | None = None
               ) -> tuple[int, ...] | None:
    """A vector ``x`` with ``form(x) == n`` in the domain, or None."""
    if n < 0:
        return None
    dom = _domain(form, domain)
    mask = bit_mask(n)
    order = sorted(range(form.rank), key=lambda i: -form.coefficients[i])
    values = dict(_term_tables(form, n, dom))
    # reach[k]: sums attainable by the variables order[k:]
    reach = [0] * (form.rank + 1)
    reach[form.rank] = 1
    for k in range(form.rank - 1, -1, -1):
        reach[k] = sumset(reach[k + 1], values[order[k]], mask)
    if not reach[0] >> n & 1:
        return None
    chosen: dict[int, int] = {}

    def dfs(k: int, remaining: int) -> bool:
        if k == form.rank:
            return remaining == 0
        for v in values[order[k]]:
            if v > remaining:
                break
            if reach[k + 1] >> (remaining - v) & 1:
                chosen[order[k]] = v
                return dfs(k + 1, remaining - v)
        return False

    if not dfs(0, n):
        raise AssertionError("reachability table and search disagree")
    x = tuple(_preimage(form, i, chosen[i], dom) for i in range(form.rank))
    assert evaluate_form(form if dom is form.domain else _as_domain(form, dom), x) == n
    return x


def _as_domain(form: ShiftedForm, dom: Domain) -> ShiftedForm:
    return ShiftedForm(form.m, form.coefficients, form.levels, dom)


def _preimage(form: ShiftedForm, i: int, value: int, dom: Domain) -> int:
    a, r = form.coefficients[i], form.levels[i]
    steps = (1, -1) if dom is Domain.GENERALIZED else (1,)
    for step in steps:
        x = 0
        while True:
            v = a * shifted_polygonal(form.m, r, x)
            if v == value:
                return x
            if v > value:
                break
            x += step
    raise AssertionError(f"no preimage for term value {value}")


# ---------------------------------------------------------------------------
# local sweep
# ---------------------------------------------------------------------------

class _PrimeSweep:
    """Local verdicts at one non-exceptional prime for a run of targets.

    The diagonal target is ``t = T / (4 (m-2)^2)`` with the integer
    ``T = 8(m-2) N + K``; the verdict depends only on ``ord_p(T)`` and the
    unit part of ``T`` modulo ``p^3``, which is what is memoized.
    """

    def __init__(self, form: ShiftedForm, p: int, cap: int | None):
        self.form, self.p, self.cap = form, p, cap
        m2 = form.m - 2
        self.step = 8 * m2
        self.offset = int(quadratic_decomposition(form).constant * 8 * m2)
        self.mod = p ** 3
        self.memo: dict[tuple[int, int], Status] = {}

    def status(self, n: int) -> Status:
        p = self.p
        t = self.step * n + self.offset
        if t == 0:
            key = (-1, 0)
        else:
            v = 0
            while t % p == 0:
                t //= p
                v += 1
            key = (v, t % self.mod)
        hit = self.memo.get(key)
        if hit is None:
            hit = local_represents(self.form, n, p, self.cap, witness=False).status
            self.memo[key] = hit
        return hit


def _local_sweep(form: ShiftedForm, targets: Sequence[int], cap: int | None
                 ) -> tuple[list[int], list[int]]:
    """Split ``targets`` (for a primitive form) into locally represented and undetermined."""
    yes: list[int] = []
    undetermined: list[int] = []
    if form.rank <= 2:
        for n in targets:
            status, _ = locally_represents(form, n, cap)
            if status is Status.YES:
                yes.append(n)
            elif status is Status.UNDETERMINED:
                undetermined.append(n)
        return yes, undetermined
    sweeps = [_PrimeSweep(form, p, cap) for p in relevant_primes(form)]
    for n in targets:
        status = Status.YES
        for sweep in sweeps:
            s = sweep.status(n)
            if s is Status.NO:
                status = s
                break
            if s is Status.UNDETERMINED:
                status = s
        if status is Status.YES:
            yes.append(n)
        elif status is Status.UNDETERMINED:
            undetermined.append(n)
    return yes, undetermined


def _scaled_targets(form: ShiftedForm, targets: Sequence[int]) -> tuple[ShiftedForm, int, list[int]]:
    g = coefficient_gcd(form)
    return primitive_rescale(form), g, [n // g for n in targets if n % g == 0]


def locally_represented_set(form: ShiftedForm, bound: int, cap: int | None = None,
                            targets: Sequence[int] | None = None) -> tuple[int, list[int]]:
    """Bitset of locally represented N <= bound and the list of undetermined N.

    A non-primitive form ``g * f`` locally represents N iff ``g | N`` and
    ``f`` locally represents ``N / g``, so the content is factored out first.
    ``targets`` restricts the sweep to a subset of [0, bound].
    """
    if targets is None:
        targets = range(bound + 1)
    prim, g, scaled = _scaled_targets(form, targets)
    yes, undetermined = _local_sweep(prim, scaled, cap)
    bits = 0
    for n in yes:
        bits |= 1 << (n * g)
    return bits, [n * g for n in undetermined]


# ---------------------------------------------------------------------------
# regularity
# ---------------------------------------------------------------------------

class RegularityStatus(str, enum.Enum):
    CONSISTENT = "ConsistentUpTo"
    IRREGULAR = "Irregular"


class ConsistencyError(AssertionError):
    """A globally represented N was found locally unrepresented."""


@dataclass
class RegularityReport:
    form: ShiftedForm
    bound: int
    represented: int
    locally_represented: int
    counterexamples: list[int]
    undetermined: list[int] = field(default_factory=list)
    tags: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        stray = self.represented & ~self.locally_represented & bit_mask(self.bound)
        stray &= ~sum(1 << n for n in self.undetermined)
        if stray:
            first = (stray & -stray).bit_length() - 1
            raise ConsistencyError(f"{self.form}: {first} is represented but locally missed")
        if any(self.represented >> n & 1 for n in self.counterexamples):
            raise ConsistencyError("counterexample list meets the represented set")

    @property
    def status(self) -> RegularityStatus:
        return RegularityStatus.IRREGULAR if self.counterexamples else RegularityStatus.CONSISTENT

    @property
    def first_counterexample(self) -> int | None:
        return self.counterexamples[0] if self.counterexamples else None

    def status_text(self) -> str:
        if self.counterexamples:
            return f"Irregular({self.counterexamples[0]})"
        return f"ConsistentUpTo({self.bound})"

    def to_json(self) -> dict:
        return {
            "form": self.form.spec(),
            "bound": self.bound,
            "status": self.status.value,
            "first_counterexample": self.first_counterexample,
            "represented": summarize(self.represented, self.bound),
            "locally_represented": summarize(self.locally_represented, self.bound),
            "counterexamples": self.counterexamples,
            "undetermined": self.undetermined,
            "tags": self.tags,
        }


def regularity_report(form: ShiftedForm, bound: int, cap: int | None = None,
                      full_local: bool = True) -> RegularityReport:
    """Compare represented and locally represented sets on [0, bound].

    With ``full_local=False`` only the unrepresented targets go through the
    local oracle (global implies local), which skips the containment check.
    """
    rep = represented_set(form, bound)
    if full_local:
        local, undetermined = locally_represented_set(form, bound, cap)
    else:
        missing = bits_to_list(~rep & bit_mask(bound))
        local, undetermined = locally_represented_set(form, bound, cap, targets=missing)
        local |= rep
    counterexamples = bits_to_list(local & ~rep)
    return RegularityReport(form, bound, rep, local, counterexamples, undetermined)


def truant(form: ShiftedForm, bound: int, mode: str = "universal",
           cap: int | None = None) -> int | None:
    """Least N <= bound missed by the form.

    ``universal``: least unrepresented N.  ``regular``: least N that is
    locally represented (determined Yes) but not represented.
    """
    rep = represented_set(form, bound)
    if mode == "universal":
        return lowest_missing(rep, bound)
    if mode != "regular":
        raise ValueError(f"unknown truant mode {mode!r}")
    missing = bits_to_list(~rep & bit_mask(bound))
    # chunked so a small truant returns early
    start = 0
    while start < len(missing):
        chunk = missing[start:start + 256]
        local, _ = locally_represented_set(form, bound, cap, targets=chunk)
        if local:
            return (local & -local).bit_length() - 1
        start += 256
    return None
