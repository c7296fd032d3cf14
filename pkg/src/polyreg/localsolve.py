"""p-adic representation of integers by shifted m-gonal forms.

For a prime ``p`` not dividing ``2(m-2)`` (or ``p = 2`` when ``m = 0 mod 4``)
completing the square turns ``form(x) = N`` into the diagonal problem

    sum a_i y_i^2 = (N + C) / w,      y_i = x_i - s_i,  w = (m-2)/2,

with ``s_i``, ``C`` and ``w^-1`` all p-adic integers.  The diagonal problem is
decided exactly by a valuation recursion (see :func:`qf_represents`).  At the
remaining primes every form with a p-unit coefficient is Z_p-universal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Sequence

from sympy import isprime, jacobi_symbol, legendre_symbol, nextprime, primefactors
from sympy.ntheory import sqrt_mod

from polyreg.polynumber import ShiftedForm, quadratic_decomposition, shifted_polygonal

DEFAULT_CAP_2 = 20
DEFAULT_CAP_ODD = 12
BRUTE_BUDGET = 2_000_000
# above this the mod-p unit search switches from DP to the closed form
DP_PRIME_LIMIT = 31


class Status(str, enum.Enum):
    YES = "Yes"
    NO = "No"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class LocalVerdict:
    """Outcome of a p-adic representation query.

    ``witness``/``precision``: for Yes, a residue vector satisfying the
    congruence modulo ``p**precision`` together with a Hensel-liftable
    coordinate (``precision`` is None for an exact solution or a verdict
    obtained without a witness).  ``obstruction_precision``: for No, an
    exponent ``e`` with no solution modulo ``p**e``.  ``cap``: for
    Undetermined, the precision cap that was hit.
    """

    status: Status
    p: int
    witness: tuple[int, ...] | None = None
    precision: int | None = None
    obstruction_precision: int | None = None
    cap: int | None = None
    note: str = ""

    @property
    def yes(self) -> bool:
        return self.status is Status.YES

    @property
    def no(self) -> bool:
        return self.status is Status.NO

    def to_json(self) -> dict:
        out: dict = {"status": self.status.value, "prime": self.p}
        if self.witness is not None:
            out["witness"] = list(self.witness)
        if self.status is Status.YES:
            out["precision"] = self.precision
        elif self.status is Status.NO:
            out["precision"] = self.obstruction_precision
        else:
            out["precision"] = self.cap
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class SquareClassRep:
    """Representatives of the nonzero p-adic integers modulo unit squares and p^2."""

    p: int
    representatives: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.representatives:
            if self.p == 2:
                reps: tuple[int, ...] = (1, 3, 5, 7, 2, 6, 10, 14)
            else:
                eps = least_nonresidue(self.p)
                reps = (1, eps, self.p, self.p * eps)
            object.__setattr__(self, "representatives", reps)


def least_nonresidue(p: int) -> int:
    for e in range(2, p):
        if pow(e, (p - 1) // 2, p) == p - 1:
            return e
    raise ValueError(f"{p} has no quadratic non-residue")


def _require_prime(p: int) -> None:
    if not isprime(p):
        raise ValueError(f"{p} is not prime")


def default_cap(p: int) -> int:
    return DEFAULT_CAP_2 if p == 2 else DEFAULT_CAP_ODD


def ord_p(n: int | Fraction, p: int) -> int:
    """p-adic valuation of a nonzero integer or rational."""
    if n == 0:
        raise ValueError("valuation of zero")
    if isinstance(n, Fraction):
        return ord_p(n.numerator, p) - ord_p(n.denominator, p)
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def to_residue(q: Fraction | int, p: int, k: int) -> int:
    """Reduce a p-integral rational modulo ``p**k``."""
    q = Fraction(q)
    mod = p ** k
    if q.denominator % p == 0:
        raise ValueError(f"{q} is not a {p}-adic integer")
    return q.numerator * pow(q.denominator, -1, mod) % mod


# ---------------------------------------------------------------------------
# diagonal forms
# ---------------------------------------------------------------------------

def _unit_residue_search(c: Sequence[int], t: int, p: int, kappa: int):
    """Find ``y`` mod ``p**kappa`` with ``sum c y^2 = t`` and some unit ``c_i y_i``.

    Dynamic programming over coordinates on the states (residue, has-unit).
    Returns ``(y, i)`` with ``i`` a liftable coordinate, or None.
    """
    mod = p ** kappa
    options = []
    for ci in c:
        seen: dict[tuple[int, bool], int] = {}
        unit_c = ci % p != 0
        for y in range(mod):
            key = (ci * y * y % mod, unit_c and y % p != 0)
            seen.setdefault(key, y)
        options.append(seen)
    layers: list[dict[tuple[int, bool], tuple[tuple[int, bool], int]]] = []
    frontier = {(0, False)}
    for opts in options:
        nxt: dict[tuple[int, bool], tuple[tuple[int, bool], int]] = {}
        for res, flag in frontier:
            for (val, lift), y in opts.items():
                key = ((res + val) % mod, flag or lift)
                if key not in nxt:
                    nxt[key] = ((res, flag), y)
        layers.append(nxt)
        frontier = set(nxt)
    goal = (t % mod, True)
    if goal not in frontier:
        return None
    ys = []
    state = goal
    for layer in reversed(layers):
        state, y = layer[state]
        ys.append(y)
    ys.reverse()
    lift = next(i for i, (ci, y) in enumerate(zip(c, ys)) if ci % p and y % p)
    return ys, lift


def _unit_residue_odd(c: Sequence[int], t: int, p: int):
    """Closed-form counterpart of :func:`_unit_residue_search` for odd ``p``.

    Only unit coefficients matter mod p.  One of them represents its nonzero
    square class; two represent every nonzero class, and 0 nontrivially iff
    ``-c_1 c_2`` is a square; three or more represent everything.
    """
    t %= p
    units = [i for i, ci in enumerate(c) if ci % p]
    if not units:
        return None
    i = units[0]
    inv = [pow(c[k], -1, p) if k in units else 0 for k in range(len(c))]
    if len(units) == 1:
        if not t or legendre_symbol(t * inv[i] % p, p) != 1:
            return None
    elif len(units) == 2 and not t:
        if legendre_symbol(-c[i] * inv[units[1]] % p, p) != 1:
            return None
    ys = [0] * len(c)
    others = units[1:3]
    for yi in range(1, p):
        rem = (t - c[i] * yi * yi) % p
        if not others:
            if rem == 0:
                ys[i] = yi
                return ys, i
            continue
        j = others[0]
        for yk in range(p if len(others) == 2 else 1):
            r = (rem - (c[others[1]] * yk * yk if len(others) == 2 else 0)) % p
            root = sqrt_mod(r * inv[j] % p, p)
            if root is not None:
                ys[i], ys[j] = yi, int(root)
                if len(others) == 2:
                    ys[others[1]] = yk
                return ys, i
    # two units, every solution has y_i = 0
    j = units[1]
    ys[j] = int(sqrt_mod(t * inv[j] % p, p))
    return ys, j


def _lift_square(c: int, rhs: int, y: int, p: int, prec: int) -> int:
    """Newton-lift ``y`` to a root of ``c Y^2 = rhs`` modulo ``p**prec``."""
    mod = p ** prec
    d = 1 if p == 2 else 0
    for _ in range(4 * prec + 8):
        f = (c * y * y - rhs) % mod
        if f == 0:
            return y
        deriv = 2 * c * y
        y = (y - (f // p ** d) * pow(deriv // p ** d, -1, mod)) % mod
    raise ArithmeticError("Hensel lifting failed to converge")


def _solve_diagonal(c: tuple[int, ...], t: Fraction, p: int, cap: int,
                    want_witness: bool) -> LocalVerdict:
    """Decide ``sum c_i y_i^2 = t`` over Z_p.

    Either some unit-coefficient coordinate is a unit (decided modulo p, or
    modulo 8 at p = 2, then lifted by Hensel), or all of them are divisible
    by p; substituting ``y = p z`` there and dividing the equation by p gives
    a smaller problem with ``ord_p(t)`` reduced.  Since ``t != 0`` the
    recursion is finite.
    """
    n = len(c)
    if t == 0:
        return LocalVerdict(Status.YES, p, witness=(0,) * n if want_witness else None,
                            note="exact zero solution")
    kappa = 3 if p == 2 else 1
    top_c = c
    cur = list(c)
    cur_t = t
    drop = 0                    # power of p divided out of the equation so far
    mult = [0] * n              # y_top = p**mult * y_level
    trail: list[tuple[str, int]] = []
    while True:
        e = min(ord_p(ci, p) for ci in cur)
        vt = ord_p(cur_t, p)
        if vt < e:
            obstruction = vt + 1
            break
        if e:
            cur = [ci // p ** e for ci in cur]
            cur_t /= p ** e
            drop += e
            trail.append(("scale", e))
        if drop + kappa > cap:
            return LocalVerdict(Status.UNDETERMINED, p, cap=cap,
                                note=f"needs precision beyond p^{cap}")
        residue = to_residue(cur_t, p, kappa)
        if p > DP_PRIME_LIMIT:
            found = _unit_residue_odd(cur, residue, p)
        else:
            found = _unit_residue_search(cur, residue, p, kappa)
        if found is not None:
            if not want_witness:
                return LocalVerdict(Status.YES, p)
            return _witness(top_c, t, p, cur, cur_t, mult, drop, *found)
        if cur_t.numerator % p:
            obstruction = kappa
            break
        units = [i for i, ci in enumerate(cur) if ci % p]
        for i in range(n):
            if i in units:
                cur[i] *= p
                mult[i] += 1
            else:
                cur[i] //= p
        cur_t /= p
        drop += 1
        trail.append(("unit-sub", 1))
    for kind, e in reversed(trail):
        obstruction = obstruction + e if kind == "scale" else max(kappa, obstruction + 1)
    if obstruction > cap:
        return LocalVerdict(Status.UNDETERMINED, p, cap=cap,
                            note=f"obstruction only at p^{obstruction}")
    return LocalVerdict(Status.NO, p, obstruction_precision=obstruction)


def _witness(top_c, top_t, p, cur, cur_t, mult, drop, ys, lift) -> LocalVerdict:
    delta = ord_p(2 * top_c[lift], p) + mult[lift]
    k = 2 * delta + 1
    prec = k + 4
    mod = p ** prec
    rhs = (to_residue(cur_t, p, prec)
           - sum(ci * y * y for j, (ci, y) in enumerate(zip(cur, ys)) if j != lift)) % mod
    ys = list(ys)
    ys[lift] = _lift_square(cur[lift], rhs, ys[lift], p, prec)
    top = [p ** e * y for e, y in zip(mult, ys)]
    modk = p ** k
    top = [y % modk for y in top]
    residual = sum(ci * y * y for ci, y in zip(top_c, top)) - to_residue(top_t, p, k)
    if residual % modk:
        raise ArithmeticError("witness reconstruction failed")
    return LocalVerdict(Status.YES, p, witness=tuple(top), precision=k)


@lru_cache(maxsize=1 << 16)
def _solve_cached(c: tuple[int, ...], t: Fraction, p: int, cap: int,
                  want_witness: bool) -> LocalVerdict:
    return _solve_diagonal(c, t, p, cap, want_witness)


def qf_represents(c: Sequence[int], t: int | Fraction, p: int,
                  cap: int | None = None) -> LocalVerdict:
    """Decide whether ``sum c_i y_i^2 = t`` is solvable over Z_p.

    ``t`` may be any p-integral rational.  A Yes carries a witness modulo
    ``p**k`` whose designated coordinate satisfies ``2 ord_p(2 c_i y_i) < k``;
    a No carries an exponent ``e`` such that the congruence has no solution
    modulo ``p**e``.  If deciding would need precision beyond ``p**cap`` the
    verdict is Undetermined.
    """
    _require_prime(p)
    c = tuple(int(ci) for ci in c)
    if not c or any(ci <= 0 for ci in c):
        raise ValueError(f"coefficients must be positive, got {c}")
    t = Fraction(t)
    if t.denominator % p == 0:
        raise ValueError(f"target {t} is not a {p}-adic integer")
    cap = default_cap(p) if cap is None else cap
    return _solve_cached(c, t, p, cap, True)


def _canonical_target(t: Fraction, p: int) -> Fraction:
    """A small target with the same valuation and leading digits as ``t``.

    The verdict of the diagonal recursion only reads ``t`` modulo
    ``p**(ord_p(t) + 3)``, so this keeps the memo table small.
    """
    if t == 0:
        return t
    v = ord_p(t, p)
    return Fraction(p ** v * to_residue(t / p ** v, p, 3))


def qf_status(c: Sequence[int], t: int | Fraction, p: int,
              cap: int | None = None) -> LocalVerdict:
    """Like :func:`qf_represents` but without a witness (memoized on the target class)."""
    cap = default_cap(p) if cap is None else cap
    if p != 2 and sum(1 for ci in c if ci % p) >= 3:
        # ternary unimodular forms are universal at odd p
        return LocalVerdict(Status.YES, p, note="three unit coefficients")
    t = Fraction(t)
    return _solve_cached(tuple(sorted(c)), _canonical_target(t, p), p, cap, False)


# ---------------------------------------------------------------------------
# shifted forms
# ---------------------------------------------------------------------------

def is_exceptional_prime(m: int, p: int) -> bool:
    """Primes where every form with a p-unit coefficient is Z_p-universal."""
    return (2 * (m - 2)) % p == 0 and not (p == 2 and m % 4 == 0)


def diagonal_target(form: ShiftedForm, n: int) -> Fraction:
    """The target ``(n + C) / w`` of the completed-square diagonal problem."""
    dec = quadratic_decomposition(form)
    return (n + dec.constant) / dec.weight


def local_represents(form: ShiftedForm, n: int, p: int, cap: int | None = None,
                     witness: bool = True) -> LocalVerdict:
    """Decide whether ``form(x) = n`` is solvable over Z_p.

    A Yes witness is a vector of residues ``x`` with ``form(x) = n`` modulo
    ``p**precision``.
    """
    _require_prime(p)
    cap = default_cap(p) if cap is None else cap
    if is_exceptional_prime(form.m, p):
        e = min(ord_p(a, p) for a in form.coefficients)
        if e == 0:
            return LocalVerdict(Status.YES, p, note="unit coefficient, p | 2(m-2)")
        # p**e * (form with a unit coefficient), which is Z_p-universal
        if n != 0 and ord_p(n, p) < e:
            return LocalVerdict(Status.NO, p, obstruction_precision=ord_p(n, p) + 1,
                                note=f"all coefficients divisible by {p}^{e}")
        return LocalVerdict(Status.YES, p, note="p | 2(m-2) after removing content")
    dec = quadratic_decomposition(form)
    t = (n + dec.constant) / dec.weight
    if not witness:
        return qf_status(form.coefficients, t, p, cap)
    v = qf_represents(form.coefficients, t, p, cap)
    if v.status is not Status.YES or v.witness is None:
        return v
    if v.precision is None:
        return v
    k = v.precision
    mod = p ** k
    x = tuple((y + to_residue(s, p, k)) % mod for y, s in zip(v.witness, dec.shifts))
    return LocalVerdict(Status.YES, p, witness=x, precision=k, note=v.note)


def _odd_primes_of(n: int) -> set[int]:
    return {q for q in primefactors(abs(n)) if q != 2} if n else set()


def relevant_primes(form: ShiftedForm, n: int | None = None) -> list[int]:
    """Primes at which ``form`` may fail to represent a target locally.

    For rank >= 3 the set is finite and independent of the target: 2 when
    ``m = 0 mod 4``, plus the odd primes not dividing ``m-2`` at which at
    most two coefficients are units.  At every other prime the form is
    Z_p-universal.

    Rank <= 2 forms miss something at infinitely many primes; for those a
    target ``n`` is needed and the set is extended with the primes dividing
    the numerator of the diagonal target (plus, for rank 1, a prime where
    the discriminant is a non-residue if it is not a perfect square).
    """
    m = form.m
    a = form.coefficients
    primes: set[int] = {2} if m % 4 == 0 else set()
    candidates: set[int] = set()
    for ai in a:
        candidates |= _odd_primes_of(ai)
    for q in candidates:
        if (m - 2) % q and sum(1 for ai in a if ai % q) <= 2:
            primes.add(q)
    if form.rank <= 2 and n is not None:
        t = diagonal_target(form, n)
        primes |= {q for q in _odd_primes_of(t.numerator) if (m - 2) % q}
        if form.rank == 1:
            primes |= _rank_one_obstruction(form, n)
    return sorted(primes)


def _rank_one_obstruction(form: ShiftedForm, n: int) -> set[int]:
    (a,), (r,) = form.coefficients, form.levels
    b = form.m - 2 - 2 * r
    disc = a * (a * b * b + 8 * (form.m - 2) * n)
    if disc >= 0 and isqrt(disc) ** 2 == disc:
        return set()
    q = 3
    while True:
        if disc % q and (2 * (form.m - 2) * a) % q and jacobi_symbol(disc % q, q) == -1:
            return {q}
        q = nextprime(q)


def locally_represents(form: ShiftedForm, n: int, cap: int | None = None,
                       witness: bool = False) -> tuple[Status, dict[int, LocalVerdict]]:
    """Conjunction of :func:`local_represents` over the relevant primes.

    Returns the overall status and the per-prime verdicts (a No short-circuits).
    """
    verdicts: dict[int, LocalVerdict] = {}
    status = Status.YES
    for p in relevant_primes(form, n):
        v = local_represents(form, n, p, cap, witness=witness)
        verdicts[p] = v
        if v.status is Status.NO:
            return Status.NO, verdicts
        if v.status is Status.UNDETERMINED:
            status = Status.UNDETERMINED
    return status, verdicts


def is_zp_universal(form: ShiftedForm, p: int, cap: int | None = None) -> LocalVerdict:
    """Whether the form represents every p-adic integer.

    Away from the exceptional primes this is universality of the diagonal
    form ``<a_1, ..., a_n>``; its value set is closed under multiplication
    by unit squares and by ``p**2``, so testing the square-class
    representatives (and 0, always represented) is complete.
    """
    _require_prime(p)
    cap = default_cap(p) if cap is None else cap
    if is_exceptional_prime(form.m, p):
        if any(a % p for a in form.coefficients):
            return LocalVerdict(Status.YES, p, note="unit coefficient, p | 2(m-2)")
        return LocalVerdict(Status.NO, p, obstruction_precision=1,
                            note="no unit coefficient; units are missed")
    pending: LocalVerdict | None = None
    for rep in SquareClassRep(p).representatives:
        v = qf_status(form.coefficients, rep, p, cap)
        if v.status is Status.NO:
            return LocalVerdict(Status.NO, p, obstruction_precision=v.obstruction_precision,
                                note=f"diagonal form misses {rep}")
        if v.status is Status.UNDETERMINED:
            pending = v
    return pending or LocalVerdict(Status.YES, p)


def _universality_candidates(form: ShiftedForm) -> list[int]:
    primes = relevant_primes(form)
    if form.rank >= 3:
        return primes
    # unary and anisotropic binary unimodular forms are never universal
    m, a = form.m, form.coefficients
    bad = 2 * (m - 2) * a[0] * (a[1] if len(a) > 1 else 1)
    q = 3
    while True:
        if bad % q:
            if len(a) == 1 or jacobi_symbol((-a[0] * a[1]) % q, q) == -1:
                return sorted(set(primes) | {q})
        q = nextprime(q)


def is_locally_universal(form: ShiftedForm, cap: int | None = None) -> LocalVerdict:
    """Z_p-universality at every prime; ``p`` of the verdict is the deciding prime (0 if none)."""
    pending: LocalVerdict | None = None
    for p in _universality_candidates(form):
        v = is_zp_universal(form, p, cap)
        if v.status is Status.NO:
            return v
        if v.status is Status.UNDETERMINED:
            pending = v
    return pending or LocalVerdict(Status.YES, 0)


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def local_residue_set(form: ShiftedForm, p: int, k: int,
                      budget: int = BRUTE_BUDGET) -> int:
    """Bitset of residues ``form(x) mod p**k`` over all integer vectors ``x``.

    The value of each term mod ``p**k`` is periodic in ``x_i`` with period
    ``p**k`` (``2**(k+1)`` at p = 2), so enumerating one period per variable
    and taking cyclic sumsets is exhaustive.
    """
    mod = p ** k
    period = mod * (2 if p == 2 else 1)
    if period * form.rank > budget:
        raise ValueError(f"enumeration of {period}^{form.rank} residues exceeds budget")
    full = (1 << mod) - 1
    acc = 1
    for a, r in zip(form.coefficients, form.levels):
        values = {a * shifted_polygonal(form.m, r, x) % mod for x in range(period)}
        nxt = 0
        for v in values:
            nxt |= ((acc << v) | (acc >> (mod - v))) & full
        acc = nxt
    return acc


def brute_local_oracle(form: ShiftedForm, n: int, p: int, k: int,
                       budget: int = BRUTE_BUDGET) -> bool:
    """Exhaustively test whether ``form(x) = n (mod p**k)`` has a solution."""
    _require_prime(p)
    return bool(local_residue_set(form, p, k, budget) >> (n % p ** k) & 1)

