"""Quick invariant sweeps over every module, used by ``polyreg selftest``."""

from __future__ import annotations

import random
import tempfile
from fractions import Fraction
from math import gcd
from pathlib import Path
from typing import Callable

from polyreg.classify import min_universal_rank, rank_lower_bound, theorem_window
from polyreg.explore import SurveyRecord, cache_append, cache_load
from polyreg.localsolve import (Status, brute_local_oracle, is_exceptional_prime,
                                is_zp_universal, local_represents)
from polyreg.polynumber import (Domain, ShiftedForm, evaluate_form, quadratic_decomposition)
from polyreg.represent import represented_set, represents, regularity_report
from polyreg.watson import lambda_2, lambda_p


def random_form(rng: random.Random, m_range=(3, 30), rank_range=(1, 4), coeff_max=10,
                shifted: bool = True, primitive: bool = True,
                domain: Domain = Domain.GENERALIZED) -> ShiftedForm:
    while True:
        m = rng.randint(*m_range)
        n = rng.randint(*rank_range)
        a = [rng.randint(1, coeff_max) for _ in range(n)]
        g = 0
        for ai in a:
            g = gcd(g, ai)
        if primitive and g != 1:
            continue
        levels = [r for r in range(0, m - 1) if gcd(r, m - 2) == 1]
        if domain is Domain.NON_NEGATIVE:
            levels = [r for r in levels if r >= 1]
        r = [rng.choice(levels) if shifted else 1 for _ in range(n)]
        return ShiftedForm(m, tuple(a), tuple(r), domain)


def check_decomposition(rng: random.Random) -> str | None:
    for _ in range(500):
        f = random_form(rng)
        x = [rng.randint(-20, 20) for _ in range(f.rank)]
        if quadratic_decomposition(f).evaluate(f.coefficients, x) != Fraction(evaluate_form(f, x)):
            return f"decomposition fails for {f} at {x}"
    return None


def check_lambda(rng: random.Random) -> str | None:
    for _ in range(200):
        f = random_form(rng)
        primes = [p for p in (3, 5, 7, 11) if (f.m - 2) % p and any(a % p for a in f.coefficients)]
        if f.m % 4 == 0 and any(a % 2 for a in f.coefficients):
            primes.append(2)
        for p in primes:
            out, rec = lambda_2(f) if p == 2 else lambda_p(f, p)
            x = [rng.randint(-5, 5) for _ in range(f.rank)]
            if evaluate_form(f, rec.substitute(x)) != rec.unscaled_value(x) + rec.constant:
                return f"lambda identity fails for {f}, p={p}, x={x}"
    return None


def check_sieve(rng: random.Random) -> str | None:
    for _ in range(15):
        f = random_form(rng, rank_range=(1, 3), coeff_max=6)
        bits = represented_set(f, 150)
        for n in range(151):
            w = represents(f, n)
            if (w is not None) != bool(bits >> n & 1):
                return f"sieve and search disagree for {f} at {n}"
            if w is not None and evaluate_form(f, w) != n:
                return f"bad witness {w} for {f}, N={n}"
    return None


def check_local(rng: random.Random) -> str | None:
    for _ in range(30):
        f = random_form(rng, rank_range=(1, 3), coeff_max=6)
        for p in (2, 3, 5):
            for n in range(0, 25):
                v = local_represents(f, n, p, witness=False)
                if v.status is Status.YES and not brute_local_oracle(f, n, p, 3 if p > 2 else 4):
                    return f"local Yes refuted by brute force: {f}, N={n}, p={p}"
                if v.status is Status.NO and v.obstruction_precision is not None:
                    e = v.obstruction_precision
                    if p ** e <= 10 ** 4 and brute_local_oracle(f, n, p, e):
                        return f"local No contradicted mod {p}^{e}: {f}, N={n}"
    return None


def check_exceptional(rng: random.Random) -> str | None:
    for _ in range(50):
        f = random_form(rng, rank_range=(1, 4))
        for p in (2, 3, 5, 7, 11, 13):
            if is_exceptional_prime(f.m, p) and is_zp_universal(f, p).status is not Status.YES:
                return f"{f} not Z_{p}-universal at an exceptional prime"
    return None


def check_regularity(rng: random.Random) -> str | None:
    for _ in range(10):
        f = random_form(rng, rank_range=(2, 4), coeff_max=8)
        regularity_report(f, 400)
    return None


def check_ranks(rng: random.Random) -> str | None:
    for m in range(14, 101):
        if rank_lower_bound(m) > min_universal_rank(m):
            return f"rank bounds inverted at m={m}"
    for m in range(28, 200):
        theorem_window(m)
    return None


def check_cache(rng: random.Random) -> str | None:
    rec = SurveyRecord("m=5;a=1,1,1;r=1,1,1;domain=Z", "ConsistentUpTo(100)", None, ("Universal",), 1.5)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "c.jsonl"
        cache_append(path, rec)
        if cache_load(path) != [rec]:
            return "cache round trip changed the record"
    return None


CHECKS: dict[str, Callable[[random.Random], str | None]] = {
    "polynumber.decomposition": check_decomposition,
    "watson.identity": check_lambda,
    "represent.sieve_vs_search": check_sieve,
    "localsolve.brute_soundness": check_local,
    "localsolve.exceptional_primes": check_exceptional,
    "represent.global_implies_local": check_regularity,
    "classify.rank_bounds": check_ranks,
    "explore.cache_roundtrip": check_cache,
}


def run_selftest(seed: int = 0) -> list[tuple[str, bool, str]]:
    results = []
    for name, check in CHECKS.items():
        try:
            problem = check(random.Random(seed))
        except Exception as exc:  # a crash is a failed check
            problem = f"{type(exc).__name__}: {exc}"
        results.append((name, problem is None, problem or ""))
    return results
