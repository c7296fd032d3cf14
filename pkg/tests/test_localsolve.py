import random

import pytest

from polyreg.localsolve import (SquareClassRep, Status, brute_local_oracle, default_cap,
                                is_locally_universal, is_zp_universal, least_nonresidue,
                                local_represents, locally_represents, qf_represents, qf_status,
                                relevant_primes)
from polyreg.polynumber import ShiftedForm, evaluate_form
from polyreg.represent import represents
from polyreg.selftest import random_form


def F(m, *a):
    return ShiftedForm.ordinary(m, a)


def test_qf_examples():
    assert qf_represents((1, 1, 1), 7, 2).status is Status.NO
    assert qf_represents((1, 1, 1), 5, 3).status is Status.YES
    assert qf_represents((1, 1), 3, 3).status is Status.NO
    with pytest.raises(ValueError):
        qf_represents((1, 1), 3, 4)


def test_qf_no_is_brute_checked():
    # x^2 + y^2 + z^2 = 7 has no solution mod 8
    sols = {(x * x + y * y + z * z) % 8 for x in range(8) for y in range(8) for z in range(8)}
    assert 7 not in sols
    assert qf_represents((1, 1, 1), 7, 2).obstruction_precision == 3
    # x^2 + y^2 = 3 mod 27 by exhaustion
    assert all((x * x + y * y - 3) % 27 for x in range(27) for y in range(27))


def test_qf_yes_witness():
    rng = random.Random(3)
    for _ in range(300):
        p = rng.choice([2, 3, 5, 7, 11])
        c = tuple(rng.randint(1, 40) for _ in range(rng.randint(1, 4)))
        t = rng.randint(0, 500)
        v = qf_represents(c, t, p)
        if v.status is Status.YES and v.witness is not None:
            mod = p ** v.precision
            assert (sum(ci * y * y for ci, y in zip(c, v.witness)) - t) % mod == 0


def test_cap_gives_undetermined_not_no():
    v = qf_represents((1, 1, 1), 7 * 4 ** 6, 2, cap=6)
    assert v.status is Status.UNDETERMINED
    assert qf_represents((1, 1, 1), 7 * 4 ** 6, 2).status is Status.NO
    assert default_cap(2) == 20 and default_cap(3) == 12


def test_square_classes():
    assert least_nonresidue(7) == 3
    assert least_nonresidue(17) == 3
    assert SquareClassRep(5).representatives == (1, 2, 5, 10)
    assert SquareClassRep(2).representatives == (1, 3, 5, 7, 2, 6, 10, 14)


def test_local_examples():
    f = F(14, 1, 5, 10, 25)
    assert all(local_represents(f, n, 3).status is Status.YES for n in range(60))
    assert local_represents(F(4, 1, 1, 1), 7, 2).status is Status.NO
    assert all(local_represents(F(15, 1, 3), n, 2).status is Status.YES for n in range(60))


def test_local_witness_checks_out():
    rng = random.Random(11)
    for _ in range(150):
        f = random_form(rng, rank_range=(1, 4))
        p = rng.choice([2, 3, 5, 7])
        n = rng.randint(0, 80)
        v = local_represents(f, n, p)
        if v.status is Status.YES and v.witness is not None:
            assert (evaluate_form(f, v.witness) - n) % p ** v.precision == 0


def test_relevant_primes_examples():
    assert relevant_primes(F(14, 1, 1, 1, 1)) == []
    assert relevant_primes(F(16, 1, 3, 9, 9)) == [2, 3]
    assert relevant_primes(F(15, 1, 5, 25, 25)) == [5]


def test_empty_relevant_set_confirmed():
    f = F(14, 1, 1, 1, 1)
    for p in (2, 3, 5, 7, 11, 13):
        assert all(local_represents(f, n, p).status is Status.YES for n in range(51))


def test_outside_relevant_primes_always_yes():
    rng = random.Random(5)
    for _ in range(40):
        f = random_form(rng, rank_range=(3, 4))
        rel = set(relevant_primes(f))
        for p in (2, 3, 5, 7, 11, 13):
            if p not in rel:
                assert is_zp_universal(f, p).status is Status.YES, (f, p)


def test_zp_universal_examples():
    assert is_zp_universal(ShiftedForm.ordinary(14, [1, 2, 3, 4]), 5).status is Status.YES
    assert is_zp_universal(F(16, 1, 3, 3, 3), 3).status is Status.NO
    assert is_zp_universal(F(4, 1, 1, 1, 1), 2).status is Status.YES


def test_zp_universal_brute():
    # <1,3,3,3>_16 misses a residue class mod 3^4
    f = F(16, 1, 3, 3, 3)
    assert not all(brute_local_oracle(f, n, 3, 4) for n in range(81))
    assert all(brute_local_oracle(F(4, 1, 1, 1, 1), n, 2, 5) for n in range(32))


def test_brute_examples():
    assert not brute_local_oracle(F(4, 1, 1, 1), 7, 2, 3)
    assert brute_local_oracle(F(3, 1), 6, 5, 2)
    assert not brute_local_oracle(F(5, 2), 1, 2, 1)


def test_soundness_against_brute_force():
    rng = random.Random(7)
    for _ in range(60):
        f = random_form(rng, rank_range=(1, 4))
        for p in (2, 3, 5, 7):
            for n in range(0, 61, 3):
                v = local_represents(f, n, p, witness=False)
                if v.status is Status.YES:
                    assert brute_local_oracle(f, n, p, 5 if p < 5 else 3)
                elif v.status is Status.NO:
                    assert not brute_local_oracle(f, n, p, v.obstruction_precision)


def test_status_and_witness_paths_agree():
    rng = random.Random(8)
    for _ in range(200):
        c = tuple(rng.randint(1, 60) for _ in range(rng.randint(1, 4)))
        p = rng.choice([2, 3, 5, 7, 37, 41, 101])
        t = rng.randint(0, 3000)
        assert qf_status(c, t, p).status is qf_represents(c, t, p).status


def test_large_prime_closed_form_matches_brute():
    # primes above the DP limit use the closed-form unit search
    for p in (37, 41, 43):
        for c in [(1,), (2,), (1, 1), (1, 3), (1, p), (2, 3 * p), (1, 2, 5)]:
            f = ShiftedForm.ordinary(4, c)
            for n in range(0, 120):
                v = local_represents(f, n, p, witness=False)
                assert (v.status is Status.YES) == brute_local_oracle(f, n, p, 2), (c, n, p)


def test_global_implies_local():
    rng = random.Random(9)
    for _ in range(40):
        f = random_form(rng, rank_range=(1, 3), coeff_max=6)
        for n in range(0, 80, 7):
            if represents(f, n) is not None:
                status, _ = locally_represents(f, n)
                assert status is Status.YES, (f, n)


def test_square_class_completeness():
    rng = random.Random(10)
    for _ in range(25):
        p = rng.choice([3, 5, 7])
        c = tuple(rng.randint(1, 3 * p) for _ in range(rng.randint(1, 4)))
        f = ShiftedForm.ordinary(4, c)
        sweep = all(qf_represents(c, n, p).status is Status.YES for n in range(p ** 4))
        assert (is_zp_universal(f, p).status is Status.YES) == sweep, (c, p)


def test_exceptional_primes_universal():
    rng = random.Random(12)
    for _ in range(100):
        f = random_form(rng, rank_range=(1, 4))
        for p in (2, 3, 5, 7, 11, 13):
            if (2 * (f.m - 2)) % p == 0 and not (p == 2 and f.m % 4 == 0):
                assert is_zp_universal(f, p).status is Status.YES


def test_locally_universal():
    assert is_locally_universal(F(4, 1, 1, 1, 1)).status is Status.YES
    v = is_locally_universal(F(16, 1, 3, 3, 3))
    assert v.status is Status.NO and v.p == 3
    assert is_locally_universal(F(4, 1, 1)).status is Status.NO
    assert is_locally_universal(F(3, 1)).status is Status.NO


def test_verdict_json():
    v = local_represents(F(4, 1, 1, 1, 1), 7, 2)
    data = v.to_json()
    assert data["status"] == "Yes" and data["prime"] == 2 and "witness" in data
