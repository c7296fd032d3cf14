import itertools
import random
from math import gcd

import pytest

from polyreg.localsolve import Status, is_zp_universal
from polyreg.polynumber import Domain, ShiftedForm, evaluate_form
from polyreg.represent import represents
from polyreg.selftest import random_form
from polyreg.watson import (IterationLimit, LambdaError, at_target, bad_primes, condition_3_7,
                            lambda_2, lambda_full, lambda_p, lambda_tilde)


def F(m, *a):
    return ShiftedForm.ordinary(m, a)


def _check_record(form, rec, x):
    assert evaluate_form(form, rec.substitute(x)) == rec.unscaled_value(x) + rec.constant


def test_lambda3_example():
    f = F(16, 1, 3, 3, 3)
    out, rec = lambda_p(f, 3)
    assert out == ShiftedForm(16, (3, 1, 1, 1), (5, 1, 1, 1))
    assert (rec.j, rec.new_levels, rec.constant, rec.scale_exponent) == ((0,), (5,), 0, 1)
    assert evaluate_form(f, (3, 0, 0, 0)) == 45 == 9 * evaluate_form(ShiftedForm(16, (1,), (5,)), (1,))
    _check_record(f, rec, (1, 0, 0, 0))


def test_lambda5_example():
    f = F(9, 2, 5)
    out, rec = lambda_p(f, 5)
    assert rec.unit_indices == (0,) and rec.scale_exponent == 1
    # j = (m-2-2r)/(2(m-2)) = 5/14 = 0 mod 5, in [-2.14, 2.86]
    assert rec.j == (0,)
    assert rec.new_levels == ((7 * 5 - 5) // 10,)
    rng = random.Random(1)
    for _ in range(100):
        _check_record(f, rec, (rng.randint(-30, 30), rng.randint(-30, 30)))


def test_lambda2_examples():
    f = F(28, 1, 4, 4)
    out, rec = lambda_2(f)
    assert rec.unit_indices == (0,) and rec.j == (0,)
    assert rec.substitute((5, 1, 2)) == (10, 1, 2)
    _, rec2 = lambda_2(F(28, 3, 8))
    assert rec2.unit_indices == (0,) and rec2.scale_exponent == 2
    rng = random.Random(2)
    for _ in range(100):
        _check_record(f, rec, [rng.randint(-20, 20) for _ in range(3)])


def _in_lambda_set(form, x, modulus):
    n = form.rank
    for y in itertools.product(range(modulus), repeat=n):
        plus = evaluate_form(form, [a + b for a, b in zip(x, y)])
        minus = evaluate_form(form, [a - b for a, b in zip(x, y)])
        if (plus - minus) % modulus:
            return False
    return True


def test_lambda2_membership_mod8():
    for f in [F(28, 1, 4, 4), F(28, 3, 8), F(12, 1, 1, 2), ShiftedForm(20, (1, 3, 2), (7, 5, 1))]:
        _, rec = lambda_2(f)
        image = {tuple(v % 8 for v in rec.substitute(x))
                 for x in itertools.product(range(8), repeat=f.rank)}
        members = {x for x in itertools.product(range(8), repeat=f.rank)
                   if _in_lambda_set(f, x, 8)}
        assert image == members, f


def test_lambda_p_membership():
    for f, p in [(F(16, 1, 3, 3, 3), 3), (F(9, 2, 5), 5), (ShiftedForm(11, (1, 7), (4, 2)), 7)]:
        _, rec = lambda_p(f, p)
        image = {tuple(v % p for v in rec.substitute(x))
                 for x in itertools.product(range(p), repeat=f.rank)}
        members = {x for x in itertools.product(range(p), repeat=f.rank)
                   if _in_lambda_set(f, x, p)}
        assert image == members


def test_inapplicable():
    with pytest.raises(LambdaError):
        lambda_p(F(16, 1, 3), 7)              # 7 | 14
    with pytest.raises(LambdaError):
        lambda_2(F(15, 1, 3))
    with pytest.raises(LambdaError):
        lambda_p(F(16, 3, 6), 3)              # no unit coefficient


def test_random_identity_and_levels():
    rng = random.Random(4)
    count = 0
    while count < 300:
        f = random_form(rng)
        p = rng.choice([2, 3, 5, 7, 11])
        try:
            out, rec = lambda_2(f) if p == 2 else lambda_p(f, p)
        except LambdaError:
            continue
        count += 1
        for r in out.levels:
            assert 0 <= r <= f.m - 2 and gcd(r, f.m - 2) == 1
        assert rec.constant >= 0
        _check_record(f, rec, [rng.randint(-5, 5) for _ in range(f.rank)])


def test_nonnegative_domain_j_range():
    f = ShiftedForm(11, (1, 3), (4, 2), Domain.NON_NEGATIVE)
    _, rec = lambda_p(f, 5)
    assert all(0 <= j < 5 for j in rec.j)
    _check_record(f, rec, (2, 3))


def test_condition_3_7():
    assert condition_3_7(F(28, 1, 3, 4, 8))
    assert not condition_3_7(F(28, 1, 1, 5, 8))
    assert not condition_3_7(F(28, 4, 8, 12))


def test_tilde():
    f = F(4, 1, 1, 1, 1)
    out, trail = lambda_tilde(f, 3)
    assert out == f and trail == []
    out, trail = lambda_tilde(F(16, 1, 3, 9, 9), 3)
    assert len(trail) <= 4
    assert is_zp_universal(out, 3).status is Status.YES
    with pytest.raises(IterationLimit):
        lambda_tilde(F(16, 1, 3, 3, 3), 3, max_iter=0)


def test_full():
    f = F(4, 1, 1, 1, 1)
    assert lambda_full(f) == (f, [])
    out, trail = lambda_full(F(15, 1, 5, 25, 25))
    assert bad_primes(F(15, 1, 5, 25, 25)) == [5]
    for p in (2, 3, 5, 7):
        assert is_zp_universal(out, p).status is Status.YES
    f = F(16, 1, 3, 3, 9)
    assert set(bad_primes(f)) <= {2, 3}
    out, _ = lambda_full(f)
    for p in bad_primes(f):
        assert at_target(out, p)


def test_lemma_other_primes_unchanged():
    rng = random.Random(6)
    done = 0
    while done < 60:
        f = random_form(rng, rank_range=(3, 4))
        p = rng.choice([3, 5, 7])
        try:
            out, _ = lambda_p(f, p)
        except LambdaError:
            continue
        done += 1
        for q in (2, 3, 5, 7):
            if q != p:
                assert (is_zp_universal(f, q).status is is_zp_universal(out, q).status), (f, p, q)
        if f.m % 4 == 0:
            assert condition_3_7(f) == condition_3_7(out)


def test_representation_transport():
    rng = random.Random(13)
    done = 0
    while done < 12:
        f = random_form(rng, m_range=(5, 12), rank_range=(2, 3), coeff_max=5)
        p = rng.choice([3, 5, 7])
        try:
            out, rec = lambda_p(f, p)
        except LambdaError:
            continue
        done += 1
        unscaled = out.with_coefficients([a * p ** rec.scale_exponent for a in out.coefficients])
        for n in range(0, 300, 11):
            w = represents(unscaled, n)
            if w is None:
                continue
            x = rec.substitute(w)
            assert evaluate_form(f, x) == n + rec.constant
            for i, j in zip(rec.unit_indices, rec.j):
                assert (x[i] - j) % p == 0
