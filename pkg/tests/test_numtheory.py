import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from learnsep import numtheory as nt
from learnsep.errors import (
    InvalidInstanceError,
    InvalidModulusError,
    NotInvertibleError,
    NotSemiprimeError,
    ParameterRangeError,
)


def brute_log(p, a, x):
    v = 1
    for e in range(p - 1):
        if v == x:
            return e
        v = v * a % p
    raise AssertionError("not in the group")


def trial_division_prime(n):
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


@pytest.mark.parametrize("args,expected", [((5, 0, 7), 1), ((3, 4, 5), 1), ((2, 10, 11), 1)])
def test_mod_pow_values(args, expected):
    assert nt.mod_pow(*args) == expected


def test_mod_pow_bad_modulus():
    with pytest.raises((InvalidModulusError, ValueError)):
        nt.mod_pow(2, 3, 0)
    with pytest.raises((InvalidModulusError, ValueError)):
        nt.mod_pow(2, 3, 1)


@pytest.mark.parametrize("a,m,expected", [(1, 9, 1), (3, 40, 27), (10, 17, 12)])
def test_mod_inverse(a, m, expected):
    assert nt.mod_inverse(a, m) == expected
    assert a * expected % m == 1


def test_mod_inverse_not_invertible():
    with pytest.raises(NotInvertibleError):
        nt.mod_inverse(6, 9)


@pytest.mark.parametrize(
    "n,expected",
    [
        (2, True),
        (561, False),
        (2**31 - 1, True),
        (2**61 - 1, True),
        (3215031751, False),  # strong pseudoprime to bases 2, 3, 5, 7
        (1, False),
        (0, False),
        (4_759_123_141, False),  # 48781 * 97561
        (2**61 - 3, False),
    ],
)
def test_is_prime_known(n, expected):
    assert nt.is_prime(n) is expected


def test_is_prime_matches_trial_division_below_5000():
    for n in range(5000):
        assert nt.is_prime(n) == trial_division_prime(n), n


@given(st.integers(min_value=2, max_value=10**6))
def test_is_prime_property(n):
    assert nt.is_prime(n) == trial_division_prime(n)


def test_generate_dlp_small_cases():
    pm, a = nt.generate_dlp_instance(4, 0)
    assert (pm.p, a) == (11, 2)
    pm, a = nt.generate_dlp_instance(3, 0)
    assert (pm.p, a) == (7, 3)
    assert sorted(pow(3, e, 7) for e in range(6)) == list(range(1, 7))


def test_generate_dlp_frozen_20_bit():
    # frozen output; p validated as a safe prime, a as a generator
    pm, a = nt.generate_dlp_instance(20, 7)
    assert (pm.p, a) == (1002767, 5)
    assert pm.p.bit_length() == 20
    assert nt.is_prime(pm.p) and nt.is_prime((pm.p - 1) // 2)
    assert pm.is_generator(a)


@pytest.mark.parametrize("bits", [2, 63, 0])
def test_generate_dlp_out_of_range(bits):
    with pytest.raises(ParameterRangeError):
        nt.generate_dlp_instance(bits, 0)


def test_generate_dlp_is_deterministic():
    assert nt.generate_dlp_instance(40, 3) == nt.generate_dlp_instance(40, 3)


@pytest.mark.parametrize("bits", [5, 8, 16, 24, 33, 48])
def test_generated_generator_is_smallest(bits):
    pm, a = nt.generate_dlp_instance(bits, 1)
    assert pm.p.bit_length() == bits
    assert pm.is_generator(a)
    assert not any(pm.is_generator(b) for b in range(2, a))


@pytest.mark.parametrize("p,a,x,expected", [(11, 2, 1, 0), (11, 2, 8, 3), (7, 3, 4, 4), (11, 2, 3, 8)])
def test_discrete_log_values(p, a, x, expected):
    assert nt.discrete_log(p, a, x) == expected


def test_discrete_log_full_domain_small():
    for p in (11, 23, 47, 1019):
        pm = nt.PrimeModulus(p)
        a = pm.smallest_generator()
        xs = np.arange(1, p, dtype=np.int64)
        logs = nt.discrete_log_batch(p, a, xs)
        assert [brute_log(p, a, int(x)) for x in xs] == logs.tolist()


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_discrete_log_roundtrip_32_bit(y):
    pm, a = nt.generate_dlp_instance(32, 9)
    y = y % (pm.p - 1)
    assert nt.discrete_log(pm.p, a, pow(a, y, pm.p)) == y


@pytest.mark.parametrize("N,expected", [(55, (5, 11)), (15, (3, 5)), (6, (2, 3)), (3 * 1000003, (3, 1000003))])
def test_factor_semiprime(N, expected):
    assert nt.factor_semiprime(N) == expected


@pytest.mark.parametrize("N", [13, 49, 30, 1, 2**31 - 1])
def test_factor_semiprime_rejects(N):
    with pytest.raises(NotSemiprimeError):
        nt.factor_semiprime(N)


def test_factor_62_bit_semiprime():
    sp = nt.generate_semiprime(62, 4)
    assert nt.factor_semiprime(sp.N) == (sp.p, sp.q)


def test_rsa_private_exponent():
    assert nt.rsa_private_exponent(5, 11) == 27
    assert pow(pow(2, 3, 55), 27, 55) == 2
    assert nt.rsa_private_exponent(3, 5) == 3
    assert all(pow(pow(x, 3, 15), 3, 15) == x for x in range(1, 15) if math.gcd(x, 15) == 1)
    with pytest.raises(InvalidInstanceError):
        nt.rsa_private_exponent(7, 13)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=6, max_value=62), st.integers(min_value=0, max_value=2**16))
def test_generate_semiprime_properties(bits, seed):
    sp = nt.generate_semiprime(bits, seed)
    assert sp.N.bit_length() == bits
    assert sp.p < sp.q and nt.is_prime(sp.p) and nt.is_prime(sp.q)
    assert math.gcd(3, sp.phi) == 1


def test_generate_semiprime_range():
    with pytest.raises(ParameterRangeError):
        nt.generate_semiprime(4, 0)
    with pytest.raises(ParameterRangeError):
        nt.generate_semiprime(63, 0)


def test_factorize_multiplicity():
    assert nt.factorize(2**5 * 3**2 * 1000003) == [(2, 5), (3, 2), (1000003, 1)]
