"""Exact modular arithmetic and the classical stand-ins for Shor's algorithm.

Scalar operations use Python integers and are exact for any size; the
instance types cap moduli at 62 bits so batch kernels stay in int64.
``discrete_log`` (baby-step/giant-step) and ``factor_semiprime`` (Pollard
rho) are the quantum surrogates and are instrumented through
:mod:`learnsep.trace`.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd, isqrt

import numpy as np

from . import kernels
from .errors import (
    DomainError,
    GenerationTimeoutError,
    InvalidInstanceError,
    InvalidModulusError,
    NotInvertibleError,
    NotSemiprimeError,
    ParameterRangeError,
)
from .trace import note, primitive

MAX_BITS = 62
# deterministic for n < 3.3e24, far beyond 62 bits
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)
# baby-step table size: at least sqrt(order), grown to this many entries when
# the group is small enough, so repeated queries need few giant steps
_TABLE_FLOOR = 1 << 22
_TABLE_CAP = 1 << 24


def mod_pow(base, exp, modulus):
    if modulus < 2:
        raise InvalidModulusError(f"modulus must be >= 2, got {modulus}")
    if exp < 0:
        raise ValueError("exponent must be nonnegative")
    return pow(base, exp, modulus)


def mod_inverse(a, m):
    if m < 2:
        raise InvalidModulusError(f"modulus must be >= 2, got {m}")
    if gcd(a, m) != 1:
        raise NotInvertibleError(f"{a} has no inverse modulo {m} (gcd {gcd(a, m)})")
    return pow(a, -1, m)


def is_prime(n):
    """Deterministic Miller-Rabin, exact for every n below 3.3e24."""
    if n < 2:
        return False
    for sp in _SMALL_PRIMES:
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for b in _MR_BASES:
        x = pow(b, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _rho_factor(n, max_tries=64):
    """Return a nontrivial factor of composite odd n (Pollard rho, Brent cycle finding)."""
    for c in range(1, max_tries + 1):
        y, r, q, g = 2, 1, 1, 1
        x = ys = 2
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(128, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += 128
            r *= 2
        if g == n:
            # batched gcd overshot; step back one at a time
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if g != n:
            return g
    raise RuntimeError(f"Pollard rho failed to split {n}")


def factorize(n):
    """Prime factorisation as a sorted list of (prime, exponent)."""
    if n < 1:
        raise ValueError("n must be positive")
    counts = {}
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        for sp in _SMALL_PRIMES:
            while m % sp == 0:
                counts[sp] = counts.get(sp, 0) + 1
                m //= sp
        if m == 1:
            continue
        if is_prime(m):
            counts[m] = counts.get(m, 0) + 1
            continue
        r = isqrt(m)
        if r * r == m:
            stack.extend((r, r))
            continue
        d = _rho_factor(m)
        stack.extend((d, m // d))
    return sorted(counts.items())


@primitive("factor_semiprime")
def factor_semiprime(N):
    """Split N = p*q into (p, q) with p < q."""
    if N < 6 or is_prime(N):
        raise NotSemiprimeError(f"{N} is not a product of two distinct primes")
    factors = factorize(N)
    if len(factors) != 2 or any(e != 1 for _, e in factors):
        raise NotSemiprimeError(f"{N} = {factors} is not a product of two distinct primes")
    return factors[0][0], factors[1][0]


def rsa_private_exponent(p, q):
    phi = (p - 1) * (q - 1)
    if gcd(3, phi) != 1:
        raise InvalidInstanceError(f"gcd(3, (p-1)(q-1)) = 3 for p={p}, q={q}; cubing is not a bijection")
    return mod_inverse(3, phi)


@dataclass(frozen=True)
class PrimeModulus:
    p: int
    factorization_of_p_minus_1: tuple = field(default=None)

    def __post_init__(self):
        if self.p < 3 or self.p.bit_length() > MAX_BITS or not is_prime(self.p):
            raise InvalidInstanceError(f"{self.p} is not an odd prime of at most {MAX_BITS} bits")
        fac = self.factorization_of_p_minus_1
        if fac is None:
            fac = factorize(self.p - 1)
        fac = tuple((int(r), int(e)) for r, e in fac)
        prod = 1
        for r, e in fac:
            prod *= r**e
        if prod != self.p - 1 or not all(is_prime(r) for r, _ in fac):
            raise InvalidInstanceError(f"{fac} is not the factorisation of {self.p - 1}")
        object.__setattr__(self, "factorization_of_p_minus_1", fac)

    @property
    def order(self):
        return self.p - 1

    def is_generator(self, a):
        if not 1 <= a < self.p:
            return False
        return all(pow(a, self.order // r, self.p) != 1 for r, _ in self.factorization_of_p_minus_1)

    def smallest_generator(self):
        return next(a for a in range(2, self.p) if self.is_generator(a))


@dataclass(frozen=True)
class Semiprime:
    N: int
    p: int
    q: int

    def __post_init__(self):
        p, q = sorted((self.p, self.q))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        if p == q or p * q != self.N or not (is_prime(p) and is_prime(q)):
            raise InvalidInstanceError(f"N={self.N} is not the product of distinct primes {p}, {q}")
        if self.N.bit_length() > MAX_BITS:
            raise InvalidInstanceError(f"N exceeds {MAX_BITS} bits")
        if gcd(3, self.phi) != 1:
            raise InvalidInstanceError(f"gcd(3, phi(N)) != 1 for N={self.N}")

    @property
    def phi(self):
        return (self.p - 1) * (self.q - 1)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _safe_primes_in(lo, hi):
    return [p for p in range(lo | 1, hi, 2) if is_prime(p) and is_prime((p - 1) // 2)]


def generate_dlp_instance(bits, seed=None, max_attempts=200_000):
    """Random safe prime p with 2**(bits-1) <= p < 2**bits and the smallest generator of Z_p^*.

    Returns ``(PrimeModulus, a)``; the same seed always yields the same pair.
    """
    if not 3 <= bits <= MAX_BITS:
        raise ParameterRangeError(f"no safe prime available for bits={bits}; supported range is [3, {MAX_BITS}]")
    rng = _rng(seed)
    lo, hi = 1 << (bits - 1), 1 << bits
    if bits <= 16:
        pool = _safe_primes_in(lo, hi)
        if not pool:
            raise GenerationTimeoutError(f"no safe prime with {bits} bits")
        p = pool[int(rng.integers(len(pool)))]
    else:
        for _ in range(max_attempts):
            q = int(rng.integers(lo >> 1, hi >> 1)) | 1
            p = 2 * q + 1
            if p < hi and is_prime(q) and is_prime(p):
                break
        else:
            raise GenerationTimeoutError(f"no {bits}-bit safe prime found in {max_attempts} attempts")
    q = (p - 1) // 2
    fac = ((2, 2),) if q == 2 else ((2, 1), (q, 1))
    pm = PrimeModulus(p, fac)
    return pm, pm.smallest_generator()


def _random_prime(lo, hi, rng, accept=lambda r: True, max_attempts=200_000):
    for _ in range(max_attempts):
        r = int(rng.integers(lo, hi))
        if is_prime(r) and accept(r):
            return r
    raise GenerationTimeoutError(f"no prime found in [{lo}, {hi})")


SEMIPRIME_MIN_BITS = 6


def generate_semiprime(bits, seed=None, max_attempts=10_000):
    """Random N = p*q of exactly ``bits`` bits with p != q and gcd(3, phi(N)) = 1."""
    if not SEMIPRIME_MIN_BITS <= bits <= MAX_BITS:
        raise ParameterRangeError(f"semiprime bits must lie in [{SEMIPRIME_MIN_BITS}, {MAX_BITS}], got {bits}")
    rng = _rng(seed)
    lo, hi = 1 << (bits - 1), 1 << bits
    cube_ok = lambda r: r == 3 or r % 3 == 2  # noqa: E731
    if bits <= 16:
        primes = [r for r in range(2, hi // 2) if is_prime(r) and cube_ok(r)]
        pairs = [(a, b) for i, a in enumerate(primes) for b in primes[i + 1 :] if lo <= a * b < hi]
        p, q = pairs[int(rng.integers(len(pairs)))]
        return Semiprime(p * q, p, q)
    half = bits // 2
    for _ in range(max_attempts):
        p = _random_prime(1 << (half - 1), 1 << half, rng, cube_ok)
        q = _random_prime(-(-lo // p), -(-hi // p), rng, cube_ok)
        if p != q and lo <= p * q < hi:
            return Semiprime(p * q, p, q)
    raise GenerationTimeoutError(f"no {bits}-bit semiprime found")


class DiscreteLogSolver:
    """Baby-step/giant-step with a reusable sorted baby table."""

    def __init__(self, p, a, table_size=None):
        self.p = int(p)
        self.a = int(a)
        self.order = self.p - 1
        step = table_size or max(isqrt(self.order - 1) + 1, min(self.order, _TABLE_FLOOR))
        self.step = int(min(step, _TABLE_CAP, self.order))
        values = kernels.powers(self.a, self.step, self.p)
        order_idx = np.argsort(values, kind="stable")
        self.baby_values = np.ascontiguousarray(values[order_idx])
        self.baby_exps = np.ascontiguousarray(order_idx.astype(np.int64))
        self.giant = pow(pow(self.a, -1, self.p), self.step, self.p)
        self.max_giant = -(-self.order // self.step)

    def log_batch(self, xs):
        xs = np.asarray(xs, dtype=np.int64)
        if xs.size and (xs.min() < 1 or xs.max() >= self.p):
            raise DomainError(f"discrete log inputs must lie in [1, {self.p - 1}]")
        note("discrete_log", xs.size)
        out = kernels.bsgs_search(
            xs, self.giant, self.p, self.baby_values, self.baby_exps, self.step, self.max_giant
        )
        if xs.size and out.min() < 0:
            raise DomainError(f"{self.a} does not generate every input modulo {self.p}")
        return out

    def log(self, x):
        return int(self.log_batch(np.array([x]))[0])


@lru_cache(maxsize=16)
def get_solver(p, a):
    return DiscreteLogSolver(p, a)


def _as_int_modulus(p):
    return p.p if isinstance(p, PrimeModulus) else int(p)


def discrete_log(p, a, x):
    """Smallest l in {0, ..., p-2} with a**l = x (mod p)."""
    p = _as_int_modulus(p)
    if not 1 <= x < p:
        raise DomainError(f"x={x} is not in Z_{p}^*")
    return get_solver(p, int(a)).log(int(x))


def discrete_log_batch(p, a, xs):
    """Vectorised :func:`discrete_log`; counts one surrogate call per input."""
    return get_solver(_as_int_modulus(p), int(a)).log_batch(xs)
