"""Batch modular-arithmetic kernels.

Every kernel exists twice: a numba ``@njit`` loop and a vectorised numpy
version. ``powmod_array`` and ``bsgs_search`` dispatch to numba when it is
available and not disabled through ``LEARNSEP_DISABLE_NUMBA``; both
implementations are exposed as ``NUMBA`` and ``NUMPY`` for benchmarking and
equivalence tests.

All values are int64 and moduli must stay below 2**62 so that a sum of two
residues never overflows.
"""
from types import SimpleNamespace

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit

MAX_MODULUS = 1 << 62
# largest m with (m - 1)**2 < 2**63
_DIRECT_PRODUCT_LIMIT = 3037000499


def _check_modulus(modulus):
    modulus = int(modulus)
    if not 2 <= modulus < MAX_MODULUS:
        raise ValueError(f"modulus must lie in [2, 2**62), got {modulus}")
    return modulus


# --------------------------------------------------------------------------
# numpy implementations


def _np_mulmod(a, b, m):
    if m <= _DIRECT_PRODUCT_LIMIT:
        return (a * b) % m
    # double-and-add over the bits of b
    a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64) % m, np.asarray(b, dtype=np.int64))
    a = a.copy()
    b = b.copy()
    out = np.zeros(a.shape, dtype=np.int64)
    while np.any(b):
        odd = (b & 1).astype(bool)
        out[odd] += a[odd]
        out[out >= m] -= m
        a += a
        a[a >= m] -= m
        b >>= 1
    return out


def _np_powmod(bases, exps, modulus):
    bases, exps = np.broadcast_arrays(np.asarray(bases, dtype=np.int64), np.asarray(exps, dtype=np.int64))
    result = np.ones(bases.shape, dtype=np.int64)
    if modulus == 1:
        return np.zeros_like(result)
    sq = bases % modulus
    e = exps.copy()
    while np.any(e):
        odd = (e & 1).astype(bool)
        if np.any(odd):
            result[odd] = _np_mulmod(result[odd], sq[odd], modulus)
        sq = _np_mulmod(sq, sq, modulus)
        e >>= 1
    return result


def _np_bsgs(targets, giant, modulus, baby_values, baby_exps, step, max_giant):
    targets = np.asarray(targets, dtype=np.int64)
    out = np.full(targets.shape, -1, dtype=np.int64)
    gamma = targets.copy()
    active = np.arange(targets.size)
    gamma = gamma.ravel()
    flat = out.ravel()
    size = baby_values.size
    for k in range(max_giant + 1):
        if active.size == 0:
            break
        g = gamma[active]
        idx = np.searchsorted(baby_values, g)
        idx_c = np.minimum(idx, size - 1)
        hit = (idx < size) & (baby_values[idx_c] == g)
        if np.any(hit):
            flat[active[hit]] = k * step + baby_exps[idx_c[hit]]
            active = active[~hit]
        if active.size:
            gamma[active] = _np_mulmod(gamma[active], np.int64(giant), modulus)
    return flat.reshape(targets.shape)


def _np_powers(base, count, modulus):
    # doubling: the second half of [a^0 .. a^(2k-1)] is the first half times a^k
    out = np.ones(1, dtype=np.int64) % modulus
    while out.size < count:
        shift = _np_powmod(np.int64(base), np.int64(out.size), modulus)
        out = np.concatenate([out, _np_mulmod(out, shift, modulus)])
    return out[:count]


# --------------------------------------------------------------------------
# numba implementations


@njit(cache=True)
def _nb_mulmod(a, b, m):
    if m <= 3037000499:
        return (a * b) % m
    a = a % m
    r = 0
    while b > 0:
        if b & 1:
            r += a
            if r >= m:
                r -= m
        a += a
        if a >= m:
            a -= m
        b >>= 1
    return r


@njit(cache=True)
def _nb_powmod_scalar(base, exp, m):
    result = 1 % m
    base = base % m
    while exp > 0:
        if exp & 1:
            result = _nb_mulmod(result, base, m)
        base = _nb_mulmod(base, base, m)
        exp >>= 1
    return result


@njit(cache=True)
def _nb_powmod_flat(bases, exps, m):
    out = np.empty(bases.size, dtype=np.int64)
    for k in range(bases.size):
        out[k] = _nb_powmod_scalar(bases[k], exps[k], m)
    return out


@njit(cache=True)
def _nb_powers(base, count, m):
    out = np.empty(count, dtype=np.int64)
    v = 1 % m
    base = base % m
    for k in range(count):
        out[k] = v
        v = _nb_mulmod(v, base, m)
    return out


@njit(cache=True)
def _nb_bsgs_flat(targets, giant, m, baby_values, baby_exps, step, max_giant):
    out = np.full(targets.size, -1, dtype=np.int64)
    size = baby_values.size
    for t in range(targets.size):
        gamma = targets[t]
        for k in range(max_giant + 1):
            idx = np.searchsorted(baby_values, gamma)
            if idx < size and baby_values[idx] == gamma:
                out[t] = k * step + baby_exps[idx]
                break
            gamma = _nb_mulmod(gamma, giant, m)
    return out


def _nb_powmod(bases, exps, modulus):
    bases, exps = np.broadcast_arrays(np.asarray(bases, dtype=np.int64), np.asarray(exps, dtype=np.int64))
    flat = _nb_powmod_flat(np.ascontiguousarray(bases).ravel(), np.ascontiguousarray(exps).ravel(), np.int64(modulus))
    return flat.reshape(bases.shape)


def _nb_bsgs(targets, giant, modulus, baby_values, baby_exps, step, max_giant):
    targets = np.asarray(targets, dtype=np.int64)
    flat = _nb_bsgs_flat(
        np.ascontiguousarray(targets).ravel(),
        np.int64(giant),
        np.int64(modulus),
        baby_values,
        baby_exps,
        np.int64(step),
        np.int64(max_giant),
    )
    return flat.reshape(targets.shape)


def _nb_powers_wrapped(base, count, modulus):
    return _nb_powers(np.int64(base), np.int64(count), np.int64(modulus))


NUMPY = SimpleNamespace(name="numpy", powmod=_np_powmod, bsgs=_np_bsgs, powers=_np_powers)
NUMBA = (
    SimpleNamespace(name="numba", powmod=_nb_powmod, bsgs=_nb_bsgs, powers=_nb_powers_wrapped) if HAVE_NUMBA else None
)
ACTIVE = NUMBA if USE_NUMBA else NUMPY


def powmod_array(bases, exps, modulus):
    """Elementwise ``bases ** exps % modulus`` with broadcasting.

    Negative exponents are not supported.
    """
    modulus = _check_modulus(modulus)
    exps = np.asarray(exps, dtype=np.int64)
    if np.any(exps < 0):
        raise ValueError("exponents must be nonnegative")
    return ACTIVE.powmod(bases, exps, modulus)


def powers(base, count, modulus):
    """``[base**0, base**1, ..., base**(count-1)] % modulus``."""
    modulus = _check_modulus(modulus)
    if count < 0:
        raise ValueError("count must be nonnegative")
    return ACTIVE.powers(int(base), int(count), modulus)


def bsgs_search(targets, giant, modulus, baby_values, baby_exps, step, max_giant):
    """Giant-step phase of baby-step/giant-step over a prebuilt table.

    ``baby_values`` must be sorted ascending with ``baby_exps`` aligned to it.
    Each target is multiplied by ``giant`` up to ``max_giant`` times; the
    result is ``k * step + j`` for the first hit, or -1 if none occurs.
    """
    modulus = _check_modulus(modulus)
    return ACTIVE.bsgs(targets, int(giant), modulus, baby_values, baby_exps, int(step), int(max_giant))
