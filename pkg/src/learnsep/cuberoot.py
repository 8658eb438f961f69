"""The cube root concept class.

Concept ``c_i`` maps ``x`` in Z_N^* to the i-th least significant bit
(counting from 1) of the unique cube root of x modulo N. The root is
``x**d mod N`` with d the RSA private exponent of 3, so a learner that can
factor N recovers d and is left with choosing the bit index. The resulting
hypothesis ``(d, i)`` evaluates classically.
"""
import json
from dataclasses import dataclass
from math import gcd
from typing import Optional

import numpy as np

from . import kernels
from .errors import DomainError, InconsistencyError, InconsistentDataError
from .numtheory import Semiprime, factor_semiprime, generate_semiprime, rsa_private_exponent
from .pac import (
    ExampleOracle,
    Hypothesis,
    LabeledExample,
    format_spec,
    register_evaluator,
    register_learner,
    training_size,
)


@dataclass(frozen=True)
class RsaInstance:
    semiprime: Semiprime
    d_star: int
    seed: Optional[int] = None

    def __post_init__(self):
        if 3 * self.d_star % self.semiprime.phi != 1:
            raise DomainError("d_star is not the inverse of 3 modulo (p-1)(q-1)")

    @classmethod
    def generate(cls, bits, seed=None):
        sp = generate_semiprime(bits, seed)
        return cls(sp, rsa_private_exponent(sp.p, sp.q), seed)

    @classmethod
    def from_factors(cls, p, q, seed=None):
        sp = Semiprime(p * q, p, q)
        return cls(sp, rsa_private_exponent(sp.p, sp.q), seed)

    @classmethod
    def from_public(cls, N, seed=None):
        """Rebuild the secret side by factoring N with the surrogate."""
        p, q = factor_semiprime(N)
        return cls.from_factors(p, q, seed)

    @property
    def N(self):
        return self.semiprime.N

    @property
    def n(self):
        return self.N.bit_length()

    def public_json(self):
        return json.dumps({"N": self.N, "bits": self.n, "seed": self.seed}, sort_keys=True)

    def secrets_json(self):
        return json.dumps(
            {"N": self.N, "p": self.semiprime.p, "q": self.semiprime.q, "d_star": self.d_star}, sort_keys=True
        )

    @classmethod
    def from_json(cls, public_text, secrets_text=None):
        pub = json.loads(public_text)
        if secrets_text is None:
            return cls.from_public(int(pub["N"]), pub.get("seed"))
        sec = json.loads(secrets_text)
        inst = cls.from_factors(int(sec["p"]), int(sec["q"]), pub.get("seed"))
        if inst.N != int(pub["N"]) or inst.d_star != int(sec["d_star"]):
            raise DomainError("secrets file does not match the public instance")
        return inst


@dataclass(frozen=True)
class BitConcept:
    i: int


def bit(value, i):
    return (value >> (i - 1)) & 1


def _modulus(inst):
    return inst if isinstance(inst, int) else inst.N


def _check_unit(x, N):
    if not 1 <= x < N:
        raise DomainError(f"x={x} is not in Z_{N}^*")
    g = gcd(x, N)
    if g != 1:
        raise DomainError(f"x={x} shares the factor {g} with N={N}")


def _check_bit(i, N):
    if not 1 <= i <= N.bit_length():
        raise DomainError(f"bit index {i} outside [1, {N.bit_length()}]")


def g_forward(inst, x):
    N = _modulus(inst)
    _check_unit(x, N)
    return pow(x, 3, N)


def g_inverse_trapdoor(inst, y):
    _check_unit(y, inst.N)
    return pow(y, inst.d_star, inst.N)


def concept_eval(inst, c, x):
    _check_bit(c.i, inst.N)
    return bit(g_inverse_trapdoor(inst, x), c.i)


def bits_of(values, i):
    return (np.asarray(values, dtype=np.int64) >> (i - 1)) & 1


def concept_eval_batch(inst, i, xs):
    _check_bit(i, inst.N)
    return bits_of(kernels.powmod_array(xs, inst.d_star, inst.N), i)


def sample_units(N, rng, m):
    """m uniform draws from Z_N^* (rejection on the gcd)."""
    out = np.empty(0, dtype=np.int64)
    while out.size < m:
        cand = rng.integers(1, N, size=2 * (m - out.size) + 8, dtype=np.int64)
        out = np.concatenate([out, cand[np.gcd(cand, N) == 1]])
    return out[:m]


def sample_examples(N, i, rng, m):
    """m examples of c_i as (x**3 mod N, bit i of x); never touches d*."""
    xs = sample_units(N, rng, m)
    return kernels.powmod_array(xs, 3, N), bits_of(xs, i)


def gen_example(inst, c, rng):
    N = _modulus(inst)
    _check_bit(c.i, N)
    xs, labels = sample_examples(N, c.i, rng, 1)
    return LabeledExample(int(xs[0]), int(labels[0]))


def example_oracle(inst, c, rng=None, budget=None):
    N = _modulus(inst)
    _check_bit(c.i, N)
    return ExampleOracle(
        lambda r, m: sample_examples(N, c.i, r, m),
        rng=rng,
        budget=budget,
        concept=c.i,
        description=f"EX(c_{c.i}, uniform) N={N}",
    )


def reconstruct_x_via_concepts(inst, x_image, eval_access):
    """Assemble the cube root of x_image bit by bit from n concept queries."""
    N = _modulus(inst)
    value = 0
    for i in range(1, N.bit_length() + 1):
        b = eval_access(i)
        if b not in (0, 1):
            raise InconsistencyError(f"concept {i} answered {b!r}, expected a bit")
        value |= b << (i - 1)
    if not 1 <= value < N or gcd(value, N) != 1 or pow(value, 3, N) != x_image:
        raise InconsistencyError(f"assembled {value} is not a cube root of {x_image} mod {N}")
    return value


# --------------------------------------------------------------------------
# hypotheses and learning


@dataclass(frozen=True)
class RsaHypothesis:
    d: int
    i: int
    N: int

    @property
    def hypothesis(self):
        return Hypothesis(format_spec("rsa-bit", d=self.d, i=self.i, N=self.N))

    def __call__(self, x):
        return hypothesis_eval(self, self.N, x)

    def predict(self, xs):
        return self.hypothesis.predict(xs)


def hypothesis_eval(h, N, x):
    """Bit i of x**d mod N; needs only the public spec (d, i, N)."""
    _check_unit(x, N)
    return bit(pow(x, h.d, N), h.i)


def _rsa_bit_eval(params, xs):
    N = int(params["N"])
    return bits_of(kernels.powmod_array(xs, int(params["d"]), N), int(params["i"]))


register_evaluator("rsa-bit", _rsa_bit_eval, primitives={"mod_pow"})


def _bit_eval(params, ys):
    return bits_of(ys, int(params["i"]))


register_evaluator("bit", _bit_eval, primitives=())


def surviving_indices(roots, labels, n):
    """Bit positions j in [1, n] with bit j of every root equal to its label."""
    roots = np.asarray(roots, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    positions = np.arange(n, dtype=np.int64)
    agree = ((roots[:, None] >> positions[None, :]) & 1) == labels[:, None]
    return positions[agree.all(axis=0)] + 1


def surrogate_quantum_learner(oracle, N, config):
    """Factor N, derive d*, then keep the smallest bit index consistent with the sample."""
    n = N.bit_length()
    m = training_size(config, n)
    xs, labels = oracle.draw_arrays(m)
    p, q = factor_semiprime(N)
    d = rsa_private_exponent(p, q)
    roots = kernels.powmod_array(xs, d, N) if m else xs
    alive = surviving_indices(roots, labels, n)
    if alive.size == 0:
        raise InconsistentDataError(f"no bit index of x^{d} mod {N} matches all {m} examples")
    return RsaHypothesis(d, int(alive[0]), N)


class CubeRootSurrogateLearner:
    name = "cuberoot-surrogate"

    def __init__(self, N):
        self.N = int(N)

    @property
    def params(self):
        return {"N": self.N}

    def __call__(self, oracle, config):
        return surrogate_quantum_learner(oracle, self.N, config).hypothesis


register_learner(CubeRootSurrogateLearner.name, CubeRootSurrogateLearner)


class BitLearner:
    """Index elimination on the roots themselves (the family F)."""

    name = "bit"

    def __init__(self, n):
        self.n = int(n)

    @property
    def params(self):
        return {"n": self.n}

    def __call__(self, oracle, config):
        ys, labels = oracle.draw_arrays(training_size(config, self.n))
        alive = surviving_indices(ys, labels, self.n)
        if alive.size == 0:
            raise InconsistentDataError("no bit index matches the sample")
        return Hypothesis(format_spec("bit", i=int(alive[0])))


register_learner(BitLearner.name, BitLearner)


# --------------------------------------------------------------------------
# decomposition bundle


def hardness_assumption(inst):
    return (
        f"Discrete Cube Root Assumption (N={inst.N}): given only N and y, no polynomial-time "
        f"classical algorithm computes the cube root of y mod N on an inverse-polynomial fraction of y in Z_N^*."
    )


def decomposition(inst, domain_limit=10_000):
    from .checklist import Decomposition

    N, n = inst.N, inst.n

    def rerandomize(x, rng):
        r = int(sample_units(N, rng, 1)[0])
        r_inv = pow(r, -1, N)
        return x * pow(r, 3, N) % N, lambda z: z * r_inv % N

    def units():
        xs = np.arange(1, N, dtype=np.int64)
        return xs[np.gcd(xs, N) == 1]

    small = N <= domain_limit
    return Decomposition(
        name="cuberoot",
        family_f=lambda i, ys: bits_of(ys, i),
        g_forward=lambda ys: kernels.powmod_array(ys, 3, N),
        g_inverse_surrogate=lambda xs: kernels.powmod_array(xs, inst.d_star, N),
        concept_eval=lambda i, xs: concept_eval_batch(inst, i, xs),
        reconstructor_b=lambda x, ask: reconstruct_x_via_concepts(N, x, ask),
        query_budget=n,
        example_gen=lambda i, rng, m: sample_examples(N, i, rng, m),
        base_distribution=lambda rng, m: sample_units(N, rng, m),
        concept_sampler=lambda rng: int(rng.integers(1, n + 1)),
        class_size=n,
        hardness_assumption=hardness_assumption(inst),
        base_support=units if small else None,
        domain=units if small else None,
        rerandomize=rerandomize,
        quantum_learner=CubeRootSurrogateLearner(N),
        family_learner=BitLearner(n),
        label_values=(0, 1),
        description=f"cube root concept class, N={N}",
    )
