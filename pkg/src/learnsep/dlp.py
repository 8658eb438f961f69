"""The discrete logarithm concept class.

Concept ``c_i`` labels ``x`` in Z_p^* with +1 when ``log_a x`` lies in the
circular window ``[i, i + (p-3)/2]`` of the exponent ring Z_{p-1}, and -1
otherwise. It factors as ``c_i(x) = f_i(g^{-1}(x))`` with ``g(y) = a**y mod
p`` and ``f_i`` the window indicator, which is what makes examples cheap to
generate and the class hard to learn without a discrete-log solver.

Window membership wraps modulo p-1, so every concept is +1 on exactly half
of the domain.
"""
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import DomainError, InconsistencyError
from .numtheory import PrimeModulus, discrete_log, discrete_log_batch, generate_dlp_instance
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
class DlpInstance:
    modulus: PrimeModulus
    a: int
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.modulus.is_generator(self.a):
            raise DomainError(f"{self.a} does not generate Z_{self.p}^*")

    @classmethod
    def generate(cls, bits, seed=None):
        pm, a = generate_dlp_instance(bits, seed)
        return cls(pm, a, seed)

    @classmethod
    def from_params(cls, p, a, seed=None):
        return cls(PrimeModulus(int(p)), int(a), seed)

    @property
    def p(self):
        return self.modulus.p

    @property
    def n(self):
        return self.p.bit_length()

    @property
    def order(self):
        return self.p - 1

    @property
    def half_width(self):
        return (self.p - 3) // 2

    def to_json(self):
        return json.dumps({"p": self.p, "a": self.a, "bits": self.n, "seed": self.seed}, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        inst = cls.from_params(data["p"], data["a"], data.get("seed"))
        if "bits" in data and data["bits"] != inst.n:
            raise DomainError(f"instance declares {data['bits']} bits but p has {inst.n}")
        return inst


@dataclass(frozen=True)
class DlpConcept:
    i: int


@dataclass(frozen=True)
class IntervalLabeler:
    i: int
    half_width: int

    @classmethod
    def for_prime(cls, i, p):
        return cls(i, (p - 3) // 2)


def _check_index(i, p):
    if not 1 <= i <= p - 1:
        raise DomainError(f"concept index {i} outside [1, {p - 1}]")


def _check_exponent(y, p):
    if not 0 <= y <= p - 2:
        raise DomainError(f"exponent {y} outside [0, {p - 2}]")


def f_interval(labeler, y, p):
    """+1 iff (y - i) mod (p-1) <= (p-3)/2."""
    _check_exponent(y, p)
    if labeler.half_width != (p - 3) // 2:
        raise DomainError(f"labeler half width {labeler.half_width} does not match p={p}")
    return 1 if (y - labeler.i) % (p - 1) <= labeler.half_width else -1


def interval_labels(i, ys, p):
    ys = np.asarray(ys, dtype=np.int64)
    return np.where((ys - i) % (p - 1) <= (p - 3) // 2, 1, -1).astype(np.int64)


def g_forward(inst, y):
    _check_exponent(y, inst.p)
    return pow(inst.a, y, inst.p)


def g_forward_batch(inst, ys):
    return kernels.powmod_array(inst.a, ys, inst.p)


def concept_eval(inst, c, x):
    """c_i(x) computed from the definition, via the discrete-log surrogate."""
    _check_index(c.i, inst.p)
    if not 1 <= x <= inst.p - 1:
        raise DomainError(f"x={x} is not in Z_{inst.p}^*")
    return f_interval(IntervalLabeler.for_prime(c.i, inst.p), discrete_log(inst.p, inst.a, x), inst.p)


def concept_eval_batch(inst, i, xs):
    _check_index(i, inst.p)
    return interval_labels(i, discrete_log_batch(inst.p, inst.a, xs), inst.p)


def sample_examples(inst, i, rng, m):
    """m examples of c_i: uniform exponent y, returned as (a**y mod p, f_i(y))."""
    ys = rng.integers(0, inst.order, size=m, dtype=np.int64)
    return g_forward_batch(inst, ys), interval_labels(i, ys, inst.p)


def gen_example(inst, c, rng):
    _check_index(c.i, inst.p)
    xs, labels = sample_examples(inst, c.i, rng, 1)
    return LabeledExample(int(xs[0]), int(labels[0]))


def example_oracle(inst, c, rng=None, budget=None):
    _check_index(c.i, inst.p)
    return ExampleOracle(
        lambda r, m: sample_examples(inst, c.i, r, m),
        rng=rng,
        budget=budget,
        concept=c.i,
        description=f"EX(c_{c.i}, uniform) p={inst.p} a={inst.a}",
    )


def query_budget(p):
    """ceil(log2 p) + 2 (p odd, so ceil(log2 p) is its bit length)."""
    return p.bit_length() + 2


def reconstruct_log_via_concepts(inst, x, eval_access):
    """Recover log_a x from concept labels at the single point x.

    The first query fixes which half of the exponent ring holds the log;
    each later query compares against a window starting mid-way through the
    remaining range, halving it. Two closing queries confirm that the window
    starting at the answer contains x and the one starting just after does
    not. Repeated indices are asked once.
    """
    p = inst.p
    order = p - 1
    half = order // 2
    answers = {}

    def ask(start):
        i = start % order or order
        if i not in answers:
            label = eval_access(i)
            if label not in (1, -1):
                raise InconsistencyError(f"concept {i} answered {label!r}, expected +1 or -1")
            answers[i] = label
        return answers[i] == 1

    lo = 0 if ask(0) else half
    hi = lo + half - 1
    while lo < hi:
        mid = lo + (hi - lo + 1) // 2
        if ask(mid):
            lo = mid
        else:
            hi = mid - 1
    ell = lo % order
    if not ask(ell) or ask(ell + 1):
        raise InconsistencyError(f"concept answers for x={x} are not consistent with any exponent")
    return ell


# --------------------------------------------------------------------------
# learning


def _window_counts(sorted_points, starts, width, order):
    ends = starts + width
    lo = np.searchsorted(sorted_points, starts)
    hi = np.searchsorted(sorted_points, np.minimum(ends, order))
    counts = hi - lo
    wrapped = ends > order
    counts[wrapped] += np.searchsorted(sorted_points, ends[wrapped] - order)
    return counts


def fit_interval_start(exponents, labels, p):
    """Concept index whose window disagrees least with the labelled exponents.

    Disagreement is constant between consecutive sample-induced change
    points, so only starts at a sample boundary (plus 0 and 1 for the
    tie-break) are scored. Ties go to the smallest index.
    """
    order = p - 1
    width = order // 2
    ys = np.asarray(exponents, dtype=np.int64)
    labels = np.asarray(labels)
    pos = np.sort(ys[labels == 1])
    neg = np.sort(ys[labels != 1])
    cands = np.unique(
        np.concatenate([np.array([0, 1]), ys + 1, ys - width + 1, pos, neg - width]) % order
    )
    errs = _window_counts(neg, cands, width, order) + (pos.size - _window_counts(pos, cands, width, order))
    best = cands[errs == errs.min()]
    return int(np.where(best == 0, order, best).min())


def interval_hypothesis(i, p, a):
    return Hypothesis(format_spec("dlp-interval", i=i, p=p, a=a))


def _dlp_interval_eval(params, xs):
    p, a, i = int(params["p"]), int(params["a"]), int(params["i"])
    return interval_labels(i, discrete_log_batch(p, a, xs), p)


register_evaluator("dlp-interval", _dlp_interval_eval, primitives={"mod_pow", "discrete_log"})


def _interval_eval(params, ys):
    return interval_labels(int(params["i"]), ys, int(params["p"]))


register_evaluator("interval", _interval_eval, primitives=())


class DlpSurrogateLearner:
    """Discrete-log preprocessing followed by consistent window fitting.

    The returned hypothesis evaluates through the discrete-log surrogate, so
    it is only quantumly evaluatable.
    """

    name = "dlp-surrogate"

    def __init__(self, p, a):
        self.p = int(p)
        self.a = int(a)

    @property
    def params(self):
        return {"p": self.p, "a": self.a}

    def __call__(self, oracle, config):
        m = training_size(config, self.p - 1)
        xs, labels = oracle.draw_arrays(m)
        ys = discrete_log_batch(self.p, self.a, xs) if m else xs
        return interval_hypothesis(fit_interval_start(ys, labels, self.p), self.p, self.a)


register_learner(DlpSurrogateLearner.name, DlpSurrogateLearner)


class IntervalLearner:
    """Window fitting directly on exponents (the family F, no inverse needed)."""

    name = "interval"

    def __init__(self, p):
        self.p = int(p)

    @property
    def params(self):
        return {"p": self.p}

    def __call__(self, oracle, config):
        m = training_size(config, self.p - 1)
        ys, labels = oracle.draw_arrays(m)
        return Hypothesis(format_spec("interval", i=fit_interval_start(ys, labels, self.p), p=self.p))


register_learner(IntervalLearner.name, IntervalLearner)


def surrogate_quantum_learner(oracle, inst, config):
    return DlpSurrogateLearner(inst.p, inst.a)(oracle, config)


# --------------------------------------------------------------------------
# decomposition bundle


def hardness_assumption(inst):
    return (
        f"Discrete Logarithm Assumption (p={inst.p}, a={inst.a}): no polynomial-time classical "
        f"algorithm computes log_a x mod p correctly on a 1/2 + 1/poly(n) fraction of x in Z_p^*."
    )


def decomposition(inst, domain_limit=10_000):
    from .checklist import Decomposition

    p, order = inst.p, inst.order

    def rerandomize(x, rng):
        r = int(rng.integers(0, order))
        return x * pow(inst.a, r, p) % p, lambda y: (y - r) % order

    small = order <= domain_limit
    return Decomposition(
        name="dlp",
        family_f=lambda i, ys: interval_labels(i, ys, p),
        g_forward=lambda ys: g_forward_batch(inst, ys),
        g_inverse_surrogate=lambda xs: discrete_log_batch(p, inst.a, xs),
        concept_eval=lambda i, xs: concept_eval_batch(inst, i, xs),
        reconstructor_b=lambda x, ask: reconstruct_log_via_concepts(inst, x, ask),
        query_budget=query_budget(p),
        example_gen=lambda i, rng, m: sample_examples(inst, i, rng, m),
        base_distribution=lambda rng, m: rng.integers(0, order, size=m, dtype=np.int64),
        concept_sampler=lambda rng: int(rng.integers(1, p)),
        class_size=order,
        hardness_assumption=hardness_assumption(inst),
        base_support=(lambda: np.arange(order, dtype=np.int64)) if small else None,
        domain=(lambda: np.arange(1, p, dtype=np.int64)) if small else None,
        rerandomize=rerandomize,
        quantum_learner=DlpSurrogateLearner(p, inst.a),
        family_learner=IntervalLearner(p),
        description=f"discrete log concept class, p={p}, a={inst.a}",
    )
