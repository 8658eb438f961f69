"""Finite-scale measurement of heuristic and average-case success.

An algorithm either answers, answers wrongly, or says "don't know"
(:data:`BOTTOM`). :func:`wrap_err_to_dont_know` turns any inverter of an
efficiently computable map into one that never errs, and
:func:`learner_to_inverter` turns a learner for the concept class into an
inverter for the hidden map.
"""
import json
from collections import Counter
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import InconsistencyError, InversionFailure


class _Bottom:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOTTOM"

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()

# odd so a majority always exists
MAJORITY_RUNS = 5


@dataclass
class DistributionalProblem:
    ground_truth: callable
    sampler: callable  # rng -> one input
    domain_size: int = None


@dataclass
class HeuristicReport:
    samples: int
    correct: int
    errors: int
    dont_know: int
    exceptions: int = 0
    diagnostics: list = field(default_factory=list)

    @property
    def correct_rate(self):
        return self.correct / self.samples

    @property
    def error_rate(self):
        return self.errors / self.samples

    @property
    def dont_know_rate(self):
        return self.dont_know / self.samples

    def merge(self, other):
        return HeuristicReport(
            self.samples + other.samples,
            self.correct + other.correct,
            self.errors + other.errors,
            self.dont_know + other.dont_know,
            self.exceptions + other.exceptions,
            self.diagnostics + other.diagnostics,
        )

    def to_dict(self):
        d = asdict(self)
        d.update(correct_rate=self.correct_rate, error_rate=self.error_rate, dont_know_rate=self.dont_know_rate)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def table(self):
        rows = [
            ("samples", f"{self.samples:d}"),
            ("correct_rate", f"{self.correct_rate:.6f}"),
            ("error_rate", f"{self.error_rate:.6f}"),
            ("dont_know_rate", f"{self.dont_know_rate:.6f}"),
            ("exceptions", f"{self.exceptions:d}"),
        ]
        return "\n".join(f"{k:<16}{v:>14}" for k, v in rows)


def _majority(answers):
    counts = Counter(answers)
    value, hits = counts.most_common(1)[0]
    return value if hits * 2 > len(answers) else BOTTOM


def heuristic_success_rate(alg, problem, samples, rng, randomized=False, max_diagnostics=20):
    """Run ``alg`` on ``samples`` inputs drawn from the problem's distribution.

    Randomized algorithms are run :data:`MAJORITY_RUNS` times per input and
    the majority answer is scored; without a strict majority the input counts
    as "don't know". An exception counts as an error and is logged in
    ``diagnostics``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    correct = errors = dont_know = exceptions = 0
    diagnostics = []
    for _ in range(samples):
        x = problem.sampler(rng)
        try:
            if randomized:
                answer = _majority([alg(x) for _ in range(MAJORITY_RUNS)])
            else:
                answer = alg(x)
        except Exception as exc:  # noqa: BLE001
            exceptions += 1
            errors += 1
            if len(diagnostics) < max_diagnostics:
                diagnostics.append(f"{type(exc).__name__} on input {x!r}: {exc}")
            continue
        if answer is BOTTOM:
            dont_know += 1
        elif answer == problem.ground_truth(x):
            correct += 1
        else:
            errors += 1
    return HeuristicReport(samples, correct, errors, dont_know, exceptions, diagnostics)


def wrap_err_to_dont_know(alg, forward_g):
    """Inverter that returns alg(x) only when forward_g(alg(x)) == x, else BOTTOM."""

    def wrapped(x):
        try:
            y = alg(x)
            if y is not BOTTOM and forward_g(y) == x:
                return y
        except Exception:  # noqa: BLE001 - a crash is just another unverified answer
            pass
        return BOTTOM

    wrapped.__wrapped__ = alg
    return wrapped


def reduction_config(config, decomposition, points_per_concept=1):
    """Per-concept accuracy eps / (|C'(x)| * |X'(x)|) for the union bound."""
    eps = config.epsilon / (decomposition.query_budget * points_per_concept)
    return replace(config, epsilon=eps, sample_budget=None)


def learner_to_inverter(learner, decomposition, x, config, rng=None, attempts=1):
    """Invert the hidden map at ``x`` using nothing but a learner.

    Each concept the reconstruction algorithm asks about is learned once
    from its own example oracle (at the tightened accuracy of
    :func:`reduction_config`) and the learned hypothesis is evaluated at the
    query point. With ``attempts == 1`` this is the plain reduction and B's
    output is returned as is. With more attempts, every answer is checked
    against the forward map, and a failed attempt is retried on a
    re-randomised target ``x'`` whose preimage maps back to that of ``x``.
    """
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    cfg = reduction_config(config, decomposition)
    last_error = None
    for attempt in range(attempts):
        if attempt == 0:
            target, undo = x, (lambda y: y)
        else:
            target, undo = decomposition.rerandomize(x, rng)
        hypotheses = {}
        seeds = np.random.SeedSequence(int(rng.integers(2**63)))

        def ask(j):
            if j not in hypotheses:
                oracle = decomposition.oracle(j, np.random.default_rng(seeds.spawn(1)[0]))
                try:
                    hypotheses[j] = learner(oracle, cfg)
                except Exception as exc:
                    raise InversionFailure(f"learner failed on concept {j}: {exc}") from exc
            return hypotheses[j](target)

        try:
            y = undo(decomposition.reconstructor_b(target, ask))
        except InconsistencyError as exc:
            last_error = exc
            continue
        if attempts == 1:
            return y
        if int(decomposition.g_forward(np.array([y]))[0]) == x:
            return y
        last_error = InversionFailure(f"attempt {attempt} produced a wrong preimage")
    if attempts == 1 and isinstance(last_error, InconsistencyError):
        raise last_error
    raise InversionFailure(f"no verified preimage of {x} after {attempts} attempts") from last_error
