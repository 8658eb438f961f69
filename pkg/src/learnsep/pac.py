"""PAC machinery: example oracles, hypotheses as specification strings,
empirical risk, the (epsilon, delta) trial harness and the delegating
hypothesis construction.

Hypotheses are plain strings of the form ``"<kind> key=value key=value"``.
The kind names a registered :class:`Evaluator`; evaluation reads nothing but
the string and the input, so a hypothesis can be shipped around, hashed and
re-evaluated anywhere.
"""
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Any, Callable, Optional

import numpy as np
from scipy.stats import binomtest

from .errors import BudgetExhaustedError, EmptyTestSetError, SpecTooLargeError
from .trace import SURROGATE_PRIMITIVES


@dataclass(frozen=True)
class LabeledExample:
    input: Any
    label: int


class ExampleOracle:
    """EX(c, D): each call returns one labelled example drawn i.i.d.

    ``sampler(rng, m)`` must return a pair of arrays ``(inputs, labels)`` of
    length m. ``budget`` caps the total number of examples handed out.
    ``concept`` is bookkeeping only (learners must not peek; control
    learners in tests do).
    """

    def __init__(self, sampler, rng=None, budget=None, description="", concept=None):
        self.sampler = sampler
        self.concept = concept
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.budget = budget
        self.description = description
        self.call_count = 0

    @property
    def remaining(self):
        return math.inf if self.budget is None else self.budget - self.call_count

    def _reserve(self, m):
        if m < 0:
            raise ValueError("cannot draw a negative number of examples")
        if m > self.remaining:
            raise BudgetExhaustedError(
                f"requested {m} examples but only {self.remaining} of {self.budget} remain ({self.description})"
            )
        self.call_count += m

    def draw_arrays(self, m):
        self._reserve(m)
        if m == 0:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        xs, labels = self.sampler(self.rng, m)
        return np.asarray(xs), np.asarray(labels)

    def __call__(self):
        xs, labels = self.draw_arrays(1)
        return LabeledExample(xs[0].item(), int(labels[0]))

    def __repr__(self):
        return f"ExampleOracle({self.description!r}, calls={self.call_count}, budget={self.budget})"


def replay_oracle(examples, description="replay"):
    """Oracle that hands out a fixed list of examples in order."""
    xs = np.array([e.input for e in examples])
    labels = np.array([e.label for e in examples], dtype=np.int64)
    pos = [0]

    def sampler(rng, m):
        start = pos[0]
        pos[0] += m
        return xs[start : start + m], labels[start : start + m]

    return ExampleOracle(sampler, rng=0, budget=len(examples), description=description)


def draw_examples(oracle, m):
    xs, labels = oracle.draw_arrays(m)
    return [LabeledExample(x.item(), int(l)) for x, l in zip(xs, labels)]


# --------------------------------------------------------------------------
# hypotheses


def format_spec(kind, **params):
    """Canonical spec string; parameters keep the caller's order."""
    if " " in kind or "=" in kind:
        raise ValueError(f"bad hypothesis kind {kind!r}")
    parts = [kind]
    for key, value in params.items():
        text = str(value)
        if " " in text or "=" in key:
            raise ValueError(f"parameter {key}={text!r} is not spec-safe")
        parts.append(f"{key}={text}")
    return " ".join(parts)


@lru_cache(maxsize=4096)
def parse_spec(spec):
    kind, *rest = spec.split(" ")
    params = {}
    for item in rest:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"malformed spec token {item!r} in {spec!r}")
        params[key] = value
    return kind, params


@dataclass(frozen=True)
class Evaluator:
    """A registered evaluation algorithm for one hypothesis kind.

    ``primitives`` declares every primitive operation the evaluator may call;
    it is classical-only when none of them is a quantum surrogate.
    """

    name: str
    evaluate: Callable[[dict, np.ndarray], np.ndarray]
    primitives: frozenset

    @property
    def classical_only(self):
        return not (self.primitives & SURROGATE_PRIMITIVES)


_EVALUATORS = {}


def register_evaluator(name, evaluate, primitives):
    _EVALUATORS[name] = Evaluator(name, evaluate, frozenset(primitives))
    return _EVALUATORS[name]


def get_evaluator(name):
    try:
        return _EVALUATORS[name]
    except KeyError:
        raise KeyError(f"no evaluator registered for hypothesis kind {name!r}") from None


@dataclass(frozen=True)
class Hypothesis:
    spec: str
    size: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "size", len(self.spec))

    @property
    def evaluator_id(self):
        return parse_spec(self.spec)[0]

    @property
    def evaluator(self):
        return get_evaluator(self.evaluator_id)

    def predict(self, xs):
        _, params = parse_spec(self.spec)
        return np.asarray(self.evaluator.evaluate(params, np.asarray(xs)), dtype=np.int64)

    def __call__(self, x):
        return int(self.predict(np.array([x]))[0])


def _constant_eval(params, xs):
    return np.full(len(xs), int(params["label"]), dtype=np.int64)


register_evaluator("constant", _constant_eval, primitives=())


def constant_hypothesis(label):
    return Hypothesis(format_spec("constant", label=label))


# --------------------------------------------------------------------------
# risk and trials


@dataclass(frozen=True)
class LearnerConfig:
    epsilon: float
    delta: float
    sample_budget: Optional[int] = None
    seed: int = 0
    # fixed training-set size; None means the finite-class bound
    sample_size: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if not 0 < self.delta < 0.5:
            raise ValueError(f"delta must lie in (0, 1/2), got {self.delta}")
        if self.sample_budget is not None and self.sample_budget < 0:
            raise ValueError("sample_budget must be nonnegative")


def finite_class_sample_size(epsilon, delta, class_size):
    """ceil((1/eps) * (ln|C| + ln(1/delta))), the consistent-learner bound."""
    return math.ceil((math.log(class_size) + math.log(1.0 / delta)) / epsilon)


def training_size(config, class_size):
    if config.sample_size is not None:
        return config.sample_size
    return finite_class_sample_size(config.epsilon, config.delta, class_size)


def error_rate(h, xs, labels):
    labels = np.asarray(labels)
    if labels.size == 0:
        raise EmptyTestSetError("test set is empty")
    if hasattr(h, "predict"):
        predicted = h.predict(xs)
    else:
        predicted = np.array([h(x.item()) for x in np.asarray(xs)])
    return float(np.count_nonzero(predicted != labels)) / labels.size


def empirical_error(h, test_set):
    """Fraction of ``test_set`` examples on which ``h`` disagrees with the label."""
    if not test_set:
        raise EmptyTestSetError("test set is empty")
    xs = np.array([e.input for e in test_set])
    labels = np.array([e.label for e in test_set])
    return error_rate(h, xs, labels)


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    seed: int
    samples_used: int
    empirical_error: Optional[float]
    success: bool
    wall_ms: Optional[float] = None

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def trial_seed(master_seed, trial_id):
    return int(np.random.SeedSequence([int(master_seed), int(trial_id)]).generate_state(1)[0])


def _run_one(trial_id, learner, concept_for, oracle_factory, config, test_size, exact_domain, timing):
    seed = trial_seed(config.seed, trial_id)
    train_seq, test_seq, concept_seq = np.random.SeedSequence(seed).spawn(3)
    concept = concept_for(np.random.default_rng(concept_seq))
    oracle = oracle_factory(concept, np.random.default_rng(train_seq), config.sample_budget)
    start = time.perf_counter()
    err = None
    try:
        h = learner(oracle, config)
        if exact_domain is not None:
            xs, labels = exact_domain(concept)
        else:
            test = oracle_factory(concept, np.random.default_rng(test_seq), None)
            xs, labels = test.draw_arrays(test_size)
        err = error_rate(h, xs, labels)
    except Exception:  # noqa: BLE001 - any learner failure is a failed trial
        err = None
    wall = (time.perf_counter() - start) * 1e3 if timing else None
    success = err is not None and err <= config.epsilon
    return TrialRecord(trial_id, seed, oracle.call_count, err, success, wall)


def run_pac_trials(
    learner,
    concept,
    oracle_factory,
    config,
    trials,
    test_size,
    exact_domain=None,
    jobs=1,
    timing=False,
):
    """Run independent PAC trials and return one :class:`TrialRecord` each.

    ``concept`` is either a fixed concept or a callable ``rng -> concept``
    drawing a fresh target per trial. ``oracle_factory(concept, rng, budget)``
    builds EX(c, D). When ``exact_domain(concept)`` is given it returns the
    whole (uniformly weighted) domain with true labels, and the error is
    computed exactly instead of on ``test_size`` fresh examples.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if test_size < 1:
        raise ValueError("test_size must be >= 1")
    concept_for = concept if callable(concept) else (lambda rng: concept)
    args = (learner, concept_for, oracle_factory, config, test_size, exact_domain, timing)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda k: _run_one(k, *args), range(trials)))
    return [_run_one(k, *args) for k in range(trials)]


def pac_trial(learner, concept, oracle_factory, config, trials, test_size, exact_domain=None, jobs=1):
    """Fraction of independent trials whose hypothesis has error <= epsilon."""
    records = run_pac_trials(learner, concept, oracle_factory, config, trials, test_size, exact_domain, jobs)
    return sum(r.success for r in records) / len(records)


def confidence_slack_ok(successes, trials, delta, level=0.95):
    """True when 1 - delta lies below the upper end of the two-sided Wilson interval."""
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence_level=level, method="wilson")
    return bool(ci.high >= 1.0 - delta)


# --------------------------------------------------------------------------
# delegating hypotheses

DEFAULT_MAX_SPEC_LENGTH = 1 << 20

_LEARNER_FACTORIES = {}


def register_learner(name, factory):
    """Register ``factory(**params) -> learner`` so delegating hypotheses can rebuild it."""
    _LEARNER_FACTORIES[name] = factory


def _encode_examples(examples):
    return ",".join(f"{e.input}:{e.label}" for e in examples)


def _decode_examples(text):
    out = []
    for item in text.split(","):
        x, _, label = item.partition(":")
        out.append(LabeledExample(int(x), int(label)))
    return out


@lru_cache(maxsize=256)
def _delegate_inner(spec):
    _, params = parse_spec(spec)
    params = dict(params)
    name = params.pop("learner")
    seed = int(params.pop("seed"))
    examples = _decode_examples(params.pop("data"))
    learner = _LEARNER_FACTORIES[name](**{k: int(v) for k, v in params.items()})
    config = LearnerConfig(0.25, 0.25, sample_budget=len(examples), seed=seed, sample_size=len(examples))
    return learner(replay_oracle(examples, description=f"delegate:{name}"), config)


def _delegate_eval(params, xs):
    spec = format_spec("delegate", **params)
    return _delegate_inner(spec).predict(xs)


register_evaluator("delegate", _delegate_eval, primitives=SURROGATE_PRIMITIVES | {"learner"})


def delegate_learner_to_hypothesis(learner, examples, seed=0, max_spec_length=DEFAULT_MAX_SPEC_LENGTH):
    """Hypothesis whose spec is the training set itself.

    Evaluating it re-runs ``learner`` on the embedded examples (with the
    embedded seed) and evaluates the resulting hypothesis, so a learner of any
    running time becomes a hypothesis enumerated by example sets. ``learner``
    must expose ``name`` and ``params`` and be registered with
    :func:`register_learner`.
    """
    if not examples:
        raise ValueError("delegating hypothesis needs at least one example")
    if learner.name not in _LEARNER_FACTORIES:
        raise KeyError(f"learner {learner.name!r} is not registered")
    spec = format_spec("delegate", learner=learner.name, **learner.params, seed=seed, data=_encode_examples(examples))
    if len(spec) > max_spec_length:
        raise SpecTooLargeError(f"delegating spec has {len(spec)} symbols, cap is {max_spec_length}")
    return Hypothesis(spec)
