from math import gcd

import numpy as np
import pytest

from learnsep import cuberoot as cr
from learnsep import dlp
from learnsep.errors import InconsistencyError, InversionFailure
from learnsep.heuristic import (
    BOTTOM,
    DistributionalProblem,
    HeuristicReport,
    heuristic_success_rate,
    learner_to_inverter,
    reduction_config,
    wrap_err_to_dont_know,
)
from learnsep.pac import LearnerConfig, constant_hypothesis

P11 = dlp.DlpInstance.from_params(11, 2)
LOG11 = {pow(2, e, 11): e for e in range(10)}
UNITS55 = [x for x in range(1, 55) if gcd(x, 55) == 1]


def parity_problem():
    return DistributionalProblem(lambda x: LOG11[x] % 2, lambda rng: int(rng.integers(1, 11)), 10)


def cube_problem():
    cubes = {pow(y, 3, 55): y for y in UNITS55}
    return DistributionalProblem(lambda x: cubes[x], lambda rng: pow(int(rng.choice(UNITS55)), 3, 55), 40)


def test_ground_truth_is_always_correct():
    prob = parity_problem()
    rep = heuristic_success_rate(prob.ground_truth, prob, 2000, 0)
    assert rep.correct_rate == 1.0 and rep.error_rate == 0.0


def test_constant_answer_on_parity():
    rep = heuristic_success_rate(lambda x: 0, parity_problem(), 10_000, 1)
    assert abs(rep.correct_rate - 0.5) <= 0.05


def planted(truth, fraction, seed=0):
    # wrong on a fixed pseudo-random subset of inputs of the given density
    def alg(x):
        r = np.random.default_rng([seed, int(x)]).random()
        return truth(x) + 1 if r < fraction else truth(x)

    return alg


def test_planted_fault_rate():
    prob = DistributionalProblem(lambda x: x, lambda rng: int(rng.integers(0, 10**9)))
    rep = heuristic_success_rate(planted(prob.ground_truth, 0.3), prob, 10_000, 2)
    assert abs(rep.correct_rate - 0.70) <= 0.02


def test_exceptions_count_as_errors():
    def crashy(x):
        raise RuntimeError("boom")

    rep = heuristic_success_rate(crashy, parity_problem(), 10, 0)
    assert rep.errors == 10 and rep.exceptions == 10
    assert "RuntimeError" in rep.diagnostics[0]


def test_randomized_majority():
    calls = iter(range(10**6))
    # answers correct on 3 of every 5 runs, so the majority is right
    prob = parity_problem()
    alg = lambda x: prob.ground_truth(x) if next(calls) % 5 < 3 else 7  # noqa: E731
    rep = heuristic_success_rate(alg, prob, 100, 0, randomized=True)
    assert rep.correct_rate == 1.0


def test_randomized_without_majority_is_dont_know():
    calls = iter(range(10**6))
    alg = lambda x: next(calls) % 3  # noqa: E731
    rep = heuristic_success_rate(alg, parity_problem(), 50, 0, randomized=True)
    assert rep.dont_know == 50


def test_wrap_true_inverse_unchanged():
    prob = cube_problem()
    wrapped = wrap_err_to_dont_know(prob.ground_truth, lambda y: pow(y, 3, 55))
    rep = heuristic_success_rate(wrapped, prob, 1000, 0)
    assert rep.correct_rate == 1.0 and rep.dont_know_rate == 0.0


def test_wrap_always_one():
    wrapped = wrap_err_to_dont_know(lambda x: 1, lambda y: pow(y, 3, 55))
    for y in UNITS55:
        x = pow(y, 3, 55)
        assert wrapped(x) == (1 if x == 1 else BOTTOM)


def test_wrap_planted_fault():
    prob = DistributionalProblem(lambda x: x, lambda rng: int(rng.integers(0, 10**9)))
    wrapped = wrap_err_to_dont_know(planted(prob.ground_truth, 0.3, seed=5), lambda y: y)
    rep = heuristic_success_rate(wrapped, prob, 20_000, 3)
    assert rep.error_rate == 0.0
    assert abs(rep.dont_know_rate - 0.30) <= 0.02


def test_wrap_swallows_crashes():
    def crash(x):
        raise ZeroDivisionError

    assert wrap_err_to_dont_know(crash, lambda y: y)(3) is BOTTOM


def test_report_serialisation_and_merge():
    a = HeuristicReport(10, 7, 1, 2)
    b = HeuristicReport(10, 10, 0, 0)
    m = a.merge(b)
    assert (m.samples, m.correct, m.dont_know) == (20, 17, 2)
    assert '"correct_rate": 0.7' in a.to_json()
    assert "dont_know_rate" in a.table()


def test_bottom_is_singleton():
    import pickle

    assert pickle.loads(pickle.dumps(BOTTOM)) is BOTTOM
    assert repr(BOTTOM) == "BOTTOM"


def oracle_learner(inst):
    def learn(oracle, config):
        i = oracle.concept
        return dlp.interval_hypothesis(i, inst.p, inst.a)

    return learn


def test_reduction_config():
    d = dlp.decomposition(P11)
    cfg = reduction_config(LearnerConfig(0.06, 0.1, sample_budget=9), d)
    assert cfg.epsilon == pytest.approx(0.01)
    assert cfg.sample_budget is None


def test_inverter_with_perfect_learner():
    inst = dlp.DlpInstance.generate(12, 2)
    d = dlp.decomposition(inst)
    cfg = LearnerConfig(0.1, 0.1)
    for y in range(0, inst.order, 37):
        x = pow(inst.a, y, inst.p)
        assert learner_to_inverter(oracle_learner(inst), d, x, cfg, rng=y) == y


def test_inverter_with_constant_learner_fails():
    d = dlp.decomposition(P11)
    const = lambda o, c: constant_hypothesis(1)  # noqa: E731
    with pytest.raises(InconsistencyError):
        learner_to_inverter(const, d, 8, LearnerConfig(0.1, 0.1), rng=0)
    with pytest.raises(InversionFailure):
        learner_to_inverter(const, d, 8, LearnerConfig(0.1, 0.1), rng=0, attempts=3)


def test_inverter_surrogate_learner_small():
    inst = dlp.DlpInstance.generate(10, 1)
    d = dlp.decomposition(inst)
    cfg = LearnerConfig(0.05, 0.05)
    hits = 0
    for k, y in enumerate(np.random.default_rng(0).integers(0, inst.order, size=20)):
        x = pow(inst.a, int(y), inst.p)
        try:
            hits += learner_to_inverter(d.quantum_learner, d, x, cfg, rng=k, attempts=5) == y
        except InversionFailure:
            pass
    assert hits >= 18


def test_inverter_cuberoot_perfect_learner():
    inst = cr.RsaInstance.from_factors(5, 11)
    d = cr.decomposition(inst)

    def learn(oracle, config):
        i = oracle.concept
        return cr.RsaHypothesis(27, i, 55).hypothesis

    for y in UNITS55:
        assert learner_to_inverter(learn, d, pow(y, 3, 55), LearnerConfig(0.1, 0.1), rng=y, attempts=2) == y
