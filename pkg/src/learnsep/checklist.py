"""Executable separation checklists.

A :class:`Decomposition` bundles everything needed to audit a concept class
written as ``c(x) = f(g^{-1}(x))``. Each ``check_*`` function turns one
criterion into a :class:`CriterionStatus`; complexity-theoretic hardness is
never checked, only recorded as an ``AssertedAssumption``.
:func:`compile_report` turns the statuses into a :class:`SeparationReport`.
"""
import json
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Optional

import numpy as np

from .errors import IncompleteReportError, LearnSepError
from .pac import ExampleOracle, Hypothesis, confidence_slack_ok, run_pac_trials
from .trace import SURROGATE_PRIMITIVES, record_primitives


class CriterionId(str, Enum):
    T1_C1 = "T1.C1"
    T1_C2_HARDNESS = "T1.C2.inversion-hardness"
    T1_C2_RECONSTRUCTION = "T1.C2.reconstruction"
    T1_C3_QQ = "T1.C3.QQ"
    T1_C3_QC = "T1.C3.QC"
    T2_C1 = "T2.C1"
    T2_C2 = "T2.C2"
    T2_C3 = "T2.C3"


class Status(str, Enum):
    VERIFIED = "Verified"
    ASSERTED = "AssertedAssumption"
    FAILED = "Failed"


ASSUMPTION_ONLY = frozenset({CriterionId.T1_C2_HARDNESS, CriterionId.T2_C1})


@dataclass(frozen=True)
class CriterionStatus:
    criterion_id: CriterionId
    status: Status
    evidence: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "criterion_id", CriterionId(self.criterion_id))
        object.__setattr__(self, "status", Status(self.status))
        if self.criterion_id in ASSUMPTION_ONLY and self.status is not Status.ASSERTED:
            raise ValueError(f"{self.criterion_id.value} is a complexity assumption and can only be asserted")

    def to_dict(self):
        return {"id": self.criterion_id.value, "status": self.status.value, "evidence": self.evidence}


@dataclass(frozen=True)
class SeparationReport:
    problem: str
    criteria: tuple
    claimed_separation: str
    assumptions: tuple

    def to_dict(self):
        return {
            "problem": self.problem,
            "criteria": [c.to_dict() for c in self.criteria],
            "claimed_separation": self.claimed_separation,
            "assumptions": list(self.assumptions),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def table(self):
        lines = [f"problem: {self.problem}", f"{'criterion':<28}{'status':<20}evidence", "-" * 72]
        for c in self.criteria:
            summary = c.evidence.get("summary", "")
            lines.append(f"{c.criterion_id.value:<28}{c.status.value:<20}{summary}")
        lines.append("-" * 72)
        lines.append(f"claimed separation: {self.claimed_separation}")
        for text in self.assumptions:
            lines.append(f"  assuming: {text}")
        return "\n".join(lines)


@dataclass
class Decomposition:
    """A concept class factored as c_j(x) = f_j(g^{-1}(x)).

    Batch callables take and return int64 arrays. ``concept_eval`` is the
    concept class's own definition and is only used as ground truth;
    ``reconstructor_b(x, ask)`` is the algorithm B, calling ``ask(j)`` for
    the label of concept j at x (so C'(x) is whatever B asks and X'(x) =
    {x}).
    """

    name: str
    family_f: Callable
    g_forward: Callable
    g_inverse_surrogate: Callable
    concept_eval: Callable
    reconstructor_b: Callable
    query_budget: int
    example_gen: Callable
    base_distribution: Callable
    concept_sampler: Callable
    class_size: int
    hardness_assumption: str
    base_support: Optional[Callable] = None
    domain: Optional[Callable] = None
    rerandomize: Optional[Callable] = None
    quantum_learner: Any = None
    family_learner: Any = None
    label_values: tuple = (-1, 1)
    description: str = ""

    def oracle(self, j, rng=None, budget=None):
        return ExampleOracle(
            lambda r, m: self.example_gen(j, r, m),
            rng=rng,
            budget=budget,
            description=f"EX(c_{j}, D^g) {self.name}",
            concept=j,
        )

    def family_oracle(self, j, rng=None, budget=None):
        def sampler(r, m):
            ys = self.base_distribution(r, m)
            return ys, self.family_f(j, ys)

        return ExampleOracle(sampler, rng=rng, budget=budget, description=f"EX(f_{j}, D) {self.name}", concept=j)

    def exact_concept_labels(self, j):
        xs = self.domain()
        return xs, self.concept_eval(j, xs)

    def exact_family_labels(self, j):
        ys = self.base_support()
        return ys, self.family_f(j, ys)


def with_sabotaged_b(d, offset=1):
    """Copy of ``d`` whose reconstruction is off by ``offset``."""
    b = d.reconstructor_b
    return replace(d, reconstructor_b=lambda x, ask: b(x, ask) + offset, name=d.name + "-sabotaged")


def _rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def decomposition_identity(d, samples, rng, concepts=8):
    """Count points where concept_eval(j, g(y)) != f_j(y) on sampled (j, y)."""
    rng = _rng(rng)
    mismatches = checked = 0
    for _ in range(concepts):
        j = d.concept_sampler(rng)
        ys = d.base_support() if d.base_support is not None else d.base_distribution(rng, samples)
        bad = d.concept_eval(j, d.g_forward(ys)) != d.family_f(j, ys)
        mismatches += int(np.count_nonzero(bad))
        checked += ys.size
    return mismatches, checked


def check_example_generation(d, time_budget, samples, rng=None, concepts=4, histogram_limit=10_000):
    """Check that labelled examples come out fast and agree with the concept."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = _rng(rng)
    per = -(-samples // concepts)
    mismatches = generated = 0
    elapsed = 0.0
    try:
        for _ in range(concepts):
            j = d.concept_sampler(rng)
            start = time.perf_counter()
            xs, labels = d.example_gen(j, rng, per)
            elapsed += time.perf_counter() - start
            generated += len(xs)
            mismatches += int(np.count_nonzero(d.concept_eval(j, xs) != labels))
    except LearnSepError as exc:
        return CriterionStatus(CriterionId.T1_C1, Status.FAILED, {"summary": f"generator raised {exc}"})
    evidence = {
        "samples": generated,
        "label_mismatches": mismatches,
        "within_time_budget": elapsed <= time_budget,
        "time_budget_s": time_budget,
    }
    ok = mismatches == 0 and elapsed <= time_budget
    if d.domain is not None and d.base_support is not None:
        domain = d.domain()
        if domain.size <= histogram_limit:
            image = d.g_forward(d.base_support())
            # exact push-forward of the uniform base distribution vs uniform on the domain
            idx = np.searchsorted(domain, image)
            inside = (idx < domain.size) & (domain[np.minimum(idx, domain.size - 1)] == image)
            counts = np.bincount(idx[inside], minlength=domain.size)
            pushed = counts / image.size
            tv = 0.5 * (np.abs(pushed - 1.0 / domain.size).sum() + (~inside).sum() / image.size)
            evidence["pushforward_tv"] = float(tv)
            ok = ok and tv == 0.0
    if mismatches:
        evidence["summary"] = f"{mismatches} of {generated} generated labels disagree with the concept"
    elif not evidence["within_time_budget"]:
        evidence["summary"] = f"generation exceeded the {time_budget}s budget"
    elif not ok:
        evidence["summary"] = f"push-forward differs from the target distribution (TV {evidence['pushforward_tv']})"
    else:
        evidence["summary"] = f"{generated} examples, labels exact" + (
            ", push-forward TV 0" if "pushforward_tv" in evidence else ""
        )
    return CriterionStatus(CriterionId.T1_C1, Status.VERIFIED if ok else Status.FAILED, evidence)


def check_reconstruction(d, trials, rng=None, criterion_id=CriterionId.T1_C2_RECONSTRUCTION):
    """B recovers g^{-1}(x) from true concept labels within the query budget.

    When ``trials`` covers the whole (enumerable) domain every point is
    checked; otherwise targets are x = g(y) for sampled y.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = _rng(rng)
    if d.domain is not None and trials >= d.domain().size:
        targets = d.domain()
        preimages = None
    else:
        preimages = d.base_distribution(rng, trials)
        targets = d.g_forward(preimages)
    worst_queries = 0
    for k, x in enumerate(targets):
        x = int(x)
        asked = [0]

        def ask(j):
            asked[0] += 1
            return int(d.concept_eval(j, np.array([x]))[0])

        try:
            y = d.reconstructor_b(x, ask)
        except LearnSepError as exc:
            return CriterionStatus(criterion_id, Status.FAILED, {"summary": f"B raised on x={x}: {exc}"})
        worst_queries = max(worst_queries, asked[0])
        round_trip = int(d.g_forward(np.array([y]))[0]) == x if 0 <= y else False
        if not round_trip or (preimages is not None and y != int(preimages[k])):
            return CriterionStatus(
                criterion_id, Status.FAILED, {"summary": f"B returned {y} for x={x}, not a preimage", "target": x}
            )
        if asked[0] > d.query_budget:
            return CriterionStatus(
                criterion_id,
                Status.FAILED,
                {"summary": f"B used {asked[0]} queries on x={x}, budget {d.query_budget}", "target": x},
            )
    evidence = {
        "targets": len(targets),
        "max_queries": worst_queries,
        "query_budget": d.query_budget,
        "summary": f"{len(targets)} targets inverted, at most {worst_queries}/{d.query_budget} queries",
    }
    return CriterionStatus(criterion_id, Status.VERIFIED, evidence)


def _audit_evaluator(h, inputs):
    """Run ``h`` under instrumentation; return (declared classical, observed surrogate calls, honest)."""
    ev = h.evaluator
    with record_primitives() as calls:
        h.predict(inputs)
    used = {name for name, count in calls.items() if count}
    surrogates_used = used & SURROGATE_PRIMITIVES
    honest = surrogates_used <= ev.primitives
    return ev.classical_only, sorted(surrogates_used), honest


def check_learnability(d, learner, config, trials, test_size=2000, family=False, jobs=1):
    """Empirical PAC check of a learner, classified by its hypotheses' evaluator.

    With ``family=False`` the learner is trained on examples of the concepts
    c_j and the result is tagged T1.C3.QC when every returned hypothesis is
    classically evaluatable, T1.C3.QQ otherwise. With ``family=True`` it is
    trained on (y, f_j(y)) with y from the base distribution (T2.C2).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    captured = []

    def capturing(oracle, cfg):
        h = learner(oracle, cfg)
        captured.append(h)
        return h

    if family:
        factory = lambda j, rng, budget: d.family_oracle(j, rng, budget)  # noqa: E731
        exact = d.exact_family_labels if d.base_support is not None else None
    else:
        factory = lambda j, rng, budget: d.oracle(j, rng, budget)  # noqa: E731
        exact = d.exact_concept_labels if d.domain is not None else None
    records = run_pac_trials(capturing, d.concept_sampler, factory, config, trials, test_size, exact, jobs)
    successes = sum(r.success for r in records)
    frequency = successes / trials

    # hypotheses without a registered evaluator cannot be audited at all
    auditable = all(isinstance(h, Hypothesis) for h in captured)
    if not auditable:
        captured = []
    classical = bool(captured)
    honest = True
    surrogates_seen = set()
    probe_rng = np.random.default_rng(config.seed)
    for h in sorted(captured, key=lambda h: h.spec)[:5]:
        inputs = d.base_distribution(probe_rng, 16) if family else d.example_gen(1, probe_rng, 16)[0]
        is_classical, used, ok = _audit_evaluator(h, inputs)
        classical = classical and is_classical
        honest = honest and ok
        surrogates_seen.update(used)
    classical = classical and all(h.evaluator.classical_only for h in captured)

    if family:
        cid = CriterionId.T2_C2
    else:
        cid = CriterionId.T1_C3_QC if classical else CriterionId.T1_C3_QQ
    passed = confidence_slack_ok(successes, trials, config.delta) and honest and bool(captured)
    evidence = {
        "trials": trials,
        "successes": successes,
        "success_frequency": frequency,
        "epsilon": config.epsilon,
        "delta": config.delta,
        "evaluators": sorted({h.evaluator_id for h in captured}),
        "classical_evaluator": classical,
        "surrogates_called_by_hypotheses": sorted(surrogates_seen),
        "summary": f"success {successes}/{trials} at eps={config.epsilon}; "
        + ("classical hypothesis evaluator" if classical else "surrogate-assisted hypothesis evaluator"),
    }
    if not auditable:
        evidence["summary"] = "learner returned hypotheses without a registered evaluator"
    elif not honest:
        evidence["summary"] = "hypothesis evaluator called a surrogate it did not declare"
    return CriterionStatus(cid, Status.VERIFIED if passed else Status.FAILED, evidence)


def ledger_assumptions(d, theorem):
    """Complexity assumptions the claim rests on; always AssertedAssumption."""
    if theorem == 1:
        return [
            CriterionStatus(
                CriterionId.T1_C2_HARDNESS,
                Status.ASSERTED,
                {"assumption": d.hardness_assumption, "summary": "asserted, not testable at finite size"},
            )
        ]
    if theorem == 2:
        text = (
            f"HeurP/poly non-membership ({d.name}): the inverse of g lies in BQP but outside HeurP/poly "
            f"with respect to the push-forward distribution g(D_n)."
        )
        return [
            CriterionStatus(
                CriterionId.T2_C1, Status.ASSERTED, {"assumption": text, "summary": "asserted, not testable"}
            )
        ]
    raise ValueError(f"theorem must be 1 or 2, got {theorem}")


_T1_REQUIRED = (CriterionId.T1_C1, CriterionId.T1_C2_HARDNESS, CriterionId.T1_C2_RECONSTRUCTION)
_T2_REQUIRED = (CriterionId.T2_C1, CriterionId.T2_C2, CriterionId.T2_C3)


def compile_report(problem_name, statuses):
    """Assemble statuses into a report and decide the claimed separation.

    The T1 claim needs T1.C1, T1.C2.* and one of T1.C3.QC or T1.C3.QQ. The T2 claim
    needs T2.C1..C3. Any Failed criterion, or a claim without at least one
    asserted assumption, yields ``none``.
    """
    statuses = list(statuses)
    by_id = {}
    for s in statuses:
        by_id.setdefault(s.criterion_id, s)
    ids = set(by_id)
    t1 = {i for i in ids if i.value.startswith("T1")}
    t2 = {i for i in ids if i.value.startswith("T2")}
    if not t1 and not t2:
        raise IncompleteReportError("no criteria given")
    if t1:
        missing = [i.value for i in _T1_REQUIRED if i not in ids]
        if not ({CriterionId.T1_C3_QC, CriterionId.T1_C3_QQ} & ids):
            missing.append("T1.C3.QC|T1.C3.QQ")
        if missing:
            raise IncompleteReportError(f"missing T1 criteria: {missing}")
    if t2:
        missing = [i.value for i in _T2_REQUIRED if i not in ids]
        if missing:
            raise IncompleteReportError(f"missing T2 criteria: {missing}")

    def verified(i):
        return i in by_id and by_id[i].status is Status.VERIFIED

    def asserted(i):
        return i in by_id and by_id[i].status is Status.ASSERTED

    any_failed = any(s.status is Status.FAILED for s in statuses)
    claim = "none"
    if not any_failed:
        t1_base = t1 and verified(CriterionId.T1_C1) and verified(CriterionId.T1_C2_RECONSTRUCTION)
        t1_base = t1_base and asserted(CriterionId.T1_C2_HARDNESS)
        t2_ok = t2 and asserted(CriterionId.T2_C1) and verified(CriterionId.T2_C2) and verified(CriterionId.T2_C3)
        if t1_base and verified(CriterionId.T1_C3_QC):
            claim = "CC/QC"
        elif (t1_base and verified(CriterionId.T1_C3_QQ)) or t2_ok:
            claim = "CC/QQ"
    assumptions = tuple(s.evidence["assumption"] for s in statuses if s.status is Status.ASSERTED)
    if not assumptions:
        claim = "none"
    return SeparationReport(problem_name, tuple(statuses), claim, assumptions)


def run_checklist(
    d,
    config,
    theorem=1,
    learner=None,
    seed=0,
    generation_samples=2000,
    time_budget=10.0,
    reconstruction_trials=1000,
    learning_trials=20,
    test_size=2000,
    jobs=1,
):
    """Full criteria sweep for one theorem (1, 2 or "both")."""
    rng = np.random.default_rng(seed)
    mismatches, checked = decomposition_identity(d, 256, rng)
    theorems = (1, 2) if theorem == "both" else (int(theorem),)
    if mismatches:
        note = {"summary": f"decomposition identity fails on {mismatches}/{checked} points; nothing else run"}
        statuses = []
        if 1 in theorems:
            statuses += [CriterionStatus(CriterionId.T1_C1, Status.FAILED, note)]
            statuses += ledger_assumptions(d, 1)
            statuses += [
                CriterionStatus(CriterionId.T1_C2_RECONSTRUCTION, Status.FAILED, note),
                CriterionStatus(CriterionId.T1_C3_QQ, Status.FAILED, note),
            ]
        if 2 in theorems:
            statuses += ledger_assumptions(d, 2)
            statuses += [
                CriterionStatus(CriterionId.T2_C2, Status.FAILED, note),
                CriterionStatus(CriterionId.T2_C3, Status.FAILED, note),
            ]
        return compile_report(d.name, statuses)

    learner = learner if learner is not None else d.quantum_learner
    statuses = []
    if 1 in theorems:
        statuses.append(check_example_generation(d, time_budget, generation_samples, rng))
        statuses += ledger_assumptions(d, 1)
        statuses.append(check_reconstruction(d, reconstruction_trials, rng))
        statuses.append(check_learnability(d, learner, config, learning_trials, test_size, jobs=jobs))
    if 2 in theorems:
        statuses += ledger_assumptions(d, 2)
        statuses.append(
            check_learnability(d, d.family_learner, config, learning_trials, test_size, family=True, jobs=jobs)
        )
        statuses.append(check_reconstruction(d, reconstruction_trials, rng, criterion_id=CriterionId.T2_C3))
    return compile_report(d.name, statuses)
