"""Command-line front end: ``learnsep gen|run|checklist|power-of-data``.

Exit codes: 0 the experiment came out positive (threshold met, separation
claimed), 1 it came out negative, 2 invalid arguments or configuration,
3 missing instance or unwritable output.

Settings are resolved in order: built-in defaults, then the ``--config``
JSON file, then flags given explicitly on the command line. Every output
embeds the resolved settings; wall-clock times are only recorded with
``--timing`` so that reruns stay byte-identical.

CSV columns
    run:            trial_id, seed, samples_used, empirical_error, success, wall_ms
    power-of-data:  circuit, theta, simulated, predicted, abs_error
Lines starting with ``#`` above the header carry the settings.
"""
import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import checklist, cuberoot, dlp, power_of_data
from .errors import LearnSepError
from .numtheory import SEMIPRIME_MIN_BITS
from .pac import LearnerConfig, constant_hypothesis, confidence_slack_ok, run_pac_trials

EXIT_OK, EXIT_NEGATIVE, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

DEFAULTS = {
    "bits": None,
    "qubits": 3,
    "epsilon": 0.05,
    "delta": 0.05,
    "trials": 20,
    "seed": 0,
    "jobs": 1,
    "out": None,
    "sample_budget": None,
    "sample_size": None,
    "test_size": 2000,
    "instance": None,
    "timing": False,
    "theorem": "1",
    "learner": "surrogate",
    "sabotage_b": False,
}
DEFAULT_BITS = {"dlp": 10, "cuberoot": 16}
BITS_RANGE = {"dlp": (3, 62), "cuberoot": (SEMIPRIME_MIN_BITS, 62)}
POD_TOLERANCE = 1e-8


class UsageError(Exception):
    pass


class MissingInstance(Exception):
    pass


def _parser():
    p = argparse.ArgumentParser(prog="learnsep", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, problems):
        sp.add_argument("problem", choices=problems)
        sp.add_argument("--config", help="JSON file of settings; explicit flags override it")
        sp.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        sp.add_argument("--out", default=argparse.SUPPRESS)
        sp.add_argument("--bits", type=int, default=argparse.SUPPRESS)

    g = sub.add_parser("gen", help="generate an instance")
    common(g, ["dlp", "cuberoot"])

    def experiment(sp):
        sp.add_argument("--instance", default=argparse.SUPPRESS, help="public instance JSON from `gen`")
        sp.add_argument("--qubits", type=int, default=argparse.SUPPRESS)
        sp.add_argument("--epsilon", type=float, default=argparse.SUPPRESS)
        sp.add_argument("--delta", type=float, default=argparse.SUPPRESS)
        sp.add_argument("--trials", type=int, default=argparse.SUPPRESS)
        sp.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
        sp.add_argument("--sample-budget", dest="sample_budget", type=int, default=argparse.SUPPRESS)
        sp.add_argument("--sample-size", dest="sample_size", type=int, default=argparse.SUPPRESS)
        sp.add_argument("--test-size", dest="test_size", type=int, default=argparse.SUPPRESS)
        sp.add_argument("--timing", action="store_true", default=argparse.SUPPRESS)

    r = sub.add_parser("run", help="PAC trials (dlp, cuberoot) or the power-of-data fit")
    common(r, ["dlp", "cuberoot", "power-of-data"])
    experiment(r)
    r.add_argument("--learner", choices=["surrogate", "constant"], default=argparse.SUPPRESS)

    c = sub.add_parser("checklist", help="criteria sweep and separation report")
    common(c, ["dlp", "cuberoot"])
    experiment(c)
    c.add_argument("--learner", choices=["surrogate", "constant"], default=argparse.SUPPRESS)
    c.add_argument("--theorem", choices=["1", "2", "both"], default=argparse.SUPPRESS)
    c.add_argument("--sabotage-b", dest="sabotage_b", action="store_true", default=argparse.SUPPRESS)

    d = sub.add_parser("power-of-data", help="cosine-fit demo, CSV output")
    d.add_argument("--config")
    for flag, typ in (("--qubits", int), ("--trials", int), ("--seed", int)):
        d.add_argument(flag, type=typ, default=argparse.SUPPRESS)
    d.add_argument("--out", default=argparse.SUPPRESS)
    return p


def resolve(ns):
    """defaults < config file < explicit flags."""
    settings = dict(DEFAULTS)
    if getattr(ns, "config", None):
        try:
            loaded = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError(f"config {ns.config} must hold a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        settings.update(loaded)
    settings.update({k: v for k, v in vars(ns).items() if k in DEFAULTS})
    problem = getattr(ns, "problem", "power-of-data")
    settings["problem"] = problem
    validate(settings)
    return settings


def validate(s):
    problem = s["problem"]
    if problem in BITS_RANGE:
        if s["bits"] is None:
            s["bits"] = DEFAULT_BITS[problem]
        lo, hi = BITS_RANGE[problem]
        if not lo <= int(s["bits"]) <= hi:
            raise UsageError(f"--bits for {problem} must lie in [{lo}, {hi}], got {s['bits']}")
    else:
        s["bits"] = None
        if not 1 <= int(s["qubits"]) <= power_of_data.MAX_QUBITS:
            raise UsageError(f"--qubits must lie in [1, {power_of_data.MAX_QUBITS}], got {s['qubits']}")
    for key in ("epsilon", "delta"):
        if not 0 < float(s[key]) < 0.5:
            raise UsageError(f"--{key} must lie in (0, 0.5), got {s[key]}")
    for key in ("trials", "jobs", "test_size"):
        if int(s[key]) < 1:
            raise UsageError(f"--{key.replace('_', '-')} must be >= 1, got {s[key]}")
    for key in ("sample_budget", "sample_size"):
        if s[key] is not None and int(s[key]) < 0:
            raise UsageError(f"--{key.replace('_', '-')} must be >= 0, got {s[key]}")


def _echo_settings(s):
    keep = dict(s)
    keep.pop("out", None)
    return keep


def _write(path, text):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise MissingInstance(f"cannot write {path}: {exc}") from exc


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# --------------------------------------------------------------------------
# instances


def _generate(problem, bits, seed):
    if problem == "dlp":
        return dlp.DlpInstance.generate(bits, seed)
    return cuberoot.RsaInstance.generate(bits, seed)


def _load_instance(problem, s):
    path = s["instance"]
    if path is None:
        return _generate(problem, int(s["bits"]), int(s["seed"]))
    path = Path(path)
    if not path.is_file():
        raise MissingInstance(f"instance file {path} not found")
    text = path.read_text()
    if problem == "dlp":
        return dlp.DlpInstance.from_json(text)
    secrets = path.with_name(path.stem + ".secrets.json")
    return cuberoot.RsaInstance.from_json(text, secrets.read_text() if secrets.is_file() else None)


def cmd_gen(s):
    inst = _generate(s["problem"], int(s["bits"]), int(s["seed"]))
    config = {"problem": s["problem"], "bits": int(s["bits"]), "seed": int(s["seed"])}
    out = Path(s["out"] or f"{s['problem']}-{s['bits']}b-seed{s['seed']}.json")
    if s["problem"] == "dlp":
        public = json.loads(inst.to_json())
    else:
        public = json.loads(inst.public_json())
        secrets = json.loads(inst.secrets_json())
        _write(out.with_name(out.stem + ".secrets.json"), _dump({**secrets, "config": config}))
    _write(out, _dump({**public, "config": config}))
    print(f"wrote {out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# run


def _constant_learner(label):
    return lambda oracle, config: constant_hypothesis(label)


def _pac_setup(problem, inst, s):
    d = dlp.decomposition(inst) if problem == "dlp" else cuberoot.decomposition(inst)
    if s["learner"] == "constant":
        return d, _constant_learner(d.label_values[-1])
    return d, d.quantum_learner


def _learner_config(s):
    return LearnerConfig(
        float(s["epsilon"]),
        float(s["delta"]),
        sample_budget=s["sample_budget"],
        seed=int(s["seed"]),
        sample_size=s["sample_size"],
    )


def cmd_run(s):
    problem = s["problem"]
    if problem == "power-of-data":
        return cmd_power_of_data(s)
    inst = _load_instance(problem, s)
    config = _learner_config(s)
    d, learner = _pac_setup(problem, inst, s)
    exact = d.exact_concept_labels if d.domain is not None else None
    records = run_pac_trials(
        learner,
        d.concept_sampler,
        lambda j, rng, budget: d.oracle(j, rng, budget),
        config,
        int(s["trials"]),
        int(s["test_size"]),
        exact,
        jobs=int(s["jobs"]),
        timing=bool(s["timing"]),
    )
    successes = sum(r.success for r in records)
    errors = [r.empirical_error for r in records if r.empirical_error is not None]
    passed = confidence_slack_ok(successes, len(records), config.delta)
    summary = {
        "config": _echo_settings(s),
        "instance": json.loads(inst.to_json() if problem == "dlp" else inst.public_json()),
        "trials": len(records),
        "successes": successes,
        "success_frequency": successes / len(records),
        "mean_error": float(np.mean(errors)) if errors else None,
        "mean_samples": float(np.mean([r.samples_used for r in records])),
        "wall_ms": float(sum(r.wall_ms for r in records)) if s["timing"] else None,
        "threshold_met": bool(passed),
    }
    buf = io.StringIO()
    buf.write(f"# config: {json.dumps(_echo_settings(s), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial_id", "seed", "samples_used", "empirical_error", "success", "wall_ms"])
    for r in records:
        err = "" if r.empirical_error is None else repr(r.empirical_error)
        wall = "" if r.wall_ms is None else f"{r.wall_ms:.3f}"
        w.writerow([r.trial_id, r.seed, r.samples_used, err, int(r.success), wall])
    out = Path(s["out"] or f"run-{problem}")
    _write(out / "trials.csv", buf.getvalue())
    _write(out / "summary.json", _dump(summary))
    print(
        f"{problem}: success {successes}/{len(records)}, mean error "
        f"{summary['mean_error'] if errors else 'n/a'}, threshold {'met' if passed else 'NOT met'}"
    )
    return EXIT_OK if passed else EXIT_NEGATIVE


# --------------------------------------------------------------------------
# checklist


def cmd_checklist(s):
    problem = s["problem"]
    inst = _load_instance(problem, s)
    d, learner = _pac_setup(problem, inst, s)
    if s["sabotage_b"]:
        d = checklist.with_sabotaged_b(d)
    theorem = s["theorem"] if s["theorem"] == "both" else int(s["theorem"])
    report = checklist.run_checklist(
        d,
        _learner_config(s),
        theorem=theorem,
        learner=learner,
        seed=int(s["seed"]),
        learning_trials=int(s["trials"]),
        test_size=int(s["test_size"]),
        jobs=int(s["jobs"]),
    )
    out = Path(s["out"] or f"checklist-{problem}")
    settings = json.dumps(_echo_settings(s), sort_keys=True)
    _write(out / "report.json", report.to_json())
    _write(out / "report.txt", f"config: {settings}\n{report.table()}\n")
    _write(out / "run.json", _dump({"config": _echo_settings(s), "claimed_separation": report.claimed_separation}))
    print(report.table())
    return EXIT_OK if report.claimed_separation != "none" else EXIT_NEGATIVE


# --------------------------------------------------------------------------
# power of data


def cmd_power_of_data(s):
    result = power_of_data.run_demo(seed=int(s["seed"]), circuits=int(s["trials"]), qubits=int(s["qubits"]))
    settings = {k: s[k] for k in ("problem", "qubits", "trials", "seed")}
    text = result.to_csv([f"config: {json.dumps(settings, sort_keys=True)}"])
    out = Path(s["out"] or "power-of-data.csv")
    _write(out, text)
    ok = result.max_abs_error <= POD_TOLERANCE
    print(f"{len(result.models)} circuits, max |simulated - predicted| = {result.max_abs_error:.3e}")
    return EXIT_OK if ok else EXIT_NEGATIVE


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "checklist": cmd_checklist, "power-of-data": cmd_power_of_data}


def main(argv=None):
    ns = _parser().parse_args(argv)
    try:
        s = resolve(ns)
        return COMMANDS[ns.command](s)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingInstance as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LearnSepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
