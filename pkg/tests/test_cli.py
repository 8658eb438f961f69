import csv
import json
import subprocess
import sys

import pytest

from learnsep import numtheory as nt
from learnsep.cli import main


def read_csv(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


def test_gen_dlp(tmp_path):
    out = tmp_path / "dlp.json"
    assert main(["gen", "dlp", "--bits", "20", "--seed", "7", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    p, a = data["p"], data["a"]
    assert p.bit_length() == 20 and nt.is_prime(p) and nt.is_prime((p - 1) // 2)
    assert nt.PrimeModulus(p).is_generator(a)
    assert data["config"] == {"bits": 20, "problem": "dlp", "seed": 7}


def test_gen_cuberoot_writes_secrets(tmp_path):
    out = tmp_path / "rsa.json"
    assert main(["gen", "cuberoot", "--bits", "24", "--seed", "1", "--out", str(out)]) == 0
    pub = json.loads(out.read_text())
    sec = json.loads((tmp_path / "rsa.secrets.json").read_text())
    assert "d_star" not in pub and "p" not in pub
    assert sec["p"] * sec["q"] == pub["N"] and 3 * sec["d_star"] % ((sec["p"] - 1) * (sec["q"] - 1)) == 1


def test_gen_cuberoot_range_floor(tmp_path, capsys):
    assert main(["gen", "cuberoot", "--bits", "4", "--out", str(tmp_path / "x.json")]) == 2
    assert "must lie in" in capsys.readouterr().err


def test_gen_is_idempotent(tmp_path):
    for name in ("a.json", "b.json"):
        assert main(["gen", "cuberoot", "--bits", "30", "--seed", "5", "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert (tmp_path / "a.secrets.json").read_bytes() == (tmp_path / "b.secrets.json").read_bytes()


def test_run_dlp_from_instance(tmp_path):
    inst = tmp_path / "dlp.json"
    main(["gen", "dlp", "--bits", "14", "--seed", "2", "--out", str(inst)])
    out = tmp_path / "run"
    code = main(["run", "dlp", "--instance", str(inst), "--trials", "10", "--seed", "3", "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["success_frequency"] >= 0.9
    assert summary["wall_ms"] is None
    assert summary["config"]["seed"] == 3
    assert summary["instance"]["p"] == json.loads(inst.read_text())["p"]
    rows = read_csv(out / "trials.csv")
    assert [int(r["trial_id"]) for r in rows] == list(range(10))
    assert (out / "trials.csv").read_text().startswith("# config: ")


def test_run_starved_learner(tmp_path):
    code = main(["run", "dlp", "--bits", "12", "--sample-budget", "0", "--trials", "5", "--out", str(tmp_path)])
    assert code == 1


def test_run_constant_learner_fails(tmp_path):
    assert main(["run", "cuberoot", "--learner", "constant", "--trials", "5", "--out", str(tmp_path)]) == 1


def test_run_missing_instance(tmp_path):
    assert main(["run", "dlp", "--instance", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 3


def test_run_cuberoot_public_only_instance(tmp_path):
    inst = tmp_path / "rsa.json"
    main(["gen", "cuberoot", "--bits", "28", "--seed", "4", "--out", str(inst)])
    (tmp_path / "rsa.secrets.json").unlink()
    code = main(["run", "cuberoot", "--instance", str(inst), "--trials", "5", "--sample-size", "30", "--out", str(tmp_path / "r")])
    assert code == 0


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bits": 12, "trials": 4, "seed": 9, "epsilon": 0.1}))
    out = tmp_path / "r"
    assert main(["run", "dlp", "--config", str(cfg), "--trials", "6", "--out", str(out)]) == 0
    s = json.loads((out / "summary.json").read_text())
    assert (s["trials"], s["config"]["seed"], s["config"]["epsilon"], s["config"]["bits"]) == (6, 9, 0.1, 12)


@pytest.mark.parametrize(
    "payload",
    [{"bogus": 1}, {"epsilon": 0.7}, {"trials": 0}, [1, 2]],
)
def test_bad_config(tmp_path, payload):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(payload))
    assert main(["run", "dlp", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_timing_flag_records_wall_time(tmp_path):
    main(["run", "dlp", "--bits", "10", "--trials", "3", "--timing", "--out", str(tmp_path)])
    assert json.loads((tmp_path / "summary.json").read_text())["wall_ms"] is not None


def test_power_of_data_command(tmp_path):
    out = tmp_path / "pod.csv"
    assert main(["power-of-data", "--qubits", "3", "--trials", "5", "--seed", "1", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 5 * 50
    assert max(float(r["abs_error"]) for r in rows) <= 1e-8


def test_run_power_of_data(tmp_path):
    out = tmp_path / "pod.csv"
    assert main(["run", "power-of-data", "--qubits", "2", "--trials", "3", "--out", str(out)]) == 0


def test_power_of_data_qubit_range(tmp_path):
    assert main(["power-of-data", "--qubits", "11", "--out", str(tmp_path / "x.csv")]) == 2


@pytest.mark.parametrize("problem,claim", [("cuberoot", "CC/QC"), ("dlp", "CC/QQ")])
def test_checklist_claims(tmp_path, problem, claim):
    assert main(["checklist", problem, "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["claimed_separation"] == claim
    assert len(report["assumptions"]) == 1
    assert "claimed separation: " + claim in (tmp_path / "report.txt").read_text()


def test_checklist_sabotaged(tmp_path):
    assert main(["checklist", "dlp", "--sabotage-b", "--out", str(tmp_path)]) == 1
    assert json.loads((tmp_path / "report.json").read_text())["claimed_separation"] == "none"


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "learnsep", "gen", "dlp", "--bits", "8", "--out", str(tmp_path / "d.json")],
        capture_output=True, text=True,
    )
    assert res.returncode == 0 and (tmp_path / "d.json").exists()
