"""End-to-end checks of the systola command line: exit codes, JSON output
validated against the report schema, and byte-identical sweeps."""

import json
import os
import subprocess
import sys
import tempfile

import jsonschema

BINARY, SCHEMA = sys.argv[1], sys.argv[2]
validator = jsonschema.Draft202012Validator(json.load(open(SCHEMA)))
failures = []


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def run(*args, env=None):
    full_env = dict(os.environ)
    full_env.update(env or {})
    return subprocess.run([BINARY, *args], capture_output=True, text=True, env=full_env)


def valid(record):
    return not list(validator.iter_errors(record))


work = tempfile.mkdtemp(prefix="systola_cli_")
os.chdir(work)
json.dump({"gram": [[1, 0.5], [0.5, 1]]}, open("hex.json", "w"))
json.dump({"gram": [[1, 0], [0, 1]]}, open("square.json", "w"))

r = run("lattice", "--gram", "hex.json", "--op", "ratio")
check(r.returncode == 0 and abs(json.loads(r.stdout)["hermite_ratio"] - 2 / 3**0.5) < 1e-12, "lattice ratio of A2")
r = run("lattice", "--gram", "square.json", "--op", "perfect")
check(r.returncode == 0 and json.loads(r.stdout)["perfect"] is False, "Z^2 is not perfect")

r = run("mesh", "--make", "flat-torus", "--gram", "hex.json", "--refine", "6", "--out", "hex_mesh.json")
check(r.returncode == 0 and os.path.exists("hex_mesh.json"), "mesh written")
run("mesh", "--gram", "square.json", "--refine", "6", "--out", "square_mesh.json")

r = run("verify", "--mesh", "hex_mesh.json", "--ineq", "10", "--normalize", "--out", "report.json")
report = json.load(open("report.json"))
check(r.returncode == 0 and report["equality_flag"] and valid(report), "verify 10 on hexagonal torus")
r = run("verify", "--mesh", "square_mesh.json", "--ineq", "10c")
check(r.returncode == 0 and valid(json.loads(r.stdout)), "verify 10c report validates")

r = run("fixture", "--kind", "product", "--gram", "hex.json", "--fiber", "0.5", "--ineq", "23c")
check(r.returncode == 1 and valid(json.loads(r.stdout)), "slack failure exits 1")
r = run("fixture", "--kind", "heisenberg", "--gram", "hex.json", "--fiber", "0.5", "--ineq", "11")
check(r.returncode == 0 and json.loads(r.stdout)["notes"]["deg"] == "upper bound", "Heisenberg fixture")

r = run("verify", "--mesh", "missing.json", "--ineq", "10")
check(r.returncode == 2 and valid(json.loads(r.stderr)), "missing file exits 2 with an error record")
r = run("verify", "--mesh", "hex_mesh.json", "--ineq", "12")
check(r.returncode == 2, "unknown inequality exits 2")
r = run("verify", "--mesh", "hex_mesh.json", "--ineq", "11")
check(r.returncode == 2, "precondition failure exits 2")
r = run("lattice", "--gram", "hex.json", "--op", "bogus")
check(r.returncode == 2, "bad option exits 2")
r = run("sweep")
check(r.returncode == 2, "sweep without config exits 2")

r = run("forms", "--mesh", "hex_mesh.json", "--class", "1,0", "--p", "3", "--op", "norm", "--normalize")
check(r.returncode == 0 and json.loads(r.stdout)["norm"] > 0, "forms norm")
r = run("aj", "--mesh", "square_mesh.json", "--op", "degree")
check(r.returncode == 0 and json.loads(r.stdout)["degree"] == 1, "aj degree")
r = run("aj", "--mesh", "square_mesh.json", "--op", "chain")
check(r.returncode == 0 and json.loads(r.stdout)["holds"], "aj chain")

config = {
    "seed": 5,
    "sources": [
        {"kind": "flat-torus", "name": "hex", "critical": 2},
        {"kind": "random-perturbation", "name": "rnd", "critical": 2, "amplitude": 0.2},
        {"kind": "heisenberg", "name": "heis", "critical": 2, "fibers": [0.5, 3.0], "inequalities": ["11", "10"]},
    ],
    "inequalities": ["10", "28"],
    "refinements": [4, 8],
    "output": {"reports": "r.jsonl", "summary": "s.csv"},
}
json.dump(config, open("sweep.json", "w"))
r = run("sweep", "--config", "sweep.json")
check(r.returncode == 2, "sweep with a failing cell exits 2")
first = open("r.jsonl", "rb").read()
summary = open("s.csv", "rb").read()
records = [json.loads(line) for line in first.decode().splitlines()]
check(len(records) == 12 and all(valid(x) for x in records), "every sweep record validates")
check(sum("error" in x for x in records) == 2, "error records name their cells")
check(summary.decode().splitlines()[0] == "source,inequality,p,refinement,lhs,rhs,slack,ratio,equality_flag,slack_ok,status",
      "summary header")

run("sweep", "--config", "sweep.json", env={"SYSTOLA_THREADS": "1"})
check(open("r.jsonl", "rb").read() == first and open("s.csv", "rb").read() == summary, "rerun is byte-identical")
run("sweep", "--config", "sweep.json", "--seed", "6")
check(open("r.jsonl", "rb").read() != first, "--seed overrides the config seed")
r = run("sweep", "--config", "sweep.json", env={"SYSTOLA_THREADS": "-3"})
check(r.returncode == 2, "bad SYSTOLA_THREADS exits 2")

bad = dict(records[0])
bad["ratio"] = "high"
check(not valid(bad), "schema rejects a malformed report")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
