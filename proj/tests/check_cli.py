"""End-to-end checks of the lpsnet command line: JSON outputs against the
shipped schemas, exit codes, CSV layout and a few reference values."""

import csv
import io
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

CLI, ROOT = sys.argv[1], pathlib.Path(sys.argv[2])
SCHEMAS = {p.name.split(".")[0]: json.loads(p.read_text()) for p in (ROOT / "schemas").glob("*.schema.json")}
MODELS = ROOT / "models"
failures = []


def run(*args):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)


def check(ok, what):
    print(("ok   " if ok else "FAIL ") + what)
    if not ok:
        failures.append(what)


def validated(kind, proc):
    check(proc.returncode == 0, f"{kind}: exit 0 (got {proc.returncode}: {proc.stderr.strip()[:200]})")
    doc = json.loads(proc.stdout)
    try:
        jsonschema.validate(doc, SCHEMAS[kind])
        check(True, f"{kind}: schema valid")
    except jsonschema.ValidationError as e:
        check(False, f"{kind}: schema violation: {e.message}")
    return doc


row1 = validated("analysis", run("analyze", MODELS / "table1_row1.yaml", "--raw"))
check(abs(row1["EV"] - 10.24) <= 0.01, f"analyze row 1: EV {row1['EV']:.4f}")
mm1 = validated("analysis", run("analyze", MODELS / "mm1.yaml"))
check(abs(mm1["EV"] - 2.0) <= 1e-12, f"analyze M/M/1: EV {mm1['EV']}")
tie = run("analyze", MODELS / "tandem_tie.yaml")
tie_doc = validated("analysis", tie)
check(tie_doc["derived"]["bottleneck_tie"] and "tie" in tie.stderr, "analyze tie: flag and warning")
heavy = validated("analysis", run("analyze", MODELS / "table1_row1.yaml", "--scenario", "heavy"))
check(abs(heavy["derived"]["rho"] - 0.9) < 1e-12, "analyze --scenario heavy: rho 0.9")
unstable = validated("analysis", run("analyze", MODELS / "mm1.yaml", "--load", "1.2"))
check(unstable["unstable"] and unstable["heavy_traffic"] is None, "analyze unstable: marker, no approximations")

sim = validated("simulation", run("simulate", MODELS / "mm1.yaml", "--jobs", "2e4", "--reps", "3", "--seed", "5"))
check(sim["replications"] == 3 and sim["horizon_jobs"] == 20000, "simulate: config echoed")
validated("ctmc", run("ctmc", MODELS / "mm1.yaml", "--truncation", "100"))
with tempfile.TemporaryDirectory() as d:
    out = pathlib.Path(d) / "validation.json"
    val = run("validate", "--no-sim", "--rows", "1,2", "--json", out)
    check(val.returncode == 0 and "PASS" in val.stdout, "validate --no-sim --rows 1,2")
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, SCHEMAS["validation"])
    check(len(doc["rows"]) == 2, "validation: schema valid, two rows")

fl = run("fluid", MODELS / "table1_row1.yaml", "--critical", "--x0", "5,1", "--horizon", "20", "--stride", "500")
check(fl.returncode == 0, "fluid: exit 0")
rows = list(csv.reader(io.StringIO(fl.stdout)))
check(rows[0] == ["t", "x_1", "x_2", "workload", "lyapunov", "dist_manifold"], f"fluid: header {rows[0]}")
w = [float(r[3]) for r in rows[1:]]
check(max(w) - min(w) < 1e-9 * w[0], "fluid --critical: workload constant")
man = run("fluid", MODELS / "table1_row1.yaml", "--critical", "--manifold", "4", "--horizon", "10")
check(man.returncode == 0 and all(float(r[-1]) < 1e-9 for r in list(csv.reader(io.StringIO(man.stdout)))[1:]),
      "fluid --manifold: stays on the manifold")

with tempfile.TemporaryDirectory() as d:
    trace = pathlib.Path(d) / "trace.csv"
    p = run("simulate", MODELS / "table1_row1.yaml", "--jobs", "1000", "--reps", "2", "--trace", trace)
    lines = trace.read_text().splitlines()
    check(p.returncode == 0 and lines[0] == "job_id,entry,exit,path" and len(lines) == 1001, "simulate --trace")
    bad = pathlib.Path(d) / "bad.yaml"
    bad.write_text("nodes:\n  - servers: 1\n    speed: 3\n    service: {type: exponential, mean: 1}\n")
    p = run("analyze", bad)
    check(p.returncode == 2 and "line 3" in p.stderr, f"bad model file: exit 2 with line number ({p.stderr.strip()})")
    sing = pathlib.Path(d) / "singular.yaml"
    sing.write_text("nodes:\n  - {arrival_rate: 1, servers: 1, service: {type: exponential, mean: 1}}\n"
                    "  - {servers: 1, service: {type: exponential, mean: 1}}\nrouting: [[0, 1], [1, 0]]\n")
    p = run("analyze", sing)
    check(p.returncode == 2 and "singular" in p.stderr, "singular routing: exit 2")
    hyper = pathlib.Path(d) / "hyper.yaml"
    hyper.write_text("nodes:\n  - {arrival_rate: 0.1, servers: 1, service: {type: hyperexp, mean: 1, scv: 2}}\n")
    check(run("ctmc", hyper).returncode == 2, "ctmc refuses non-exponential: exit 2")

check(run("analyze").returncode == 1, "missing argument: exit 1")
check(run("frobnicate").returncode == 1, "unknown subcommand: exit 1")
check(run("simulate", MODELS / "mm1.yaml", "--reps", "0").returncode == 1, "zero replications: exit 1")
check(run("--help").returncode == 0, "--help: exit 0")
check(run("analyze", MODELS / "missing.yaml").returncode == 2, "missing model file: exit 2")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
