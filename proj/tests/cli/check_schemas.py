"""Runs every qasdyn subcommand with --json and validates the output against docs/schemas."""

import json
import os
import subprocess
import sys
import tempfile

import jsonschema

QASDYN, DATA, SCHEMAS = sys.argv[1:4]


def schema(name):
    with open(os.path.join(SCHEMAS, f"{name}.schema.json")) as f:
        s = json.load(f)
    jsonschema.Draft7Validator.check_schema(s)
    return jsonschema.Draft7Validator(s)


def run(args, expect_code):
    p = subprocess.run([QASDYN, "--json", *args], capture_output=True, text=True, timeout=600)
    if p.returncode != expect_code:
        raise SystemExit(f"{args}: exit {p.returncode}, expected {expect_code}\n{p.stderr}")
    return json.loads(p.stdout)


failures = 0


def check(name, doc, label):
    global failures
    errors = sorted(schema(name).iter_errors(doc), key=str)
    status = "ok" if not errors else "INVALID"
    print(f"{status:8} {label}")
    for e in errors:
        failures += 1
        print(f"         {list(e.absolute_path)}: {e.message}")


d = lambda name: os.path.join(DATA, name)
tmp = tempfile.mkdtemp()

check("degrees", run(["degrees", "--map", d("ref_t3.map"), "--n", "4"], 0), "degrees ref_t3")
check("infer-qas", run(["infer-qas", "--map", d("ref_t3.map"), "--n", "4"], 0), "infer-qas QAS")
check("infer-qas", run(["infer-qas", "--map", d("id.map"), "--n", "3"], 0), "infer-qas AS")
check("infer-qas", run(["infer-qas", "--map", d("ref.map"), "--n", "4"], 1), "infer-qas NotQAS")
check("lambda", run(["lambda", "--d", "3", "--h", "1", "--n0", "1", "--precision", "256"], 0), "lambda golden")
check("lambda", run(["lambda", "--d", "4", "--h", "4", "--n0", "1"], 0), "lambda double root")
check("family-gen", run(["family-gen", "--seed", "7", "--out", os.path.join(tmp, "f.family")], 0), "family-gen")
check("family-check", run(["family-check", "--family", os.path.join(tmp, "f.family")], 0), "family-check generated")
check("family-check", run(["family-check", "--family", d("ref.family")], 0), "family-check reference")
check("green-point",
      run(["green-point", "--map", d("ref_t3.map"), "--point", "0.3,-1.2+0.5i,0.7", "--residual", "--telescope", "3"], 0),
      "green-point QAS")
check("green-point", run(["green-point", "--map", d("monomial.map"), "--point", "2,1,1"], 0), "green-point AS")
check("green-point",
      run(["green-point", "--map", d("ref.map"), "--assume-h", "z", "--point", "0.3,-1.2+0.5i,0.7"], 0),
      "green-point asserted")
pgm = os.path.join(tmp, "g.pgm")
check("green-grid",
      run(["green-grid", "--map", d("ref_t3.map"), "--base", "0,1,0.5", "--e1", "1,0,0", "--e2", "0,0,i",
           "--res", "9", "--pgm", pgm, "--laplacian", os.path.join(tmp, "l.csv")], 0),
      "green-grid")
with open(pgm + ".json") as f:
    check("grid-sidecar", json.load(f), "grid sidecar")
check("verify-all", run(["verify-all", "--family", d("ref_t3.family"), "--n", "4", "--points", "40"], 0),
      "verify-all ref_t3")
check("verify-all", run(["verify-all", "--map", d("monomial.map"), "--n", "3", "--points", "40"], 0),
      "verify-all monomial")
check("verify-all", run(["verify-all", "--family", d("ref.family"), "--n", "4", "--points", "40"], 1),
      "verify-all NotQAS")
check("error", run(["degrees", "--map", d("missing.map"), "--n", "2"], 2), "error input")
check("error", run(["lambda", "--d", "2", "--h", "1", "--n0", "1"], 2), "error degenerate")
check("error", run(["green-point", "--map", d("ref.map"), "--point", "1,2,3"], 1), "error negative")
check("error", run(["--max-terms", "10", "degrees", "--map", d("ref_t3.map"), "--n", "4"], 3), "error resource")
check("error", run(["frobnicate"], 2), "error usage")

print("schema failures:", failures)
sys.exit(1 if failures else 0)
