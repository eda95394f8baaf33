"""Validates glfr JSON documents against the shipped schemas.

Usage: check_schemas.py GLFR_BINARY SCHEMA_DIR DATA_DIR
"""

import json
import os
import subprocess
import sys
import tempfile

import jsonschema


def run(binary, *args):
    proc = subprocess.run([binary, *args], capture_output=True, text=True, check=False)
    if proc.returncode != 0:
        raise SystemExit(f"{' '.join(args)} exited {proc.returncode}: {proc.stderr}")
    return json.loads(proc.stdout)


def main():
    binary, schema_dir, data = sys.argv[1:4]
    load = lambda name: json.load(open(os.path.join(schema_dir, name)))
    report = jsonschema.Draft202012Validator(load("glfr-report-1.schema.json"))
    table = jsonschema.Draft202012Validator(load("glfr-simulation-1.schema.json"))
    x, y = os.path.join(data, "jute_10mm.txt"), os.path.join(data, "jute_20mm.txt")
    failures = 0

    def check(validator, doc, label):
        nonlocal failures
        errors = list(validator.iter_errors(doc))
        for e in errors:
            print(f"{label}: {'/'.join(map(str, e.absolute_path))}: {e.message}")
        failures += bool(errors)
        print(f"{label}: {'ok' if not errors else 'INVALID'}")

    check(report, run(binary, "fit", x, y, "--gof", "--ci", "asymptotic"), "fit common")
    check(report, run(binary, "fit", x, y, "--mode", "known", "--a", "0.0027", "--b", "2.4e-6", "--ci", "exact"), "fit known")
    check(report, run(binary, "fit", x, y, "--mode", "general"), "fit general")
    check(report, run(binary, "fit", x, y, "--ci", "bootstrap", "-B", "100", "--seed", "3"), "fit bootstrap")
    check(report, run(binary, "bayes", x, y, "--draws", "2000", "--seed", "4"), "bayes common")
    check(report, run(binary, "bayes", x, y, "--mode", "known", "--a", "0.0027", "--b", "2.4e-6", "--prior", "0.1,5"),
          "bayes known")
    check(report, run(binary, "bayes", x, y, "--mode", "general", "--draws", "500"), "bayes general")
    check(report, run(binary, "censor", x, y, "--kind", "type4", "--m", "15", "--seed", "2"), "censor")
    with tempfile.TemporaryDirectory() as tmp:
        check(report, run(binary, "sample", "--n", "20", "--seed", "5", "--ks-check", "--out", os.path.join(tmp, "s.txt")),
              "sample")
    for scenario, extra in [("known_scale", []), ("common_scale", []), ("general", ["--set", "a2=2"]),
                            ("censored", ["--set", "x_failures=5", "--set", "y_failures=4"])]:
        doc = run(binary, "simulate", "--format", "json", "--set", f"scenario={scenario}", "--set", "replications=20",
                  "--set", "n=10", "--set", "m=10", *extra)
        check(table, doc, f"simulate {scenario}")
    broken = json.loads(json.dumps(doc))
    del broken["rows"][0]["mse"]
    if table.is_valid(broken):
        print("schema accepted a row without mse")
        failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
