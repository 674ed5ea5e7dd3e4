"""Validate shipped problem files and live `ucp` reports against docs/*.schema.json.

usage: python3 scripts/check_schemas.py [path/to/ucp]
"""

import glob
import json
import os
import subprocess
import sys

import jsonschema

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
PROBLEMS = os.path.join(ROOT, "crates", "core", "examples", "problems")


def load(name):
    with open(os.path.join(ROOT, "docs", name)) as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    return schema


def problem(name):
    return os.path.join(PROBLEMS, name + ".json")


def runs():
    systems = ["e1_identity", "e2_uniform", "e2_uniform_z3", "e3_trivial", "e3_swap",
               "e4_pauli_twirl", "e5_pinching", "e5_pinching_z2", "depolarizing"]
    for s in systems:
        for c in ["validate", "dilate", "invariance", "commutant", "certify", "paschke-crosscheck"]:
            yield [c, problem(s)]
        yield ["commutant", problem(s), "--no-group"]
        for m in ["plain", "g-invariant", "ergodic"]:
            yield ["decompose", problem(s), "--mode", m]
    yield ["twirl", problem("e4_pauli_twirl")]
    yield ["twirl", problem("e5_pinching_z2")]
    yield ["twirl", problem("e1_identity")]
    yield ["rn", problem("e3_trivial"), "--forward", problem("t_half")]
    yield ["rn", problem("e3_swap"), "--forward", problem("t_half"), "--covariant"]
    yield ["rn", problem("e3_trivial"), "--inverse", problem("psi_e3_first_block")]
    yield ["rn", problem("e3_swap"), "--inverse", problem("psi_e3_first_block"), "--covariant"]
    for s in ["lift_half", "lift_half_swap", "lift_qubit"]:
        for k in ["full", "diag"]:
            for n in ["1", "2", "3"]:
                yield ["lift", problem(s), "--kind", k, "--n", n]
    yield ["lift", problem("e1_identity"), "--kind", "full", "--n", "2"]
    yield ["validate", os.path.join(PROBLEMS, "missing.json")]


def main():
    ucp = sys.argv[1] if len(sys.argv) > 1 else os.path.join(ROOT, "target", "debug", "ucp")
    problem, report = load("problem.schema.json"), load("report.schema.json")
    failures = 0
    for path in sorted(glob.glob(os.path.join(PROBLEMS, "*.json"))):
        with open(path) as f:
            doc = json.load(f)
        if "algebra" in doc:
            jsonschema.validate(doc, problem)
    codes = {}
    total = 0
    for args in runs():
        total += 1
        out = subprocess.run([ucp, *args, "--format", "json"], capture_output=True, check=False)
        doc = json.loads(out.stdout)
        try:
            jsonschema.validate(doc, report)
        except jsonschema.ValidationError as e:
            failures += 1
            print("FAIL", " ".join(args), list(e.absolute_path), e.message[:200])
            continue
        codes[doc["exit_code"]] = codes.get(doc["exit_code"], 0) + 1
    print(f"{total} reports checked, {failures} failures, exit codes {dict(sorted(codes.items()))}")
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
