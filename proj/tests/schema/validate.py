#!/usr/bin/env python3
import json
import subprocess
import sys
from pathlib import Path

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

qhtt, tests = sys.argv[1], Path(sys.argv[2])
here = Path(__file__).resolve().parent

schemas = {p.name: json.loads(p.read_text()) for p in here.glob("*.schema.json")}
registry = Registry().with_resources(
    (name, Resource.from_contents(s)) for name, s in schemas.items()
)


def validator(name):
    return Draft202012Validator(schemas[name], registry=registry)


failures = 0


def run(name, args, codes):
    global failures
    p = subprocess.run([qhtt, *args, "--format", "json"], capture_output=True, text=True)
    label = " ".join(args)
    if p.returncode not in codes:
        print(f"FAIL {label}: exit {p.returncode}")
        failures += 1
        return
    try:
        doc = json.loads(p.stdout)
    except json.JSONDecodeError as e:
        print(f"FAIL {label}: {e}")
        failures += 1
        return
    errs = sorted(validator(name).iter_errors(doc), key=lambda e: list(e.path))
    for e in errs[:5]:
        print(f"FAIL {label}: {'/'.join(map(str, e.path))}: {e.message}")
    failures += bool(errs)
    if not errs:
        print(f"ok   {label}")


corpus = sorted((tests / "corpus").glob("*.qh"))
refuted = sorted((tests / "negative" / "refuted").glob("*.qh"))
invalid = sorted((tests / "negative" / "invalid").glob("*.qh"))

for f in corpus:
    run("check.schema.json", ["check", str(f)], {0})
    run("vcs.schema.json", ["vcs", str(f)], {0})
for f in refuted:
    run("check.schema.json", ["check", str(f)], {1})
    run("vcs.schema.json", ["vcs", str(f)], {1})
for f in invalid:
    run("check.schema.json", ["check", str(f)], {2})

run("check.schema.json", ["check", *map(str, corpus)], {0})
for file, decl in [("hqw.qh", "hqw"), ("rnd.qh", "rnd"), ("testbell.qh", "testBell")]:
    run("run.schema.json", ["run", "--shots", "100", str(tests / "corpus" / file), decl], {0})
run("run.schema.json", ["run", "--force", "--shots", "10", str(tests / "negative/refuted/hqw_true.qh"), "hqw"], {1})
run("trace.schema.json", ["trace", str(tests / "corpus/testbell.qh"), "testBell"], {0})

sys.exit(1 if failures else 0)
