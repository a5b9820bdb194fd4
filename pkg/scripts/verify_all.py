"""Run the inequality suite and every lemma check; write one JSON report.

    python3 scripts/verify_all.py --seed 0 --out verification.json

Exits 1 if any check fails. The report is written either way.
"""

import argparse
import json
import sys
import time

from cclab.lemma_verify import run_lemmas
from cclab.qmath.invariants import run_invariant_suite


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=1000, help="instances per inequality")
    ap.add_argument("--out", default="verification.json")
    args = ap.parse_args()

    t0 = time.perf_counter()
    invariants = [r.to_json() for r in run_invariant_suite(args.trials, args.seed)]
    t1 = time.perf_counter()
    lemmas = [r.to_json() for r in run_lemmas("all", seed=args.seed)]
    t2 = time.perf_counter()

    for r in invariants + lemmas:
        print(f"[{'PASS' if r['pass'] else 'FAIL'}] {r['lemma']:<36} trials={r['trials']:<5} max_violation={r['max_violation']:.3e}")
    print(f"inequalities {t1 - t0:.1f}s, lemmas {t2 - t1:.1f}s")

    passed = all(r["pass"] for r in invariants + lemmas)
    with open(args.out, "w") as fh:
        json.dump({"seed": args.seed, "invariants": invariants, "lemmas": lemmas, "pass": passed}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
