"""Pointer jumping at small sizes: sampler correctness, one-sided marginals, baseline cost.

    python3 scripts/pj_marginals.py --samples 10000 --seed 0
"""

import argparse
import sys

from cclab.pointer_jumping import (
    PJParams,
    check_marginal_equality,
    enumerate_distribution,
    evaluate_task,
    follow_path_protocol,
    pj_inputs,
    pj_task,
    sample_hard,
    sample_mixture,
    sampler_table,
)
from cclab.protocol_sim import run
from cclab.rng import stream


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    ok = True

    print("hard-distribution samples (evaluate_task must equal b)")
    for k, n in ((2, 4), (3, 3), (4, 2)):
        params = PJParams(k, n)
        for b in (0, 1):
            bad = sum(evaluate_task(sample_hard(params, b, stream(args.seed, "pj", k, n, b, i))) != b for i in range(args.samples))
            ok &= bad == 0
            print(f"  k={k} n={n} b={b}: {bad} failures in {args.samples}")

    print("exact one-sided marginals given (j, x_<=j, y_<=j)")
    for n in (1, 2):
        params = PJParams(2, n)
        equal = check_marginal_equality(params)
        ok &= equal
        print(f"  k=2 n={n}: equal={equal}")
    params = PJParams(2, 2)
    for which in ("p", "mu0", "mu1"):
        gap = sampler_table(params, which).max_abs_diff(enumerate_distribution(params, which))
        ok &= gap <= 1e-12
        print(f"  sampler law vs enumeration, {which}: max gap {gap:.1e}")

    print("follow-path protocol")
    for k, n in ((2, 3), (2, 4), (3, 2), (3, 3)):
        params = PJParams(k, n)
        protocol = follow_path_protocol(params)
        bits, errors = set(), 0
        for i in range(1000):
            _, inst = sample_mixture(params, stream(args.seed, "path", k, n, i))
            res = run(protocol, pj_inputs(inst), args.seed, task=pj_task, trial=i)
            bits.add(res.cost.bits_a_to_b + res.cost.bits_b_to_a)
            errors += not res.cost.correct
        expected = 2 * n * params.message_width + 1
        ok &= errors == 0 and bits == {expected}
        print(f"  k={k} n={n}: errors={errors}, bits={sorted(bits)} (expected {expected})")

    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
