"""Greater-Than budget sweep: writes the CSV and checks the trade-off shape.

    python3 scripts/gt_sweep.py --n 1024 --budgets 2 10 --trials 2000 --seed 7 --out sweep.csv
"""

import argparse
import csv
import sys
import time

from cclab.greater_than import SWEEP_FIELDS, BudgetConfig, sweep


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1024)
    ap.add_argument("--budgets", type=int, nargs=2, default=(2, 10), metavar=("LO", "HI"))
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--max-error", type=float, default=0.36)
    ap.add_argument("--out", default="sweep.csv")
    args = ap.parse_args()

    budgets = range(args.budgets[0], args.budgets[1] + 1)
    t0 = time.perf_counter()
    rows = sweep(args.n, budgets, args.trials, args.seed)
    elapsed = time.perf_counter() - t0
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(r.as_dict() for r in rows)

    print(f"{'b':>3} {'s':>3} {'t':>3} {'alice mean':>11} {'alice max':>10} {'bob max':>8} {'error':>7}")
    for r in rows:
        cfg = BudgetConfig.derive(args.n, r.b)
        print(f"{r.b:>3} {cfg.s:>3} {cfg.t:>3} {r.alice_bits_mean:>11.2f} {r.alice_bits_max:>10} {r.bob_bits_max:>8} {r.error_rate:>7.4f}")

    ratio = rows[-1].alice_bits_mean / rows[0].alice_bits_mean
    checks = {
        f"error_rate <= {args.max_error} on every row": all(r.error_rate <= args.max_error for r in rows),
        "bob_bits_max <= b on every row": all(r.bob_bits_max <= r.b for r in rows),
        f"alice mean ratio last/first = {ratio:.4f} <= 1/8": ratio <= 1 / 8,
        f"runtime {elapsed:.1f}s < 60s": elapsed < 60,
    }
    for text, ok in checks.items():
        print(f"[{'PASS' if ok else 'FAIL'}] {text}")
    print(f"wrote {args.out}")
    return 0 if all(checks.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
