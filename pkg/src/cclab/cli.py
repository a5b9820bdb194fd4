"""Command-line front end.

Every run writes one report: a JSON envelope ``{version, config, payload,
pass}`` or, for row-shaped payloads, CSV. Exit status is 0 when every check
passes, 1 when some verified inequality fails (the report is still written)
and 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from typing import Any, Callable

from . import __version__
from .errors import CclabError
from .greater_than import SWEEP_FIELDS, BudgetConfig, oneway_family, oneway_info_check, run_budget, sweep
from .lemma_verify import LEMMAS, run_lemmas
from .pointer_jumping import (
    PJParams,
    check_marginal_equality,
    enumerate_distribution,
    evaluate_task,
    follow_path_protocol,
    pj_inputs,
    pj_task,
    sample_fooling,
    sample_hard,
    sample_mixture,
)
from .protocol_sim import run
from .qmath.invariants import INVARIANTS, run_invariant_suite
from .qmath.registers import set_dim_cap
from .rng import stream

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _budgets(text: str) -> list[int]:
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"budget range must look like lo:hi, got {text!r}")
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty budget range {text!r}")
    return list(range(lo, hi + 1))


def _common(p: argparse.ArgumentParser, seeded: bool = True, tol: bool = False) -> None:
    if seeded:
        p.add_argument("--seed", type=int, help="required; falls back to CCLAB_SEED")
    if tol:
        p.add_argument("--tol", type=float, help="override the check tolerance; falls back to CCLAB_TOL")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=("json", "csv"), help="default: from --out suffix, else json")
    p.add_argument("--timestamps", action="store_true", help="record start/stop times (breaks byte stability)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cclab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    top = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    verify = top.add_parser("verify", help="numerical verification suites").add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )
    q = verify.add_parser("qmath", help="random-instance inequality suite")
    q.add_argument("--trials", type=int, default=1000)
    q.add_argument("--names", nargs="+", choices=sorted(INVARIANTS), help="subset of invariants")
    _common(q, tol=True)
    lem = verify.add_parser("lemmas", help="lemma checks on constructed instances")
    lem.add_argument("--which", choices=sorted(LEMMAS) + ["all"], default="all")
    lem.add_argument("--trials", type=int, help="instances per check (default per lemma)")
    _common(lem, tol=True)

    pj = top.add_parser("pj", help="pointer jumping").add_subparsers(dest="command", required=True, parser_class=_Parser)
    s = pj.add_parser("sample", help="draw instances")
    s.add_argument("--dist", choices=("fooling", "hard", "mixture"), default="mixture")
    s.add_argument("--b", type=int, choices=(0, 1), help="event for --dist hard")
    s.add_argument("--count", type=int, default=1)
    r = pj.add_parser("run", help="follow-path protocol on sampled instances")
    r.add_argument("--trials", type=int, default=1000)
    e = pj.add_parser("enumerate", help="exact law by enumeration")
    e.add_argument("--dist", choices=("p", "mu0", "mu1"), default="p")
    c = pj.add_parser("check-marginals", help="exact marginal-equality check")
    for sub, seeded in ((s, True), (r, True), (e, False), (c, False)):
        sub.add_argument("--k", type=int, required=True)
        sub.add_argument("--n", type=int, required=True)
        _common(sub, seeded=seeded)

    gt = top.add_parser("gt", help="greater-than trade-off").add_subparsers(dest="command", required=True, parser_class=_Parser)
    g1 = gt.add_parser("run", help="one budget")
    g1.add_argument("--b", type=int, required=True)
    g2 = gt.add_parser("sweep", help="a range of budgets")
    g2.add_argument("--budgets", type=_budgets, required=True, help="inclusive lo:hi")
    for sub in (g1, g2):
        sub.add_argument("--n", type=int, required=True)
        sub.add_argument("--trials", type=int, default=2000)
        sub.add_argument("--eps", type=float, default=1 / 3)
        sub.add_argument("--c1", type=int, default=1)
        _common(sub)
    g3 = gt.add_parser("info-check", help="exact one-way information bound")
    g3.add_argument("--n", type=int, required=True)
    g3.add_argument("--tables", type=int, default=4, help="random lookup-table protocols")
    _common(g3, tol=True)
    return parser


def _resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Flags override CCLAB_* environment variables, which override defaults."""
    env = os.environ
    if "seed" in args and args.seed is None:
        if "CCLAB_SEED" not in env:
            raise UsageError("--seed is required (or set CCLAB_SEED)")
        args.seed = _env_number("CCLAB_SEED", int)
    if "tol" in args and args.tol is None and "CCLAB_TOL" in env:
        args.tol = _env_number("CCLAB_TOL", float)
    if "CCLAB_DIM_CAP" in env:
        set_dim_cap(_env_number("CCLAB_DIM_CAP", int))
    if args.format is None:
        args.format = "csv" if args.out and args.out.endswith(".csv") else "json"
    for name in ("trials", "count"):
        if getattr(args, name, None) is not None and getattr(args, name) < 1:
            raise UsageError(f"--{name} must be at least 1")
    if getattr(args, "dist", None) == "hard" and getattr(args, "b", None) is None:
        raise UsageError("--dist hard needs --b")
    config = {k: v for k, v in vars(args).items() if k not in ("out", "format", "timestamps")}
    config["command"] = f"{config.pop('group')} {config['command']}"
    return config


def _env_number(name: str, cast: Callable):
    try:
        return cast(os.environ[name])
    except ValueError:
        raise UsageError(f"{name} must be a number, got {os.environ[name]!r}")


# handlers return (payload, passed, rows); rows is a CSV-able list or None


def _verify_qmath(a):
    reports = run_invariant_suite(a.trials, a.seed, a.names, a.tol)
    return [r.to_json() for r in reports], all(r.passed for r in reports), None


def _verify_lemmas(a):
    reports = run_lemmas(a.which, a.trials, a.seed, a.tol)
    return [r.to_json() for r in reports], all(r.passed for r in reports), None


def _pj_sample(a):
    params = PJParams(a.k, a.n)
    out = []
    for i in range(a.count):
        rng = stream(a.seed, "pj_sample", i)
        if a.dist == "mixture":
            b, inst = sample_mixture(params, rng)
        elif a.dist == "hard":
            b, inst = a.b, sample_hard(params, a.b, rng)
        else:
            b, inst = None, sample_fooling(params, rng)
        out.append({"b": b, "instance": inst.to_json(), "task": evaluate_task(inst)})
    passed = all(o["b"] is None or o["task"] == o["b"] for o in out)
    return out, passed, None


def _pj_run(a):
    params = PJParams(a.k, a.n)
    protocol = follow_path_protocol(params)
    expected = 2 * params.n * params.message_width + 1
    errors, bits = 0, set()
    for i in range(a.trials):
        _, inst = sample_mixture(params, stream(a.seed, "pj_run", i))
        res = run(protocol, pj_inputs(inst), a.seed, task=pj_task, trial=i)
        errors += not res.cost.correct
        bits.add(res.cost.bits_a_to_b + res.cost.bits_b_to_a)
    payload = {"error_rate": errors / a.trials, "bits": sorted(bits), "expected_bits": expected, "trials": a.trials}
    return payload, errors == 0 and bits == {expected}, None


def _pj_enumerate(a):
    return enumerate_distribution(PJParams(a.k, a.n), a.dist).to_json(), True, None


def _pj_check(a):
    equal = check_marginal_equality(PJParams(a.k, a.n))
    return {"marginals_equal": equal}, equal, None


def _gt_rows(rows):
    data = [r.as_dict() for r in rows]
    return data, all(r.bob_bits_max <= r.b for r in rows), data


def _gt_run(a):
    return _gt_rows([run_budget(BudgetConfig.derive(a.n, a.b, a.eps, a.c1), a.trials, a.seed)])


def _gt_sweep(a):
    return _gt_rows(sweep(a.n, a.budgets, a.trials, a.seed, a.eps, a.c1))


def _gt_info(a):
    tol = 1e-10 if a.tol is None else a.tol
    checks = [oneway_info_check(p, a.n, tol) for p in oneway_family(a.n, a.seed, a.tables)]
    payload = [{"name": c.name, "c": c.c, "lhs": c.lhs, "rhs": c.rhs, "pass": c.passed} for c in checks]
    return payload, all(c.passed for c in checks), None


HANDLERS = {
    "verify qmath": _verify_qmath,
    "verify lemmas": _verify_lemmas,
    "pj sample": _pj_sample,
    "pj run": _pj_run,
    "pj enumerate": _pj_enumerate,
    "pj check-marginals": _pj_check,
    "gt run": _gt_run,
    "gt sweep": _gt_sweep,
    "gt info-check": _gt_info,
}


def render(config: dict, payload, passed: bool, rows, fmt: str, times: dict | None = None) -> str:
    if fmt == "csv":
        if rows is None:
            raise UsageError("csv output is only available for row-shaped payloads (gt run, gt sweep)")
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=SWEEP_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    envelope = {"version": __version__, "config": config, "payload": payload, "pass": passed}
    if times:
        envelope.update(times)
    return json.dumps(envelope, sort_keys=True, indent=2) + "\n"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _resolve(args)
        if args.format == "csv" and config["command"] not in ("gt run", "gt sweep"):
            raise UsageError("csv output is only available for row-shaped payloads (gt run, gt sweep)")
        started = _now()
        payload, passed, rows = HANDLERS[config["command"]](args)
        times = {"started": started, "finished": _now()} if args.timestamps else None
        text = render(config, payload, passed, rows, args.format, times)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except CclabError as exc:
        print(f"cclab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"cclab: cannot write report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not passed:
        print("cclab: some checks failed; see the report", file=sys.stderr)
    return EXIT_OK if passed else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
