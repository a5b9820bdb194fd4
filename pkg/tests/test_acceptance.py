"""Acceptance criteria at full scale; each test prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import time

import pytest

from cclab.greater_than import oneway_family, oneway_info_check, sweep
from cclab.lemma_verify import (
    verify_cut_and_paste_suite,
    verify_decoupling,
    verify_multiround_classical,
    verify_oneway_classical,
    verify_oneway_quantum,
    verify_qic,
    verify_shearer,
)
from cclab.lemma_verify.cutpaste import cut_and_paste_trace
from cclab.lemma_verify.shearer import bell_factor, product_factor_instance
from cclab.lemma_verify.toy import equal_inputs, random_toy_protocol, uniform_inputs
from cclab.pointer_jumping import (
    PJParams,
    check_marginal_equality,
    evaluate_task,
    follow_path_protocol,
    pj_inputs,
    pj_task,
    sample_hard,
    sample_mixture,
)
from cclab.protocol_sim import run
from cclab.qmath.invariants import INVARIANTS, run_invariant
from cclab.rng import stream

pytestmark = pytest.mark.slow

SEED = 0


@pytest.fixture
def verdict(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
        assert ok, detail

    return emit


# 1: qmath invariants


@pytest.fixture(scope="module")
def invariant_suite():
    reports, elapsed = {}, {}
    for name in INVARIANTS:
        t0 = time.perf_counter()
        reports[name] = run_invariant(name, trials=1000, seed=SEED, tol=1e-8)
        elapsed[name] = time.perf_counter() - t0
    return reports, elapsed


@pytest.mark.parametrize("name", list(INVARIANTS))
def test_c1_invariant(invariant_suite, verdict, name):
    r = invariant_suite[0][name]
    verdict(f"1/{name}", r.passed, f"1000 trials, max_violation={r.max_violation:.3e} (worst trial {r.worst_seed})")


def test_c1_runtime(invariant_suite, verdict):
    total = sum(invariant_suite[1].values())
    verdict("1/runtime", total < 120, f"{len(INVARIANTS)} invariants x 1000 trials in {total:.1f}s (limit 120s)")


# 2: Shearer-type inequality


def test_c2_shearer(verdict):
    r = verify_shearer(trials=500, seed=SEED)
    bell = product_factor_instance([bell_factor(), bell_factor()], k=2)
    gap = abs(bell.expected_information() - bell.bound())
    ok = r.max_violation <= 1e-8 and gap <= 1e-8
    verdict(2, ok, f"500 instances max_violation={r.max_violation:.3e}; Bell m=2,k=2 gap={gap:.1e}")


# 3: decoupling


def test_c3_decoupling(verdict):
    r = verify_decoupling(trials=200, seed=SEED)
    verdict(3, r.passed and r.trials == 200, f"200 near-product instances, max_violation={r.max_violation:.3e}")


# 4: cut and paste


def test_c4_cut_and_paste(verdict):
    rho, sigma = uniform_inputs(), equal_inputs()
    base = 0.0
    for t in range(50):
        trace = cut_and_paste_trace(random_toy_protocol(3, seed=stream(SEED, "cut_and_paste", t)), rho, sigma)
        base = max(base, abs(trace.gamma[1] - trace.eps[1]), abs(trace.delta[1] - trace.eps[1]))
    r = verify_cut_and_paste_suite(protocols=50, seed=SEED, rounds=3)
    ok = base <= 1e-8 and r.max_violation <= 1e-8
    verdict(4, ok, f"50 protocols, base-case gap={base:.1e}, worst recursion violation={r.max_violation:.3e}")


# 5: direct sums


def test_c5_direct_sums(verdict):
    one = verify_oneway_classical(seed=SEED, ns=(2, 3, 4), lengths=(1, 2), tol=1e-10)
    multi = verify_multiround_classical(cases=100, seed=SEED, tol=1e-10)
    quantum = verify_oneway_quantum(cases=100, seed=SEED, tol=1e-8)
    ok = one.passed and multi.passed and quantum.passed and quantum.trials == 100
    verdict(
        5,
        ok,
        f"one-way classical {one.trials} cases ({one.max_violation:.1e}), "
        f"interactive {multi.trials} ({multi.max_violation:.1e}), "
        f"one-way quantum {quantum.trials} ({quantum.max_violation:.1e})",
    )


# 6: pointer jumping


def test_c6_pointer_jumping(verdict):
    failures = 0
    for k, n in ((2, 4), (3, 3), (4, 2)):
        params = PJParams(k, n)
        for b in (0, 1):
            for i in range(10_000):
                failures += evaluate_task(sample_hard(params, b, stream(SEED, "accept_pj", k, n, b, i))) != b
    marginals = all(check_marginal_equality(PJParams(2, n)) for n in (1, 2))
    path_errors, bad_costs = 0, 0
    for k, n in ((2, 3), (2, 4), (3, 2), (3, 3), (4, 2)):
        params = PJParams(k, n)
        protocol, expected = follow_path_protocol(params), 2 * n * params.message_width + 1
        for i in range(1000):
            _, inst = sample_mixture(params, stream(SEED, "accept_path", k, n, i))
            res = run(protocol, pj_inputs(inst), SEED, task=pj_task, trial=i)
            path_errors += not res.cost.correct
            bad_costs += res.cost.bits_a_to_b + res.cost.bits_b_to_a != expected
    ok = failures == 0 and marginals and path_errors == 0 and bad_costs == 0
    verdict(
        6,
        ok,
        f"sample_hard failures={failures}/60000, marginal equality={marginals}, "
        f"follow-path errors={path_errors}, wrong bit counts={bad_costs}",
    )


# 7: Greater-Than sweep


def test_c7_greater_than_sweep(verdict):
    t0 = time.perf_counter()
    rows = sweep(1024, range(2, 11), trials=2000, seed=SEED)
    elapsed = time.perf_counter() - t0
    worst_error = max(r.error_rate for r in rows)
    bob_ok = all(r.bob_bits_max <= r.b for r in rows)
    ratio = rows[-1].alice_bits_mean / rows[0].alice_bits_mean
    ok = worst_error <= 0.36 and bob_ok and ratio <= 1 / 8 and elapsed < 60
    verdict(
        7,
        ok,
        f"max error={worst_error:.4f}, bob within budget={bob_ok}, "
        f"alice mean b=10/b=2 = {rows[-1].alice_bits_mean:.1f}/{rows[0].alice_bits_mean:.1f} = {ratio:.4f}, "
        f"runtime {elapsed:.1f}s",
    )


# 8: one-way information bound under the hard distribution


def test_c8_information_bound(verdict):
    checks = [oneway_info_check(p, n, tol=1e-10) for n in (2, 4, 6, 8) for p in oneway_family(n, seed=SEED)]
    worst = max(c.lhs - c.rhs for c in checks)
    verdict(8, all(c.passed for c in checks), f"{len(checks)} protocols at n in 2..8, max lhs-rhs={worst:.3e}")


# 9: qic sanity


def test_c9_qic(verdict):
    r = verify_qic(protocols=100, seed=SEED, tol=1e-8)
    verdict(9, r.passed, f"100 random + 100 oblivious protocols, max_violation={r.max_violation:.3e}")
