import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cclab.errors import DomainError, StateError
from cclab.protocol_sim import CoinDomains, one_message_protocol
from cclab.qmath import ProbTable, PureState, RegisterSystem, merge_registers, mutual_information, random_state, tensor
from cclab.lemma_verify import LEMMAS, run_lemmas
from cclab.lemma_verify.cutpaste import cut_and_paste_trace, verify_cut_and_paste
from cclab.lemma_verify.decoupling import decouple, near_product_state, verify_decoupling
from cclab.lemma_verify.directsum import (
    echo_protocol,
    hidden_index_inputs,
    oneway_information,
    round_information,
    silent_bob_protocol,
    verify_oneway_classical,
)
from cclab.lemma_verify.report import collect
from cclab.lemma_verify.shearer import (
    ShearerInstance,
    bell_factor,
    product_factor_instance,
    random_instance,
    verify_shearer,
)
from cclab.lemma_verify.toy import (
    Step,
    ToyQuantumProtocol,
    equal_inputs,
    kron_inputs,
    kron_protocols,
    qic_of,
    random_toy_protocol,
    uniform_inputs,
)
from cclab.rng import stream

TRIVIAL_PRE = PureState(RegisterSystem.of(A=1, B=1), np.ones(1))


# Shearer-type inequality


def test_bell_pairs_attain_equality():
    inst = product_factor_instance([bell_factor(), bell_factor()], k=2)
    assert mutual_information(inst.state, inst.us, inst.v) == pytest.approx(4)
    assert inst.expected_information() == pytest.approx(2, abs=1e-12)
    assert inst.bound() == pytest.approx(2, abs=1e-12)


def test_product_factors_give_zero():
    factors = [
        tensor(random_state(RegisterSystem.of(U=2), "mixed", seed=i), random_state(RegisterSystem.of(V=2), "mixed", seed=10 + i))
        for i in range(3)
    ]
    inst = product_factor_instance(factors, k=3)
    assert inst.expected_information() == pytest.approx(0, abs=1e-10)
    assert inst.bound() == pytest.approx(0, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 1000))
def test_random_instances_satisfy_inequality(seed, trial):
    assert random_instance(seed, trial).slack() >= -1e-8


def test_invalid_shearer_instances():
    with pytest.raises(DomainError):
        ShearerInstance(bell_factor(), ("U",), ("V",), 0.5)


# decoupling


def _exact_product(seed):
    left = random_state(RegisterSystem.of(A=2, B1=2), "pure", seed=seed)
    right = random_state(RegisterSystem.of(B2=2, C=2), "pure", seed=seed + 1)
    state = merge_registers(tensor(left, right).reorder(("A", "B1", "B2", "C")), {"B": ("B1", "B2")})
    return state.reorder(("A", "B", "C"))


def test_exact_product_decouples_perfectly():
    res = decouple(_exact_product(3), 2, 2)
    assert res.information == pytest.approx(0, abs=1e-10)
    assert res.overlap == pytest.approx(1, abs=1e-10)
    assert res.hellinger == pytest.approx(0, abs=1e-6)


def test_ghz_state_is_outside_the_family():
    ghz = PureState(RegisterSystem.of(A=2, B=2, C=2), np.eye(8)[[0, 7]].sum(axis=0) / math.sqrt(2))
    assert mutual_information(ghz, "A", "C") == pytest.approx(1)
    with pytest.raises(DomainError):
        decouple(ghz, 2, 2)


def test_bell_between_a_and_c_is_rejected():
    bell_ac = tensor(
        PureState(RegisterSystem.of(A=2, C=2), np.array([1, 0, 0, 1]) / math.sqrt(2)),
        PureState.basis(RegisterSystem.of(B=4), 0),
    ).reorder(("A", "B", "C"))
    assert mutual_information(bell_ac, "A", "C") == pytest.approx(2)
    with pytest.raises(DomainError):
        decouple(bell_ac, 2, 2)


def test_small_purifiers_are_rejected():
    with pytest.raises(DomainError):
        decouple(_exact_product(1), 1, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.floats(0, 0.15))
def test_near_product_instances_decouple(seed, eta):
    psi = near_product_state(stream(seed, "np"), eta)
    if mutual_information(psi, "A", "C") <= 0.5:
        res = decouple(psi, 2, 2)
        assert res.overlap >= 1 - res.information - 1e-8
        assert res.hellinger <= math.sqrt(max(res.information, 0.0)) + 1e-8
        assert res.slack() >= -1e-8


# one-way direct sum


def test_first_bit_message_information():
    p = one_message_protocol(lambda x, s: x[0], 1)
    assert oneway_information(p, hidden_index_inputs(2)) == pytest.approx(0.5, abs=1e-12)


def test_constant_message_information():
    p = one_message_protocol(lambda x, s: "0", 1)
    assert oneway_information(p, hidden_index_inputs(3)) == pytest.approx(0, abs=1e-12)


def test_shared_index_message_respects_bound():
    for n in (2, 3, 4):
        p = one_message_protocol(lambda x, s: x[s], 1, coins=CoinDomains(shared=tuple(range(n))))
        assert oneway_information(p, hidden_index_inputs(n)) <= 2 / n + 1e-10


def test_hidden_index_inputs_share_prefix():
    t = hidden_index_inputs(3)
    assert sum(w for _, w in t.items()) == pytest.approx(1)
    for (j, x, (prefix, u)), _ in t.items():
        assert prefix == x[: j - 1] and u in "01"


def test_small_exhaustive_family_passes():
    report = verify_oneway_classical(ns=(2,), lengths=(1,))
    assert report.passed and report.trials >= 16


# interactive direct sum


def test_echo_adds_no_information_but_grows_bound():
    cases = round_information(echo_protocol(), hidden_index_inputs(2), 2)
    assert [c.lhs for c in cases] == pytest.approx([0.5, 0.5], abs=1e-12)
    assert [c.rhs for c in cases] == [2, 8]


def test_silent_bob_reduces_to_one_way_bound():
    (case,) = round_information(silent_bob_protocol(2), hidden_index_inputs(4), 4)
    assert case.bits_b == 0
    assert case.rhs == pytest.approx(4 * 2 / 4)  # bits_a * 2^2 / n
    assert case.lhs <= 2 * 2 / 4 + 1e-10


# toy quantum protocols and qic


def copy_protocol():
    step = Step("A", (np.array([[1], [0]]), np.array([[0], [1]])), 1, 2)
    return ToyQuantumProtocol(2, 2, TRIVIAL_PRE, (step,))


def test_copied_bit_costs_one_bit():
    qic, qcc = qic_of(copy_protocol(), uniform_inputs())
    assert qic == pytest.approx(1, abs=1e-12)
    assert qcc == 1


def test_fixed_messages_cost_nothing():
    zero = np.array([[1], [0]])
    p = ToyQuantumProtocol(2, 2, TRIVIAL_PRE, (Step("A", (zero, zero), 1, 2),))
    assert qic_of(p, uniform_inputs())[0] == pytest.approx(0, abs=1e-12)


def test_oblivious_protocols_cost_nothing():
    for s in range(5):
        qic, _ = qic_of(random_toy_protocol(3, seed=s, oblivious=True), uniform_inputs())
        assert abs(qic) <= 1e-8


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 4))
def test_qic_at_most_twice_qcc(seed, rounds):
    qic, qcc = qic_of(random_toy_protocol(rounds, seed=seed), uniform_inputs())
    assert -1e-8 <= qic <= 2 * qcc + 1e-8


def test_qic_is_additive_under_parallel_composition():
    p = random_toy_protocol(2, seed=1, da=1, db=1)
    q = random_toy_protocol(2, seed=2, da=1, db=1)
    both = kron_protocols(p, q)
    inputs = kron_inputs(uniform_inputs(), uniform_inputs())
    total, _ = qic_of(both, inputs)
    assert total == pytest.approx(qic_of(p, uniform_inputs())[0] + qic_of(q, uniform_inputs())[0], abs=1e-9)


def test_protocol_validation():
    bad = np.array([[1], [1]])
    with pytest.raises(StateError):
        ToyQuantumProtocol(2, 2, TRIVIAL_PRE, (Step("A", (bad, bad), 1, 2),))
    zero = np.array([[1], [0]])
    with pytest.raises(DomainError):
        ToyQuantumProtocol(2, 2, TRIVIAL_PRE, (Step("B", (zero, zero), 1, 2),))
    with pytest.raises(DomainError):
        ToyQuantumProtocol(2, 2, TRIVIAL_PRE, (Step("A", (zero,), 1, 2),))


# cut and paste


def test_oblivious_protocol_has_zero_trace():
    trace = cut_and_paste_trace(random_toy_protocol(3, seed=4, oblivious=True), uniform_inputs(), equal_inputs())
    for values in (trace.eps, trace.gamma[1:], trace.delta[1:]):
        assert max(abs(v) for v in values) <= 1e-8


@pytest.mark.parametrize("seed", range(4))
def test_base_case_equalities(seed):
    trace = cut_and_paste_trace(random_toy_protocol(3, seed=seed), uniform_inputs(), equal_inputs())
    assert trace.gamma[1] == pytest.approx(trace.eps[1], abs=1e-8)
    assert trace.delta[1] == pytest.approx(trace.eps[1], abs=1e-8)
    assert trace.eps[1] > 1e-4


@pytest.mark.parametrize("rounds", [2, 3, 4])
def test_recursion_holds(rounds):
    trace, ok = verify_cut_and_paste(random_toy_protocol(rounds, seed=10 + rounds), uniform_inputs(), equal_inputs())
    assert ok, trace.to_json()
    assert len(trace.eps) == rounds + 1


def test_mismatched_marginals_are_rejected():
    skewed = ProbTable.from_weights([("X", (0, 1)), ("Y", (0, 1))], [0.7, 0.1, 0.1, 0.1])
    with pytest.raises(DomainError):
        cut_and_paste_trace(random_toy_protocol(3, seed=0), uniform_inputs(), skewed)
    with pytest.raises(DomainError):
        cut_and_paste_trace(random_toy_protocol(3, seed=0), equal_inputs(), equal_inputs())


def test_one_round_protocol_is_rejected():
    with pytest.raises(DomainError):
        cut_and_paste_trace(copy_protocol(), uniform_inputs(), equal_inputs())


# reports


def test_report_worst_seed_and_pass():
    r = collect("demo", [0.5, -0.25, 0.1], tol=1e-8)
    assert (r.max_violation, r.worst_seed, r.passed) == (0.25, 1, False)
    assert r.to_json() == {"lemma": "demo", "trials": 3, "max_violation": 0.25, "worst_seed": 1, "pass": False}


def test_small_suites_pass():
    assert verify_shearer(trials=20, seed=5).passed
    assert verify_decoupling(trials=10, seed=5).passed


def test_lemma_registry():
    assert set(LEMMAS) == {"shearer", "decoupling", "onerd", "multird", "cutpaste", "qic"}
    reports = run_lemmas("qic", trials=5, seed=1)
    assert [r.lemma for r in reports] == ["qic_sanity"] and reports[0].passed
