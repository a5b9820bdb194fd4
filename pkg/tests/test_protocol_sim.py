import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cclab.errors import DomainError, MaxRoundsError, ProtocolError, SizeError
from cclab.protocol_sim import (
    CoinDomains,
    Message,
    Output,
    ProtocolSpec,
    Transcript,
    estimate_error,
    exact_error,
    exact_joint,
    one_message_protocol,
    run,
    schedule_of,
)
from cclab.qmath import ProbTable, classical_measures


def send_x(length=4):
    return one_message_protocol(lambda x, shared: x, length)


def fair_coin():
    return one_message_protocol(
        lambda x, shared: "",
        0,
        decide=lambda y, m, shared: shared,
        coins=CoinDomains(shared=(0, 1)),
        name="coin",
    )


def test_alice_sends_her_string():
    res = run(send_x(), ("1011", None), seed=0)
    assert res.output == "1011"
    assert res.cost.bits_a_to_b == 4
    assert res.cost.bits_b_to_a == 0
    assert res.cost.rounds == 1
    assert res.transcript.key() == (("AB", "1011"),)


def test_runs_are_deterministic_in_seed_and_trial():
    p = one_message_protocol(lambda x, s: format(s.bits("k", 8), "08b"), 8, coins=CoinDomains(shared_stream=True))
    a = run(p, ("", None), seed=3, trial=5)
    b = run(p, ("", None), seed=3, trial=5)
    assert a.transcript == b.transcript
    outs = {run(p, ("", None), seed=3, trial=t).output for t in range(20)}
    assert len(outs) > 1


def test_wrong_length_message_is_rejected():
    with pytest.raises(ProtocolError):
        run(send_x(3), ("1011", None), seed=0)
    with pytest.raises(ProtocolError):
        run(send_x(2), ("1a", None), seed=0)


def test_output_by_the_wrong_party_is_rejected():
    p = ProtocolSpec(lambda v: Output(1), lambda v: Output(0), schedule_of(("A", 0), ("B", 0)))
    with pytest.raises(ProtocolError):
        run(p, (0, 0), seed=0)


def test_schedule_without_output_raises():
    p = ProtocolSpec(lambda v: Message("1"), lambda v: Message("0"), schedule_of(("A", 1), ("B", 1)))
    with pytest.raises(MaxRoundsError):
        run(p, (0, 0), seed=0)


def test_fair_coin_error_is_one_half():
    trials = 10_000
    est = estimate_error(fair_coin(), lambda x, y: 1, lambda rng: (None, None), trials, seed=0)
    sigma = math.sqrt(0.25 / trials)
    assert abs(est.error_rate - 0.5) <= 3 * sigma
    assert est.mean.bits_a_to_b == 0


def test_exact_joint_on_four_atoms():
    inputs = ProbTable.uniform([("x", ("0", "1")), ("y", ("0", "1"))])
    joint = exact_joint(send_x(1), inputs)
    assert len(joint) == 4
    assert joint.marginal(["transcript"]).prob(lambda r: r["transcript"] == (("AB", "1"),)) == pytest.approx(0.5)
    assert exact_error(send_x(1), inputs, lambda x, y: x) == 0


def test_exact_joint_includes_coins():
    inputs = ProbTable.uniform([("x", (0,)), ("y", (0,))])
    joint = exact_joint(fair_coin(), inputs)
    assert set(joint.names) >= {"shared", "private_a", "private_b", "transcript", "output"}
    assert exact_error(fair_coin(), inputs, lambda x, y: 1) == pytest.approx(0.5)


@pytest.mark.slow
def test_exact_and_monte_carlo_agree():
    # Bob answers x AND y from one bit of x, flipping with a private coin
    p = one_message_protocol(
        lambda x, s: str(x),
        1,
        decide=lambda y, m, s: (int(m) & y) ^ (s == 3),
        coins=CoinDomains(shared=(0, 1, 2, 3)),
    )
    inputs = ProbTable.uniform([("x", (0, 1)), ("y", (0, 1))])
    exact = exact_error(p, inputs, lambda x, y: x & y)
    assert exact == pytest.approx(0.25)
    trials = 100_000
    mc = estimate_error(p, lambda x, y: x & y, lambda rng: tuple(int(v) for v in rng.integers(2, size=2)), trials, 1)
    assert abs(mc.error_rate - exact) <= 3 * math.sqrt(exact * (1 - exact) / trials)


def test_zero_error_protocol():
    est = estimate_error(send_x(3), lambda x, y: x, lambda rng: (format(int(rng.integers(8)), "03b"), None), 500, 0)
    assert est.error_rate == 0
    assert est.max.bits_a_to_b == 3


def test_message_information_is_at_most_its_length():
    inputs = ProbTable.uniform([("x", tuple(format(v, "03b") for v in range(8))), ("y", (0,))])
    for length, msg in ((1, lambda x, s: x[0]), (2, lambda x, s: x[:2]), (2, lambda x, s: x[1] + str(s)), (3, lambda x, s: x)):
        p = one_message_protocol(msg, length, coins=CoinDomains(shared=(0, 1)))
        joint = exact_joint(p, inputs)
        assert classical_measures(joint, "mi(transcript;x)") <= length + 1e-10


def test_streamed_coins_are_not_enumerable():
    p = one_message_protocol(lambda x, s: "", 0, coins=CoinDomains(shared_stream=True))
    with pytest.raises(DomainError):
        exact_joint(p, ProbTable.uniform([("x", (0,)), ("y", (0,))]))


def test_enumeration_cap():
    inputs = ProbTable.uniform([("x", tuple(range(8))), ("y", tuple(range(8)))])
    with pytest.raises(SizeError):
        exact_joint(fair_coin(), inputs, cap=10)


def test_transcript_jsonl_round_trip():
    res = run(send_x(), ("0110", None), seed=0)
    text = res.transcript.to_jsonl()
    assert Transcript.from_jsonl(text) == res.transcript
    assert text.count("\n") == 1


def ping_pong(rounds):
    def alice(v):
        return Message(format(len(v.history) % 2, "b"))

    def bob(v):
        if v.round == 2 * rounds:
            return Output(len(v.history))
        return Message("1" * v.length)

    turns = []
    for _ in range(rounds):
        turns += [("A", 1), ("B", 2)]
    return ProtocolSpec(alice, bob, schedule_of(*turns, ("B", 0)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 1000))
def test_bits_are_conserved(rounds, seed):
    res = run(ping_pong(rounds), (None, None), seed=seed)
    t = res.transcript
    assert res.cost.bits_a_to_b + res.cost.bits_b_to_a == sum(len(e.bits) for e in t.events)
    assert res.cost.bits_a_to_b == rounds
    assert res.cost.bits_b_to_a == 2 * rounds
    assert res.output == 2 * rounds


@settings(max_examples=30, deadline=None)
@given(st.text("01", min_size=1, max_size=12))
def test_message_round_trips_any_string(x):
    res = run(send_x(len(x)), (x, None), seed=0)
    assert res.output == x and res.cost.bits_a_to_b == len(x)
