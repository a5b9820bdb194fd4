import json
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cclab.errors import DomainError, SizeError
from cclab.pointer_jumping import (
    NodeFunction,
    PJInstance,
    PJParams,
    consistent_children,
    enumerate_distribution,
    evaluate_task,
    follow_path_protocol,
    hidden_layer_law,
    in_fooling_support,
    is_consistent,
    pj_inputs,
    pj_task,
    sample_fooling,
    sample_hard,
    sample_mixture,
    sampler_table,
    satisfies_event,
    target_string,
    check_marginal_equality,
)
from cclab.protocol_sim import run
from cclab.rng import stream


def nodes(params, assignment, default=0):
    """Node function from ``{string: value}`` with every other node at ``default``."""
    v = np.full(params.num_nodes, default)
    for z, val in assignment.items():
        v[params.rank(tuple(int(c) for c in z))] = val
    return NodeFunction(params, v)


def all_strings(params, lo, hi):
    return [z for d in range(lo, hi + 1) for z in product(range(params.k), repeat=d)]


# sizes and indexing


def test_tree_sizes():
    p = PJParams(2, 3)
    assert (p.num_nodes, p.num_leaves) == (7, 8)
    assert p.message_width == 1
    assert PJParams(3, 2).message_width == 2


def test_rank_is_level_order():
    p = PJParams(3, 3)
    ranks = [p.rank(z) for d in range(p.n) for z in product(range(3), repeat=d)]
    assert ranks == list(range(p.num_nodes))
    assert p.string(2, p.rank((2, 1)) - p.level_start(2)) == (2, 1)


def test_invalid_params():
    with pytest.raises(DomainError):
        PJParams(1, 3)
    with pytest.raises(DomainError):
        PJParams(2, 0)
    with pytest.raises(SizeError):
        PJParams(2, 30)


# consistency


def test_root_layer_consistency():
    p = PJParams(2, 3)
    x, y = nodes(p, {"": 1}), nodes(p, {"": 0})
    for z in all_strings(p, 1, 3):
        assert is_consistent(z, x, y, 0) == (z[0] == 1)


def test_consistent_set_size():
    p = PJParams(2, 3)
    rng = stream(0, "sizes")
    for _ in range(5):
        x = NodeFunction(p, rng.integers(0, 2, size=p.num_nodes))
        y = NodeFunction(p, rng.integers(0, 2, size=p.num_nodes))
        s = consistent_children(x, y, 1)
        members = [z for z in all_strings(p, 2, 3) if is_consistent(z, x, y, 1)]
        assert s.size() == 6 == len(members)
        assert sorted(s.members()) == sorted(members)
        assert all(z in s for z in members)


def test_target_string_hand_example():
    p = PJParams(2, 2)
    x, y = nodes(p, {"": 1, "1": 1}), nodes(p, {"": 0, "1": 1})
    assert target_string(x, y) == (1, 0)


def test_target_string_of_zero_sums():
    p = PJParams(3, 3)
    zero = nodes(p, {})
    assert target_string(zero, zero) == (0, 0, 0)
    xv = stream(1, "neg").integers(0, 3, size=p.num_nodes)
    assert target_string(NodeFunction(p, xv), NodeFunction(p, (-xv) % 3)) == (0, 0, 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 4), st.integers(1, 3), st.integers(0, 2**32))
def test_target_is_always_consistent(k, n, seed):
    p = PJParams(k, n)
    inst = sample_fooling(p, stream(seed, "target"))
    z = target_string(inst.x, inst.y)
    assert len(z) == n
    assert is_consistent(z, inst.x, inst.y, inst.j)


# samplers


def test_single_level_tree_has_j_zero():
    p = PJParams(2, 1)
    seen = set()
    for i in range(200):
        inst = sample_fooling(p, stream(0, "n1", i))
        assert inst.j == 0
        seen.add((inst.x[()], inst.y[()]))
    assert seen == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_fooling_agreement_rates():
    p = PJParams(2, 3)
    below = above = total = 0
    for i in range(10_000):
        inst = sample_fooling(p, stream(0, "agree", i))
        c = p.level_start(inst.j)
        assert np.array_equal(inst.x.values[:c], inst.y.values[:c])
        z = c + int(stream(1, "pick", i).integers(p.num_nodes - c))
        above += inst.x.values[z] == inst.y.values[z]
        total += 1
    assert abs(above / total - 0.5) <= 0.02


@pytest.mark.parametrize("k,n", [(2, 2), (2, 3), (3, 2), (2, 4)])
@pytest.mark.parametrize("b", [0, 1])
def test_hard_samples_satisfy_their_event(k, n, b):
    p = PJParams(k, n)
    for i in range(300):
        inst = sample_hard(p, b, stream(2, "hard", k, n, b, i))
        assert satisfies_event(inst, b)
        assert in_fooling_support(inst)
        assert evaluate_task(inst) == b


def test_task_is_balanced_under_fooling():
    p = PJParams(2, 3)
    mean = np.mean([evaluate_task(sample_fooling(p, stream(3, "bal", i))) for i in range(10_000)])
    assert abs(mean - 0.5) <= 0.02


def test_mixture_labels_match_task():
    p = PJParams(3, 2)
    for i in range(200):
        b, inst = sample_mixture(p, stream(4, "mix", i))
        assert evaluate_task(inst) == b


def test_hidden_layer_law_is_a_distribution():
    law = hidden_layer_law(PJParams(2, 4))
    assert law.sum() == pytest.approx(1)
    assert np.all(np.diff(law) > 0)


# exact laws


def test_fooling_table_has_uniform_layer():
    p = enumerate_distribution(PJParams(2, 2), "p")
    assert p.marginal(["j"]).weights.tolist() == pytest.approx([0.5, 0.5])


def test_hard_support_lies_in_event():
    params = PJParams(2, 2)
    table = enumerate_distribution(params, "mu0")
    for (j, x, y, f, g), w in table.items():
        assert w > 0
        assert satisfies_event(PJInstance.from_arrays(params, j, x, y, f, g), 0)


@pytest.mark.parametrize("which", ["p", "mu0", "mu1"])
def test_sampler_law_equals_enumeration(which):
    params = PJParams(2, 2)
    assert sampler_table(params, which).max_abs_diff(enumerate_distribution(params, which)) <= 1e-12


def test_events_are_equally_likely():
    params = PJParams(2, 2)
    p = enumerate_distribution(params, "p")

    def inst(r):
        return PJInstance.from_arrays(params, r["j"], r["x"], r["y"], r["f"], r["g"])

    e0 = p.prob(lambda r: satisfies_event(inst(r), 0))
    e1 = p.prob(lambda r: satisfies_event(inst(r), 1))
    assert e0 > 0
    assert e0 / (e0 + e1) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_marginal_equality_holds(n):
    assert check_marginal_equality(PJParams(2, n))


def _first_leaf(params, inst):
    members = consistent_children(inst.x, inst.y, inst.j).members()
    return next(z for z in members if len(z) == params.n), members


def test_marginal_equality_detects_a_one_sided_leaf_constraint():
    params = PJParams(2, 2)

    def corrupted(inst):
        # on the first consistent leaf demand f = 0 instead of f xor g = 0
        leaf, members = _first_leaf(params, inst)
        return inst.f[leaf] == 0 and all(
            (inst.x[z] == inst.y[z]) if len(z) < params.n else (inst.f[z] ^ inst.g[z]) == 0 for z in members
        )

    bad = enumerate_distribution(params, "mu0", event=corrupted)
    assert not check_marginal_equality(params, tables={"mu0": bad})


def test_dropping_a_two_party_leaf_constraint_keeps_marginals():
    # f xor g = b alone leaves both one-sided laws uniform, so the check cannot see it
    params = PJParams(2, 2)

    def dropped(inst):
        leaf, members = _first_leaf(params, inst)
        return all(
            (inst.x[z] == inst.y[z]) if len(z) < params.n else (inst.f[z] ^ inst.g[z]) == 0
            for z in members
            if z != leaf
        )

    table = enumerate_distribution(params, "mu0", event=dropped)
    assert table.max_abs_diff(enumerate_distribution(params, "mu0")) > 0
    assert check_marginal_equality(params, tables={"mu0": table})


def test_enumeration_cap():
    with pytest.raises(SizeError):
        enumerate_distribution(PJParams(2, 3), "p")


# serialisation


def test_instance_json_round_trip():
    inst = sample_fooling(PJParams(3, 2), 5)
    data = json.loads(json.dumps(inst.to_json()))
    back = PJInstance.from_json(data)
    assert back.key() == inst.key()
    assert set(data["x"]) == {"", "0", "1", "2"}


# follow-path protocol


@pytest.mark.parametrize("k,n,bits", [(2, 3, 7), (2, 4, 9), (3, 2, 9)])
def test_follow_path_cost_and_correctness(k, n, bits):
    params = PJParams(k, n)
    protocol = follow_path_protocol(params)
    for i in range(100):
        _, inst = sample_mixture(params, stream(6, "follow", k, n, i))
        res = run(protocol, pj_inputs(inst), seed=0, task=pj_task)
        assert res.output == evaluate_task(inst)
        assert res.cost.bits_a_to_b + res.cost.bits_b_to_a == bits


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(1, 3), st.integers(0, 2**32))
def test_follow_path_on_arbitrary_instances(k, n, seed):
    params = PJParams(k, n)
    inst = sample_fooling(params, stream(seed, "any"))
    res = run(follow_path_protocol(params), pj_inputs(inst), seed=0)
    assert res.output == evaluate_task(inst)
    assert res.cost.bits_a_to_b + res.cost.bits_b_to_a == 2 * n * params.message_width + 1
