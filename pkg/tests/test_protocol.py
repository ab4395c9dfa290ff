import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bexrelay import harness, netmodel, protocol
from bexrelay.matching import WeightedGraph, blossom_mwm
from bexrelay.netmodel import ChannelRealization
from bexrelay.pairsolver import PairAllocation
from bexrelay.protocol import (CENTRALIZED, DIRECT, DISTRIBUTED, CooperationGraph,
                               PairingOutcome, assemble_allocation, build_cooperation_graph,
                               classify_outage, eligible_pairs, outage_pairing,
                               outage_probability, run_be_allocation, select_pairs)
from bexrelay.utility import pair_utility_gain

P = 100.0


def network(seed, n=10, w=1.0):
    cfg = harness.ExperimentConfig(n_nodes=n, bandwidth_per_node_mhz=w)
    rng = np.random.default_rng(seed)
    _, channel, nodes = harness.draw_network(cfg, rng)
    return channel, nodes


def custom(positions, gains, ap, w=1.0):
    ch = ChannelRealization(np.array(gains, float), np.array(ap, float))
    nodes = netmodel.build_nodes(np.array(positions, float), ch, [w] * len(ap), P)
    return ch, nodes


def collinear(dists, w=1.0):
    pos = np.array([[d, 0.0] for d in dists])
    m, ap = netmodel.mean_gains_for(pos)
    return custom(pos, m, ap, w)


def test_eligibility_boundary():
    ch, nodes = custom([[10, 0], [0, 10]], [[0, 0.5], [0.5, 0]], [0.5, 0.5])
    assert sorted(eligible_pairs(ch, nodes)) == [(1, 2), (2, 1)]


def test_eligibility_weak_forwarder_uplink():
    ch, nodes = custom([[10, 0], [0, 10]], [[0, 100.0], [100.0, 0]], [0.1, 0.5])
    # node 1 cannot forward for node 2: its own uplink is weaker
    assert eligible_pairs(ch, nodes) == [(1, 2)]


def test_eligibility_collinear():
    ch, nodes = collinear([150, 400, 800])
    pairs = eligible_pairs(ch, nodes)
    assert sorted(pairs) == [(2, 1), (3, 1), (3, 2)]


def test_eligibility_radius_and_mismatch():
    ch, nodes = collinear([150, 400, 800])
    assert sorted(eligible_pairs(ch, nodes, neighbor_radius=300)) == [(2, 1)]
    with pytest.raises(ValueError):
        eligible_pairs(ch, nodes[:2])


def test_identical_gains_give_empty_graph():
    n = 4
    g = np.full((n, n), 0.3)
    np.fill_diagonal(g, 0.0)
    ch, nodes = custom([[10 * i + 5, 0] for i in range(n)], g, [0.3] * n)
    coop = build_cooperation_graph(ch, nodes)
    assert coop.graph.edges == () and coop.solves == n * (n - 1)
    out = select_pairs(coop)
    assert out.sf_pairs == [] and out.direct_set == [1, 2, 3, 4]


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0])
def test_edge_weights_recomputed(alpha):
    ch, nodes = network(3)
    by_id = {n.id: n for n in nodes}
    coop = build_cooperation_graph(ch, nodes, alpha)
    assert coop.graph.edges
    for u, v, w in coop.graph.edges:
        s, f, a = coop.roles[(u, v)]
        again = pair_utility_gain(a.r_s_be, a.r_f_be, by_id[s].r_in, by_id[f].r_in, alpha)
        assert abs(w - again) <= 1e-9


def three_node_example_graph():
    # direct rates a=6, b=3, c=7; pairing b (sender) with c gives 4 and 9
    a, b, c = 1, 2, 3
    alloc = {(b, c): PairAllocation(0.5, 1.5, 4.0, 9.0, 1.0, 3.0),
             (a, b): PairAllocation(1.0, 1.0, 6.0, 4.0, 0.0, 1.0),
             (a, c): PairAllocation(1.0, 1.0, 6.5, 7.5, 0.0, 1.0)}
    roles = {(min(s, f), max(s, f)): (s, f, al) for (s, f), al in alloc.items()}
    g = WeightedGraph([a, b, c], [(u, v, r[2].gain) for (u, v), r in roles.items()])
    nodes = [netmodel.NodeState(i, (10.0 * i, 0.0), 1.0, P, 1.0, r)
             for i, r in ((a, 6.0), (b, 3.0), (c, 7.0))]
    return CooperationGraph(g, roles), nodes


def test_three_node_example_selection_and_rates():
    coop, nodes = three_node_example_graph()
    assert max(coop.graph.edges, key=lambda e: e[2])[:2] == (2, 3)
    for mode in (CENTRALIZED, DISTRIBUTED):
        out = select_pairs(coop, mode)
        assert out.sf_pairs == [(2, 3)] and out.direct_set == [1]
    alloc = assemble_allocation(nodes, select_pairs(coop), 0.0)
    assert alloc.total_rate == 19.0
    assert protocol.direct_allocation(nodes).total_rate == 16.0
    with pytest.raises(ValueError):
        select_pairs(coop, "bogus")


def test_no_eligible_pairs_is_direct():
    n = 3
    ch, nodes = custom([[100, 0], [0, 200], [-300, 0]], np.zeros((n, n)), [1.0, 0.5, 0.2])
    for mode in (CENTRALIZED, DISTRIBUTED, DIRECT):
        alloc, out = run_be_allocation(ch, nodes, 1.0, mode)
        direct = protocol.direct_allocation(nodes, 1.0)
        assert alloc == direct and out.sf_pairs == []


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0])
def test_decomposition_identity(alpha):
    for seed in range(10):
        ch, nodes = network(seed)
        direct = protocol.direct_allocation(nodes, alpha)
        alloc, out = run_be_allocation(ch, nodes, alpha, CENTRALIZED)
        gain = alloc.total_utility - direct.total_utility
        assert abs(gain - protocol.matching_weight(out)) <= 10 * 1e-6


@given(st.integers(0, 10**6), st.sampled_from([0.0, 0.5, 1.0, 2.0]),
       st.integers(2, 14), st.floats(50.0, 800.0))
def test_network_invariants(seed, alpha, n, radius):
    ch, nodes = network(seed, n)
    ids = [x.id for x in nodes]
    tol = 1e-6
    base = protocol.direct_allocation(nodes, alpha).total_utility
    results = {}
    for mode in (CENTRALIZED, DISTRIBUTED):
        alloc, out = run_be_allocation(ch, nodes, alpha, mode, radius)
        out.check(ids)
        assert alloc.total_utility >= base - n * tol
        for x in nodes:
            assert alloc.r_be[x.id] >= x.r_in - tol
        assert math.fsum(alloc.w_be.values()) <= math.fsum(x.w_in for x in nodes) + 1e-9
        results[mode] = alloc.total_utility - base
    assert results[CENTRALIZED] >= results[DISTRIBUTED] - tol


@given(st.integers(0, 10**6), st.floats(10.0, 400.0), st.floats(0.0, 400.0))
def test_radius_monotone(seed, r1, extra):
    ch, nodes = network(seed, 12)
    small = build_cooperation_graph(ch, nodes, 0.0, neighbor_radius=r1)
    large = build_cooperation_graph(ch, nodes, 0.0, neighbor_radius=r1 + extra)
    small_edges = {e[:2] for e in small.graph.edges}
    assert small_edges <= {e[:2] for e in large.graph.edges}


def test_selection_bounds():
    for seed in range(20):
        ch, nodes = network(seed, 12)
        coop = build_cooperation_graph(ch, nodes)
        c = protocol.matching_weight(select_pairs(coop, CENTRALIZED))
        d = protocol.matching_weight(select_pairs(coop, DISTRIBUTED))
        assert c >= d >= 0.5 * c - 1e-12
        assert c == pytest.approx(blossom_mwm(coop.graph).total_weight, abs=1e-12)


def test_classify_and_probability():
    assert classify_outage([0.5, 1.2, 3.0], 1.0) == ([1], [2, 3])
    assert classify_outage({4: 0.2, 5: 0.3}, 0.0) == ([], [4, 5])
    assert classify_outage([0.1, 0.2], 1.0) == ([1, 2], [])
    assert outage_probability([2.0, 3.0], 1.0) == 0.0
    assert outage_probability([0.5, 2.0], 1.0) == 0.5
    assert outage_probability([0.5] * 3 + [2.0] * 17, 1.0) == 0.15
    with pytest.raises(ValueError):
        classify_outage([1.0], -1.0)
    with pytest.raises(ValueError):
        outage_probability([], 1.0)


def test_outage_empty_outage_set():
    ch, nodes = network(1)
    out, rates = outage_pairing(ch, nodes, 0.0)
    assert out.sf_pairs == [] and rates == {x.id: x.r_in for x in nodes}


def test_outage_forced_pair():
    ch, nodes = collinear([100, 700])
    r_min = 1.2 * nodes[1].r_in
    assert nodes[1].r_in < r_min <= nodes[0].r_in
    out, rates = outage_pairing(ch, nodes, r_min)
    assert out.sf_pairs == [(2, 1)]
    assert outage_probability(rates, r_min) == 0.0
    assert outage_probability({x.id: x.r_in for x in nodes}, r_min) == 0.5


def test_outage_direct_mode_passthrough():
    ch, nodes = network(2, 20)
    out, rates = outage_pairing(ch, nodes, 1.0, mode=DIRECT)
    assert out.sf_pairs == [] and rates == {x.id: x.r_in for x in nodes}


@pytest.mark.parametrize("mode", [CENTRALIZED, DISTRIBUTED])
def test_outage_accounting(mode):
    for seed in range(15):
        ch, nodes = network(seed, 20)
        r_min = float(np.quantile([x.r_in for x in nodes], 0.3))
        out, rates = outage_pairing(ch, nodes, r_min, 500.0, mode)
        out.check([x.id for x in nodes])
        before, fine = classify_outage({x.id: x.r_in for x in nodes}, r_min)
        after, _ = classify_outage(rates, r_min)
        assert len(after) == len(before) - len(out.sf_pairs)
        for i in fine:
            assert rates[i] >= r_min
        for s, f in out.sf_pairs:
            assert s in before and f in fine


def test_alpha_validation():
    ch, nodes = network(0)
    with pytest.raises(ValueError):
        build_cooperation_graph(ch, nodes, -1.0)


def test_partition_check_rejects():
    with pytest.raises(AssertionError):
        PairingOutcome([(1, 2)], [2, 3]).check([1, 2, 3])
