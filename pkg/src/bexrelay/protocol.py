"""Network-level bandwidth-exchange operation.

Eligibility screening, cooperation graph, centralized (blossom) or distributed
(local greedy) pair selection, per-pair allocation and the outage-reduction
pairing. Node ids are ``1..N``; channel arrays are indexed by ``id - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .matching import (EDGE_THRESHOLD, MessageTrace, WeightedGraph,
                       bipartite_max_matching, blossom_mwm, greedy_local_mwm)
from .netmodel import ChannelRealization, NodeState
from .pairsolver import (DEFAULT_TOL, PairAllocation, PairProblem, solve_alpha_fair,
                         solve_minrate_feasible)
from .utility import alpha_utility, check_alpha

CENTRALIZED = "centralized"
DISTRIBUTED = "distributed"
DIRECT = "direct"


@dataclass
class PairingOutcome:
    sf_pairs: list[tuple[int, int]]
    direct_set: list[int]
    allocations: dict[tuple[int, int], PairAllocation] = field(default_factory=dict)
    trace: MessageTrace | None = None

    def check(self, node_ids: Sequence[int]) -> None:
        used = [x for pair in self.sf_pairs for x in pair] + list(self.direct_set)
        if sorted(used) != sorted(node_ids) or len(set(used)) != len(used):
            raise AssertionError("pairs and direct set must partition the nodes")
        if 2 * len(self.sf_pairs) + len(self.direct_set) != len(node_ids):
            raise AssertionError("2K + L != N")


@dataclass
class NetworkAllocation:
    w_be: dict[int, float]
    r_be: dict[int, float]
    total_utility: float
    total_rate: float


@dataclass
class CooperationGraph:
    """Utility-gain graph plus, per edge, the chosen roles and allocation."""
    graph: WeightedGraph
    roles: dict[tuple[int, int], tuple[int, int, PairAllocation]]
    solves: int = 0


def _distance(a: NodeState, b: NodeState) -> float:
    return math.hypot(a.position[0] - b.position[0], a.position[1] - b.position[1])


def eligible_pairs(channel: ChannelRealization, nodes: Sequence[NodeState],
                   neighbor_radius: float = math.inf) -> list[tuple[int, int]]:
    """Directed ``(sender, forwarder)`` candidates.

    ``u`` may forward for ``v`` when ``min(rho_uv, rho_u0) >= rho_v0`` and the
    two are within ``neighbor_radius`` metres.
    """
    if channel.n != len(nodes):
        raise ValueError("channel and node list disagree on N")
    out = []
    for v in nodes:
        for u in nodes:
            if u.id == v.id:
                continue
            rho_uv = channel.gains[u.id - 1, v.id - 1]
            if min(rho_uv, channel.ap_gains[u.id - 1]) < channel.ap_gains[v.id - 1]:
                continue
            if _distance(u, v) > neighbor_radius:
                continue
            out.append((v.id, u.id))
    return out


def pair_problem(channel: ChannelRealization, sender: NodeState, forwarder: NodeState,
                 alpha) -> PairProblem:
    return PairProblem(
        w_s_in=sender.w_in, w_f_in=forwarder.w_in, p=sender.p_max,
        rho_s0=float(channel.ap_gains[sender.id - 1]),
        rho_f0=float(channel.ap_gains[forwarder.id - 1]),
        rho_sf=float(channel.gains[sender.id - 1, forwarder.id - 1]),
        alpha=alpha, r_s_in=sender.r_in, r_f_in=forwarder.r_in)


def build_cooperation_graph(channel: ChannelRealization, nodes: Sequence[NodeState],
                            alpha: float = 0.0, tol: float = DEFAULT_TOL,
                            neighbor_radius: float = math.inf) -> CooperationGraph:
    alpha = check_alpha(alpha)
    if alpha >= 1 and any(n.r_in <= 0 for n in nodes):
        raise ValueError("alpha >= 1 requires positive initial rates")
    by_id = {n.id: n for n in nodes}
    best: dict[tuple[int, int], tuple[int, int, PairAllocation]] = {}
    solves = 0
    for s, f in eligible_pairs(channel, nodes, neighbor_radius):
        alloc = solve_alpha_fair(pair_problem(channel, by_id[s], by_id[f], alpha), tol)
        solves += 1
        key = (min(s, f), max(s, f))
        # keep the better orientation; the lower sender id wins exact ties
        if key not in best or alloc.gain > best[key][2].gain or (
                alloc.gain == best[key][2].gain and s < best[key][0]):
            best[key] = (s, f, alloc)
    roles = {k: v for k, v in best.items() if v[2].gain > EDGE_THRESHOLD}
    graph = WeightedGraph([n.id for n in nodes],
                          [(a, b, r[2].gain) for (a, b), r in sorted(roles.items())])
    return CooperationGraph(graph, roles, solves)


def select_pairs(coop: CooperationGraph, mode: str = CENTRALIZED) -> PairingOutcome:
    trace = None
    if mode == CENTRALIZED:
        m = blossom_mwm(coop.graph)
    elif mode == DISTRIBUTED:
        m, trace = greedy_local_mwm(coop.graph)
    else:
        raise ValueError(f"unknown selection mode {mode!r}")
    pairs, allocs = [], {}
    for a, b, _ in m.edges:
        s, f, alloc = coop.roles[(a, b)]
        pairs.append((s, f))
        allocs[(s, f)] = alloc
    matched = {x for pair in pairs for x in pair}
    direct = [v for v in coop.graph.vertices if v not in matched]
    return PairingOutcome(pairs, direct, allocs, trace)


def matching_weight(outcome: PairingOutcome) -> float:
    return math.fsum(a.gain for a in outcome.allocations.values())


def assemble_allocation(nodes: Sequence[NodeState], outcome: PairingOutcome,
                        alpha: float = 0.0) -> NetworkAllocation:
    """Per-node bandwidths and rates; direct nodes keep their initial values."""
    w = {n.id: n.w_in for n in nodes}
    r = {n.id: n.r_in for n in nodes}
    for (s, f), alloc in outcome.allocations.items():
        w[s], w[f] = alloc.w_s_be, alloc.w_f_be
        r[s], r[f] = alloc.r_s_be, alloc.r_f_be
    util = math.fsum(alpha_utility(r[n.id], alpha) for n in nodes)
    return NetworkAllocation(w, r, util, math.fsum(r.values()))


def direct_allocation(nodes: Sequence[NodeState], alpha: float = 0.0) -> NetworkAllocation:
    return assemble_allocation(nodes, PairingOutcome([], [n.id for n in nodes]), alpha)


def run_be_allocation(channel: ChannelRealization, nodes: Sequence[NodeState],
                      alpha: float = 0.0, mode: str = CENTRALIZED,
                      neighbor_radius: float = math.inf,
                      tol: float = DEFAULT_TOL) -> tuple[NetworkAllocation, PairingOutcome]:
    """Cooperation graph, pair selection and per-pair allocation in one call.

    The centralized mode ignores ``neighbor_radius``.
    """
    if mode == DIRECT:
        return direct_allocation(nodes, alpha), PairingOutcome([], [n.id for n in nodes])
    radius = math.inf if mode == CENTRALIZED else neighbor_radius
    coop = build_cooperation_graph(channel, nodes, alpha, tol, radius)
    outcome = select_pairs(coop, mode)
    return assemble_allocation(nodes, outcome, alpha), outcome


# ---------------------------------------------------------------------------
# Outage reduction

def classify_outage(rates: dict[int, float] | Sequence[float],
                    r_min: float) -> tuple[list, list]:
    if r_min < 0:
        raise ValueError("r_min must be nonnegative")
    items = rates.items() if isinstance(rates, dict) else enumerate(rates, 1)
    out, ok = [], []
    for i, r in items:
        (out if r < r_min else ok).append(i)
    return out, ok


def outage_probability(rates: dict[int, float] | Sequence[float], r_min: float) -> float:
    values = list(rates.values()) if isinstance(rates, dict) else list(rates)
    if not values:
        raise ValueError("no rates given")
    return sum(1 for r in values if r < r_min) / len(values)


def _snap(r: float, r_min: float) -> float:
    # the kernel lands on r_min up to rounding; keep the boundary exact
    return r_min if r < r_min and r_min - r <= 1e-9 * max(1.0, r_min) else r


def outage_pairing(channel: ChannelRealization, nodes: Sequence[NodeState], r_min: float,
                   neighbor_radius: float = math.inf, mode: str = CENTRALIZED,
                   tol: float = DEFAULT_TOL) -> tuple[PairingOutcome, dict[int, float]]:
    """Pair outage senders with non-outage forwarders by maximum matching.

    An edge exists when the sender may use the forwarder and the pair can
    hold both rates at ``r_min`` or above. Returns the outcome and the
    post-pairing per-node rates.
    """
    if mode == DIRECT:
        return PairingOutcome([], [n.id for n in nodes]), {n.id: n.r_in for n in nodes}
    radius = math.inf if mode == CENTRALIZED else neighbor_radius
    by_id = {n.id: n for n in nodes}
    outage, fine = classify_outage({n.id: n.r_in for n in nodes}, r_min)
    outage_set, fine_set = set(outage), set(fine)
    feasible: dict[tuple[int, int], PairAllocation] = {}
    if outage_set and fine_set:
        for s, f in eligible_pairs(channel, nodes, radius):
            if s in outage_set and f in fine_set:
                alloc = solve_minrate_feasible(pair_problem(channel, by_id[s], by_id[f], 0.0),
                                               r_min, tol)
                if alloc is not None:
                    feasible[(s, f)] = alloc
    m = bipartite_max_matching(outage, fine, list(feasible))
    pairs = [(s, f) for s, f, _ in m.edges]
    rates = {n.id: n.r_in for n in nodes}
    allocs = {}
    for s, f in pairs:
        a = feasible[(s, f)]
        a = PairAllocation(a.w_s_be, a.w_f_be, _snap(a.r_s_be, r_min), _snap(a.r_f_be, r_min),
                           a.r_c, a.gain)
        allocs[(s, f)] = a
        rates[s], rates[f] = a.r_s_be, a.r_f_be
    matched = {x for p in pairs for x in p}
    outcome = PairingOutcome(pairs, [n.id for n in nodes if n.id not in matched], allocs)
    return outcome, rates


def rates_array(rates: dict[int, float]) -> np.ndarray:
    return np.array([rates[k] for k in sorted(rates)])
