"""Deployment geometry, path loss, Rayleigh fading and direct-path rates.

Units throughout: bandwidth in MHz, power in mW, link gain in MHz/mW and
rate in Mbps, so that ``gain * power / bandwidth`` is a dimensionless SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .utility import alpha_utility

K_CONST = 6e6  # MHz * m^3 / mW, also absorbs the noise spectral density
PATHLOSS_EXP = 3.0
MIN_SEPARATION_M = 1.0


@dataclass(frozen=True)
class NodeState:
    id: int
    position: tuple[float, float]
    w_in: float
    p_max: float
    rho_i0: float
    r_in: float

    def __post_init__(self):
        if self.w_in < 0 or self.p_max <= 0 or self.rho_i0 < 0:
            raise ValueError(f"invalid node state {self!r}")


@dataclass(frozen=True)
class ChannelRealization:
    gains: np.ndarray
    ap_gains: np.ndarray

    @property
    def n(self) -> int:
        return len(self.ap_gains)

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=float)
        a = np.asarray(self.ap_gains, dtype=float)
        if g.shape != (len(a), len(a)):
            raise ValueError("gain matrix shape does not match ap_gains")
        if (g < 0).any() or (a < 0).any():
            raise ValueError("link gains must be nonnegative")
        if not np.array_equal(g, g.T):
            raise ValueError("inter-node gain matrix must be symmetric")


@dataclass(frozen=True)
class Deployment:
    cell_radius: float
    nodes: list[NodeState] = field(default_factory=list)
    ap_position: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for node in self.nodes:
            if math.hypot(*node.position) > self.cell_radius * (1 + 1e-12):
                raise ValueError(f"node {node.id} lies outside the cell")


def dbm_to_mw(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0)


def place_nodes(n: int, radius: float, rng: np.random.Generator,
                min_separation: float = MIN_SEPARATION_M) -> np.ndarray:
    """Draw ``n`` area-uniform points in a disk centred on the AP.

    Points closer than ``min_separation`` to the AP or to an earlier point
    are redrawn. Returns an ``(n, 2)`` array.
    """
    if n == 0:
        return np.zeros((0, 2))
    if radius == 0:
        return np.zeros((n, 2))
    if n < 0 or radius < 0:
        raise ValueError("n and radius must be nonnegative")
    pts = np.empty((n, 2))
    i = 0
    while i < n:
        r = radius * math.sqrt(rng.random())
        theta = 2 * math.pi * rng.random()
        x, y = r * math.cos(theta), r * math.sin(theta)
        if r < min_separation:
            continue
        if i and np.min(np.hypot(pts[:i, 0] - x, pts[:i, 1] - y)) < min_separation:
            continue
        pts[i] = (x, y)
        i += 1
    return pts


def mean_gain(d, k: float = K_CONST, exponent: float = PATHLOSS_EXP):
    """Mean link gain ``k * d**-exponent``; accepts scalars or arrays."""
    d_arr = np.asarray(d, dtype=float)
    if (d_arr <= 0).any():
        raise ValueError("distance must be positive (co-located nodes)")
    g = k * d_arr ** (-exponent)
    return float(g) if g.ndim == 0 else g


def mean_gains_for(positions: np.ndarray, k: float = K_CONST,
                   exponent: float = PATHLOSS_EXP) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic inter-node and node-to-AP mean gains for ``positions``."""
    pos = np.asarray(positions, dtype=float)
    n = len(pos)
    ap = mean_gain(np.hypot(pos[:, 0], pos[:, 1]), k, exponent) if n else np.zeros(0)
    gains = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    if len(iu[0]):
        d = np.hypot(*(pos[iu[0]] - pos[iu[1]]).T)
        gains[iu] = mean_gain(d, k, exponent)
        gains.T[iu] = gains[iu]
    return gains, np.atleast_1d(ap)


def sample_rayleigh_gains(mean_matrix: np.ndarray, mean_ap: np.ndarray,
                          rng: np.random.Generator) -> ChannelRealization:
    """Exponentially distributed power gains around the given means.

    Only the strict upper triangle of ``mean_matrix`` is sampled; the lower
    triangle mirrors it so the realization is reciprocal.
    """
    mean_matrix = np.asarray(mean_matrix, dtype=float)
    mean_ap = np.asarray(mean_ap, dtype=float)
    if (mean_matrix < 0).any() or (mean_ap < 0).any():
        raise ValueError("mean gains must be nonnegative")
    n = len(mean_ap)
    if mean_matrix.shape != (n, n):
        raise ValueError("mean_matrix must be N x N for N AP gains")
    iu = np.triu_indices(n, 1)
    gains = np.zeros((n, n))
    gains[iu] = rng.exponential(1.0, size=len(iu[0])) * mean_matrix[iu]
    gains.T[iu] = gains[iu]
    ap = rng.exponential(1.0, size=n) * mean_ap
    return ChannelRealization(gains, ap)


def direct_rate(w: float, p: float, rho: float) -> float:
    if w < 0 or p < 0 or rho < 0:
        raise ValueError("direct_rate arguments must be nonnegative")
    if w == 0:
        return 0.0
    snr_bw = rho * p
    x = snr_bw / w
    if math.isinf(x):
        # tiny w: log2(1 + x) = log2(snr_bw) - log2(w) to rounding, without overflow
        return w * (math.log2(snr_bw) - math.log2(w))
    return w * math.log2(1.0 + x)


def _rate_slope(w: float, snr_bw: float) -> float:
    # d/dw [w log2(1 + snr_bw / w)]
    x = snr_bw / w
    return math.log2(1.0 + x) - x / ((1.0 + x) * math.log(2.0))


def initial_allocation(ap_gains: Sequence[float], p: float, total_bandwidth: float,
                       mode: str = "equal", alpha: float = 0.0,
                       arbitrary: Sequence[float] | None = None) -> list[float]:
    """Initial per-node bandwidths before any exchange.

    ``mode`` is ``"equal"``, ``"direct_optimal"`` (maximizes the summed
    alpha-fair utility of direct rates under the total budget) or
    ``"arbitrary"`` (validates and echoes ``arbitrary``).
    """
    n = len(ap_gains)
    if total_bandwidth <= 0:
        raise ValueError("total_bandwidth must be positive")
    if mode == "equal":
        return [total_bandwidth / n] * n
    if mode == "arbitrary":
        if arbitrary is None or len(arbitrary) != n:
            raise ValueError("arbitrary allocation needs one bandwidth per node")
        if any(w < 0 for w in arbitrary) or math.fsum(arbitrary) > total_bandwidth * (1 + 1e-12):
            raise ValueError("arbitrary allocation is infeasible")
        return [float(w) for w in arbitrary]
    if mode == "direct_optimal":
        return _direct_optimal(list(ap_gains), p, total_bandwidth, alpha)
    raise ValueError(f"unknown allocation mode {mode!r}")


def _direct_optimal(ap_gains: list[float], p: float, total: float, alpha: float) -> list[float]:
    # Water-filling on the marginal utility d/dW U(rate(W)), which is strictly
    # decreasing in W; bisect on the shared multiplier.
    active = [i for i, g in enumerate(ap_gains) if g > 0]
    alloc = [0.0] * len(ap_gains)
    if not active:
        return [total / len(ap_gains)] * len(ap_gains)
    if len(active) == 1:
        alloc[active[0]] = total
        return alloc

    def marginal(w, a):
        r = w * math.log2(1.0 + a / w)
        return r ** (-alpha) * _rate_slope(w, a)

    def demand(lam, a):
        if marginal(total, a) >= lam:
            return total
        lo = total
        while marginal(lo, a) < lam:
            lo *= 0.5
            if lo < 1e-300:
                return 0.0
        return brentq(lambda w: marginal(w, a) - lam, lo, total, xtol=1e-15, rtol=1e-14)

    snrs = [ap_gains[i] * p for i in active]

    def excess(log_lam):
        lam = math.exp(log_lam)
        return math.fsum(demand(lam, a) for a in snrs) - total

    lo, hi = -50.0, 50.0
    while excess(lo) < 0:
        lo -= 50.0
    while excess(hi) > 0:
        hi += 50.0
    log_lam = brentq(excess, lo, hi, xtol=1e-14)
    ws = [demand(math.exp(log_lam), a) for a in snrs]
    scale = total / math.fsum(ws)
    for i, w in zip(active, ws):
        alloc[i] = w * scale
    return alloc


def direct_utility(ws: Sequence[float], ap_gains: Sequence[float], p: float, alpha: float) -> float:
    return math.fsum(alpha_utility(direct_rate(w, p, g), alpha) for w, g in zip(ws, ap_gains))


def build_nodes(positions: np.ndarray, channel: ChannelRealization,
                bandwidths: Sequence[float], p: float) -> list[NodeState]:
    """Node states with ids ``1..N`` from positions, channel and bandwidths."""
    return [
        NodeState(id=i + 1, position=(float(x), float(y)), w_in=float(w), p_max=p,
                  rho_i0=float(g), r_in=direct_rate(float(w), p, float(g)))
        for i, ((x, y), g, w) in enumerate(zip(positions, channel.ap_gains, bandwidths))
    ]
