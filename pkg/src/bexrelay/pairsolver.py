"""Resource allocation inside one sender-forwarder pair.

The sender ``s`` pays the forwarder ``f`` with bandwidth; ``f`` decodes the
sender and forwards ``r_c`` Mbps of resolution information to the AP next to
its own traffic. Feasible rates obey

    r_s <= min(R_sf(w_s), R_s0(w_s) + r_c)
    r_c + r_f <= R_f0(w_f)
    w_s + w_f <= ws_in + wf_in

The heavy lifting is in a compiled kernel (``_pairkernel``) with a pure-Python
twin used when the extension is not built or ``BEXRELAY_PURE_PYTHON=1``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .netmodel import direct_rate
from .utility import MAXMIN, alpha_utility, check_alpha, pair_utility_gain

if os.environ.get("BEXRELAY_PURE_PYTHON"):
    from . import _pairkernel_py as _kernel
    BACKEND = "python"
else:
    try:
        from . import _pairkernel as _kernel
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _pairkernel_py as _kernel
        BACKEND = "python"

DEFAULT_TOL = 1e-6


class PreconditionError(ValueError):
    """Raised for pair instances outside the solver's domain."""


@dataclass(frozen=True)
class PairProblem:
    w_s_in: float
    w_f_in: float
    p: float
    rho_s0: float
    rho_f0: float
    rho_sf: float
    alpha: float | str = 0.0
    r_s_in: float | None = None
    r_f_in: float | None = None

    def __post_init__(self):
        # initial rates follow from the other fields unless supplied
        if self.r_s_in is None:
            object.__setattr__(self, "r_s_in", direct_rate(self.w_s_in, self.p, self.rho_s0))
        if self.r_f_in is None:
            object.__setattr__(self, "r_f_in", direct_rate(self.w_f_in, self.p, self.rho_f0))

    @property
    def w_total(self) -> float:
        return self.w_s_in + self.w_f_in

    def validate(self) -> None:
        if min(self.w_s_in, self.w_f_in, self.rho_s0, self.rho_f0, self.rho_sf) < 0 or self.p <= 0:
            raise PreconditionError("bandwidths and gains must be nonnegative, power positive")
        if self.rho_sf < self.rho_s0:
            raise PreconditionError("relay link weaker than the sender's direct link")
        if self.rho_f0 < self.rho_s0:
            raise PreconditionError("forwarder uplink weaker than the sender's direct link")
        if self.alpha != MAXMIN:
            a = check_alpha(self.alpha)
            if a >= 1 and (self.r_s_in <= 0 or self.r_f_in <= 0):
                raise PreconditionError("alpha >= 1 needs positive initial rates")


@dataclass(frozen=True)
class PairAllocation:
    """Optimized bandwidths (MHz) and rates (Mbps) of one pair.

    ``gain`` is the objective improvement over the initial point: utility
    gain for alpha-fair, min-rate gain for max-min, sum-rate gain for the
    minimum-rate problem.
    """
    w_s_be: float
    w_f_be: float
    r_s_be: float
    r_f_be: float
    r_c: float
    gain: float

    def rates(self) -> tuple[float, float]:
        return self.r_s_be, self.r_f_be


def link_rates(w_s: float, w_f: float, problem: PairProblem) -> tuple[float, float, float]:
    """``(R_sf, R_s0, R_f0)`` at the given bandwidths."""
    if w_s < 0 or w_f < 0:
        raise ValueError("bandwidths must be nonnegative")
    p = problem.p
    return (direct_rate(w_s, p, problem.rho_sf), direct_rate(w_s, p, problem.rho_s0),
            direct_rate(w_f, p, problem.rho_f0))


def check_allocation(problem: PairProblem, alloc: PairAllocation, tol: float = 1e-9,
                     r_floor: tuple[float, float] | None = None) -> list[str]:
    """Names of violated feasibility conditions (empty when feasible)."""
    bad = []
    if alloc.w_s_be < -tol or alloc.w_f_be < -tol:
        bad.append("negative bandwidth")
    if alloc.w_s_be + alloc.w_f_be > problem.w_total + tol:
        bad.append("bandwidth budget")
    r_sf, r_s0, r_f0 = link_rates(max(alloc.w_s_be, 0.0), max(alloc.w_f_be, 0.0), problem)
    if alloc.r_s_be > min(r_sf, r_s0 + alloc.r_c) + tol:
        bad.append("sender rate region")
    if alloc.r_c + alloc.r_f_be > r_f0 + tol or alloc.r_c < -tol:
        bad.append("forwarder rate region")
    floor_s, floor_f = r_floor if r_floor is not None else (problem.r_s_in, problem.r_f_in)
    if alloc.r_s_be < floor_s - tol:
        bad.append("sender rate floor")
    if alloc.r_f_be < floor_f - tol:
        bad.append("forwarder rate floor")
    return bad


def initial_point(problem: PairProblem) -> PairAllocation:
    return PairAllocation(problem.w_s_in, problem.w_f_in, problem.r_s_in, problem.r_f_in, 0.0, 0.0)


def _run(problem: PairProblem, obj: int, alpha: float, r_min: float):
    return _kernel.solve_pair(
        float(problem.w_s_in), float(problem.w_f_in), float(problem.p),
        float(problem.rho_s0), float(problem.rho_f0), float(problem.rho_sf),
        float(problem.r_s_in), float(problem.r_f_in), float(alpha), obj, float(r_min))


def _check_tol(tol):
    if not tol > 0:
        raise ValueError("tol must be positive")


def solve_alpha_fair(problem: PairProblem, tol: float = DEFAULT_TOL) -> PairAllocation:
    """Maximize the pair's alpha-fair utility gain without lowering either rate."""
    _check_tol(tol)
    problem.validate()
    if problem.alpha == MAXMIN:
        return solve_maxmin(problem, tol)
    alpha = check_alpha(problem.alpha)
    _, _, w_s, w_f, r_s, r_f, r_c, _ = _run(problem, _kernel.OBJ_ALPHA, alpha, 0.0)
    gain = pair_utility_gain(r_s, r_f, problem.r_s_in, problem.r_f_in, alpha)
    return PairAllocation(w_s, w_f, r_s, r_f, r_c, gain)


def solve_maxmin(problem: PairProblem, tol: float = DEFAULT_TOL) -> PairAllocation:
    """Maximize ``min(r_s, r_f)`` without lowering either rate."""
    _check_tol(tol)
    problem.validate()
    _, _, w_s, w_f, r_s, r_f, r_c, value = _run(problem, _kernel.OBJ_MAXMIN, 0.0, 0.0)
    return PairAllocation(w_s, w_f, r_s, r_f, r_c, value - min(problem.r_s_in, problem.r_f_in))


def solve_minrate_feasible(problem: PairProblem, r_min: float,
                           tol: float = DEFAULT_TOL) -> PairAllocation | None:
    """Max sum rate with both rates at least ``r_min``; ``None`` if impossible.

    The initial-rate floors are replaced by ``r_min`` here, so the bandwidth
    may flow either way.
    """
    _check_tol(tol)
    if r_min < 0:
        raise ValueError("r_min must be nonnegative")
    problem.validate()
    ok, _, w_s, w_f, r_s, r_f, r_c, value = _run(problem, _kernel.OBJ_MINRATE, 0.0, r_min)
    if not ok:
        return None
    return PairAllocation(w_s, w_f, r_s, r_f, r_c, value - (problem.r_s_in + problem.r_f_in))


def solve(problem: PairProblem, objective: str = "alpha_fair", r_min: float = 0.0,
          tol: float = DEFAULT_TOL) -> PairAllocation | None:
    if objective == "alpha_fair":
        return solve_alpha_fair(problem, tol)
    if objective == "maxmin":
        return solve_maxmin(problem, tol)
    if objective == "sum_with_minrate":
        return solve_minrate_feasible(problem, r_min, tol)
    raise ValueError(f"unknown objective {objective!r}")


# ---------------------------------------------------------------------------
# Exhaustive grid oracle, independent of the kernel.

def _grid_rate(w, snr_bw):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = w * np.log2(1.0 + snr_bw / w)
    return np.where(w > 0, r, 0.0)


def _grid_util(r, alpha):
    with np.errstate(divide="ignore", invalid="ignore"):
        if alpha == 1:
            return np.log(r)
        return np.power(r, 1.0 - alpha) / (1.0 - alpha)


def brute_force_oracle(problem: PairProblem, objective: str = "alpha_fair",
                       grid_n: int = 2000, r_min: float = 0.0,
                       chunk: int = 200) -> PairAllocation | None:
    """Best feasible point of a ``grid_n x grid_n`` grid over ``(w_s, r_c)``.

    ``w_f`` takes the rest of the pair budget and ``r_c`` spans
    ``[0, R_f0(w_f) - floor_f]``, the part of ``[0, R_f0(w_f)]`` that can
    meet the forwarder's rate floor. For the alpha-fair and max-min objectives the initial
    point is always feasible and is added to the candidates. Returns ``None``
    when no grid point satisfies the minimum-rate constraints.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    p = problem.p
    W = problem.w_total
    s_floor, f_floor = ((r_min, r_min) if objective == "sum_with_minrate"
                        else (problem.r_s_in, problem.r_f_in))
    alpha = None
    if objective == "alpha_fair":
        alpha = check_alpha(problem.alpha)
    elif objective not in ("maxmin", "sum_with_minrate"):
        raise ValueError(f"unknown objective {objective!r}")

    def score(rs, rf):
        if objective == "alpha_fair":
            return (_grid_util(rs, alpha) - alpha_utility(problem.r_s_in, alpha)) + \
                   (_grid_util(rf, alpha) - alpha_utility(problem.r_f_in, alpha))
        if objective == "maxmin":
            return np.minimum(rs, rf) - min(problem.r_s_in, problem.r_f_in)
        return rs + rf - (problem.r_s_in + problem.r_f_in)

    best_val, best = -np.inf, None
    if objective != "sum_with_minrate":
        best_val = float(score(np.array(problem.r_s_in), np.array(problem.r_f_in)))
        best = (problem.w_s_in, problem.w_f_in, problem.r_s_in, problem.r_f_in, 0.0)

    ws_all = np.linspace(0.0, W, grid_n)
    frac = np.linspace(0.0, 1.0, grid_n)
    for start in range(0, grid_n, chunk):
        ws = ws_all[start:start + chunk]
        wf = np.maximum(W - ws, 0.0)
        r_sf = _grid_rate(ws, problem.rho_sf * p)[:, None]
        r_s0 = _grid_rate(ws, problem.rho_s0 * p)[:, None]
        r_f0 = _grid_rate(wf, problem.rho_f0 * p)[:, None]
        # r_c above R_f0 - f_floor forces r_f below its floor, so the grid
        # covers only the span where the forwarder constraint can hold
        rc = np.maximum(r_f0 - f_floor, 0.0) * frac[None, :]
        rs = np.minimum(r_sf, r_s0 + rc)
        rf = r_f0 - rc
        ok = (rs >= s_floor) & (rf >= f_floor)
        if not ok.any():
            continue
        val = np.where(ok, score(rs, rf), -np.inf)
        idx = np.unravel_index(np.argmax(val), val.shape)
        if val[idx] > best_val:
            best_val = float(val[idx])
            i, j = idx
            best = (float(ws[i]), float(wf[i]), float(rs[i, j]), float(rf[i, j]), float(rc[i, j]))
    if best is None:
        return None
    return PairAllocation(*best, gain=best_val)


def objective_value(problem: PairProblem, alloc: PairAllocation, objective: str) -> float:
    """Raw objective of an allocation (used to compare solver and oracle)."""
    if objective == "alpha_fair":
        a = check_alpha(problem.alpha)
        return alpha_utility(alloc.r_s_be, a) + alpha_utility(alloc.r_f_be, a)
    if objective == "maxmin":
        return min(alloc.r_s_be, alloc.r_f_be)
    if objective == "sum_with_minrate":
        return alloc.r_s_be + alloc.r_f_be
    raise ValueError(f"unknown objective {objective!r}")


def inner_value(problem: PairProblem, w_s: float) -> float:
    """Alpha-fair objective maximized over the relayed rate at fixed ``w_s``.

    ``-inf`` where no relayed rate is feasible. Uses a bounded numerical
    search in ``r_c`` rather than the kernel's closed form, so it can serve
    as an independent concavity probe.
    """
    a = check_alpha(problem.alpha)
    w_f = problem.w_f_in + (problem.w_s_in - w_s)
    r_sf, r_s0, r_f0 = link_rates(w_s, max(w_f, 0.0), problem)
    lo = max(0.0, problem.r_s_in - r_s0)
    hi = r_f0 - problem.r_f_in
    slack = 1e-12 * (1.0 + r_f0 + r_sf)  # rounding in w_f at the initial point
    if r_sf < problem.r_s_in - slack or lo > hi + slack:
        return -math.inf
    hi = max(hi, lo)

    def neg(c):
        return -(alpha_utility(min(r_sf, r_s0 + c), a) + alpha_utility(max(r_f0 - c, 0.0), a))

    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12 * (1.0 + hi)})
    return -min(res.fun, neg(lo), neg(hi))
