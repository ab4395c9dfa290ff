"""Pure-Python pair solver kernel.

Mirrors ``_pairkernel.pyx`` statement for statement; the compiled module is
preferred at import and this one is the fallback.

The bandwidth split is parameterized by the amount ``t`` the sender hands to
the forwarder (``w_s = ws_in - t``, ``w_f = wf_in + t``) so that ``t = 0``
reproduces the initial bandwidths bit for bit. For a fixed ``t`` the best
relayed rate has a closed form, and the remaining value function of ``t`` is
concave, so a golden-section search finishes the job.
"""

import math

OBJ_ALPHA = 0
OBJ_MAXMIN = 1
OBJ_MINRATE = 2

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_T_TOL = 1e-10
_BISECT_ITERS = 80


def link_rate(w, snr_bw):
    if w <= 0.0:
        return 0.0
    return w * math.log2(1.0 + snr_bw / w)


def _util(r, alpha):
    if r <= 0.0:
        if alpha >= 1.0:
            return -math.inf
        return 0.0
    if alpha == 1.0:
        return math.log(r)
    if alpha == 0.0:
        return r
    return r ** (1.0 - alpha) / (1.0 - alpha)


def _inner(t, ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor, rf_floor, alpha, obj):
    """Best (r_s, r_f, r_c, value) for a fixed bandwidth transfer ``t``."""
    ws = ws_in - t
    wf = wf_in + t
    rs0 = link_rate(ws, a_s0)
    rsf = link_rate(ws, a_sf)
    rf0 = link_rate(wf, a_f0)
    lo = rs_floor - rs0
    if lo < 0.0:
        lo = 0.0
    hi = rsf - rs0
    if rf0 - rf_floor < hi:
        hi = rf0 - rf_floor
    if obj == OBJ_ALPHA and alpha == 0.0 or obj == OBJ_MINRATE:
        c = lo
    else:
        c = 0.5 * (rf0 - rs0)
        if c > hi:
            c = hi
        if c < lo:
            c = lo
    rs = rs0 + c
    if rsf < rs:
        rs = rsf
    rf = rf0 - c
    if obj == OBJ_MAXMIN:
        value = rs if rs < rf else rf
    elif obj == OBJ_MINRATE:
        value = rs + rf
    else:
        value = _util(rs, alpha) + _util(rf, alpha)
    return rs, rf, c, value


def _last_true(pred_args, lo, hi, kind):
    # Largest t in [lo, hi] with the monotone predicate true, assuming it
    # holds at lo and the true set is an interval starting at lo.
    ws_in, wf_in, a_s0, a_sf, a_f0, level = pred_args
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _pred(mid, ws_in, wf_in, a_s0, a_sf, a_f0, level, kind):
            lo = mid
        else:
            hi = mid
    return lo


def _first_true(pred_args, lo, hi, kind):
    ws_in, wf_in, a_s0, a_sf, a_f0, level = pred_args
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _pred(mid, ws_in, wf_in, a_s0, a_sf, a_f0, level, kind):
            hi = mid
        else:
            lo = mid
    return hi


def _pred(t, ws_in, wf_in, a_s0, a_sf, a_f0, level, kind):
    if kind == 0:  # sender->forwarder link carries at least `level`
        return link_rate(ws_in - t, a_sf) >= level
    if kind == 1:  # forwarder uplink carries at least `level`
        return link_rate(wf_in + t, a_f0) >= level
    # summed uplink capacity at least `level`
    return link_rate(ws_in - t, a_s0) + link_rate(wf_in + t, a_f0) >= level


def _sum_capacity(t, ws_in, wf_in, a_s0, a_f0):
    return link_rate(ws_in - t, a_s0) + link_rate(wf_in + t, a_f0)


def _golden_max(lo, hi, args, mode):
    """Golden-section maximizer of a concave function on [lo, hi]."""
    ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor, rf_floor, alpha, obj = args
    a = lo
    b = hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    if mode == 0:
        fc = _inner(c, ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor, rf_floor, alpha, obj)[3]
        fd = _inner(d, ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor, rf_floor, alpha, obj)[3]
    else:
        fc = _sum_capacity(c, ws_in, wf_in, a_s0, a_f0)
        fd = _sum_capacity(d, ws_in, wf_in, a_s0, a_f0)
    while b - a > _T_TOL:
        if fc >= fd:
            b = d
            d = c
            fd = fc
            c = b - _INVPHI * (b - a)
            if mode == 0:
                fc = _inner(c, ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor, rf_floor, alpha, obj)[3]
            else:
                fc = _sum_capacity(c, ws_in, wf_in, a_s0, a_f0)
        else:
            a = c
            c = d
            fc = fd
            d = a + _INVPHI * (b - a)
            if mode == 0:
                fd = _inner(d, ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor, rf_floor, alpha, obj)[3]
            else:
                fd = _sum_capacity(d, ws_in, wf_in, a_s0, a_f0)
    if fc >= fd:
        return c
    return d


def solve_pair(ws_in, wf_in, p, rho_s0, rho_f0, rho_sf, rs_in, rf_in, alpha, obj, r_min):
    """Solve one sender-forwarder allocation.

    Returns ``(feasible, t, w_s, w_f, r_s, r_f, r_c, value)`` where ``value``
    is the raw objective (summed utility, min rate or sum rate).
    """
    a_s0 = rho_s0 * p
    a_sf = rho_sf * p
    a_f0 = rho_f0 * p
    if obj == OBJ_MINRATE:
        rs_floor = r_min
        rf_floor = r_min
        t_lo = -wf_in
        t_hi = ws_in
        # forwarder keeps r_min on its own uplink: t >= t1
        if link_rate(wf_in + t_hi, a_f0) < rf_floor:
            return (False, 0.0, ws_in, wf_in, 0.0, 0.0, 0.0, 0.0)
        if link_rate(wf_in + t_lo, a_f0) < rf_floor:
            t_lo = _first_true((ws_in, wf_in, a_s0, a_sf, a_f0, rf_floor), t_lo, t_hi, 1)
        # sender reaches the forwarder at r_min: t <= t2
        if link_rate(ws_in - t_lo, a_sf) < rs_floor:
            return (False, 0.0, ws_in, wf_in, 0.0, 0.0, 0.0, 0.0)
        if link_rate(ws_in - t_hi, a_sf) < rs_floor:
            t_hi = _last_true((ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor), t_lo, t_hi, 0)
        # summed uplink covers both minimums: a superlevel interval of a
        # concave function around its maximizer
        args = (ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor, rf_floor, 0.0, obj)
        t_peak = _golden_max(-wf_in, ws_in, args, 1)
        need = rs_floor + rf_floor
        if _sum_capacity(t_peak, ws_in, wf_in, a_s0, a_f0) < need:
            return (False, 0.0, ws_in, wf_in, 0.0, 0.0, 0.0, 0.0)
        h_lo = -wf_in
        if _sum_capacity(h_lo, ws_in, wf_in, a_s0, a_f0) < need:
            h_lo = _first_true((ws_in, wf_in, a_s0, a_sf, a_f0, need), h_lo, t_peak, 2)
        h_hi = ws_in
        if _sum_capacity(h_hi, ws_in, wf_in, a_s0, a_f0) < need:
            h_hi = _last_true((ws_in, wf_in, a_s0, a_sf, a_f0, need), t_peak, h_hi, 2)
        if h_lo > t_lo:
            t_lo = h_lo
        if h_hi < t_hi:
            t_hi = h_hi
        if t_lo > t_hi:
            return (False, 0.0, ws_in, wf_in, 0.0, 0.0, 0.0, 0.0)
        t = t_peak
        if t < t_lo:
            t = t_lo
        if t > t_hi:
            t = t_hi
        rs, rf, c, value = _inner(t, ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor, rf_floor, 0.0, obj)
        return (True, t, ws_in - t, wf_in + t, rs, rf, c, value)

    rs_floor = rs_in
    rf_floor = rf_in
    args = (ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor, rf_floor, alpha, obj)
    # feasible transfers form [0, t_max]
    t_max = ws_in
    if link_rate(ws_in - t_max, a_sf) < rs_floor:
        if link_rate(ws_in, a_sf) <= rs_floor:
            t_max = 0.0
        else:
            t_max = _last_true((ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor), 0.0, t_max, 0)
    need = rs_floor + rf_floor
    if t_max > 0.0 and _sum_capacity(t_max, ws_in, wf_in, a_s0, a_f0) < need:
        t_max = _last_true((ws_in, wf_in, a_s0, a_sf, a_f0, need), 0.0, t_max, 2)

    base = _inner(0.0, ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor, rf_floor, alpha, obj)
    best_t = 0.0
    best = base
    if t_max > 0.0:
        cand = _golden_max(0.0, t_max, args, 0)
        for t in (cand, t_max):
            res = _inner(t, ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor, rf_floor, alpha, obj)
            if res[3] > best[3]:
                best = res
                best_t = t
    # among (near-)optimal transfers prefer the smallest one
    eps = 1e-12 * (1.0 + abs(best[3]))
    if best_t > 0.0:
        if base[3] >= best[3] - eps:
            best_t = 0.0
            best = base
        else:
            lo = 0.0
            hi = best_t
            for _ in range(_BISECT_ITERS):
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi:
                    break
                if _inner(mid, ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor, rf_floor, alpha, obj)[3] >= best[3] - eps:
                    hi = mid
                else:
                    lo = mid
            if hi < best_t:
                res = _inner(hi, ws_in, wf_in, a_s0, a_sf, a_f0, rs_floor, rf_floor, alpha, obj)
                best_t = hi
                best = res
    rs, rf, c, value = best
    return (True, best_t, ws_in - best_t, wf_in + best_t, rs, rf, c, value)
