# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pair solver kernel.

Same algorithm, same branch order as ``_pairkernel_py``; keep them in step.
"""

from libc.math cimport log, log2, pow, sqrt, INFINITY

cdef enum:
    C_ALPHA = 0
    C_MAXMIN = 1
    C_MINRATE = 2

OBJ_ALPHA = C_ALPHA
OBJ_MAXMIN = C_MAXMIN
OBJ_MINRATE = C_MINRATE

cdef double _INVPHI = (sqrt(5.0) - 1.0) / 2.0
cdef double _T_TOL = 1e-10
cdef int _BISECT_ITERS = 80


cdef struct Inst:
    double ws_in
    double wf_in
    double a_s0
    double a_sf
    double a_f0
    double rs_floor
    double rf_floor
    double alpha
    int obj


cdef struct Point:
    double rs
    double rf
    double c
    double value


cpdef double link_rate(double w, double snr_bw) noexcept nogil:
    if w <= 0.0:
        return 0.0
    return w * log2(1.0 + snr_bw / w)


cdef inline double _util(double r, double alpha) noexcept nogil:
    if r <= 0.0:
        if alpha >= 1.0:
            return -INFINITY
        return 0.0
    if alpha == 1.0:
        return log(r)
    if alpha == 0.0:
        return r
    return pow(r, 1.0 - alpha) / (1.0 - alpha)


cdef Point _inner(double t, Inst* q) noexcept nogil:
    cdef Point out
    cdef double ws = q.ws_in - t
    cdef double wf = q.wf_in + t
    cdef double rs0 = link_rate(ws, q.a_s0)
    cdef double rsf = link_rate(ws, q.a_sf)
    cdef double rf0 = link_rate(wf, q.a_f0)
    cdef double lo = q.rs_floor - rs0
    cdef double hi, c
    if lo < 0.0:
        lo = 0.0
    hi = rsf - rs0
    if rf0 - q.rf_floor < hi:
        hi = rf0 - q.rf_floor
    if q.obj == C_ALPHA and q.alpha == 0.0 or q.obj == C_MINRATE:
        c = lo
    else:
        c = 0.5 * (rf0 - rs0)
        if c > hi:
            c = hi
        if c < lo:
            c = lo
    out.rs = rs0 + c
    if rsf < out.rs:
        out.rs = rsf
    out.rf = rf0 - c
    out.c = c
    if q.obj == C_MAXMIN:
        out.value = out.rs if out.rs < out.rf else out.rf
    elif q.obj == C_MINRATE:
        out.value = out.rs + out.rf
    else:
        out.value = _util(out.rs, q.alpha) + _util(out.rf, q.alpha)
    return out


cdef inline bint _pred(double t, Inst* q, double level, int kind) noexcept nogil:
    if kind == 0:
        return link_rate(q.ws_in - t, q.a_sf) >= level
    if kind == 1:
        return link_rate(q.wf_in + t, q.a_f0) >= level
    return link_rate(q.ws_in - t, q.a_s0) + link_rate(q.wf_in + t, q.a_f0) >= level


cdef double _last_true(Inst* q, double level, double lo, double hi, int kind) noexcept nogil:
    cdef double mid
    cdef int it
    for it in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _pred(mid, q, level, kind):
            lo = mid
        else:
            hi = mid
    return lo


cdef double _first_true(Inst* q, double level, double lo, double hi, int kind) noexcept nogil:
    cdef double mid
    cdef int it
    for it in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _pred(mid, q, level, kind):
            hi = mid
        else:
            lo = mid
    return hi


cdef inline double _sum_capacity(double t, Inst* q) noexcept nogil:
    return link_rate(q.ws_in - t, q.a_s0) + link_rate(q.wf_in + t, q.a_f0)


cdef inline double _eval(double t, Inst* q, int mode) noexcept nogil:
    if mode == 0:
        return _inner(t, q).value
    return _sum_capacity(t, q)


cdef double _golden_max(double lo, double hi, Inst* q, int mode) noexcept nogil:
    cdef double a = lo
    cdef double b = hi
    cdef double c = b - _INVPHI * (b - a)
    cdef double d = a + _INVPHI * (b - a)
    cdef double fc = _eval(c, q, mode)
    cdef double fd = _eval(d, q, mode)
    while b - a > _T_TOL:
        if fc >= fd:
            b = d
            d = c
            fd = fc
            c = b - _INVPHI * (b - a)
            fc = _eval(c, q, mode)
        else:
            a = c
            c = d
            fc = fd
            d = a + _INVPHI * (b - a)
            fd = _eval(d, q, mode)
    if fc >= fd:
        return c
    return d


def solve_pair(double ws_in, double wf_in, double p, double rho_s0, double rho_f0,
               double rho_sf, double rs_in, double rf_in, double alpha, int obj,
               double r_min):
    """Solve one sender-forwarder allocation.

    Returns ``(feasible, t, w_s, w_f, r_s, r_f, r_c, value)``.
    """
    cdef Inst q
    cdef Point base, best, res
    cdef double t_lo, t_hi, t_peak, need, h_lo, h_hi, t, t_max, best_t, cand, eps, lo, hi, mid
    cdef int it
    q.ws_in = ws_in
    q.wf_in = wf_in
    q.a_s0 = rho_s0 * p
    q.a_sf = rho_sf * p
    q.a_f0 = rho_f0 * p
    q.alpha = alpha
    q.obj = obj
    infeasible = (False, 0.0, ws_in, wf_in, 0.0, 0.0, 0.0, 0.0)

    if obj == C_MINRATE:
        q.rs_floor = r_min
        q.rf_floor = r_min
        q.alpha = 0.0
        t_lo = -wf_in
        t_hi = ws_in
        if link_rate(wf_in + t_hi, q.a_f0) < q.rf_floor:
            return infeasible
        if link_rate(wf_in + t_lo, q.a_f0) < q.rf_floor:
            t_lo = _first_true(&q, q.rf_floor, t_lo, t_hi, 1)
        if link_rate(ws_in - t_lo, q.a_sf) < q.rs_floor:
            return infeasible
        if link_rate(ws_in - t_hi, q.a_sf) < q.rs_floor:
            t_hi = _last_true(&q, q.rs_floor, t_lo, t_hi, 0)
        t_peak = _golden_max(-wf_in, ws_in, &q, 1)
        need = q.rs_floor + q.rf_floor
        if _sum_capacity(t_peak, &q) < need:
            return infeasible
        h_lo = -wf_in
        if _sum_capacity(h_lo, &q) < need:
            h_lo = _first_true(&q, need, h_lo, t_peak, 2)
        h_hi = ws_in
        if _sum_capacity(h_hi, &q) < need:
            h_hi = _last_true(&q, need, t_peak, h_hi, 2)
        if h_lo > t_lo:
            t_lo = h_lo
        if h_hi < t_hi:
            t_hi = h_hi
        if t_lo > t_hi:
            return infeasible
        t = t_peak
        if t < t_lo:
            t = t_lo
        if t > t_hi:
            t = t_hi
        res = _inner(t, &q)
        return (True, t, ws_in - t, wf_in + t, res.rs, res.rf, res.c, res.value)

    q.rs_floor = rs_in
    q.rf_floor = rf_in
    t_max = ws_in
    if link_rate(ws_in - t_max, q.a_sf) < q.rs_floor:
        if link_rate(ws_in, q.a_sf) <= q.rs_floor:
            t_max = 0.0
        else:
            t_max = _last_true(&q, q.rs_floor, 0.0, t_max, 0)
    need = q.rs_floor + q.rf_floor
    if t_max > 0.0 and _sum_capacity(t_max, &q) < need:
        t_max = _last_true(&q, need, 0.0, t_max, 2)

    base = _inner(0.0, &q)
    best_t = 0.0
    best = base
    if t_max > 0.0:
        cand = _golden_max(0.0, t_max, &q, 0)
        res = _inner(cand, &q)
        if res.value > best.value:
            best = res
            best_t = cand
        res = _inner(t_max, &q)
        if res.value > best.value:
            best = res
            best_t = t_max
    eps = 1e-12 * (1.0 + abs(best.value))
    if best_t > 0.0:
        if base.value >= best.value - eps:
            best_t = 0.0
            best = base
        else:
            lo = 0.0
            hi = best_t
            for it in range(_BISECT_ITERS):
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi:
                    break
                if _inner(mid, &q).value >= best.value - eps:
                    hi = mid
                else:
                    lo = mid
            if hi < best_t:
                best = _inner(hi, &q)
                best_t = hi
    return (True, best_t, ws_in - best_t, wf_in + best_t, best.rs, best.rf, best.c, best.value)
