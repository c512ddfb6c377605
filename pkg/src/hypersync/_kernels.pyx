# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled simulation kernels for the built-in node maps.

Same arithmetic schedule as the numpy fallback: per vertex, residue terms
then within-unit terms, in the precomputed order.  Node maps are selected by
integer code so the hot loop stays free of Python calls.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite, sin, tanh

HAVE_COMPILED = True

DEF OVERFLOW_LIMIT = 1e150

# map codes; must match dynamics.py
DEF MAP_IDENTITY = 0
DEF MAP_LINEAR = 1
DEF MAP_LOGISTIC = 2
DEF MAP_SINE = 3
DEF MAP_TANH = 4


cdef inline double _apply_map(int code, double a, double x) nogil:
    if code == MAP_IDENTITY:
        return x
    elif code == MAP_LINEAR:
        return a * x
    elif code == MAP_LOGISTIC:
        return a * x * (1.0 - x)
    elif code == MAP_SINE:
        return sin(x)
    else:
        return tanh(x)


cdef void _diffusion(
    const long[::1] unit_ptr, const long[::1] unit_members,
    const long[::1] entry_ptr, const double[::1] entry_sigma,
    const long[::1] res_ptr, const long[::1] res_members,
    const double[::1] inv_dv,
    const double[::1] u, double[::1] out, Py_ssize_t n,
) nogil:
    cdef Py_ssize_t v, e, j
    cdef double acc, r, t_unit, uv
    cdef Py_ssize_t entry0, entry1, r0, r1, u0, u1
    for v in range(n):
        uv = u[v]
        t_unit = 0.0
        u0 = unit_ptr[v]
        u1 = unit_ptr[v + 1]
        for j in range(u0, u1):
            t_unit += u[unit_members[j]] - uv
        acc = 0.0
        entry0 = entry_ptr[v]
        entry1 = entry_ptr[v + 1]
        for e in range(entry0, entry1):
            r = 0.0
            r0 = res_ptr[e]
            r1 = res_ptr[e + 1]
            for j in range(r0, r1):
                r += u[res_members[j]] - uv
            acc += entry_sigma[e] * (r + t_unit)
        out[v] = acc * inv_dv[v]


cdef void _rhs(
    const long[::1] unit_ptr, const long[::1] unit_members,
    const long[::1] entry_ptr, const double[::1] entry_sigma,
    const long[::1] res_ptr, const long[::1] res_members,
    const double[::1] inv_dv,
    int fcode, double fa, int gcode, double ga, double eps,
    const double[::1] y, double[::1] fx, double[::1] out, Py_ssize_t n,
) nogil:
    cdef Py_ssize_t v
    for v in range(n):
        fx[v] = _apply_map(fcode, fa, y[v])
    _diffusion(unit_ptr, unit_members, entry_ptr, entry_sigma,
               res_ptr, res_members, inv_dv, fx, out, n)
    for v in range(n):
        out[v] = _apply_map(gcode, ga, y[v]) + eps * out[v]


cdef int _check_state(const double[::1] x, Py_ssize_t n, bint check,
                      double lo, double hi) nogil:
    # 0 ok, 1 overflow, 2 out of interval
    cdef Py_ssize_t v
    for v in range(n):
        if not isfinite(x[v]) or fabs(x[v]) > OVERFLOW_LIMIT:
            return 1
    if check:
        for v in range(n):
            if x[v] < lo or x[v] > hi:
                return 2
    return 0


def simulate_discrete(
    sched,
    int fcode, double fa, int gcode, double ga,
    double eps,
    cnp.ndarray[double, ndim=1] x0,
    long steps, long stride,
    bint check_interval, double lo, double hi,
):
    """Iterate x <- g(x) + eps * L f(x).  Returns (status, bad_step, recs, states)."""
    cdef const long[::1] unit_ptr = sched.unit_ptr
    cdef const long[::1] unit_members = sched.unit_members
    cdef const long[::1] entry_ptr = sched.entry_ptr
    cdef const double[::1] entry_sigma = sched.entry_sigma
    cdef const long[::1] res_ptr = sched.res_ptr
    cdef const long[::1] res_members = sched.res_members
    cdef const double[::1] inv_dv = sched.inv_vertex_weight

    cdef Py_ssize_t n = x0.shape[0]
    recs_list = list(range(0, steps + 1, max(1, stride)))
    if recs_list[len(recs_list) - 1] != steps:
        recs_list.append(steps)
    recs = np.asarray(recs_list, dtype=np.int64)
    cdef const long[::1] rec_at = recs
    out = np.empty((len(recs_list), n), dtype=float)
    cdef double[:, ::1] out_v = out

    x_arr = np.array(x0, dtype=float)
    fx_arr = np.empty(n, dtype=float)
    lfx_arr = np.empty(n, dtype=float)
    cdef double[::1] x = x_arr
    cdef double[::1] fx = fx_arr
    cdef double[::1] lfx = lfx_arr

    cdef Py_ssize_t t, v, k
    cdef int status = 0
    cdef long bad_step = -1
    cdef Py_ssize_t nrec = len(recs_list)

    with nogil:
        status = _check_state(x, n, check_interval, lo, hi)
        if status == 0:
            for v in range(n):
                out_v[0, v] = x[v]
            k = 1
            for t in range(1, steps + 1):
                for v in range(n):
                    fx[v] = _apply_map(fcode, fa, x[v])
                _diffusion(unit_ptr, unit_members, entry_ptr, entry_sigma,
                           res_ptr, res_members, inv_dv, fx, lfx, n)
                for v in range(n):
                    x[v] = _apply_map(gcode, ga, x[v]) + eps * lfx[v]
                status = _check_state(x, n, check_interval, lo, hi)
                if status != 0:
                    bad_step = t
                    break
                if k < nrec and rec_at[k] == t:
                    for v in range(n):
                        out_v[k, v] = x[v]
                    k += 1
        else:
            bad_step = 0
    return status, bad_step, recs, out


def simulate_rk4(
    sched,
    int fcode, double fa, int gcode, double ga,
    double eps,
    cnp.ndarray[double, ndim=1] x0,
    long nsteps, double dt, long stride,
    bint check_interval, double lo, double hi,
):
    """Classic RK4 for dx/dt = g(x) + eps * L f(x)."""
    cdef const long[::1] unit_ptr = sched.unit_ptr
    cdef const long[::1] unit_members = sched.unit_members
    cdef const long[::1] entry_ptr = sched.entry_ptr
    cdef const double[::1] entry_sigma = sched.entry_sigma
    cdef const long[::1] res_ptr = sched.res_ptr
    cdef const long[::1] res_members = sched.res_members
    cdef const double[::1] inv_dv = sched.inv_vertex_weight

    cdef Py_ssize_t n = x0.shape[0]
    recs_list = list(range(0, nsteps + 1, max(1, stride)))
    if recs_list[len(recs_list) - 1] != nsteps:
        recs_list.append(nsteps)
    recs = np.asarray(recs_list, dtype=np.int64)
    cdef const long[::1] rec_at = recs
    out = np.empty((len(recs_list), n), dtype=float)
    cdef double[:, ::1] out_v = out

    x_arr = np.array(x0, dtype=float)
    cdef double[::1] x = x_arr
    work = np.empty((6, n), dtype=float)
    cdef double[::1] stage = work[0]
    cdef double[::1] fx = work[1]
    cdef double[::1] k1 = work[2]
    cdef double[::1] k2 = work[3]
    cdef double[::1] k3 = work[4]
    cdef double[::1] k4 = work[5]

    cdef Py_ssize_t t, v, k
    cdef int status = 0
    cdef long bad_step = -1
    cdef Py_ssize_t nrec = len(recs_list)

    with nogil:
        status = _check_state(x, n, check_interval, lo, hi)
        if status == 0:
            for v in range(n):
                out_v[0, v] = x[v]
            k = 1
            for t in range(1, nsteps + 1):
                _rhs(unit_ptr, unit_members, entry_ptr, entry_sigma, res_ptr,
                     res_members, inv_dv, fcode, fa, gcode, ga, eps, x, fx, k1, n)
                for v in range(n):
                    stage[v] = x[v] + 0.5 * dt * k1[v]
                _rhs(unit_ptr, unit_members, entry_ptr, entry_sigma, res_ptr,
                     res_members, inv_dv, fcode, fa, gcode, ga, eps, stage, fx, k2, n)
                for v in range(n):
                    stage[v] = x[v] + 0.5 * dt * k2[v]
                _rhs(unit_ptr, unit_members, entry_ptr, entry_sigma, res_ptr,
                     res_members, inv_dv, fcode, fa, gcode, ga, eps, stage, fx, k3, n)
                for v in range(n):
                    stage[v] = x[v] + dt * k3[v]
                _rhs(unit_ptr, unit_members, entry_ptr, entry_sigma, res_ptr,
                     res_members, inv_dv, fcode, fa, gcode, ga, eps, stage, fx, k4, n)
                for v in range(n):
                    x[v] = x[v] + (dt / 6.0) * (k1[v] + 2.0 * k2[v] + 2.0 * k3[v] + k4[v])
                status = _check_state(x, n, check_interval, lo, hi)
                if status != 0:
                    bad_step = t
                    break
                if k < nrec and rec_at[k] == t:
                    for v in range(n):
                        out_v[k, v] = x[v]
                    k += 1
        else:
            bad_step = 0
    return status, bad_step, recs, out
