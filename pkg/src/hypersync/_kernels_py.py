"""Pure-numpy simulation kernels (fallback engine).

Mirrors the compiled extension in ``_kernels.pyx``.  Segment sums follow the
schedule's iteration order so the cluster-exactness guarantee (see
``schedule``) holds here too: matched segments have identical contents in
identical order, hence bitwise-identical sums.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericOverflowError, StateOutOfIntervalError

OVERFLOW_LIMIT = 1e150

HAVE_COMPILED = False


def _segment_sums(terms, ptr):
    """Sum ``terms[ptr[i]:ptr[i+1]]`` per segment; empty segments give 0."""
    counts = np.diff(ptr)
    padded = np.append(terms, 0.0)  # sentinel keeps end-of-array indices valid
    out = np.add.reduceat(padded, ptr[:-1])
    out[counts == 0] = 0.0
    return out


def apply_diffusion(sched, u):
    """The diffusion operator applied to a vertex function, schedule order."""
    res_terms = u[sched.res_members] - u[sched.res_owner]
    r = _segment_sums(res_terms, sched.res_ptr)
    unit_terms = u[sched.unit_members] - u[sched.unit_owner]
    t_unit = _segment_sums(unit_terms, sched.unit_ptr)
    contrib = sched.entry_sigma * (r + t_unit[sched.entry_owner])
    acc = _segment_sums(contrib, sched.entry_ptr)
    return acc * sched.inv_vertex_weight


def _record_indices(steps, stride):
    recs = list(range(0, steps + 1, max(1, stride)))
    if recs[-1] != steps:
        recs.append(steps)
    return recs


def _check_state(x, step, check, lo, hi):
    m = float(np.max(np.abs(x)))
    if not np.isfinite(m) or m > OVERFLOW_LIMIT:
        raise NumericOverflowError(f"state magnitude exceeded {OVERFLOW_LIMIT:g}", step=step)
    if check and (np.min(x) < lo or np.max(x) > hi):
        raise StateOutOfIntervalError(
            f"state left the dynamics interval [{lo:g}, {hi:g}]", step=step
        )


def simulate_discrete(sched, f, g, eps, x0, steps, stride=1,
                      check_interval=False, lo=-np.inf, hi=np.inf):
    """Iterate x <- g(x) + eps * L f(x); returns (record_steps, states)."""
    recs = _record_indices(steps, stride)
    out = np.empty((len(recs), sched.n))
    x = np.array(x0, dtype=float)
    _check_state(x, 0, check_interval, lo, hi)
    out[0] = x
    k = 1
    for t in range(1, steps + 1):
        fx = f(x)
        x = g(x) + eps * apply_diffusion(sched, fx)
        _check_state(x, t, check_interval, lo, hi)
        if k < len(recs) and recs[k] == t:
            out[k] = x
            k += 1
    return np.asarray(recs, dtype=np.int64), out


def simulate_rk4(sched, f, g, eps, x0, nsteps, dt, stride=1,
                 check_interval=False, lo=-np.inf, hi=np.inf):
    """Classic fixed-step RK4 for dx/dt = g(x) + eps * L f(x)."""
    recs = _record_indices(nsteps, stride)
    out = np.empty((len(recs), sched.n))
    x = np.array(x0, dtype=float)
    _check_state(x, 0, check_interval, lo, hi)
    out[0] = x

    def rhs(y):
        return g(y) + eps * apply_diffusion(sched, f(y))

    k = 1
    for t in range(1, nsteps + 1):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * dt * k1)
        k3 = rhs(x + 0.5 * dt * k2)
        k4 = rhs(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_state(x, t, check_interval, lo, hi)
        if k < len(recs) and recs[k] == t:
            out[k] = x
            k += 1
    return np.asarray(recs, dtype=np.int64), out
