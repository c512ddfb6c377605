"""Discrete and continuous dynamical networks and synchronization detection.

Discrete model:    x_{t+1} = g(x_t) + eps * L f(x_t)   (f, g applied pointwise)
Continuous model:  dx/dt   = g(x)   + eps * L f(x)     (classic fixed-step RK4)

Simulation goes through an evaluation schedule (see ``schedule``) rather than
the dense matrix, so synchronization inside units and sigma-preserving twin
unions is preserved exactly in floating point.  A compiled kernel is used for
the built-in node maps when available; otherwise the numpy fallback runs.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _kernels_py
from .errors import (
    ClusterTooSmallError,
    HypothesisViolatedError,
    NumericOverflowError,
    StateOutOfIntervalError,
)
from .schedule import build_schedule
from .units import find_units, find_twins

try:  # compiled engine is optional; the numpy fallback is always present
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:
    _kernels = None

HAVE_COMPILED = _kernels is not None

SYNC_TOL = 1e-8

# map codes shared with the compiled kernel
_MAP_CODES = {"identity": 0, "linear": 1, "logistic": 2, "sine": 3, "tanh": 4}


@dataclass(frozen=True)
class ScalarMap:
    """A scalar node map with analytic derivative and certified sup bound."""

    name: str
    param: float
    fn: object  # vectorized callable
    deriv: object
    sup_deriv: float
    interval: tuple

    @property
    def code(self):
        return _MAP_CODES.get(self.name)

    def describe(self):
        if self.name in ("identity", "sine", "tanh"):
            return self.name
        return f"{self.name}:{self.param:g}"


def identity_map():
    return ScalarMap("identity", 0.0, lambda x: x, lambda x: np.ones_like(x),
                     1.0, (-math.inf, math.inf))


def linear_map(a):
    a = float(a)
    return ScalarMap("linear", a, lambda x: a * x,
                     lambda x: np.full_like(np.asarray(x, dtype=float), a),
                     abs(a), (-math.inf, math.inf))


def logistic_map(a=4.0):
    # f'(x) = a(1-2x); sup over [0, 1] is a
    a = float(a)
    return ScalarMap("logistic", a, lambda x: a * x * (1.0 - x),
                     lambda x: a * (1.0 - 2.0 * x), a, (0.0, 1.0))


def sine_map():
    return ScalarMap("sine", 0.0, np.sin, np.cos, 1.0, (-math.inf, math.inf))


def tanh_map():
    return ScalarMap("tanh", 0.0, np.tanh,
                     lambda x: 1.0 / np.cosh(x) ** 2, 1.0, (-math.inf, math.inf))


PRESETS = {
    "identity": identity_map,
    "linear": linear_map,
    "logistic": logistic_map,
    "sine": sine_map,
    "tanh": tanh_map,
}


@dataclass(frozen=True)
class NodeDynamics:
    """The pair of node maps driving the network."""

    f: ScalarMap
    g: ScalarMap

    @property
    def sup_f_prime(self):
        return self.f.sup_deriv

    @property
    def sup_g_prime(self):
        return self.g.sup_deriv

    @property
    def interval(self):
        lo = max(self.f.interval[0], self.g.interval[0])
        hi = min(self.f.interval[1], self.g.interval[1])
        return (lo, hi)

    @property
    def f_prime(self):
        return self.f.deriv

    @property
    def g_prime(self):
        return self.g.deriv

    @property
    def same_map(self):
        return self.f.name == self.g.name and self.f.param == self.g.param

    def describe(self):
        return f"f={self.f.describe()},g={self.g.describe()}"


def make_dynamics(f, g=None):
    """Build NodeDynamics from ScalarMaps or preset names; g defaults to f."""

    def as_map(spec):
        if isinstance(spec, ScalarMap):
            return spec
        return PRESETS[spec]()

    fm = as_map(f)
    gm = fm if g is None else as_map(g)
    return NodeDynamics(fm, gm)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray  # floats (continuous) or integer step counts (discrete)
    states: np.ndarray  # (n_times, n_vertices), canonical vertex order
    epsilon: float
    dynamics: NodeDynamics
    hypergraph: object
    mode: str  # "discrete" | "continuous"
    dt: float = 1.0


@dataclass(frozen=True)
class SyncReport:
    cluster: tuple
    times: np.ndarray
    spread: np.ndarray
    synchronized_at: np.ndarray  # booleans, spread <= tol
    asymptotic: bool
    final_spread: float
    tol: float


_SCHEDULES = {}


def schedule_for(hypergraph):
    key = id(hypergraph)
    entry = _SCHEDULES.get(key)
    if entry is None or entry[0] is not hypergraph:
        entry = (hypergraph, build_schedule(hypergraph))
        _SCHEDULES[key] = entry
    return entry[1]


def _use_compiled(dyn):
    if _kernels is None or os.environ.get("HYPERSYNC_ENGINE") == "python":
        return False
    return dyn.f.code is not None and dyn.g.code is not None


def _raise_status(status, step):
    if status == 1:
        raise NumericOverflowError("state magnitude exceeded overflow limit", step=int(step))
    if status == 2:
        raise StateOutOfIntervalError("state left the dynamics interval", step=int(step))


def step_discrete(hypergraph, dyn, eps, x, check_interval=False):
    """One application of the discrete model equation."""
    sched = schedule_for(hypergraph)
    x = np.asarray(x, dtype=float)
    lo, hi = dyn.interval
    if check_interval and (np.min(x) < lo or np.max(x) > hi):
        raise StateOutOfIntervalError("state outside the dynamics interval", step=0)
    fx = dyn.f.fn(x)
    return dyn.g.fn(x) + eps * _kernels_py.apply_diffusion(sched, fx)


def simulate_discrete(hypergraph, dyn, eps, x0, steps, stride=1,
                      check_interval=False):
    if steps < 1:
        raise ValueError("steps must be >= 1")
    sched = schedule_for(hypergraph)
    x0 = np.asarray(x0, dtype=float)
    lo, hi = dyn.interval
    if _use_compiled(dyn):
        status, bad, recs, states = _kernels.simulate_discrete(
            sched, dyn.f.code, dyn.f.param, dyn.g.code, dyn.g.param,
            eps, x0, steps, stride, check_interval, lo, hi)
        _raise_status(status, bad)
    else:
        recs, states = _kernels_py.simulate_discrete(
            sched, dyn.f.fn, dyn.g.fn, eps, x0, steps, stride,
            check_interval, lo, hi)
    return Trajectory(recs, states, eps, dyn, hypergraph, "discrete")


def simulate_continuous(hypergraph, dyn, eps, x0, t_end, dt=1e-3, stride=1,
                        check_interval=False):
    if dt <= 0:
        raise ValueError("dt must be positive")
    nsteps = int(round(t_end / dt))
    if nsteps < 1:
        raise ValueError("t_end must cover at least one step")
    sched = schedule_for(hypergraph)
    x0 = np.asarray(x0, dtype=float)
    lo, hi = dyn.interval
    if _use_compiled(dyn):
        status, bad, recs, states = _kernels.simulate_rk4(
            sched, dyn.f.code, dyn.f.param, dyn.g.code, dyn.g.param,
            eps, x0, nsteps, dt, stride, check_interval, lo, hi)
        _raise_status(status, bad)
    else:
        recs, states = _kernels_py.simulate_rk4(
            sched, dyn.f.fn, dyn.g.fn, eps, x0, nsteps, dt, stride,
            check_interval, lo, hi)
    return Trajectory(recs * dt, states, eps, dyn, hypergraph, "continuous", dt)


def cluster_spread(hypergraph, states, cluster):
    idx = [hypergraph.index[v] for v in sorted(cluster)]
    sub = states[:, idx]
    return sub.max(axis=1) - sub.min(axis=1)


def sync_report(traj, cluster, tol=SYNC_TOL):
    """Per-time spread over the cluster plus an asymptotic verdict.

    The asymptotic verdict requires spread <= tol over the trailing 10% of
    recorded times (the limit itself is not computable).
    """
    cluster = tuple(sorted(cluster))
    if len(cluster) < 2:
        raise ClusterTooSmallError("cluster must contain at least 2 vertices")
    spread = cluster_spread(traj.hypergraph, traj.states, cluster)
    sync_at = spread <= tol
    tail = max(1, len(spread) // 10)
    return SyncReport(
        cluster=cluster,
        times=traj.times,
        spread=spread,
        synchronized_at=sync_at,
        asymptotic=bool(np.all(sync_at[-tail:])),
        final_spread=float(spread[-1]),
        tol=tol,
    )


def _qualifying_cluster(hypergraph, cluster):
    """Check the cluster is a unit, a subset of one, or a sigma-preserving
    twin union; returns a short description or raises."""
    cluster = frozenset(cluster)
    weights = {hypergraph.vertex_weight[v] for v in cluster}
    if len(weights) > 1:
        raise HypothesisViolatedError(
            "vertex weight is not constant on the cluster", cluster=sorted(cluster)
        )
    units = find_units(hypergraph)
    for u in units:
        if cluster <= u.members:
            return "unit" if cluster == u.members else "unit-subset"
    involved = [u for u in units if u.members & cluster]
    if frozenset().union(*(u.members for u in involved)) != cluster:
        raise HypothesisViolatedError(
            "cluster is not a union of whole units", cluster=sorted(cluster)
        )
    pair_index = {}
    for p in find_twins(hypergraph, units):
        pair_index[frozenset((p.first.key, p.second.key))] = p
    for i in range(len(involved)):
        for j in range(i + 1, len(involved)):
            p = pair_index.get(frozenset((involved[i].key, involved[j].key)))
            if p is None:
                raise HypothesisViolatedError(
                    "cluster units are not pairwise twins", cluster=sorted(cluster)
                )
            if not p.sigma_preserving:
                raise HypothesisViolatedError(
                    "a canonical bijection in the cluster is not sigma-preserving",
                    cluster=sorted(cluster),
                )
    return "twin-union"


@dataclass(frozen=True)
class PreservationVerdict:
    cluster: tuple
    kind: str
    passed: bool
    trials: int
    max_spread: float
    discarded: int  # overflowing trials redrawn with a fresh seed


def sync_preservation_check(hypergraph, cluster, dyn, eps, trials=10,
                            steps=1000, seed=0, mode="discrete", dt=1e-3,
                            spread_tol=1e-9, max_redraws=None):
    """Simulate from cluster-constant random starts; PASS iff spread stays tiny.

    Verifies the structural hypotheses first, so a failure here means
    synchronization actually broke, not that the theorem did not apply.
    Trials that overflow (divergent node maps) are discarded and redrawn.
    """
    cluster = tuple(sorted(cluster))
    kind = _qualifying_cluster(hypergraph, cluster)
    lo, hi = dyn.interval
    if not (math.isfinite(lo) and math.isfinite(hi)):
        lo, hi = -1.0, 1.0
    rng = np.random.default_rng(seed)
    idx = [hypergraph.index[v] for v in cluster]
    worst = 0.0
    done = 0
    discarded = 0
    # chaotic node maps diverge for most random starts at strong coupling;
    # each redraw is cheap, so the default budget is generous
    budget = max_redraws if max_redraws is not None else max(2000, 20 * trials)
    while done < trials:
        x0 = rng.uniform(lo, hi, hypergraph.n)
        x0[idx] = x0[idx[0]]
        try:
            if mode == "discrete":
                traj = simulate_discrete(hypergraph, dyn, eps, x0, steps)
            else:
                traj = simulate_continuous(hypergraph, dyn, eps, x0,
                                           t_end=steps * dt, dt=dt, stride=10)
        except NumericOverflowError:
            discarded += 1
            if discarded > budget:
                raise
            continue
        worst = max(worst, float(cluster_spread(hypergraph, traj.states, cluster).max()))
        done += 1
    return PreservationVerdict(cluster, kind, worst <= spread_tol, trials, worst, discarded)
