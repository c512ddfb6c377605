"""Stability certification for cluster synchronization.

Sufficient-condition bound checks from the perturbation analysis, empirical
perturbation experiments decomposed per eigendirection, Lyapunov-exponent
estimates along synchronized orbits, and the contraction-based partial
spectrum certificate for full synchronization.

Sign convention: eigenvalues are stored as eigenvalues of the diffusion
operator (nonpositive); bounds quoted over positive magnitudes are evaluated
on |lambda|.  A failed sufficient condition is reported as NOT_CERTIFIED,
never as unstable; only measurement can say EMPIRICALLY_UNSTABLE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    SYNC_TOL,
    cluster_spread,
    simulate_discrete,
)
from .errors import (
    HypothesesNotMetError,
    InconsistentVertexWeightError,
    NonConstantSigmaError,
    NonConstantVertexWeightError,
    NotSigmaPreservingError,
    NotSynchronizedError,
    SpectrumMismatchError,
    TimeGridMismatchError,
)
from .operator import build_operator, spectrum, unit_eigenpair
from .units import contract, find_twins, find_units, twin_classes

CERTIFIED_STABLE = "CERTIFIED_STABLE"
NOT_CERTIFIED = "NOT_CERTIFIED"
EMPIRICALLY_UNSTABLE = "EMPIRICALLY_UNSTABLE"
EMPIRICALLY_STABLE = "EMPIRICALLY_STABLE"
INCONCLUSIVE = "INCONCLUSIVE"

COMPONENT_FLOOR = 1e-14
SIGMA_REL_TOL = 1e-12


@dataclass(frozen=True)
class BoundCheck:
    model: str  # "discrete" | "continuous"
    lam: float  # operator eigenvalue, <= 0
    lhs: float
    rhs: float
    passed: bool
    degenerate: bool = False  # sup f' = 0 branch

    @property
    def margin(self):
        return self.rhs - self.lhs

    def to_dict(self):
        return {
            "model": self.model,
            "lambda": float(self.lam),
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "pass": bool(self.passed),
            "degenerate": bool(self.degenerate),
        }


@dataclass(frozen=True)
class ClusterBoundReport:
    cluster: tuple
    checks: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def _constant_weight(hypergraph, members, what):
    weights = {hypergraph.vertex_weight[v] for v in members}
    if len(weights) > 1:
        raise NonConstantVertexWeightError(
            f"vertex weight varies over the {what}", cluster=sorted(members)
        )
    return weights.pop()


def _discrete_check(lam, dyn, eps):
    # |per-step factor| <= sup g' + eps |lambda| sup f' must stay below 1
    if dyn.sup_f_prime == 0.0:
        lhs = dyn.sup_g_prime
        return BoundCheck("discrete", lam, lhs, 1.0, lhs < 1.0, degenerate=True)
    lhs = dyn.sup_g_prime + eps * abs(lam) * dyn.sup_f_prime
    return BoundCheck("discrete", lam, lhs, 1.0, lhs < 1.0)


def _continuous_check(lam, dyn, eps):
    # sup g' + eps lambda sup f' < 0 (lambda <= 0)
    lhs = dyn.sup_g_prime + eps * lam * dyn.sup_f_prime
    return BoundCheck("continuous", lam, lhs, 0.0, lhs < 0.0,
                      degenerate=dyn.sup_f_prime == 0.0)


def _unit_lambda(hypergraph, unit):
    c = _constant_weight(hypergraph, unit.members, "unit")
    return -sum(
        hypergraph.edge_weight[eid] / (c * len(hypergraph.edge_by_id[eid].members))
        for eid in sorted(unit.generating_set)
    )


def discrete_unit_stability(hypergraph, unit, dyn, eps):
    return _discrete_check(_unit_lambda(hypergraph, unit), dyn, eps)


def continuous_unit_stability(hypergraph, unit, dyn, eps):
    return _continuous_check(_unit_lambda(hypergraph, unit), dyn, eps)


def _common_sigma(hypergraph, edge_ids):
    values = [hypergraph.sigma(eid) for eid in sorted(edge_ids)]
    w = values[0]
    for val in values[1:]:
        if not math.isclose(val, w, rel_tol=SIGMA_REL_TOL, abs_tol=0.0):
            raise NonConstantSigmaError(
                "sigma is not constant on the twin generating sets",
                values=sorted(set(values)),
            )
    return w


def _twin_lambdas(hypergraph, pair):
    """The three cluster eigenvalues of a sigma-preserving twin union."""
    if not pair.sigma_preserving:
        raise NotSigmaPreservingError(
            "the canonical bijection does not preserve sigma",
            units=(sorted(pair.first.members), sorted(pair.second.members)),
        )
    union = pair.first.members | pair.second.members
    c = _constant_weight(hypergraph, union, "twin union")
    w = _common_sigma(
        hypergraph, set(pair.first.generating_set) | set(pair.second.generating_set)
    )
    cross = -(w / c) * sum(
        len(hypergraph.edge_by_id[eid].members - pair.second.members)
        for eid in sorted(pair.second.generating_set)
    )
    lam_i = -sum(
        hypergraph.edge_weight[eid] / (c * len(hypergraph.edge_by_id[eid].members))
        for eid in sorted(pair.first.generating_set)
    )
    lam_j = -sum(
        hypergraph.edge_weight[eid] / (c * len(hypergraph.edge_by_id[eid].members))
        for eid in sorted(pair.second.generating_set)
    )
    return [cross, lam_i, lam_j]


def discrete_twin_stability(hypergraph, pair, dyn, eps):
    cluster = tuple(sorted(pair.first.members | pair.second.members))
    checks = tuple(_discrete_check(l, dyn, eps) for l in _twin_lambdas(hypergraph, pair))
    return ClusterBoundReport(cluster, checks)


def continuous_twin_stability(hypergraph, pair, dyn, eps):
    cluster = tuple(sorted(pair.first.members | pair.second.members))
    checks = tuple(_continuous_check(l, dyn, eps) for l in _twin_lambdas(hypergraph, pair))
    return ClusterBoundReport(cluster, checks)


# -- perturbation decomposition ------------------------------------------------


def eta_components(spec, hypergraph, base, perturbed):
    """Perturbation components per eigendirection, (y_t - x_t, z_i)_V."""
    if base.states.shape != perturbed.states.shape or not np.array_equal(
        base.times, perturbed.times
    ):
        raise TimeGridMismatchError("trajectories do not share a time grid")
    dv = np.array([hypergraph.vertex_weight[v] for v in hypergraph.vertices])
    eta = perturbed.states - base.states
    return eta @ (dv[:, None] * spec.eigenvectors)


@dataclass(frozen=True)
class LyapunovEstimate:
    index: int
    eigenvalue: float
    times: np.ndarray  # t >= 1
    sigma: np.ndarray  # running estimate sigma_i(t)
    sigma_inf: float  # trailing-window estimate (f = g only meaningfully)
    stable_interval: tuple  # open interval for lambda_i when f = g, else None
    verdict: str  # CERTIFIED_STABLE / NOT_CERTIFIED / INCONCLUSIVE
    has_log_of_zero: bool


def lyapunov_sigma(traj, spec, dyn, eps, i, cluster=None, tol=SYNC_TOL):
    """Running Lyapunov estimate along a synchronized orbit.

    sigma_i(t) = (1/t) sum_{s<t} log |g'(c_s) + eps lambda_i f'(c_s)| with c_s
    the common cluster value.  For f = g the trailing-window estimate yields
    the open interval of eigenvalues whose perturbation components contract.
    """
    hypergraph = traj.hypergraph
    if cluster is None:
        cluster = hypergraph.vertices
    cluster = tuple(sorted(cluster))
    spreads = cluster_spread(hypergraph, traj.states, cluster)
    if np.max(spreads) > tol:
        raise NotSynchronizedError(
            "cluster spread exceeds tolerance; the common value is undefined",
            max_spread=float(np.max(spreads)),
        )
    lam = float(spec.eigenvalues[i])
    c_series = traj.states[:-1, hypergraph.index[cluster[0]]]
    factors = dyn.g.deriv(c_series) + eps * lam * dyn.f.deriv(c_series)
    has_zero = bool(np.any(factors == 0.0))
    with np.errstate(divide="ignore"):
        terms = np.log(np.abs(factors))
    t = np.arange(1, len(terms) + 1)
    sigma = np.cumsum(terms) / t

    tail = max(1, len(terms) // 10)
    sigma_inf = float(np.mean(terms[-tail:]))
    interval = None
    verdict = INCONCLUSIVE
    if dyn.same_map:
        # common-map form: factor = f'(c)(1 + eps lambda); contraction iff
        # e^{sigma_inf_of_f'} |1 + eps lambda| < 1
        fp = dyn.f.deriv(c_series)
        with np.errstate(divide="ignore"):
            fp_terms = np.log(np.abs(fp))
        s_inf = float(np.mean(fp_terms[-tail:]))
        lo = -(math.exp(-s_inf) + 1.0) / eps
        hi = (math.exp(-s_inf) - 1.0) / eps
        interval = (lo, hi)
        verdict = CERTIFIED_STABLE if lo < lam < hi else NOT_CERTIFIED
    return LyapunovEstimate(i, lam, t, sigma, sigma_inf, interval, verdict, has_zero)


@dataclass(frozen=True)
class PerturbationRun:
    base: object
    perturbed: object
    components: np.ndarray  # (n_times, n) per-eigendirection
    rates: dict  # eigendirection -> fitted per-step ratio
    verdict: str


def perturb_and_measure(hypergraph, cluster, dyn, eps, delta=1e-6, seed=0,
                        steps=200, direction=None):
    """Perturb a cluster-synchronized trajectory and fit per-direction rates.

    The base run starts constant on the cluster; the perturbation is
    ``delta`` times a zero-sum vector supported on the cluster (or a caller
    supplied direction).  Rates are least-squares exponents of the component
    magnitudes over the trailing half of the window, skipping values below
    the floating-point floor.
    """
    cluster = tuple(sorted(cluster))
    idx = [hypergraph.index[v] for v in cluster]
    rng = np.random.default_rng(seed)
    lo, hi = dyn.interval
    if not (math.isfinite(lo) and math.isfinite(hi)):
        lo, hi = -1.0, 1.0
    x0 = rng.uniform(lo, hi, hypergraph.n)
    x0[idx] = x0[idx[0]]
    if direction is None:
        direction = np.zeros(hypergraph.n)
        r = rng.standard_normal(len(idx))
        direction[idx] = r - r.mean()
        norm = np.linalg.norm(direction)
        if norm > 0:
            direction = direction / norm
    base = simulate_discrete(hypergraph, dyn, eps, x0, steps)
    perturbed = simulate_discrete(hypergraph, dyn, eps, x0 + delta * direction, steps)
    spec = spectrum(build_operator(hypergraph))
    comps = eta_components(spec, hypergraph, base, perturbed)

    # components below the rounding noise of the state magnitude are
    # meaningless; the floor must grow with the trajectory itself
    state_scale = np.maximum(1.0, np.max(np.abs(base.states), axis=1))
    floor = np.maximum(COMPONENT_FLOOR,
                       1e8 * np.finfo(float).eps * state_scale)
    rates = {}
    grew = False
    for i in range(comps.shape[1]):
        mags = np.abs(comps[:, i])
        if mags[0] <= floor[0]:
            continue
        if mags[-1] > 10.0 * mags[0]:
            grew = True
        valid = np.flatnonzero(mags > floor)
        if len(valid) < 2:
            continue
        fit = valid[len(valid) // 2:]
        if len(fit) < 2:
            fit = valid
        slope = np.polyfit(fit, np.log(mags[fit]), 1)[0]
        rates[i] = float(math.exp(slope))
    if grew:
        verdict = EMPIRICALLY_UNSTABLE
    elif rates and all(r < 1.0 for r in rates.values()):
        verdict = EMPIRICALLY_STABLE
    else:
        verdict = INCONCLUSIVE
    return PerturbationRun(base, perturbed, comps, rates, verdict)


# -- contraction certificate ------------------------------------------------------


@dataclass(frozen=True)
class EigenvalueEntry:
    value: float
    provenance: str  # "contraction" | "unit" | "twin"
    multiplicity: int = 1

    def to_dict(self):
        return {
            "value": float(self.value),
            "provenance": self.provenance,
            "multiplicity": int(self.multiplicity),
        }


@dataclass(frozen=True)
class StabilityReport:
    cluster: object
    eigenvalues: tuple
    checks: tuple
    verdict: str
    empirical: dict = None

    def to_dict(self):
        return {
            "cluster": list(self.cluster) if not isinstance(self.cluster, str) else self.cluster,
            "eigenvalues": [e.to_dict() for e in self.eigenvalues],
            "checks": [c.to_dict() for c in self.checks],
            "empirical": self.empirical,
            "verdict": self.verdict,
        }


def contraction_stability_certificate(hypergraph, dyn, eps, c_V=1.0, c_E=1.0,
                                      model="discrete", tol=1e-9):
    """Certify full synchronization from the partial eigenvalue list.

    Hypotheses (all verified, HypothesesNotMet otherwise): every unit has the
    same cardinality, vertex weight constant on each unit, every canonical
    bijection sigma-preserving, sigma constant on twin generating sets.
    The scaled quotient spectrum plus the per-unit eigenvalues must then
    reproduce the direct spectrum exactly; any residue above ``tol`` is a
    SpectrumMismatch and is never swallowed.
    """
    units = find_units(hypergraph)
    cards = {len(u) for u in units}
    if len(cards) > 1:
        raise HypothesesNotMetError(
            "units do not share a cardinality",
            hypothesis="equal-cardinality",
            cardinalities=sorted(cards),
        )
    card = cards.pop()
    try:
        contraction = contract(hypergraph, c_V=c_V, c_E=c_E)
    except InconsistentVertexWeightError as exc:
        raise HypothesesNotMetError(
            "vertex weight varies within a unit",
            hypothesis="constant-vertex-weight", **exc.details,
        ) from exc

    pairs = find_twins(hypergraph, units)
    for p in pairs:
        if not p.sigma_preserving:
            raise HypothesesNotMetError(
                "a canonical bijection is not sigma-preserving",
                hypothesis="sigma-preserving",
                units=(sorted(p.first.members), sorted(p.second.members)),
            )
    classes = twin_classes(hypergraph, units)

    # verify the lifted weight relations numerically (they hold by
    # construction of the contraction; keep the check loud and cheap)
    quotient = contraction.quotient
    for v in hypergraph.vertices:
        lifted = c_V * quotient.vertex_weight[contraction.vertex_map[v]]
        if not math.isclose(hypergraph.vertex_weight[v], lifted, rel_tol=1e-12):
            raise HypothesesNotMetError(
                "vertex weights are not a scaled lift of the quotient's",
                hypothesis="weight-relation", vertex=v,
            )
    for qid, lifted_sigma in contraction.lifted_edge_weight.items():
        if not math.isclose(lifted_sigma, c_E * quotient.sigma(qid), rel_tol=1e-12):
            raise HypothesesNotMetError(
                "edge sigma is not a scaled lift of the quotient's",
                hypothesis="weight-relation", edge=qid,
            )

    entries = []
    assembled = []
    scale = card * c_E / c_V
    qspec = spectrum(build_operator(quotient))
    for lam in qspec.eigenvalues:
        assembled.append(scale * float(lam))
        entries.append(EigenvalueEntry(scale * float(lam), "contraction"))

    for u in units:
        if len(u) >= 2:
            lam, _ = unit_eigenpair(hypergraph, u)
            assembled.extend([lam] * (len(u) - 1))
            entries.append(EigenvalueEntry(lam, "unit", multiplicity=len(u) - 1))

    # per-class cross-cluster constants; contained in the scaled quotient part
    for cls in classes:
        if len(cls) < 2:
            continue
        gens = set()
        for u in cls:
            gens |= set(u.generating_set)
        try:
            w = _common_sigma(hypergraph, gens)
        except NonConstantSigmaError as exc:
            raise HypothesesNotMetError(
                "sigma varies over a twin class's generating sets",
                hypothesis="constant-sigma", **exc.details,
            ) from exc
        values = []
        for u in cls:
            c = hypergraph.vertex_weight[min(u.members)]
            values.append(
                -(w / c)
                * sum(
                    len(hypergraph.edge_by_id[eid].members - u.members)
                    for eid in sorted(u.generating_set)
                )
            )
        c_a = values[0]
        if any(not math.isclose(val, c_a, rel_tol=1e-12, abs_tol=1e-12) for val in values):
            raise HypothesesNotMetError(
                "the cross-cluster constant varies within a twin class",
                hypothesis="class-constant", values=values,
            )
        entries.append(EigenvalueEntry(c_a, "twin", multiplicity=len(cls) - 1))
        if not any(abs(c_a - a) <= tol * max(1.0, abs(c_a)) for a in assembled):
            raise SpectrumMismatchError(
                "twin-class eigenvalue missing from the assembled list", value=c_a
            )

    direct = spectrum(build_operator(hypergraph)).eigenvalues
    assembled_sorted = np.sort(np.asarray(assembled))[::-1]
    if len(assembled_sorted) != len(direct):
        raise SpectrumMismatchError(
            "assembled list has the wrong length",
            assembled=len(assembled_sorted), direct=len(direct),
        )
    worst = float(np.max(np.abs(assembled_sorted - direct)))
    if worst > tol * max(1.0, float(np.max(np.abs(direct)))):
        raise SpectrumMismatchError(
            "assembled partial spectrum disagrees with the direct spectrum",
            max_abs_difference=worst,
        )

    check_fn = _discrete_check if model == "discrete" else _continuous_check
    checks = tuple(check_fn(lam, dyn, eps) for lam in assembled_sorted)
    verdict = CERTIFIED_STABLE if all(c.passed for c in checks) else NOT_CERTIFIED
    return StabilityReport("FULL", tuple(entries), checks, verdict)
