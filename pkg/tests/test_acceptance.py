"""Acceptance gate: the eight top-level criteria, one test each.

Every test prints a single CRITERION-k PASS/FAIL line (visible with
``pytest -s`` or on failure) and asserts at the stated tolerance.
"""

import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

import hypersync.stability as st
from hypersync.dynamics import (
    linear_map,
    logistic_map,
    make_dynamics,
    simulate_discrete,
    sync_preservation_check,
    tanh_map,
)
from hypersync.errors import HypothesesNotMetError, SpectrumMismatchError
from hypersync.hypergraph import validate
from hypersync.operator import (
    build_operator,
    spectrum,
    twin_eigenpair,
    unit_eigenpair,
)
from hypersync.units import find_twins, find_units, twin_classes

from conftest import random_hypergraph, unit_rich_hypergraph
from oracles import brute_force_units, linear_component_ratio

DATA = Path(__file__).parent.parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def _verdict(num, ok, detail=""):
    line = f"CRITERION-{num} {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def test_criterion_1_operator_correctness():
    """Weighted self-adjointness, negative semidefiniteness, mass
    conservation, and a simple zero eigenvalue on 50 random weighted
    connected hypergraphs; residuals <= 1e-9, total runtime <= 10 s."""
    t0 = time.monotonic()
    worst = 0.0
    rng_x = np.random.default_rng(12345)
    for seed in range(50):
        H = random_hypergraph(np.random.default_rng(seed), max_n=40, max_m=30)
        op = build_operator(H)
        M, dv = op.matrix, op.vertex_weights
        n = len(dv)
        DM = dv[:, None] * M
        worst = max(worst, float(np.max(np.abs(DM - DM.T))))
        X = rng_x.standard_normal((n, 5))
        worst = max(worst, float(np.max(np.abs(dv @ (M @ X)))))
        worst = max(worst, float(max(x @ (dv * (M @ x)) for x in X.T)))
        spec = spectrum(op)
        ev = spec.eigenvalues
        worst = max(worst, abs(float(ev[0])))
        assert ev[1] < -1e-12, "zero eigenvalue must be simple"
        z0 = spec.eigenvectors[:, 0]
        worst = max(worst, float(np.max(np.abs(z0 - z0[0]))))
    elapsed = time.monotonic() - t0
    _verdict(1, worst <= 1e-9 and elapsed <= 10.0,
             f"max residual {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_unit_oracle_equivalence():
    """find_units equals the all-subsets brute-force oracle on 200 random
    hypergraphs with |V| <= 12, |E| <= 6; exact set equality, <= 5 s."""
    t0 = time.monotonic()
    ok = True
    for seed in range(200):
        H = random_hypergraph(np.random.default_rng(seed), max_n=12, max_m=6)
        got = {(u.members, u.generating_set) for u in find_units(H)}
        if got != brute_force_units(H):
            ok = False
            break
    elapsed = time.monotonic() - t0
    _verdict(2, ok and elapsed <= 5.0, f"200 instances, {elapsed:.1f}s")


def test_criterion_3_analytic_eigenpairs():
    """Formula eigenvalues of units and sigma-preserving twins appear in
    the numeric spectrum with eigenvector residual <= 1e-9; the six-vertex
    reference spectrum is {0,-2,-4,-4,-6,-8} to 1e-9."""
    tol = 1e-9
    worst = 0.0
    checked = 0
    corpus = [random_hypergraph(np.random.default_rng(s), max_n=14, max_m=8,
                                weighted=False) for s in range(60)]
    corpus += [unit_rich_hypergraph(np.random.default_rng(s))[0]
               for s in range(10)]
    for H in corpus:
        op = build_operator(H)
        ev = spectrum(op).eigenvalues
        units = find_units(H)
        for u in units:
            if len(u) < 2:
                continue
            lam, vecs = unit_eigenpair(H, u)
            worst = max(worst, float(np.min(np.abs(ev - lam))))
            for v in vecs.T:
                worst = max(worst,
                            float(np.max(np.abs(op.matrix @ v - lam * v))))
            checked += 1
        for p in find_twins(H, units):
            if not p.sigma_preserving:
                continue
            lam, vec = twin_eigenpair(H, p)
            worst = max(worst, float(np.min(np.abs(ev - lam))))
            worst = max(worst,
                        float(np.max(np.abs(op.matrix @ vec - lam * vec))))
            checked += 1
    h5 = validate(list("123456"),
                  [("e1", ["1", "2", "5", "6"]), ("e2", ["3", "4", "5", "6"])])
    ref = np.array([0.0, -2.0, -4.0, -4.0, -6.0, -8.0])
    worst = max(worst, float(np.max(np.abs(
        spectrum(build_operator(h5)).eigenvalues - ref))))
    _verdict(3, worst <= tol and checked >= 20,
             f"{checked} analytic pairs, max residual {worst:.2e}")


def test_criterion_4_sync_preservation():
    """Cluster spread stays <= 1e-9 (discrete) / 1e-7 (continuous) from
    cluster-constant starts on every qualifying cluster of the references
    and 20 random unit-rich hypergraphs; <= 60 s."""
    t0 = time.monotonic()
    logistic = make_dynamics(logistic_map(4.0))
    tanh = make_dynamics(tanh_map())
    h1 = validate(list("12345"),
                  [("e1", ["1", "2", "3"]), ("e2", ["3", "4", "5"])])
    h5 = validate(list("123456"),
                  [("e1", ["1", "2", "5", "6"]), ("e2", ["3", "4", "5", "6"])])

    def qualifying_clusters(H):
        units = find_units(H)
        out = [tuple(sorted(u.members)) for u in units if len(u) >= 2]
        for p in find_twins(H, units):
            if p.sigma_preserving:
                out.append(tuple(sorted(p.first.members | p.second.members)))
        for cls in twin_classes(H, units):
            if len(cls) > 2 and all(
                p.sigma_preserving for p in find_twins(H, units)
            ):
                members = frozenset().union(*(u.members for u in cls))
                out.append(tuple(sorted(members)))
        return sorted(set(out))

    instances = [h1, h5] + [
        unit_rich_hypergraph(np.random.default_rng(s),
                             preset="cardinality-normalized",
                             max_extra_edge=2, cluster_size=2)[0]
        for s in range(20)
    ]
    worst_d = worst_c = 0.0
    n_checks = 0
    for k, H in enumerate(instances):
        for cluster in qualifying_clusters(H):
            for eps in (0.1, 0.3):
                v = sync_preservation_check(H, cluster, logistic, eps,
                                            trials=3, steps=1000, seed=k,
                                            spread_tol=1e-9)
                worst_d = max(worst_d, v.max_spread)
                assert v.passed, (k, cluster, eps)
                n_checks += 1
            vc = sync_preservation_check(H, cluster, tanh, 0.3, trials=2,
                                         steps=10_000, seed=k,
                                         mode="continuous", dt=1e-3,
                                         spread_tol=1e-7)
            worst_c = max(worst_c, vc.max_spread)
            assert vc.passed, (k, cluster)
            n_checks += 1
    elapsed = time.monotonic() - t0
    _verdict(4, worst_d <= 1e-9 and worst_c <= 1e-7 and elapsed <= 60.0,
             f"{n_checks} checks, spreads {worst_d:.1e}/{worst_c:.1e}, "
             f"{elapsed:.1f}s")


def test_criterion_5_stability_oracle_linear_model():
    """On a grid of (alpha, beta, eps) with |beta + eps lambda alpha| in
    [0.5, 1.5], measured per-step component ratios equal the closed form
    within 1e-6 relative; the sufficient bound never passes on a point
    where a component actually grows; <= 30 s."""
    t0 = time.monotonic()
    h1 = validate(list("12345"),
                  [("e1", ["1", "2", "3"]), ("e2", ["3", "4", "5"])])
    spec = spectrum(build_operator(h1))
    ok = True
    n_pts = n_ratios = 0
    for alpha in (0.5, 1.0, 1.5):
        for beta in (0.3, 0.7, 1.1):
            for eps in (0.02, 0.05, 0.1):
                dyn = make_dynamics(linear_map(alpha), linear_map(beta))
                run = st.perturb_and_measure(h1, tuple(h1.vertices), dyn,
                                             eps, steps=120, seed=9)
                measured_growth = False
                for i, rate in run.rates.items():
                    expected = linear_component_ratio(
                        alpha, beta, eps, spec.eigenvalues[i])
                    if not (0.5 <= expected <= 1.5):
                        continue
                    n_ratios += 1
                    if abs(rate - expected) > 1e-6 * expected:
                        ok = False
                    if expected > 1.0:
                        measured_growth = True
                # bound PASS must imply measured decay on this grid point
                checks = [st._discrete_check(lam, dyn, eps)
                          for lam in spec.eigenvalues]
                if all(c.passed for c in checks) and measured_growth:
                    ok = False
                n_pts += 1
    elapsed = time.monotonic() - t0
    _verdict(5, ok and n_ratios >= 50 and elapsed <= 30.0,
             f"{n_pts} grid points, {n_ratios} ratios, {elapsed:.1f}s")


def test_criterion_6_contraction_certificate():
    """Assembled partial spectrum equals the direct spectrum within 1e-9 on
    the reference and 10 constructed equal-cardinality instances; violating
    inputs raise HypothesesNotMet, never SpectrumMismatch; <= 10 s."""
    t0 = time.monotonic()
    dyn = make_dynamics(linear_map(1.0), linear_map(0.0))
    h5 = validate(list("123456"),
                  [("e1", ["1", "2", "5", "6"]), ("e2", ["3", "4", "5", "6"])])
    instances = [h5] + [unit_rich_hypergraph(np.random.default_rng(s))[0]
                        for s in range(10)]
    ok = True
    for H in instances:
        rep = st.contraction_stability_certificate(H, dyn, 0.01, tol=1e-9)
        if rep.verdict not in (st.CERTIFIED_STABLE, st.NOT_CERTIFIED):
            ok = False
    # hypothesis violations must be diagnosed before any spectrum comparison
    for s in range(8):
        H, _ = unit_rich_hypergraph(np.random.default_rng(s),
                                    equal_cardinality=False)
        try:
            st.contraction_stability_certificate(H, dyn, 0.01)
            ok = False
        except HypothesesNotMetError:
            pass
        except SpectrumMismatchError:
            ok = False
    elapsed = time.monotonic() - t0
    _verdict(6, ok and elapsed <= 10.0,
             f"{len(instances)} certified instances, {elapsed:.1f}s")


def test_criterion_7_lyapunov_consistency():
    """At the logistic fixed point 3/4 (a=4) the running exponent equals
    log(2|1 + eps lambda_i|) within 1e-9 for every eigendirection and all
    10 <= t <= 1000."""
    h1 = validate(list("12345"),
                  [("e1", ["1", "2", "3"]), ("e2", ["3", "4", "5"])])
    dyn = make_dynamics(logistic_map(4.0))
    eps = 0.1
    traj = simulate_discrete(h1, dyn, eps, np.full(5, 0.75), 1000)
    spec = spectrum(build_operator(h1))
    worst = 0.0
    for i, lam in enumerate(spec.eigenvalues):
        est = st.lyapunov_sigma(traj, spec, dyn, eps, i)
        expected = math.log(2.0 * abs(1.0 + eps * float(lam)))
        window = est.sigma[(est.times >= 10) & (est.times <= 1000)]
        worst = max(worst, float(np.max(np.abs(window - expected))))
    _verdict(7, worst <= 1e-9, f"max deviation {worst:.2e}")


def test_criterion_8_cli_reproducibility():
    """Identical seeded invocations are byte-identical; golden outputs for
    units/spectrum/contract on both references match."""
    ok = True
    seeded = ["simulate", "-i", str(DATA / "h1.json"), "--cluster", "1,2",
              "--eps", "0.3", "--steps", "300", "--seed", "21"]
    outs = []
    for _ in range(2):
        proc = subprocess.run([sys.executable, "-m", "hypersync.cli", *seeded],
                              capture_output=True)
        ok = ok and proc.returncode == 0
        outs.append(proc.stdout)
    ok = ok and outs[0] == outs[1]
    for name in ("h1", "h5"):
        for cmd in ("units", "spectrum", "contract"):
            ext = "csv" if cmd == "spectrum" else "json"
            proc = subprocess.run(
                [sys.executable, "-m", "hypersync.cli", cmd, "-i",
                 str(DATA / f"{name}.json")],
                capture_output=True,
            )
            golden = (GOLDEN / f"{name}_{cmd}.{ext}").read_bytes()
            if proc.returncode != 0 or proc.stdout != golden:
                ok = False
    _verdict(8, ok)
