"""Independent reference implementations used only by the tests.

Everything here is written from the definitions, as directly (and slowly) as
possible, so the library under test never supplies its own expected values.
"""

import itertools

import numpy as np
from scipy.linalg import expm


def brute_force_units(hypergraph):
    """Units by exhaustive enumeration of candidate generating sets.

    For every subset E_0 of the edge set, collect the vertices whose star is
    exactly E_0; nonempty collections are the units.
    """
    edge_ids = [e.id for e in hypergraph.edges]
    stars = {v: frozenset(e.id for e in hypergraph.edges if v in e.members)
             for v in hypergraph.vertices}
    units = set()
    for r in range(1, len(edge_ids) + 1):
        for combo in itertools.combinations(edge_ids, r):
            e0 = frozenset(combo)
            members = frozenset(v for v in hypergraph.vertices if stars[v] == e0)
            if members:
                units.add((members, e0))
    return units


def dense_operator(hypergraph):
    """The diffusion matrix assembled entry by entry from the definition:
    (Lx)(v) = sum over edges containing v of (delta_E(e)/delta_V(v)) |e|^-2
    sum_{u in e} (x(u) - x(v))."""
    verts = hypergraph.vertices
    n = len(verts)
    idx = {v: i for i, v in enumerate(verts)}
    L = np.zeros((n, n))
    for e in hypergraph.edges:
        w = hypergraph.edge_weight[e.id]
        k = len(e.members)
        for v in e.members:
            coeff = w / (hypergraph.vertex_weight[v] * k * k)
            for u in e.members:
                L[idx[v], idx[u]] += coeff
                L[idx[v], idx[v]] -= coeff
    return L


def diffusion_flow_oracle(hypergraph, eps, x0, t_end):
    """Closed-form pure-diffusion state at t_end via the matrix exponential."""
    return expm(t_end * eps * dense_operator(hypergraph)) @ x0


def linear_component_ratio(alpha, beta, eps, lam):
    """Exact per-step ratio of a perturbation component in the linear model
    x -> beta x + eps L (alpha x)."""
    return abs(beta + eps * lam * alpha)
