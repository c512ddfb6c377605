"""The general diffusion operator, weighted inner products, and its spectrum.

The operator acts on vertex functions as

    (L x)(v) = sum_{e in star(v)} (delta_E(e) / delta_V(v)) (1/|e|^2)
               sum_{u in e} (x(u) - x(v)),

is self-adjoint for the delta_V-weighted inner product and negative
semidefinite.  The eigenproblem is solved by symmetrizing with
diag(delta_V)^(1/2), so a plain symmetric eigensolver suffices and the
returned eigenvectors are orthonormal in the weighted inner product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainMismatchError,
    EigensolverFailureError,
    NonConstantVertexWeightError,
    NotSigmaPreservingError,
    SingletonUnitError,
)

EIG_TIE_TOL = 1e-12


@dataclass(frozen=True)
class DiffusionOperator:
    hypergraph: object
    matrix: np.ndarray  # dense (n, n), canonical vertex order
    vertex_weights: np.ndarray  # (n,)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # descending, 0 first for connected H
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]


def build_operator(hypergraph):
    n = hypergraph.n
    mat = np.zeros((n, n))
    dv = np.array([hypergraph.vertex_weight[v] for v in hypergraph.vertices])
    for e in hypergraph.edges:
        sig = hypergraph.sigma(e.id)
        idx = [hypergraph.index[v] for v in e.members]
        k = len(idx)
        for v in idx:
            for u in idx:
                if u != v:
                    mat[v, u] += sig / dv[v]
            mat[v, v] -= sig * (k - 1) / dv[v]
    return DiffusionOperator(hypergraph, mat, dv)


def _check_vertex_function(hypergraph, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (hypergraph.n,):
        raise DomainMismatchError(
            f"expected a function on {hypergraph.n} vertices, got shape {x.shape}"
        )
    return x


def inner_product_V(hypergraph, x, y):
    x = _check_vertex_function(hypergraph, x)
    y = _check_vertex_function(hypergraph, y)
    dv = np.array([hypergraph.vertex_weight[v] for v in hypergraph.vertices])
    return float(np.sum(dv * x * y))


def inner_product_E(hypergraph, beta, gamma):
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if beta.shape != (hypergraph.m,) or gamma.shape != (hypergraph.m,):
        raise DomainMismatchError(
            f"expected functions on {hypergraph.m} edges, "
            f"got shapes {beta.shape} and {gamma.shape}"
        )
    de = np.array([hypergraph.edge_weight[e.id] for e in hypergraph.edges])
    return float(np.sum(de * beta * gamma))


def _sign_normalize(vec):
    for val in vec:
        if abs(val) > 1e-12:
            return vec if val > 0 else -vec
    return vec


def spectrum(op):
    """Full eigendecomposition, orthonormal in the weighted inner product.

    Eigenvalues descending (0 first); within numerically equal eigenvalues the
    columns are ordered lexicographically after sign normalization, so the
    output is deterministic.
    """
    dv = op.vertex_weights
    sqrt_dv = np.sqrt(dv)
    # D^1/2 M D^-1/2 is symmetric because D M is (weighted self-adjointness)
    sym = (op.matrix * sqrt_dv[:, None]) / sqrt_dv[None, :]
    sym = 0.5 * (sym + sym.T)
    try:
        vals, vecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailureError(str(exc)) from exc
    # map back: z = D^(-1/2) w stays orthonormal for the weighted inner product
    vecs = vecs / sqrt_dv[:, None]
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    cols = [_sign_normalize(vecs[:, i].copy()) for i in range(len(vals))]
    # deterministic order inside numerically-tied eigenvalue groups
    scale = max(1.0, float(np.max(np.abs(vals))))
    i = 0
    while i < len(vals):
        j = i
        while j + 1 < len(vals) and abs(vals[j + 1] - vals[i]) <= EIG_TIE_TOL * scale:
            j += 1
        if j > i:
            group = sorted(range(i, j + 1), key=lambda k: tuple(np.round(cols[k], 12)))
            cols[i : j + 1] = [cols[k] for k in group]
        i = j + 1
    return Spectrum(vals, np.column_stack(cols))


def unit_eigenpair(hypergraph, unit):
    """Analytic eigenvalue and difference basis attached to a unit.

    Eigenvalue -sum_{e in E_0} delta_E(e) / (c |e|), eigenvectors the
    (|unit|-1) differences of member indicators; requires |unit| >= 2 and a
    constant vertex weight c on the unit.
    """
    members = sorted(unit.members)
    if len(members) < 2:
        raise SingletonUnitError(
            "the difference space of a singleton unit is trivial", unit=members
        )
    weights = {hypergraph.vertex_weight[v] for v in members}
    if len(weights) > 1:
        raise NonConstantVertexWeightError(
            "vertex weight varies over the unit", unit=members
        )
    c = weights.pop()
    lam = -sum(
        hypergraph.edge_weight[eid] / (c * len(hypergraph.edge_by_id[eid].members))
        for eid in sorted(unit.generating_set)
    )
    n = hypergraph.n
    basis = np.zeros((n, len(members) - 1))
    v0 = hypergraph.index[members[0]]
    for j, v in enumerate(members[1:]):
        basis[hypergraph.index[v], j] = 1.0
        basis[v0, j] = -1.0
    return lam, basis


def twin_eigenpair(hypergraph, pair):
    """Analytic cross-cluster eigenpair of a sigma-preserving twin pair.

    Eigenvector |W_j| chi_{W_i} - |W_i| chi_{W_j}; eigenvalue
    -(1/c) sum_{e in E_i} sigma(e) |e \\ W_i|.
    """
    if not pair.sigma_preserving:
        raise NotSigmaPreservingError(
            "the canonical bijection does not preserve sigma",
            units=(sorted(pair.first.members), sorted(pair.second.members)),
        )
    union = pair.first.members | pair.second.members
    weights = {hypergraph.vertex_weight[v] for v in union}
    if len(weights) > 1:
        raise NonConstantVertexWeightError(
            "vertex weight varies over the twin union", cluster=sorted(union)
        )
    c = weights.pop()
    lam = -sum(
        hypergraph.sigma(eid)
        * len(hypergraph.edge_by_id[eid].members - pair.first.members)
        for eid in sorted(pair.first.generating_set)
    ) / c
    y = np.zeros(hypergraph.n)
    for v in pair.first.members:
        y[hypergraph.index[v]] = float(len(pair.second.members))
    for v in pair.second.members:
        y[hypergraph.index[v]] = -float(len(pair.first.members))
    return lam, y


def check_invariant_subspace(op, basis, tol=1e-9):
    """Is span(basis) invariant under the operator?

    Returns ``(flag, max_residual)`` where the residual of a basis vector b is
    the out-of-span component of L b, normalized by ||b||.
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    if basis.shape[0] != op.matrix.shape[0]:
        basis = basis.T
    q, _ = np.linalg.qr(basis)
    worst = 0.0
    for j in range(basis.shape[1]):
        b = basis[:, j]
        image = op.matrix @ b
        residual = image - q @ (q.T @ image)
        worst = max(worst, float(np.linalg.norm(residual) / np.linalg.norm(b)))
    return worst <= tol, worst
