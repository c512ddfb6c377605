"""Flattened evaluation schedule for the diffusion term.

Simulation does not use the dense operator matrix.  Instead each step
evaluates, per vertex v with unit W,

    (L x)(v) = (1/delta_V(v)) * sum_{e in star(v)}
               sigma(e) * ( sum_{u in e\\W} (x(u)-x(v)) + sum_{u in W} (x(u)-x(v)) )

with the star iterated in residue-sorted order and both inner sums iterated
in label order.  Grouping the within-unit terms separately and aligning the
iteration order across vertices is what makes cluster synchronization exact
in floating point: two vertices of one unit (and, for sigma-preserving twins,
matched vertices across the pair) see bitwise-identical arithmetic, so equal
states stay equal for arbitrarily many steps, even for chaotic node maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .units import find_units


@dataclass(frozen=True)
class DiffusionSchedule:
    n: int
    inv_vertex_weight: np.ndarray  # (n,)
    unit_ptr: np.ndarray  # (n+1,) slices into unit_members, per vertex
    unit_members: np.ndarray
    unit_owner: np.ndarray  # owner vertex per unit_members slot
    entry_ptr: np.ndarray  # (n+1,) incidence entries per vertex
    entry_sigma: np.ndarray  # (n_entries,)
    entry_owner: np.ndarray  # (n_entries,)
    res_ptr: np.ndarray  # (n_entries+1,) residue slices
    res_members: np.ndarray
    res_owner: np.ndarray  # owner vertex per residue slot


def build_schedule(hypergraph):
    n = hypergraph.n
    index = hypergraph.index
    units = find_units(hypergraph)
    unit_of = {}
    for u in units:
        for v in u.members:
            unit_of[v] = u

    inv_dv = np.array(
        [1.0 / hypergraph.vertex_weight[v] for v in hypergraph.vertices]
    )

    unit_ptr = [0]
    unit_members = []
    unit_owner = []
    entry_ptr = [0]
    entry_sigma = []
    entry_owner = []
    res_ptr = [0]
    res_members = []
    res_owner = []

    for vi, v in enumerate(hypergraph.vertices):
        unit = unit_of[v]
        w_idx = sorted(index[u] for u in unit.members)
        unit_members.extend(w_idx)
        unit_owner.extend([vi] * len(w_idx))
        unit_ptr.append(len(unit_members))

        entries = []
        for eid in unit.generating_set:
            residue = sorted(
                index[u] for u in hypergraph.edge_by_id[eid].members - unit.members
            )
            entries.append((tuple(residue), eid, residue))
        entries.sort()
        for _, eid, residue in entries:
            entry_sigma.append(hypergraph.sigma(eid))
            entry_owner.append(vi)
            res_members.extend(residue)
            res_owner.extend([vi] * len(residue))
            res_ptr.append(len(res_members))
        entry_ptr.append(len(entry_sigma))

    as_i = lambda a: np.asarray(a, dtype=np.int64)
    return DiffusionSchedule(
        n=n,
        inv_vertex_weight=inv_dv,
        unit_ptr=as_i(unit_ptr),
        unit_members=as_i(unit_members),
        unit_owner=as_i(unit_owner),
        entry_ptr=as_i(entry_ptr),
        entry_sigma=np.asarray(entry_sigma, dtype=float),
        entry_owner=as_i(entry_owner),
        res_ptr=as_i(res_ptr),
        res_members=as_i(res_members),
        res_owner=as_i(res_owner),
    )
