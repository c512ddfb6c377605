"""Unit and twin-unit detection plus the quotient (contraction) hypergraph.

A *unit* is a maximal set of vertices sharing exactly the same star; the
shared star is its *generating set*.  Two units are *twins* when their
generating sets match one-to-one with identical residues outside the units;
the residue-matching bijection is *canonical*.  Units always partition the
vertex set.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import (
    InconsistentVertexWeightError,
    NoCanonicalBijectionError,
    NonTransitiveTwinRelationError,
)
from .hypergraph import Hypergraph, validate

SIGMA_REL_TOL = 1e-12


@dataclass(frozen=True)
class Unit:
    members: frozenset
    generating_set: frozenset

    @property
    def key(self):
        """Smallest member label; canonical sort key."""
        return min(self.members)

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class TwinPair:
    first: Unit
    second: Unit
    bijection: dict  # edge id in first.generating_set -> edge id in second's
    sigma_preserving: bool


@dataclass(frozen=True)
class Contraction:
    quotient: Hypergraph
    vertex_map: dict  # vertex of H -> vertex of quotient
    edge_map: dict  # edge id of H -> edge id of quotient
    lifted_edge_weight: dict  # quotient edge id -> sum of sigma over preimage
    units: tuple
    c_V: float
    c_E: float


def find_units(hypergraph):
    """All units, in canonical order (by smallest member label)."""
    groups = defaultdict(set)
    for v in hypergraph.vertices:
        groups[hypergraph.star(v)].add(v)
    units = [Unit(frozenset(vs), gen) for gen, vs in groups.items()]
    units.sort(key=lambda u: u.key)
    return units


def unit_of(hypergraph, v):
    star = hypergraph.star(v)
    members = frozenset(u for u in hypergraph.vertices if hypergraph.star(u) == star)
    return Unit(members, star)


def _residues(hypergraph, unit):
    """edge id -> residue (members outside the unit), for the generating set."""
    return {
        eid: frozenset(hypergraph.edge_by_id[eid].members - unit.members)
        for eid in unit.generating_set
    }


def _sigma_close(a, b):
    return math.isclose(a, b, rel_tol=SIGMA_REL_TOL, abs_tol=0.0)


def _twin_pair(hypergraph, first, second):
    """The TwinPair for two units, or None if they are not twins."""
    res_i = _residues(hypergraph, first)
    res_j = _residues(hypergraph, second)
    if set(res_i.values()) != set(res_j.values()):
        return None
    if len(set(res_i.values())) != len(res_i) or len(set(res_j.values())) != len(res_j):
        raise NoCanonicalBijectionError(
            "residues collide within a generating set; the twin matching is ambiguous",
            units=(sorted(first.members), sorted(second.members)),
        )
    by_residue = {res: eid for eid, res in res_j.items()}
    bijection = {eid: by_residue[res] for eid, res in res_i.items()}
    preserving = all(
        _sigma_close(hypergraph.sigma(e), hypergraph.sigma(f)) for e, f in bijection.items()
    )
    return TwinPair(first, second, bijection, preserving)


def find_twins(hypergraph, units=None):
    """All unordered twin pairs, each with its canonical bijection.

    Pairs are reported once, with ``first`` the unit of smaller key.
    """
    if units is None:
        units = find_units(hypergraph)
    pairs = []
    for i in range(len(units)):
        for j in range(i + 1, len(units)):
            pair = _twin_pair(hypergraph, units[i], units[j])
            if pair is not None:
                pairs.append(pair)
    return pairs


def twin_classes(hypergraph, units=None):
    """Partition units into maximal classes of pairwise sigma-preserving twins.

    Classes are computed as connected components of the pairwise relation and
    then re-verified pairwise; a component that is not a clique means the
    relation is not transitive on this input, which is reported rather than
    resolved arbitrarily.
    """
    if units is None:
        units = find_units(hypergraph)
    pairs = find_twins(hypergraph, units)
    linked = {
        frozenset((p.first.key, p.second.key)) for p in pairs if p.sigma_preserving
    }
    parent = {u.key: u.key for u in units}

    def root(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for a, b in linked:
        parent[root(a)] = root(b)

    components = defaultdict(list)
    for u in units:
        components[root(u.key)].append(u)
    classes = sorted(components.values(), key=lambda c: min(u.key for u in c))
    for cls in classes:
        for i in range(len(cls)):
            for j in range(i + 1, len(cls)):
                key = frozenset((cls[i].key, cls[j].key))
                if key not in linked:
                    raise NonTransitiveTwinRelationError(
                        "twin relation is not transitive on this hypergraph",
                        units=[sorted(u.members) for u in cls],
                    )
    return classes


def quotient_vertex_label(unit):
    return "+".join(sorted(unit.members))


def contract(hypergraph, c_V=1.0, c_E=1.0):
    """Collapse each unit to a single vertex and lift the weights.

    Quotient edge weights realize sigma_quotient = (lifted sigma) / c_E, and
    quotient vertex weights delta_V / c_V; vertex weights must be constant on
    every unit for the latter to be well defined.
    """
    units = find_units(hypergraph)
    vertex_map = {}
    unit_label = {}
    for u in units:
        label = quotient_vertex_label(u)
        unit_label[u.key] = label
        weights = {hypergraph.vertex_weight[v] for v in u.members}
        if len(weights) > 1:
            raise InconsistentVertexWeightError(
                "vertex weight varies within a unit; quotient vertex weight undefined",
                unit=sorted(u.members),
            )
        for v in u.members:
            vertex_map[v] = label

    # group edges by their image vertex set
    image_groups = defaultdict(list)
    for e in hypergraph.edges:
        image = frozenset(vertex_map[v] for v in e.members)
        # an edge fully inside one unit would contract to a loop, which would
        # contradict connectedness of H; keep it loud rather than silent
        assert len(image) >= 2, f"edge {e.id!r} contracts to a loop"
        image_groups[image].append(e.id)

    qedges = []
    qedge_weight = {}
    lifted_sigma = {}
    edge_map = {}
    for k, image in enumerate(sorted(image_groups, key=lambda s: tuple(sorted(s)))):
        qid = f"q{k}"
        qedges.append((qid, image))
        total_sigma = sum(hypergraph.sigma(eid) for eid in image_groups[image])
        lifted_sigma[qid] = total_sigma
        sigma_q = total_sigma / c_E
        qedge_weight[qid] = sigma_q * len(image) ** 2
        for eid in image_groups[image]:
            edge_map[eid] = qid

    qvertex_weight = {
        unit_label[u.key]: hypergraph.vertex_weight[min(u.members)] / c_V for u in units
    }
    quotient = validate(
        [unit_label[u.key] for u in units],
        qedges,
        vertex_weights=qvertex_weight,
        edge_weights=qedge_weight,
    )
    return Contraction(
        quotient=quotient,
        vertex_map=vertex_map,
        edge_map=edge_map,
        lifted_edge_weight=lifted_sigma,
        units=tuple(units),
        c_V=c_V,
        c_E=c_E,
    )


def lift_to_H(contraction, y):
    """Lift a quotient vertex function down to H: value / unit cardinality.

    ``y`` is an array in the quotient's canonical vertex order; the result is
    an array in the original hypergraph's canonical order.
    """
    quotient = contraction.quotient
    y = np.asarray(y, dtype=float)
    sizes = defaultdict(int)
    for v, label in contraction.vertex_map.items():
        sizes[label] += 1
    original = sorted(contraction.vertex_map)
    out = np.empty(len(original))
    for i, v in enumerate(original):
        label = contraction.vertex_map[v]
        out[i] = y[quotient.index[label]] / sizes[label]
    return out
