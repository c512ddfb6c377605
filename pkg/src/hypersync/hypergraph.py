"""Weighted hypergraph data model, validation, and JSON file I/O.

A hypergraph is a vertex set plus a family of hyperedges (vertex subsets of
size >= 2), together with strictly positive vertex and edge weight functions.
Vertices are kept in lexicographic label order everywhere; all downstream
matrices and reports inherit that canonical order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    DisconnectedError,
    DuplicateEdgeError,
    EmptyVertexSetError,
    IoError,
    IsolatedVertexError,
    LoopEdgeError,
    NonPositiveWeightError,
    ParseError,
    UnknownVertexError,
    UnknownVertexInEdgeError,
)

#: Named weight presets.  "uniform" recovers the standard hypergraph
#: Laplacian; "cardinality-normalized" divides out a (|e|-1) factor;
#: "degree-vertex" weighs each vertex by its star size.
WEIGHT_PRESETS = ("uniform", "cardinality-normalized", "degree-vertex")


@dataclass(frozen=True)
class Hyperedge:
    id: str
    members: frozenset


@dataclass(frozen=True, eq=False)
class Hypergraph:
    """Validated, immutable hypergraph.

    ``vertices`` is sorted lexicographically, ``edges`` sorted by edge id.
    Weight dicts are treated as immutable once constructed.
    """

    vertices: tuple
    edges: tuple
    vertex_weight: dict
    edge_weight: dict

    # -- identity ------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.edges == other.edges
            and self.vertex_weight == other.vertex_weight
            and self.edge_weight == other.edge_weight
        )

    def __hash__(self):
        return hash((self.vertices, self.edges))

    # -- views ----------------------------------------------------------------

    @cached_property
    def index(self):
        """label -> position in canonical vertex order"""
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def edge_by_id(self):
        return {e.id: e for e in self.edges}

    @cached_property
    def _stars(self):
        stars = {v: set() for v in self.vertices}
        for e in self.edges:
            for v in e.members:
                stars[v].add(e.id)
        return {v: frozenset(s) for v, s in stars.items()}

    @property
    def n(self):
        return len(self.vertices)

    @property
    def m(self):
        return len(self.edges)

    # -- operations -------------------------------------------------------------

    def star(self, v):
        """Edge ids of all hyperedges containing ``v``."""
        if v not in self.index:
            raise UnknownVertexError(f"unknown vertex {v!r}")
        return self._stars[v]

    def rank_corank(self):
        sizes = [len(e.members) for e in self.edges]
        return max(sizes), min(sizes)

    def sigma(self, edge_id):
        """delta_E(e) / |e|^2 -- the per-edge diffusion coefficient."""
        e = self.edge_by_id[edge_id]
        return self.edge_weight[edge_id] / len(e.members) ** 2

    def rho(self, edge_id):
        """delta_E(e) / |e| (defined for completeness; unused downstream)."""
        e = self.edge_by_id[edge_id]
        return self.edge_weight[edge_id] / len(e.members)

    def to_dict(self):
        return {
            "vertices": list(self.vertices),
            "edges": [
                {
                    "id": e.id,
                    "members": sorted(e.members),
                    "delta": self.edge_weight[e.id],
                }
                for e in self.edges
            ],
            "vertex_weights": {v: self.vertex_weight[v] for v in self.vertices},
        }


def _default_edge_weight(members, preset):
    k = len(members)
    if preset == "cardinality-normalized":
        return k * k / (k - 1)
    return float(k * k)


def validate(
    vertices,
    edges,
    vertex_weights=None,
    edge_weights=None,
    preset="uniform",
):
    """Validate raw structure and return a canonical :class:`Hypergraph`.

    ``edges`` is an iterable of ``(id, members)`` pairs.  Missing weights are
    filled from ``preset``; explicit weights always win.
    """
    if preset not in WEIGHT_PRESETS:
        raise ParseError(f"unknown weight preset {preset!r}")
    vertices = list(vertices)
    vlabels = sorted(set(vertices))
    if len(vlabels) != len(vertices):
        raise ParseError("duplicate vertex labels")
    if not vlabels:
        raise EmptyVertexSetError("vertex set is empty")
    if any(not isinstance(v, str) or not v for v in vlabels):
        raise ParseError("vertex labels must be nonempty strings")

    seen_ids = set()
    seen_members = set()
    canon = []
    for eid, members in edges:
        if not isinstance(eid, str) or not eid:
            raise ParseError("edge ids must be nonempty strings")
        if eid in seen_ids:
            raise DuplicateEdgeError(f"duplicate edge id {eid!r}")
        seen_ids.add(eid)
        mset = frozenset(members)
        if len(mset) <= 1:
            raise LoopEdgeError(f"edge {eid!r} has {len(mset)} member(s); loops are excluded")
        unknown = mset - set(vlabels)
        if unknown:
            raise UnknownVertexInEdgeError(
                f"edge {eid!r} references unknown vertices {sorted(unknown)}"
            )
        if mset in seen_members:
            raise DuplicateEdgeError(f"edge {eid!r} repeats an existing member set")
        seen_members.add(mset)
        canon.append(Hyperedge(eid, mset))
    canon.sort(key=lambda e: e.id)

    covered = set()
    for e in canon:
        covered |= e.members
    isolated = set(vlabels) - covered
    if isolated:
        raise IsolatedVertexError(f"vertices {sorted(isolated)} appear in no hyperedge")

    _check_connected(vlabels, canon)

    stars = {v: [] for v in vlabels}
    for e in canon:
        for v in e.members:
            stars[v].append(e.id)

    vw = {}
    for v in vlabels:
        if vertex_weights and v in vertex_weights:
            vw[v] = float(vertex_weights[v])
        elif preset == "degree-vertex":
            vw[v] = float(len(stars[v]))
        else:
            vw[v] = 1.0
    if vertex_weights:
        extra = set(vertex_weights) - set(vlabels)
        if extra:
            raise UnknownVertexError(f"weights given for unknown vertices {sorted(extra)}")

    ew = {}
    for e in canon:
        if edge_weights and e.id in edge_weights:
            ew[e.id] = float(edge_weights[e.id])
        else:
            ew[e.id] = _default_edge_weight(e.members, preset)

    for v, w in vw.items():
        if not (w > 0) or not math.isfinite(w):
            raise NonPositiveWeightError(f"vertex weight of {v!r} is {w}")
    for eid, w in ew.items():
        if not (w > 0) or not math.isfinite(w):
            raise NonPositiveWeightError(f"edge weight of {eid!r} is {w}")

    return Hypergraph(tuple(vlabels), tuple(canon), vw, ew)


def _check_connected(vlabels, edges):
    """BFS over the vertex-hyperedge incidence structure."""
    if not edges:
        if len(vlabels) > 1:
            raise DisconnectedError("no edges but more than one vertex")
        return
    adjacency = {v: [] for v in vlabels}
    for e in edges:
        for v in e.members:
            adjacency[v].append(e)
    seen = {vlabels[0]}
    frontier = [vlabels[0]]
    while frontier:
        v = frontier.pop()
        for e in adjacency[v]:
            for u in e.members:
                if u not in seen:
                    seen.add(u)
                    frontier.append(u)
    if len(seen) != len(vlabels):
        missing = sorted(set(vlabels) - seen)
        raise DisconnectedError(f"vertices {missing} unreachable from {vlabels[0]!r}")


# -- file I/O ---------------------------------------------------------------------


def from_dict(doc):
    """Build a hypergraph from the JSON document structure."""
    if not isinstance(doc, dict):
        raise ParseError("top-level JSON value must be an object")
    if "vertices" not in doc:
        raise ParseError('missing "vertices" key')
    if "edges" not in doc:
        raise ParseError('missing "edges" key')
    preset = doc.get("weight_preset", "uniform")
    edges = []
    edge_weights = {}
    for i, e in enumerate(doc["edges"]):
        if not isinstance(e, dict) or "id" not in e or "members" not in e:
            raise ParseError(f'edge #{i} must be an object with "id" and "members"')
        edges.append((e["id"], e["members"]))
        if "delta" in e:
            edge_weights[e["id"]] = e["delta"]
    return validate(
        doc["vertices"],
        edges,
        vertex_weights=doc.get("vertex_weights"),
        edge_weights=edge_weights or None,
        preset=preset,
    )


def load(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoError(str(exc)) from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    return from_dict(doc)


def save(hypergraph, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(hypergraph.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoError(str(exc)) from exc
