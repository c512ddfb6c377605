import itertools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hypersync.hypergraph import validate

DATA = Path(__file__).parent.parent / "data"


@pytest.fixture
def h1():
    return validate(
        ["1", "2", "3", "4", "5"],
        [("e1", ["1", "2", "3"]), ("e2", ["3", "4", "5"])],
    )


@pytest.fixture
def h4():
    return validate(
        ["1", "2", "3", "4", "5"],
        [("e1", ["1", "2", "3"]), ("e2", ["3", "4"]), ("e3", ["4", "5"])],
    )


@pytest.fixture
def h5():
    return validate(
        ["1", "2", "3", "4", "5", "6"],
        [("e1", ["1", "2", "5", "6"]), ("e2", ["3", "4", "5", "6"])],
    )


@pytest.fixture
def data_dir():
    return DATA


def random_hypergraph(rng, max_n=40, max_m=30, weighted=True):
    """A random connected hypergraph with no isolated vertices."""
    n = int(rng.integers(3, max_n + 1))
    verts = [str(i) for i in range(1, n + 1)]
    m = int(rng.integers(2, max_m + 1))
    members_seen = set()
    edges = []

    def add(members):
        fs = frozenset(members)
        if len(fs) >= 2 and fs not in members_seen:
            members_seen.add(fs)
            edges.append((f"e{len(edges)+1}", sorted(fs)))

    # random chain of overlapping edges guarantees connectivity and coverage
    order = list(rng.permutation(verts))
    pos = 0
    while pos < n - 1:
        size = int(rng.integers(2, min(5, n - pos) + 1))
        add(order[pos:pos + size])
        pos += size - 1
    attempts = 0
    while len(edges) < m and attempts < 4 * m:
        size = int(rng.integers(2, min(6, n) + 1))
        add(rng.choice(verts, size=size, replace=False))
        attempts += 1

    vw = ew = None
    if weighted:
        vw = {v: float(rng.uniform(0.5, 2.0)) for v in verts}
        ew = {eid: float(rng.uniform(0.5, 3.0)) for eid, _ in edges}
    return validate(verts, edges, vertex_weights=vw, edge_weights=ew)


def unit_rich_hypergraph(rng, cluster_size=None, n_templates=None,
                         equal_cardinality=True, preset="uniform",
                         max_extra_edge=None):
    """Blow-up construction: expand template vertices into vertex clusters.

    Each template vertex becomes a cluster of ``cluster_size`` vertices
    (uniformly, when ``equal_cardinality``); template edges become the union
    of their clusters.  Templates are drawn so that template vertices have
    pairwise distinct stars, hence the clusters are exactly the units.
    """
    k = n_templates or int(rng.integers(3, 6))
    c = cluster_size or int(rng.integers(2, 4))
    # template: a path plus random extra edges, then prune to distinct stars
    t_verts = list(range(k))
    t_edges = [frozenset(p) for p in zip(t_verts, t_verts[1:])]
    top = max_extra_edge or k
    for _ in range(int(rng.integers(0, 3))):
        size = int(rng.integers(2, top + 1))
        cand = frozenset(rng.choice(t_verts, size=size, replace=False))
        if cand not in t_edges:
            t_edges.append(cand)
    stars = {v: frozenset(i for i, e in enumerate(t_edges) if v in e)
             for v in t_verts}
    if len(set(stars.values())) != k:
        # pin distinct stars with pairwise edges along a second path offset
        for i in range(k - 2):
            cand = frozenset((t_verts[i], t_verts[i + 2]))
            if cand not in t_edges:
                t_edges.append(cand)
        stars = {v: frozenset(i for i, e in enumerate(t_edges) if v in e)
                 for v in t_verts}
    assert len(set(stars.values())) == k

    sizes = {v: c for v in t_verts}
    if not equal_cardinality:
        sizes[t_verts[0]] = c + 1
    clusters = {}
    labels = []
    nxt = 1
    for v in t_verts:
        clusters[v] = [str(nxt + i) for i in range(sizes[v])]
        labels.extend(clusters[v])
        nxt += sizes[v]
    edges = []
    for i, e in enumerate(t_edges):
        members = sorted(itertools.chain.from_iterable(clusters[v] for v in e))
        edges.append((f"e{i+1}", members))
    H = validate(labels, edges, preset=preset)
    expected_units = {frozenset(clusters[v]) for v in t_verts}
    return H, expected_units
