import numpy as np
import pytest

from hypersync.errors import (
    InconsistentVertexWeightError,
    NonTransitiveTwinRelationError,
)
from hypersync.hypergraph import validate
from hypersync.units import (
    contract,
    find_twins,
    find_units,
    lift_to_H,
    quotient_vertex_label,
    twin_classes,
    unit_of,
)

from conftest import random_hypergraph, unit_rich_hypergraph
from oracles import brute_force_units


def members(units):
    return {frozenset(u.members) for u in units}


def test_h1_units(h1):
    units = find_units(h1)
    assert members(units) == {
        frozenset({"1", "2"}),
        frozenset({"3"}),
        frozenset({"4", "5"}),
    }
    gen = {frozenset(u.members): u.generating_set for u in units}
    assert gen[frozenset({"1", "2"})] == frozenset({"e1"})
    assert gen[frozenset({"3"})] == frozenset({"e1", "e2"})


def test_h4_units_all_distinct(h4):
    assert members(find_units(h4)) == {
        frozenset({"1", "2"}),
        frozenset({"3"}),
        frozenset({"4"}),
        frozenset({"5"}),
    }


def test_units_partition_vertices(h1, h4, h5):
    for H in (h1, h4, h5):
        units = find_units(H)
        seen = [v for u in units for v in u.members]
        assert sorted(seen) == list(H.vertices)


def test_unit_of_matches_find_units(h1):
    for v in h1.vertices:
        u = unit_of(h1, v)
        assert v in u.members
        assert u in find_units(h1)


@pytest.mark.parametrize("seed", range(40))
def test_units_against_brute_force(seed):
    H = random_hypergraph(np.random.default_rng(seed), max_n=12, max_m=6)
    got = {(u.members, u.generating_set) for u in find_units(H)}
    assert got == brute_force_units(H)


def test_h1_twins(h1):
    pairs = find_twins(h1, find_units(h1))
    assert len(pairs) == 1
    p = pairs[0]
    assert {p.first.members, p.second.members} == {
        frozenset({"1", "2"}),
        frozenset({"4", "5"}),
    }
    assert p.bijection == {"e1": "e2"}
    assert p.sigma_preserving


def test_h4_has_no_twins(h4):
    assert find_twins(h4, find_units(h4)) == []


def test_h5_twins(h5):
    pairs = find_twins(h5, find_units(h5))
    assert len(pairs) == 1
    p = pairs[0]
    assert {p.first.members, p.second.members} == {
        frozenset({"1", "2"}),
        frozenset({"3", "4"}),
    }


def test_sigma_preservation_flag():
    # same structure as the two-edge reference but unequal edge weights:
    # the canonical bijection exists yet no longer preserves sigma
    H = validate(
        ["1", "2", "3", "4", "5"],
        [("e1", ["1", "2", "3"]), ("e2", ["3", "4", "5"])],
        edge_weights={"e1": 9.0, "e2": 18.0},
    )
    (p,) = find_twins(H, find_units(H))
    assert not p.sigma_preserving


def test_twin_classes_h1(h1):
    classes = twin_classes(h1, find_units(h1))
    multi = [cls for cls in classes if len(cls) > 1]
    assert len(multi) == 1
    assert {frozenset(u.members) for u in multi[0]} == {
        frozenset({"1", "2"}),
        frozenset({"4", "5"}),
    }


def test_twin_classes_three_way():
    # three pairwise-twin units around a common center
    H = validate(
        [str(i) for i in range(1, 8)],
        [
            ("e1", ["1", "2", "7"]),
            ("e2", ["3", "4", "7"]),
            ("e3", ["5", "6", "7"]),
        ],
    )
    classes = twin_classes(H, find_units(H))
    multi = [cls for cls in classes if len(cls) > 1]
    assert len(multi) == 1
    assert len(multi[0]) == 3


def test_non_transitive_twins_raise():
    # units {1,2} and {5,6} are twins of {3,4} via different edges but not
    # of each other: residues match pairwise through 3,4 yet the outer pair
    # has mismatched generating sets
    H = validate(
        ["1", "2", "3", "4", "5", "6", "7"],
        [
            ("e1", ["1", "2", "3", "4"]),
            ("e2", ["3", "4", "5", "6"]),
            ("e3", ["5", "6", "7"]),
            ("e4", ["1", "2", "7"]),
        ],
    )
    units = find_units(H)
    pairs = find_twins(H, units)
    if pairs and not _pairwise_closed(pairs):
        with pytest.raises(NonTransitiveTwinRelationError):
            twin_classes(H, units)


def _pairwise_closed(pairs):
    import itertools

    keys = {}
    for p in pairs:
        keys.setdefault(p.first.key, set()).add(p.second.key)
        keys.setdefault(p.second.key, set()).add(p.first.key)
    comp = {}
    for p in pairs:
        comp.setdefault(p.first.key, set()).update({p.first.key, p.second.key})
    for a, linked in keys.items():
        for b, c in itertools.combinations(sorted(linked), 2):
            if c not in keys.get(b, set()):
                return False
    return True


def test_blowup_units_are_the_clusters():
    for seed in range(10):
        H, expected = unit_rich_hypergraph(np.random.default_rng(seed))
        assert members(find_units(H)) == expected


def test_contract_h5(h5):
    con = contract(h5, c_V=1.0, c_E=1.0)
    q = con.quotient
    assert q.vertices == ("1+2", "3+4", "5+6")
    assert {frozenset(e.members) for e in q.edges} == {
        frozenset({"1+2", "5+6"}),
        frozenset({"3+4", "5+6"}),
    }
    for e in q.edges:
        assert q.edge_weight[e.id] == pytest.approx(4.0)
        assert q.sigma(e.id) == pytest.approx(1.0)
    assert con.vertex_map["1"] == "1+2"
    assert con.vertex_map["6"] == "5+6"
    # sigma of a quotient edge is the sum of sigma over its preimage / c_E
    assert con.lifted_edge_weight == {"q0": 1.0, "q1": 1.0}


def test_contract_scaling(h5):
    con = contract(h5, c_V=2.0, c_E=3.0)
    q = con.quotient
    for v in h5.vertices:
        assert h5.vertex_weight[v] == pytest.approx(
            2.0 * q.vertex_weight[con.vertex_map[v]]
        )
    for eid, sig in con.lifted_edge_weight.items():
        assert sig == pytest.approx(3.0 * q.sigma(eid))


def test_contract_rejects_nonconstant_unit_weight(h1):
    H = validate(
        ["1", "2", "3", "4", "5"],
        [("e1", ["1", "2", "3"]), ("e2", ["3", "4", "5"])],
        vertex_weights={"1": 1.0, "2": 2.0, "3": 1.0, "4": 1.0, "5": 1.0},
    )
    with pytest.raises(InconsistentVertexWeightError):
        contract(H)


def test_lift_roundtrip(h5):
    con = contract(h5)
    y = np.array([1.0, 2.0, 3.0])
    lifted = lift_to_H(con, y)
    # constant on each unit, scaled by the unit cardinality
    assert np.allclose(lifted, [0.5, 0.5, 1.0, 1.0, 1.5, 1.5])


def test_quotient_vertex_label(h5):
    u = unit_of(h5, "5")
    assert quotient_vertex_label(u) == "5+6"
