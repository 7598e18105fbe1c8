import json

import pytest

from netcov.topology import (BlockLayout, DanglingChildReference, DuplicateVertex,
                             NetworkTopology, all_bipartite, all_k_partite,
                             layout_for, load_topology, orphan_children,
                             parent_support, star, topology_from_dict, triangle,
                             validate)


def test_triangle_is_valid():
    topo = triangle()
    validate(topo)
    assert topo.num_parents == 3
    assert topo.num_children == 3
    # every pair of children shares exactly one parent
    pairs = {frozenset(cs) for cs in topo.children_of}
    assert pairs == {frozenset({0, 1}), frozenset({0, 2}), frozenset({1, 2})}


def test_star_is_valid():
    topo = star(4)
    assert topo.children_of == (frozenset({0, 1, 2, 3}),)
    assert orphan_children(topo) == frozenset()


def test_duplicate_vertex_rejected():
    with pytest.raises(DuplicateVertex):
        NetworkTopology(parents=("a",), children=("a",),
                        children_of=(frozenset({0}),))


def test_dangling_child_reference_rejected():
    with pytest.raises(DanglingChildReference):
        NetworkTopology(parents=("p1",), children=("A", "B"),
                        children_of=(frozenset({2}),))


def test_parents_of_is_inverse_of_children_of():
    topo = triangle()
    for m in range(3):
        for n in range(3):
            assert (n in topo.parents_of(m)) == (m in topo.children_of[n])


def test_parent_support_triangle_no_inputs():
    layout = layout_for([2, 2, 2])
    # parent 0 feeds children {0, 1}: first four coordinates
    assert parent_support(triangle(), layout, 0) == [0, 1, 2, 3]


def test_parent_support_single_child():
    topo = NetworkTopology(("p1",), ("A", "B"),
                           (frozenset({1}),))
    layout = layout_for([3, 4])
    assert parent_support(topo, layout, 0) == [3, 4, 5, 6]


def test_parent_support_two_settings():
    layout = layout_for([2, 2, 2], [2, 2, 2])
    sup = parent_support(triangle(), layout, 0)
    assert len(sup) == 8  # 2 children x 2 settings x dim 2
    assert sup == sorted(sup)


def test_parent_support_out_of_range():
    with pytest.raises(IndexError):
        parent_support(triangle(), layout_for([2, 2, 2]), 3)


def test_orphan_children():
    assert orphan_children(triangle()) == frozenset()
    topo = NetworkTopology(
        ("p1", "p2"), ("c1", "c2", "c3", "c4"),
        (frozenset({0, 1}), frozenset({1, 2})))
    assert orphan_children(topo) == frozenset({3})


@pytest.mark.parametrize("topo", [triangle(), star(3), all_bipartite(4),
                                  all_k_partite(5, 3)])
def test_support_union_covers_non_orphans(topo):
    layout = layout_for([2] * topo.num_children)
    covered = set()
    for n in range(topo.num_parents):
        covered |= set(parent_support(topo, layout, n))
    expected = set()
    for m in range(topo.num_children):
        if m not in orphan_children(topo):
            expected |= set(layout.child_indices(m))
    assert covered == expected


def test_supports_overlap_in_triangle():
    layout = layout_for([2, 2, 2])
    s0 = set(parent_support(triangle(), layout, 0))
    s1 = set(parent_support(triangle(), layout, 1))
    assert s0 & s1  # both contain child 0's block


def test_layout_offsets_and_indices():
    layout = layout_for([2, 3], [2, 1])
    assert layout.total_dim == 2 + 2 + 3
    assert list(layout.indices(0, 1)) == [2, 3]
    assert layout.child_indices(0) == [0, 1, 2, 3]
    assert layout.settings_of(0) == [0, 1]
    with pytest.raises(KeyError):
        layout.block_index(1, 1)


def test_blocks_are_contiguous_and_cover_everything():
    layout = layout_for([2, 4, 3], [2, 1, 3])
    seen = []
    for (m, s, _) in layout.blocks:
        seen.extend(layout.indices(m, s))
    assert seen == list(range(layout.total_dim))


def test_all_k_partite_counts():
    topo = all_k_partite(4, 2)
    assert topo.num_parents == 6
    assert all(len(cs) == 2 for cs in topo.children_of)
    assert all_bipartite(4).children_of == topo.children_of


def test_topology_file_round_trip(tmp_path):
    doc = {
        "parents": [{"name": "p1", "children": ["A", "B"]},
                    {"name": "p2", "children": ["B", "C"]}],
        "children": [{"name": "A", "outcomes": 2, "settings": 1},
                     {"name": "B", "outcomes": 3, "settings": 2},
                     {"name": "C"}],
    }
    path = tmp_path / "topo.json"
    path.write_text(json.dumps(doc))
    topo, outcomes, settings = load_topology(path)
    assert topo.children == ("A", "B", "C")
    assert topo.children_of == (frozenset({0, 1}), frozenset({1, 2}))
    assert outcomes == [2, 3, 2]
    assert settings == [1, 2, 1]


def test_topology_dict_unknown_child():
    doc = {"parents": [{"name": "p1", "children": ["Z"]}],
           "children": [{"name": "A"}]}
    with pytest.raises(DanglingChildReference):
        topology_from_dict(doc)


def test_blocklayout_direct_construction():
    layout = BlockLayout(((0, 0, 2), (1, 0, 3)))
    assert layout.offsets == (0, 2)
    assert layout.total_dim == 5
