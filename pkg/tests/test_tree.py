import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mpmrf.errors import BadIndex, BadShapeParam, NotATree
from mpmrf.tree import (
    build_tree, chi_nary, chi_nary_size, diameter, distance, format_tree_text, generate,
    hub_chain, parse_tree_text, path, reroot, root_tree, series, star, weighted_adjacency,
)

from conftest import random_trees


def assert_valid_rooting(rooted):
    tree = rooted.tree
    assert rooted.order[0] == rooted.root
    assert sorted(rooted.order) == list(range(1, tree.d + 1))
    pos = {v: i for i, v in enumerate(rooted.order)}
    rebuilt = set()
    for v in rooted.order[1:]:
        p = rooted.parent[v]
        assert pos[p] < pos[v]
        rebuilt.add((min(p, v), max(p, v)))
    assert rebuilt == set(tree.edges)


class TestBuild:
    def test_single_vertex(self):
        t = build_tree(1, [])
        assert t.d == 1 and t.edges == ()

    def test_series_three(self):
        t = build_tree(3, [(1, 2), (2, 3)])
        assert t.edges == ((1, 2), (2, 3))

    def test_cycle_rejected(self):
        with pytest.raises(NotATree):
            build_tree(3, [(1, 2), (2, 3), (1, 3)])

    @pytest.mark.parametrize("edges", [
        [(1, 1), (2, 3)],            # self-loop
        [(1, 2), (2, 1)],            # duplicate
        [(1, 2)],                    # too few edges
    ])
    def test_malformed_edge_lists(self, edges):
        with pytest.raises(NotATree):
            build_tree(3, edges)

    def test_disconnected(self):
        # four edges on five vertices with a cycle leaves vertex 5 isolated
        with pytest.raises(NotATree):
            build_tree(5, [(1, 2), (2, 3), (3, 1), (3, 4)])

    def test_vertex_out_of_range(self):
        with pytest.raises(BadIndex):
            build_tree(3, [(1, 2), (2, 4)])

    def test_edges_are_normalised(self):
        t = build_tree(3, [(2, 1), (3, 2)])
        assert t.has_edge(1, 2) and t.has_edge(3, 2)
        assert t.degree(2) == 2


class TestGenerators:
    def test_star(self):
        assert set(star(3).edges) == {(1, 2), (1, 3)}

    def test_series(self):
        assert set(series(4).edges) == {(1, 2), (2, 3), (3, 4)}

    def test_binary_radius_two(self):
        t = chi_nary(2, 2)
        assert t.d == 7
        rooted = root_tree(t, 1)
        assert rooted.children[1] == (2, 3)
        assert all(len(rooted.children[c]) == 2 for c in (2, 3))
        assert all(len(rooted.children[c]) == 0 for c in range(4, 8))

    @pytest.mark.parametrize("chi,xi", [(1, 0), (1, 4), (2, 0), (3, 2), (4, 1)])
    def test_chi_nary_size(self, chi, xi):
        assert chi_nary(chi, xi).d == chi_nary_size(chi, xi)

    @pytest.mark.parametrize("bad", ["star:0", "series:-1", "chinary:0:2", "chinary:2:-1",
                                     "ring:5", "star:x"])
    def test_bad_shapes(self, bad):
        with pytest.raises(BadShapeParam):
            generate(bad)

    def test_shape_strings(self):
        assert generate("star:5") == star(5)
        assert generate("series:4") == series(4)
        assert generate("chinary:3:2") == chi_nary(3, 2)

    def test_hub_chain_structure(self):
        t = generate("hubchain")
        assert t.d == 50
        hubs = {2: 8, 9: 8, 16: 8, 23: 8, 30: 21}
        for v in range(1, 51):
            assert t.degree(v) == hubs.get(v, 1)
        for a, b in [(1, 2), (2, 9), (9, 16), (16, 23), (23, 30)]:
            assert t.has_edge(a, b)
        assert all(t.has_edge(2, leaf) for leaf in range(3, 9))
        assert all(t.has_edge(30, leaf) for leaf in range(31, 51))
        assert diameter(t) == 6
        assert set(generate("paper-fig8").edges) == set(t.edges)

    def test_hub_chain_generalises(self):
        t = hub_chain((2, 3))
        assert t.d == 2 + (2 + 3)  # two hubs and their leaves
        assert t.degree(2) == 3  # vertex 1, vertex 3, next hub


class TestRooting:
    def test_series_rooted_at_one(self):
        r = root_tree(series(3), 1)
        assert r.parent_map() == {2: 1, 3: 2}
        assert r.order == (1, 2, 3)

    def test_seven_vertex_tree_rooted_at_one(self, seven_tree):
        r = root_tree(seven_tree, 1)
        assert r.order == (1, 2, 3, 4, 5, 6, 7)
        assert_valid_rooting(r)

    def test_seven_vertex_tree_rooted_at_three(self, seven_tree):
        r = root_tree(seven_tree, 3)
        assert_valid_rooting(r)
        # the listed ordering (3,1,2,4,6,7,5) is another valid topological order
        alt = (3, 1, 2, 4, 6, 7, 5)
        pos = {v: i for i, v in enumerate(alt)}
        assert all(pos[r.parent[v]] < pos[v] for v in alt[1:])

    def test_bad_root(self, seven_tree):
        with pytest.raises(BadIndex):
            root_tree(seven_tree, 8)
        with pytest.raises(BadIndex):
            root_tree(seven_tree, 0)

    def test_reroot_series(self):
        r = reroot(root_tree(series(3), 1), 3)
        assert r.parent_map() == {2: 3, 1: 2}

    def test_reroot_identity(self, seven_tree):
        r = root_tree(seven_tree, 4)
        assert reroot(r, 4).parent_map() == r.parent_map()

    def test_reroot_flips_only_path(self, seven_tree):
        before = root_tree(seven_tree, 1).parent_map()
        after = reroot(root_tree(seven_tree, 1), 3).parent_map()
        assert after[1] == 3
        assert 3 not in after
        for v in (2, 4, 5, 6, 7):
            assert after[v] == before[v]

    def test_descendants(self, seven_tree):
        r = root_tree(seven_tree, 1)
        assert r.descendants(3) == [4, 5, 6, 7]
        assert r.descendants(6) == []


class TestPaths:
    def test_series_path(self):
        assert path(series(4), 1, 4) == [(1, 2), (2, 3), (3, 4)]

    def test_empty_path(self, seven_tree):
        assert path(seven_tree, 5, 5) == []

    def test_path_through_root(self, seven_tree):
        assert path(seven_tree, 2, 5) == [(1, 2), (1, 3), (3, 5)]

    def test_bad_vertex(self, seven_tree):
        with pytest.raises(BadIndex):
            path(seven_tree, 1, 9)


class TestTextFormat:
    def test_roundtrip(self, twelve_tree):
        assert parse_tree_text(format_tree_text(twelve_tree)) == twelve_tree

    def test_comments_and_missing_header(self):
        t = parse_tree_text("# a path\n1 2\n\n2 3  # last edge\n")
        assert t == series(3)


@settings(max_examples=60, deadline=None)
@given(random_trees(1, 12), st.data())
def test_rooting_invariants(tree, data):
    r = data.draw(st.integers(1, tree.d))
    r2 = data.draw(st.integers(1, tree.d))
    rooted = root_tree(tree, r)
    assert_valid_rooting(rooted)
    assert reroot(rooted, r2).parent_map() == root_tree(tree, r2).parent_map()


@settings(max_examples=60, deadline=None)
@given(random_trees(1, 12), st.data())
def test_path_properties(tree, data):
    u = data.draw(st.integers(1, tree.d))
    v = data.draw(st.integers(1, tree.d))
    p = path(tree, u, v)
    assert p == list(reversed(path(tree, v, u)))
    assert len(p) == distance(tree, v, u)
    assert all(tree.has_edge(*e) for e in p)
    assert len(set(p)) == len(p)


@settings(max_examples=60, deadline=None)
@given(random_trees(2, 12), st.data())
def test_first_positive_column_recovers_parents(tree, data):
    r = data.draw(st.integers(1, tree.d))
    rooted = root_tree(tree, r)
    weights = {e: data.draw(st.floats(0.01, 1.0)) for e in tree.edges}
    adj = weighted_adjacency(rooted, lambda u, v: weights[(min(u, v), max(u, v))])
    A = adj.matrix
    assert np.allclose(A, A.T) and np.all(np.diag(A) == 1)
    assert adj.parents_by_first_positive() == rooted.parent_map()
