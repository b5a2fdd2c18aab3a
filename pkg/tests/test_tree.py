"""Tree construction, Galton-Watson sampling, and serialization."""

import math

import numpy as np
import pytest

import potts_tree as pt
from potts_tree.rng import philox_stream
from potts_tree.tree import MAX_NODES, TreeBudgetError

from helpers import oracle_tree_catalog


def check_invariants(t: pt.TreeInstance):
    """Structural invariants every TreeInstance must satisfy."""
    n = t.n_nodes
    assert t.parent[0] == -1
    assert t.depth_of[0] == 0
    if n > 1:
        assert np.all(t.parent[1:] < np.arange(1, n))
        assert np.all(np.diff(t.parent[1:]) >= 0)  # BFS: parents nondecreasing
        assert np.all(t.depth_of[1:] == t.depth_of[t.parent[1:]] + 1)
    assert t.depth == int(t.depth_of.max()) or (n == 1 and t.depth >= 0)
    # children are a contiguous block starting at first_child
    for v in range(n):
        kids = t.children(v)
        assert np.array_equal(
            kids, np.arange(t.first_child[v], t.first_child[v] + t.n_children[v])
        )
        if len(kids):
            assert np.all(t.parent[kids] == v)
    # generations partition 0..n-1 in order
    nodes = []
    for g in range(t.depth + 1):
        lo, hi = t.generation_bounds(g)
        assert np.array_equal(t.generation(g), np.arange(lo, hi))
        assert np.all(t.depth_of[lo:hi] == g)
        nodes.extend(range(lo, hi))
    assert nodes == list(range(n))
    assert np.array_equal(t.boundary_nodes(), t.generation(t.depth))


class TestRegularTree:
    def test_counts(self):
        t = pt.regular_tree(2, 3)
        assert t.n_nodes == 15 and len(t.boundary_nodes()) == 8
        t = pt.regular_tree(3, 2)
        assert t.n_nodes == 13 and len(t.boundary_nodes()) == 9
        t = pt.regular_tree(1, 5)
        assert t.n_nodes == 6 and len(t.boundary_nodes()) == 1
        for d in (2, 3):
            for N in (1, 2, 4):
                t = pt.regular_tree(d, N)
                assert t.n_nodes == (d ** (N + 1) - 1) // (d - 1)
                assert len(t.boundary_nodes()) == d**N
                assert t.depth == N
                check_invariants(t)

    def test_arity(self):
        t = pt.regular_tree(3, 2)
        interior = np.arange(t.n_nodes)[t.depth_of < t.depth]
        assert np.all(t.n_children[interior] == 3)
        assert np.all(t.n_children[t.boundary_nodes()] == 0)

    def test_validation(self):
        for d, N in [(0, 2), (-1, 2), (2, -1)]:
            with pytest.raises(ValueError):
                pt.regular_tree(d, N)

    def test_budget(self):
        assert MAX_NODES == 10**7
        with pytest.raises(TreeBudgetError):
            pt.regular_tree(2, 40)
        # the error is a ValueError so generic handlers still catch it
        assert issubclass(TreeBudgetError, ValueError)


class TestSphericallySymmetricTree:
    def test_counts(self):
        t = pt.spherically_symmetric_tree((2, 3))
        assert t.n_nodes == 9 and t.depth == 2
        assert len(t.boundary_nodes()) == 6
        check_invariants(t)

    def test_matches_regular(self):
        a = pt.spherically_symmetric_tree((3, 3))
        b = pt.regular_tree(3, 2)
        assert np.array_equal(a.parent, b.parent)
        assert np.array_equal(a.depth_of, b.depth_of)

    def test_path(self):
        t = pt.spherically_symmetric_tree((1, 1, 1))
        assert t.n_nodes == 4
        assert np.array_equal(t.parent, [-1, 0, 1, 2])

    def test_validation(self):
        with pytest.raises(ValueError):
            pt.spherically_symmetric_tree((2, 0))
        # no generations at all is vacuously fine: a single root
        assert pt.spherically_symmetric_tree(()).n_nodes == 1
        with pytest.raises(TreeBudgetError):
            pt.spherically_symmetric_tree((100,) * 5)


class TestOffspringDistribution:
    def test_validation(self):
        with pytest.raises(ValueError):
            pt.OffspringDistribution((((-1), 0.5), (2, 0.5)))
        with pytest.raises(ValueError):
            pt.OffspringDistribution(((1, 0.6), (2, 0.6)))
        with pytest.raises(ValueError):
            pt.OffspringDistribution(((1, -0.1), (2, 1.1)))
        with pytest.raises(ValueError):
            pt.OffspringDistribution(((1, 0.5), (1, 0.5)))

    def test_deterministic(self):
        d = pt.OffspringDistribution.deterministic(3)
        assert d.mean == 3.0
        assert d.spec_string() == "3:1"
        counts = d.sample_counts(100, philox_stream(0, 0))
        assert np.all(counts == 3)

    def test_mean_and_sampling(self):
        dist = pt.OffspringDistribution(((1, 0.5), (3, 0.5)))
        assert dist.mean == 2.0
        counts = dist.sample_counts(100_000, philox_stream(123, 0))
        assert set(np.unique(counts).tolist()) <= {1, 3}
        se = counts.std(ddof=1) / math.sqrt(len(counts))
        assert abs(counts.mean() - dist.mean) < 3 * se

    def test_spec_string(self):
        dist = pt.OffspringDistribution(((0, 0.3), (2, 0.7)))
        assert dist.spec_string() == "0:0.3,2:0.7"


class TestGaltonWatsonTree:
    def test_deterministic_per_seed(self):
        dist = pt.OffspringDistribution(((1, 0.5), (2, 0.5)))
        a = pt.galton_watson_tree(dist, 3, seed=3)
        b = pt.galton_watson_tree(dist, 3, seed=3)
        assert np.array_equal(a.parent, b.parent)
        assert np.array_equal(a.depth_of, b.depth_of)
        c = pt.galton_watson_tree(dist, 3, seed=4)
        assert not (
            a.n_nodes == c.n_nodes and np.array_equal(a.parent, c.parent)
        )

    def test_point_mass_matches_regular(self):
        dist = pt.OffspringDistribution.deterministic(2)
        t = pt.galton_watson_tree(dist, 3, seed=0)
        r = pt.regular_tree(2, 3)
        assert np.array_equal(t.parent, r.parent)

    def test_support(self):
        dist = pt.OffspringDistribution(((1, 0.5), (3, 0.5)))
        for seed in range(20):
            t = pt.galton_watson_tree(dist, 1, seed=seed)
            assert t.n_children[0] in (1, 3)
            check_invariants(t)

    def test_extinction(self):
        dist = pt.OffspringDistribution(((0, 0.3), (2, 0.7)))
        t = pt.galton_watson_tree(dist, 2, seed=0)
        assert t.is_extinct
        assert t.n_nodes == 1
        assert t.depth == 2  # requested depth is kept even when extinct
        assert len(t.boundary_nodes()) == 0
        assert len(t.generation(2)) == 0
        check_invariants(t)
        survivor = pt.galton_watson_tree(dist, 3, seed=1)
        assert not survivor.is_extinct

    def test_catalog_invariants(self):
        for name, t in oracle_tree_catalog():
            check_invariants(t)

    def test_childless_interior_node(self):
        # seed pinned so some node above the boundary has no children
        dist = pt.OffspringDistribution(((0, 0.3), (2, 0.7)))
        t = pt.galton_watson_tree(dist, 3, seed=1)
        assert not t.is_extinct
        interior = np.arange(t.n_nodes)[t.depth_of < t.depth]
        assert np.any(t.n_children[interior] == 0)

    def test_from_generator(self):
        dist = pt.OffspringDistribution(((1, 0.5), (2, 0.5)))
        t1 = pt.galton_watson_tree(dist, 3, seed=3)
        t2 = pt.galton_watson_tree_from(dist, 3, philox_stream(3, 0))
        assert np.array_equal(t1.parent, t2.parent)


class TestTreeInstanceValidation:
    def test_bad_root(self):
        with pytest.raises(ValueError):
            pt.TreeInstance(parent=np.array([0]), depth=0, depth_of=np.array([0]))

    def test_parent_after_child(self):
        with pytest.raises(ValueError):
            pt.TreeInstance(
                parent=np.array([-1, 1, 0]), depth=2, depth_of=np.array([0, 1, 2])
            )

    def test_non_bfs_order(self):
        with pytest.raises(ValueError):
            pt.TreeInstance(
                parent=np.array([-1, 0, 1, 0]),
                depth=2,
                depth_of=np.array([0, 1, 2, 1]),
            )

    def test_wrong_depths(self):
        with pytest.raises(ValueError):
            pt.TreeInstance(
                parent=np.array([-1, 0]), depth=1, depth_of=np.array([0, 2])
            )
        with pytest.raises(ValueError):
            pt.TreeInstance(
                parent=np.array([-1, 0]), depth=0, depth_of=np.array([0, 1])
            )

    def test_arrays_frozen(self):
        t = pt.regular_tree(2, 2)
        for arr in (t.parent, t.depth_of, t.n_children, t.first_child):
            assert not arr.flags.writeable


class TestSerialization:
    def test_round_trip(self):
        for name, t in oracle_tree_catalog():
            text = pt.tree_to_text(t)
            back = pt.tree_from_text(text)
            assert back.depth == t.depth
            assert np.array_equal(back.parent, t.parent)
            assert np.array_equal(back.depth_of, t.depth_of)

    def test_format(self):
        t = pt.regular_tree(1, 1)
        lines = pt.tree_to_text(t).strip().split("\n")
        assert lines[0] == "N 1"
        assert lines[1] == "0 -1 0"
        assert lines[2] == "1 0 1"

    def test_malformed(self):
        with pytest.raises(ValueError):
            pt.tree_from_text("")
        with pytest.raises(ValueError):
            pt.tree_from_text("2 1\n0 -1 0\n")  # missing "N" header
        with pytest.raises(ValueError):
            pt.tree_from_text("2 1\n1 -1 0\n0 0 1\n")  # indices out of order
        with pytest.raises(ValueError):
            pt.tree_from_text("2 1\n0 -1 0\n1 0 nope\n")
