import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import chi2_crit, marked_trees
from rrtperc import exact
from rrtperc.indexed import IndexedTree
from rrtperc.percolation import (
    MarkedTree,
    cluster_roots,
    cluster_size_tree,
    extract_clusters,
    generations,
    normalization,
    normalize_tree,
    percolate,
    subtree_size_tree,
    supercritical_p,
)
from rrtperc.rng import RngStream
from rrtperc.trees import generate_rrt


@pytest.fixture
def marked(eleven_vertex_tree):
    return MarkedTree.from_marks(eleven_vertex_tree, [2, 3, 5, 10])


def test_worked_example_clusters(marked):
    clusters = {(c.members, c.generation) for c in extract_clusters(marked)}
    assert clusters == {
        (frozenset({0, 1, 4, 6}), 0),
        (frozenset({2}), 1),
        (frozenset({3, 7, 8}), 1),
        (frozenset({5, 9}), 2),
        (frozenset({10}), 2),
    }


def test_worked_example_cluster_size_tree(marked):
    ct = cluster_size_tree(marked, RngStream(0))
    assert dict(ct) == {(): 4, (1,): 3, (2,): 1, (1, 1): 2, (1, 2): 1}


def test_worked_example_subtree_size_tree(marked):
    st_ = subtree_size_tree(marked, RngStream(0))
    assert dict(st_) == {(): 11, (1,): 6, (2,): 1, (1, 1): 2, (1, 2): 1}


def test_p_one_marks_nothing():
    tree = generate_rrt(30, RngStream(1))
    m = percolate(tree, 1.0, RngStream(2))
    assert m.marks == set()
    assert dict(cluster_size_tree(m, RngStream(3))) == {(): 31}
    assert dict(subtree_size_tree(m, RngStream(3))) == {(): 31}


@pytest.mark.parametrize("p", [0.0, -0.1, 1.5])
def test_percolate_rejects_bad_p(p):
    with pytest.raises(ValueError):
        percolate(generate_rrt(3, RngStream(0)), p, RngStream(0))


def test_all_marked_gives_singletons_at_depths():
    tree = generate_rrt(25, RngStream(4))
    m = MarkedTree.from_marks(tree, range(1, 26))
    clusters = extract_clusters(m)
    assert all(c.size == 1 for c in clusters)
    assert [c.generation for c in clusters] == tree.depths().tolist()


def test_mark_patterns_uniform_at_half():
    tree = generate_rrt(3, RngStream(0))
    gen = RngStream(5).generator()
    reps = 80_000
    codes = [int(np.dot(percolate(tree, 0.5, gen).marked[1:], [1, 2, 4])) for _ in range(reps)]
    counts = np.bincount(codes, minlength=8)
    stat = np.sum((counts - reps / 8) ** 2 / (reps / 8))
    assert stat < chi2_crit(7)


@pytest.mark.parametrize(
    "n, t, expected",
    [(7, 1.0, 1 - 1 / math.log(7)), (10**6, 1.0, 0.927617586349458)],
)
def test_supercritical_p(n, t, expected):
    assert supercritical_p(n, t) == pytest.approx(expected, rel=1e-12)


def test_supercritical_p_e_squared_is_about_half():
    # n = 7 stands in for e^2; the formula gives 0.48610, not exactly 1/2
    assert supercritical_p(7, 1.0) == pytest.approx(0.486102, abs=1e-6)


def test_supercritical_p_limits_and_errors():
    assert supercritical_p(100, 1e-9) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        supercritical_p(10, math.log(10))
    with pytest.raises(ValueError):
        supercritical_p(1, 0.1)


@given(marked_trees())
def test_clusters_partition_vertices(m):
    clusters = extract_clusters(m)
    members = [v for c in clusters for v in c.members]
    assert sorted(members) == list(range(m.tree.n_vertices))
    assert all(c.size == len(c.members) for c in clusters)


@given(marked_trees())
def test_generation_counts_marked_edges_on_path(m):
    gens = generations(m)
    for v in range(m.tree.n_vertices):
        path = m.tree.path_to_root(v)
        assert gens[v] == sum(1 for x in path if m.marked[x])
    roots = cluster_roots(m)
    assert all(m.marked[r] or r == 0 for r in roots)


@given(marked_trees(), st.integers(0, 2**32))
def test_cluster_tree_sums_and_levels(m, seed):
    ct = cluster_size_tree(m, RngStream(seed))
    assert ct.total() == m.tree.n_vertices
    assert len(ct) == len(m.marks) + 1
    by_size_gen = sorted((c.size, c.generation) for c in extract_clusters(m))
    assert sorted((v, len(u)) for u, v in ct.items()) == by_size_gen
    for u in ct:
        vals = ct.child_values(u)
        assert vals == sorted(vals, reverse=True)


@given(marked_trees(), st.integers(0, 2**32))
def test_subtree_tree_nesting(m, seed):
    st_ = subtree_size_tree(m, RngStream(seed))
    assert st_[()] == m.tree.n_vertices
    for u in st_:
        assert st_[u] >= 1 + sum(st_.child_values(u))


@given(marked_trees())
def test_cluster_inside_its_subtree(m):
    sizes = m.tree.subtree_sizes()
    for c in extract_clusters(m):
        assert c.size <= sizes[c.root_vertex]


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("p", [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
def test_cluster_tree_law_matches_enumeration(n, p):
    law = exact.marginal(exact.cluster_summary_law(n, p), (0, 1))
    reps = 60_000
    gen = RngStream(n * 10 + int(p * 4)).generator()
    counts: dict = {}
    for _ in range(reps):
        ct = cluster_size_tree(percolate(generate_rrt(n, gen), float(p), gen), gen)
        key = (ct[()], ct.value((1,)))
        counts[key] = counts.get(key, 0) + 1
    assert set(counts) <= set(law)
    keys = sorted(law)
    obs = np.array([counts.get(k, 0) for k in keys])
    expected = np.array([float(law[k]) for k in keys]) * reps
    stat = np.sum((obs - expected) ** 2 / expected)
    assert stat < chi2_crit(len(keys) - 1)


def test_normalization_values():
    n = 10**6
    p = supercritical_p(n, 1.0)
    assert normalization(n, p, 0) * math.exp(p * math.log(n)) == pytest.approx(1.0)
    assert normalization(n, p, 1) * (1 - p) * n**p == pytest.approx(1.0)
    with pytest.raises(ValueError):
        normalization(n, 1.0, 1)
    assert normalization(n, 1.0, 0) == pytest.approx(1 / n)


def test_normalize_tree():
    n, p = 1000, 0.8
    ct = IndexedTree({(): n**p, (1,): (1 - p) * n**p, (1, 1): 3.0})
    scaled = normalize_tree(ct, n, p)
    assert scaled[()] == pytest.approx(1.0)
    assert scaled[(1,)] == pytest.approx(1.0)
    assert scaled[(1, 1)] == pytest.approx(3.0 / ((1 - p) ** 2 * n**p))


def test_marked_tree_validation(eleven_vertex_tree):
    with pytest.raises(ValueError):
        MarkedTree.from_marks(eleven_vertex_tree, [0])
    with pytest.raises(ValueError):
        MarkedTree(eleven_vertex_tree, np.zeros(3, dtype=bool), 0.5)
