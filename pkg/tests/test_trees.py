import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import chi2_crit, rooted_trees
from rrtperc.rng import RngStream
from rrtperc.trees import (
    RootedTree,
    canonical_relabel,
    count_increasing_trees,
    enumerate_increasing_trees,
    extract_subtree,
    generate_rrt,
    generate_rrt_batch,
    split_at_edge,
)


def brute_force_trees(n):
    # independent oracle: all parent choices 0..j-1, filtered for validity
    out = set()
    for parents in itertools.product(range(n + 1), repeat=n):
        if all(parents[j - 1] < j for j in range(1, n + 1)):
            out.add(parents)
    return out


def test_generate_n0_is_single_vertex():
    tree = generate_rrt(0, RngStream(1))
    assert tree.n == 0 and tree.n_vertices == 1 and tree.parents() == []


@given(st.integers(0, 200), st.integers(0, 2**32))
def test_generated_trees_are_increasing(n, seed):
    tree = generate_rrt(n, RngStream(seed))
    assert tree.n == n
    assert all(tree.parent[j] < j for j in range(1, n + 1))


def test_rejects_non_increasing_parent():
    with pytest.raises(ValueError):
        RootedTree.from_parents([0, 2])
    with pytest.raises(ValueError):
        generate_rrt(-1, RngStream(0))


@pytest.mark.parametrize("n, count", [(0, 1), (1, 1), (2, 2), (3, 6), (4, 24), (5, 120)])
def test_enumeration_matches_brute_force(n, count):
    trees = enumerate_increasing_trees(n)
    assert len(trees) == count == count_increasing_trees(n)
    assert {tuple(t.parents()) for t in trees} == brute_force_trees(n)


def test_enumeration_guard():
    with pytest.raises(ValueError):
        enumerate_increasing_trees(11)


def test_n2_path_and_star_equally_likely():
    parents = generate_rrt_batch(2, 200_000, RngStream(7))
    path = np.mean(parents[:, 2] == 1)
    assert abs(path - 0.5) < 4 * np.sqrt(0.25 / 200_000)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_uniform_over_increasing_trees(n):
    reps = 240_000
    parents = generate_rrt_batch(n, reps, RngStream(n))
    index = {tuple(t.parents()): k for k, t in enumerate(enumerate_increasing_trees(n))}
    counts = np.bincount([index[tuple(r[1:])] for r in parents.tolist()], minlength=len(index))
    expected = reps / len(index)
    stat = np.sum((counts - expected) ** 2 / expected)
    assert stat < chi2_crit(len(index) - 1)


def test_single_tree_generator_matches_batch_law():
    reps = 60_000
    gen = RngStream(11).generator()
    depth_single = np.array([generate_rrt(4, gen).depths()[4] for _ in range(reps)])
    depth_batch = generate_rrt_batch(4, reps, RngStream(12))
    # walk each batch row from vertex 4 up to the root
    d = np.zeros(reps, dtype=int)
    for r in range(reps):
        v = 4
        while v:
            v = depth_batch[r, v]
            d[r] += 1
    # exact E[depth of n] = H_n = 1 + 1/2 + 1/3 + 1/4
    h4 = 1 + 1 / 2 + 1 / 3 + 1 / 4
    for sample in (depth_single, d):
        assert abs(sample.mean() - h4) < 4 * sample.std() / np.sqrt(reps)


@pytest.mark.parametrize(
    "vertices, expected",
    [({0, 1, 2}, {0: 0, 1: 1, 2: 2}), ({3, 5, 9}, {3: 0, 5: 1, 9: 2}), ({2}, {2: 0})],
)
def test_canonical_relabel(vertices, expected):
    assert canonical_relabel(vertices) == expected


def test_canonical_relabel_empty():
    with pytest.raises(ValueError):
        canonical_relabel([])


def test_descendants_of_three(eleven_vertex_tree):
    assert eleven_vertex_tree.descendants(3).tolist() == [3, 5, 7, 8, 9, 10]
    sub = extract_subtree(eleven_vertex_tree, 3)
    assert sub.n_vertices == 6
    # 3->0, 5->1, 7->2, 8->3, 9->4, 10->5
    assert sub.parents() == [0, 0, 2, 1, 3]


def test_extract_subtree_edge_cases(eleven_vertex_tree):
    assert extract_subtree(eleven_vertex_tree, 0) == eleven_vertex_tree
    assert extract_subtree(eleven_vertex_tree, 10).n == 0
    with pytest.raises(IndexError):
        extract_subtree(eleven_vertex_tree, 11)


@given(rooted_trees(min_n=1))
def test_split_sizes_add_up(tree):
    sizes = tree.subtree_sizes()
    for j in range(1, tree.n + 1):
        root_side, detached = split_at_edge(tree, j)
        assert detached.n_vertices == sizes[j]
        assert root_side.n_vertices + detached.n_vertices == tree.n_vertices


@given(rooted_trees())
def test_subtree_sizes_match_descendant_counts(tree):
    sizes = tree.subtree_sizes()
    for v in range(tree.n_vertices):
        assert sizes[v] == tree.descendants(v).size


@given(rooted_trees())
def test_json_roundtrip(tree):
    text = tree.to_json()
    assert json.loads(text) == {"n": tree.n, "parent": tree.parents()}
    assert RootedTree.from_json(text) == tree


@given(rooted_trees())
def test_binary_roundtrip(tree):
    data = tree.to_bytes()
    assert data[:4] == b"RRT1" and len(data) == 4 + 4 * tree.n
    assert RootedTree.from_bytes(data) == tree


def test_json_size_mismatch():
    with pytest.raises(ValueError):
        RootedTree.from_json('{"n": 3, "parent": [0, 0]}')


def test_path_to_root(eleven_vertex_tree):
    assert eleven_vertex_tree.path_to_root(9) == [9, 5, 3, 1, 0]
