import itertools
from fractions import Fraction

import pytest

from rrtperc import exact
from rrtperc.percolation import MarkedTree, cluster_size_tree
from rrtperc.rng import RngStream
from rrtperc.trees import enumerate_increasing_trees


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_first_cut_enumeration_equals_splitting_law(n):
    law = exact.first_cut_law(n)
    assert law == {j: exact.splitting_law(n, j) for j in range(1, n + 1)}
    assert sum(law.values()) == 1


def test_splitting_law_at_two():
    assert exact.splitting_law(2, 1) == Fraction(3, 4)
    assert exact.splitting_law(2, 2) == Fraction(1, 4)
    assert exact.splitting_law(2, 3) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_expected_cuts_recursion_matches_enumeration(n):
    assert exact.expected_cuts(n) == exact.expected_cuts_by_enumeration(n)


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
@pytest.mark.parametrize("p", [Fraction(1, 4), Fraction(1, 2), Fraction(1)])
def test_summary_law_is_a_distribution(n, p):
    law = exact.cluster_summary_law(n, p)
    assert sum(law.values()) == 1
    for (root, c1, c2, c11), q in law.items():
        assert q > 0
        assert 1 <= root <= n + 1 and c1 >= c2 >= 0
        assert root + c1 + c2 + c11 <= n + 1


def test_p_one_law_is_degenerate():
    assert exact.cluster_summary_law(4, Fraction(1)) == {(5, 0, 0, 0): 1}


@pytest.mark.parametrize("n", [2, 3, 4])
def test_summary_law_matches_library_encoding(n):
    """(C_root, C_1, C_2) do not depend on tie-breaks, so one ranking per pattern suffices."""
    p = Fraction(1, 2)
    rebuilt: dict = {}
    w = Fraction(1, len(enumerate_increasing_trees(n))) * p**n
    for tree in enumerate_increasing_trees(n):
        for pattern in itertools.product((False, True), repeat=n):
            marks = [j + 1 for j, m in enumerate(pattern) if m]
            ct = cluster_size_tree(MarkedTree.from_marks(tree, marks), RngStream(0))
            key = (ct[()], ct.value((1,)), ct.value((2,)))
            rebuilt[key] = rebuilt.get(key, 0) + w
    assert exact.marginal(exact.cluster_summary_law(n, p), (0, 1, 2)) == rebuilt


def test_n1_law():
    p = Fraction(1, 3)
    law = exact.marginal(exact.cluster_summary_law(1, p), (0, 1))
    assert law == {(2, 0): p, (1, 1): 1 - p}
