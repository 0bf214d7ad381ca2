from hypothesis import strategies as st

from rrtperc.trees import RootedTree


@st.composite
def rooted_trees(draw, min_n=0, max_n=40):
    n = draw(st.integers(min_n, max_n))
    return RootedTree.from_parents([draw(st.integers(0, j - 1)) for j in range(1, n + 1)])


@st.composite
def marked_trees(draw, min_n=0, max_n=40):
    from rrtperc.percolation import MarkedTree

    tree = draw(rooted_trees(min_n, max_n))
    marks = draw(st.lists(st.booleans(), min_size=tree.n, max_size=tree.n))
    return MarkedTree.from_marks(tree, [j + 1 for j, m in enumerate(marks) if m])


def chi2_crit(dof: int, q: float = 0.999) -> float:
    from scipy.stats import chi2

    return float(chi2.ppf(q, dof))
