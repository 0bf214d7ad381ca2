"""Compiled linear-time passes over parent arrays.

All arrays are indexed by vertex label ``0..n`` with ``parent[0] == -1`` and
``parent[j] < j``, so a single forward sweep visits parents before children.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def subtree_sizes(parent):
    n1 = parent.shape[0]
    size = np.ones(n1, dtype=np.int64)
    for j in range(n1 - 1, 0, -1):
        size[parent[j]] += size[j]
    return size


@njit(cache=True)
def depths(parent):
    n1 = parent.shape[0]
    d = np.zeros(n1, dtype=np.int64)
    for j in range(1, n1):
        d[j] = d[parent[j]] + 1
    return d


@njit(cache=True)
def descendant_mask(parent, v):
    n1 = parent.shape[0]
    mask = np.zeros(n1, dtype=np.bool_)
    mask[v] = True
    for j in range(v + 1, n1):
        mask[j] = mask[parent[j]]
    return mask


@njit(cache=True)
def cluster_roots(parent, marked):
    n1 = parent.shape[0]
    root = np.zeros(n1, dtype=np.int64)
    for j in range(1, n1):
        if marked[j]:
            root[j] = j
        else:
            root[j] = root[parent[j]]
    return root


@njit(cache=True)
def root_cluster_size(parent, marked):
    n1 = parent.shape[0]
    inside = np.zeros(n1, dtype=np.bool_)
    inside[0] = True
    count = 1
    for j in range(1, n1):
        if not marked[j] and inside[parent[j]]:
            inside[j] = True
            count += 1
    return count


@njit(cache=True)
def cluster_forest(parent, marked):
    """Clusters as a forest rooted at the cluster of vertex 0.

    Returns ``(vertex, node_parent, size, generation)`` per cluster; clusters
    are listed by increasing root label, so parents precede children.
    """
    n1 = parent.shape[0]
    root = np.zeros(n1, dtype=np.int64)
    index = np.full(n1, -1, dtype=np.int64)
    m = 1
    for j in range(1, n1):
        if marked[j]:
            m += 1
    vertex = np.empty(m, dtype=np.int64)
    node_parent = np.full(m, -1, dtype=np.int64)
    size = np.zeros(m, dtype=np.int64)
    gen = np.zeros(m, dtype=np.int64)
    vertex[0] = 0
    index[0] = 0
    size[0] = 1
    k = 1
    for j in range(1, n1):
        if marked[j]:
            root[j] = j
            index[j] = k
            vertex[k] = j
            node_parent[k] = index[root[parent[j]]]
            gen[k] = gen[node_parent[k]] + 1
            size[k] = 1
            k += 1
        else:
            root[j] = root[parent[j]]
            size[index[root[j]]] += 1
    return vertex, node_parent, size, gen


@njit(cache=True)
def rank_siblings(node_parent, key, tiebreak):
    """1-based rank of each node among its siblings by decreasing ``key``.

    Equal keys are ordered by ``tiebreak``; nodes with parent -1 get rank 0.
    """
    m = node_parent.shape[0]
    o1 = np.argsort(tiebreak, kind="mergesort")
    o2 = o1[np.argsort(-key[o1], kind="mergesort")]
    o3 = o2[np.argsort(node_parent[o2], kind="mergesort")]
    ordinal = np.zeros(m, dtype=np.int64)
    prev = -2
    r = 0
    for i in range(m):
        v = o3[i]
        pp = node_parent[v]
        if pp != prev:
            prev = pp
            r = 0
        r += 1
        if pp >= 0:
            ordinal[v] = r
    return ordinal


@njit(cache=True)
def birth_ordinals(node_parent):
    """Rank among siblings by node index (index order = birth order)."""
    m = node_parent.shape[0]
    count = np.zeros(m, dtype=np.int64)
    ordinal = np.zeros(m, dtype=np.int64)
    for k in range(m):
        pp = node_parent[k]
        if pp >= 0:
            count[pp] += 1
            ordinal[k] = count[pp]
    return ordinal


@njit(cache=True)
def find_child(node_parent, ordinal, parent_node, j):
    if parent_node < 0:
        return -1
    for k in range(node_parent.shape[0]):
        if node_parent[k] == parent_node and ordinal[k] == j:
            return k
    return -1


@njit(cache=True)
def type_forest(parent, mutant):
    """Online type assignment of a Yule genealogy with neutral mutations.

    Types are numbered by the birth order of their founding mutant. Returns
    ``(type_of_vertex, type_parent, founder, size)``.
    """
    n1 = parent.shape[0]
    m = 1
    for j in range(1, n1):
        if mutant[j]:
            m += 1
    type_of = np.zeros(n1, dtype=np.int64)
    type_parent = np.full(m, -1, dtype=np.int64)
    founder = np.zeros(m, dtype=np.int64)
    size = np.zeros(m, dtype=np.int64)
    size[0] = 1
    k = 1
    for j in range(1, n1):
        if mutant[j]:
            type_parent[k] = type_of[parent[j]]
            founder[k] = j
            type_of[j] = k
            k += 1
        else:
            type_of[j] = type_of[parent[j]]
        size[type_of[j]] += 1
    return type_of, type_parent, founder, size


@njit(cache=True)
def _find(uf, x):
    while uf[x] != x:
        uf[x] = uf[uf[x]]
        x = uf[x]
    return x


@njit(cache=True)
def component_forest(parent, order):
    """Replay of a destruction given the removal order of edges.

    ``order`` lists edge labels (outer endpoints) by increasing removal time.
    Edges are re-inserted in reverse order; the block holding ``j`` just
    before edge ``j`` is re-inserted is the component detached at its removal.

    Returns ``(comp_parent, size, ordinal)`` indexed by component root label:
    ``comp_parent[j]`` is the root label of the component that edge ``j`` was
    cut from, ``size[j]`` the detached size, ``ordinal[j]`` the birth rank of
    the component among the children of ``comp_parent[j]``.
    """
    n1 = parent.shape[0]
    n = n1 - 1
    uf = np.arange(n1)
    bsize = np.ones(n1, dtype=np.int64)
    bmin = np.arange(n1)
    size = np.zeros(n1, dtype=np.int64)
    size[0] = n1
    comp_parent = np.full(n1, -1, dtype=np.int64)
    for idx in range(n - 1, -1, -1):
        j = order[idx]
        rj = _find(uf, j)
        rp = _find(uf, parent[j])
        size[j] = bsize[rj]
        comp_parent[j] = bmin[rp]
        if bsize[rj] > bsize[rp]:
            rj, rp = rp, rj
        uf[rj] = rp
        bsize[rp] += bsize[rj]
        if bmin[rj] < bmin[rp]:
            bmin[rp] = bmin[rj]
    count = np.zeros(n1, dtype=np.int64)
    ordinal = np.zeros(n1, dtype=np.int64)
    for idx in range(n):
        j = order[idx]
        count[comp_parent[j]] += 1
        ordinal[j] = count[comp_parent[j]]
    return comp_parent, size, ordinal


@njit(cache=True)
def cut_tree_merges(parent, order):
    """Binary cut-tree as left/right child arrays.

    Leaves are nodes ``0..n`` (the vertices); internal node ``n + 1 + i`` is
    created when edge ``order[n - 1 - i]`` is re-inserted, so the root is node
    ``2n``. The left child holds the side containing the parent endpoint.
    """
    n1 = parent.shape[0]
    n = n1 - 1
    total = 2 * n + 1
    left = np.full(total, -1, dtype=np.int64)
    right = np.full(total, -1, dtype=np.int64)
    edge = np.full(total, -1, dtype=np.int64)
    uf = np.arange(n1)
    bsize = np.ones(n1, dtype=np.int64)
    top = np.arange(n1)
    nxt = n1
    for idx in range(n - 1, -1, -1):
        j = order[idx]
        rj = _find(uf, j)
        rp = _find(uf, parent[j])
        left[nxt] = top[rp]
        right[nxt] = top[rj]
        edge[nxt] = j
        if bsize[rj] > bsize[rp]:
            rj, rp = rp, rj
        uf[rj] = rp
        bsize[rp] += bsize[rj]
        top[rp] = nxt
        nxt += 1
    return left, right, edge


@njit(cache=True)
def conditioned_xi_chain(k, u, out):
    """Root-isolation cut sizes from ``k`` edges, inverse-CDF on ``u``.

    Each cut ``j`` from a root component with ``k`` edges has law
    ``(k + 1) / (k j (j + 1))``. Returns ``(edges_left, cuts_written)``.
    """
    c = 0
    i = 0
    while k > 0 and i < u.shape[0]:
        v = u[i] * k / (k + 1.0)
        j = np.int64(1.0 / (1.0 - v))
        if j > k:
            j = k
        if j < 1:
            j = 1
        out[c] = j
        c += 1
        k -= j
        i += 1
    return k, c


@njit(cache=True)
def rejection_xi_chain(r, u, out):
    """Cut sizes from ``r`` edges by rejecting unconditioned steps ``xi > r``.

    Returns ``(edges_left, cuts_written)``; consumes all of ``u`` unless the
    root is isolated first.
    """
    c = 0
    for i in range(u.shape[0]):
        if r == 0:
            break
        xi = np.int64(1.0 / (1.0 - u[i]))
        if xi <= r:
            out[c] = xi
            c += 1
            r -= xi
    return r, c


@njit(cache=True)
def batch_cluster_summary(parents, marks, tiebreak):
    """``(C_root, C_1, C_2, C_11)`` of the ranked cluster-size tree per row."""
    reps = parents.shape[0]
    out = np.zeros((reps, 4), dtype=np.int64)
    for r in range(reps):
        vertex, node_parent, size, gen = cluster_forest(parents[r], marks[r])
        m = vertex.shape[0]
        ordinal = rank_siblings(node_parent, size.astype(np.float64), tiebreak[r, :m])
        out[r, 0] = size[0]
        c1 = find_child(node_parent, ordinal, 0, 1)
        c2 = find_child(node_parent, ordinal, 0, 2)
        c11 = find_child(node_parent, ordinal, c1, 1)
        if c1 >= 0:
            out[r, 1] = size[c1]
        if c2 >= 0:
            out[r, 2] = size[c2]
        if c11 >= 0:
            out[r, 3] = size[c11]
    return out


@njit(cache=True)
def batch_type_summary(parents, mutants, tiebreak):
    """Same summary as :func:`batch_cluster_summary`, via Yule types."""
    reps = parents.shape[0]
    out = np.zeros((reps, 4), dtype=np.int64)
    for r in range(reps):
        type_of, type_parent, founder, size = type_forest(parents[r], mutants[r])
        m = size.shape[0]
        ordinal = rank_siblings(type_parent, size.astype(np.float64), tiebreak[r, :m])
        out[r, 0] = size[0]
        c1 = find_child(type_parent, ordinal, 0, 1)
        c2 = find_child(type_parent, ordinal, 0, 2)
        c11 = find_child(type_parent, ordinal, c1, 1)
        if c1 >= 0:
            out[r, 1] = size[c1]
        if c2 >= 0:
            out[r, 2] = size[c2]
        if c11 >= 0:
            out[r, 3] = size[c11]
    return out


@njit(cache=True)
def batch_first_cut(parents, edges):
    """Size of the subtree below edge ``edges[r]`` in tree ``parents[r]``."""
    reps, n1 = parents.shape
    out = np.zeros(reps, dtype=np.int64)
    inside = np.zeros(n1, dtype=np.bool_)
    for r in range(reps):
        e = edges[r]
        inside[:] = False
        inside[e] = True
        c = 1
        for j in range(e + 1, n1):
            if inside[parents[r, j]]:
                inside[j] = True
                c += 1
        out[r] = c
    return out


@njit(cache=True)
def marked_depths(parent, marked):
    n1 = parent.shape[0]
    gen = np.zeros(n1, dtype=np.int64)
    for j in range(1, n1):
        gen[j] = gen[parent[j]] + (1 if marked[j] else 0)
    return gen
