"""Digraph helpers: Tarjan strongly connected components, topological order."""

from __future__ import annotations

import heapq


def tarjan_scc(n: int, succ) -> list:
    """Strongly connected components of a digraph, iterative Tarjan.

    succ(v) must yield the successors of v.  Returns a list of components,
    each a sorted list of vertices, in reverse topological order of the
    condensation (every edge goes from a later component to an earlier one).
    """
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    components = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                elif on_stack[w]:
                    if index[w] < low[v]:
                        low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comp.sort()
                components.append(comp)
    return components


def csr_strongly_connected(a) -> bool:
    """True when the digraph of a square CSR matrix is strongly connected."""
    n = a.shape[0]
    if n == 0:
        return False
    mat = a.copy()
    mat.eliminate_zeros()
    indptr, indices = mat.indptr, mat.indices

    def succ(v):
        return indices[indptr[v] : indptr[v + 1]]

    return len(tarjan_scc(n, succ)) == 1


def adjacency_scc(n: int, adj) -> list:
    """tarjan_scc over an adjacency-list digraph (adj[v] = successor list)."""
    return tarjan_scc(n, lambda v: adj[v])


def topo_order(n: int, adj) -> list | None:
    """Deterministic topological order (smallest vertex first), None on cycles."""
    indeg = [0] * n
    for v in range(n):
        for w in adj[v]:
            indeg[w] += 1
    heap = [v for v in range(n) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for w in adj[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    return order if len(order) == n else None
