"""Greedy minimum-degree ordering on a symmetric sparsity pattern.

Exact external degrees with elimination-graph updates and deterministic
lowest-index tie breaking.  Quadratic worst case, which is fine at the
problem sizes this solver targets; the permutation is computed once per
symbolic factorization and reused across all value updates.
"""
from __future__ import annotations

import heapq

import numpy as np


def minimum_degree(n: int, rowptr: np.ndarray, colidx: np.ndarray) -> np.ndarray:
    """Return perm such that eliminating perm[0], perm[1], ... reduces fill.

    The pattern may be given as any triangle or the full matrix; it is
    symmetrized internally and the diagonal is ignored.
    """
    adj = [set() for _ in range(n)]
    for i in range(n):
        for p in range(rowptr[i], rowptr[i + 1]):
            j = int(colidx[p])
            if i != j:
                adj[i].add(j)
                adj[j].add(i)

    alive = np.ones(n, dtype=bool)
    heap = [(len(adj[i]), i) for i in range(n)]
    heapq.heapify(heap)
    perm = np.empty(n, dtype=np.int64)
    k = 0
    while k < n:
        deg, v = heapq.heappop(heap)
        if not alive[v] or deg != len(adj[v]):
            continue
        perm[k] = v
        k += 1
        alive[v] = False
        nbrs = [u for u in adj[v] if alive[u]]
        for u in nbrs:
            adj[u].discard(v)
        for idx, u in enumerate(nbrs):
            au = adj[u]
            for w in nbrs[idx + 1:]:
                if w not in au:
                    au.add(w)
                    adj[w].add(u)
        for u in nbrs:
            heapq.heappush(heap, (len(adj[u]), u))
        adj[v] = set()
    return perm
