"""Adjacency-matrix helpers shared by all modules.

Graphs are plain numpy arrays: an (N, N) symmetric 0/1 matrix with a zero
diagonal. Node indices are 0-based.
"""

from __future__ import annotations

import numpy as np

ADJ_DTYPE = np.uint8


def validate_adjacency(adj: np.ndarray) -> np.ndarray:
    """Check adjacency invariants and return the matrix as uint8."""
    adj = np.asarray(adj)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {adj.shape}")
    if not np.isin(adj, (0, 1)).all():
        raise ValueError("adjacency entries must be 0 or 1")
    if np.any(np.diagonal(adj) != 0):
        raise ValueError("adjacency diagonal must be zero")
    if not np.array_equal(adj, adj.T):
        raise ValueError("adjacency must be symmetric")
    return adj.astype(ADJ_DTYPE)


def empty_graph(n: int) -> np.ndarray:
    return np.zeros((n, n), dtype=ADJ_DTYPE)


def complete_graph(n: int) -> np.ndarray:
    adj = np.ones((n, n), dtype=ADJ_DTYPE)
    np.fill_diagonal(adj, 0)
    return adj


def from_edges(n: int, edges) -> np.ndarray:
    """Build an adjacency matrix from an iterable of (u, v) pairs."""
    adj = empty_graph(n)
    for u, v in edges:
        if u == v:
            raise ValueError(f"self-loop ({u}, {v}) not allowed")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
        adj[u, v] = 1
        adj[v, u] = 1
    return adj


def edge_list(adj: np.ndarray) -> list[tuple[int, int]]:
    """Sorted list of edges (u, v) with u < v."""
    iu, ju = np.nonzero(np.triu(adj, 1))
    return list(zip(iu.tolist(), ju.tolist()))


def edge_count(adj: np.ndarray) -> int:
    return int(np.triu(adj, 1).sum())


def degrees(adj: np.ndarray) -> np.ndarray:
    return adj.sum(axis=1).astype(np.int64)


def density(adj: np.ndarray) -> float:
    n = adj.shape[0]
    return edge_count(adj) / n_pairs(n)


def n_pairs(n: int) -> int:
    """Number of unordered node pairs, C(n, 2)."""
    return n * (n - 1) // 2


def is_connected(adj: np.ndarray) -> bool:
    """BFS reachability from node 0."""
    n = adj.shape[0]
    if n == 0:
        return True
    seen = np.zeros(n, dtype=bool)
    frontier = [0]
    seen[0] = True
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.nonzero(adj[u])[0]:
                if not seen[v]:
                    seen[v] = True
                    nxt.append(int(v))
        frontier = nxt
    return bool(seen.all())
