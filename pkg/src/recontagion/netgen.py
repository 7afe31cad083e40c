"""Random graph generators and the Zachary Karate Club instance.

Every generator returns a simple undirected graph as a symmetric 0/1
matrix with zero diagonal, and is deterministic given its Generator.
"""

from __future__ import annotations

import numpy as np

from .graph import empty_graph, from_edges

_REWIRE_ATTEMPTS = 200
_RESAMPLE_ATTEMPTS = 50


def erdos_renyi(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Each unordered pair is an edge independently with probability p."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must be in [0, 1], got {p}")
    iu, ju = np.triu_indices(n, 1)
    mask = rng.random(iu.shape[0]) < p
    adj = empty_graph(n)
    adj[iu[mask], ju[mask]] = 1
    adj[ju[mask], iu[mask]] = 1
    return adj


def powerlaw_degree_sequence(
    n: int, alpha: float, rng: np.random.Generator, n_samples: int | None = None
) -> np.ndarray:
    """Sample degrees i.i.d. from p(k) proportional to k**alpha on {2, .., n-1}.

    The sum is repaired to be even by redrawing a single node's degree.
    Larger alpha puts more mass on high degrees, so density grows with alpha.
    """
    if n < 4:
        raise ValueError(f"n must be >= 4 for support {{2,..,n-1}}, got {n}")
    ks = np.arange(2, n)
    weights = ks.astype(np.float64) ** alpha
    weights /= weights.sum()
    size = n if n_samples is None else n_samples
    degs = rng.choice(ks, size=size, p=weights)
    if degs.sum() % 2 == 1:
        i = int(rng.integers(size))
        old_parity = degs[i] % 2
        while degs[i] % 2 == old_parity:
            degs[i] = rng.choice(ks, p=weights)
    return degs.astype(np.int64)


def _try_swap(u, v, k, edges, edge_set, rng) -> bool:
    """Resolve the clashing stub pair (u, v) against the k-th accepted edge.

    Replaces edge (x, y) with (u, x), (v, y) or (u, y), (v, x) when that
    keeps the graph simple; degrees are preserved either way.
    """
    x, y = edges[k]
    options = [((u, x), (v, y)), ((u, y), (v, x))]
    rng.shuffle(options)
    for e1, e2 in options:
        e1 = (min(e1), max(e1))
        e2 = (min(e2), max(e2))
        if e1[0] == e1[1] or e2[0] == e2[1]:
            continue
        if e1 == e2 or e1 in edge_set or e2 in edge_set:
            continue
        edges[k] = edges[-1]
        edges.pop()
        edge_set.discard((x, y))
        for e in (e1, e2):
            edge_set.add(e)
            edges.append(e)
        return True
    return False


def _stub_match_simple(degs: np.ndarray, rng: np.random.Generator) -> np.ndarray | None:
    """Pair stubs uniformly, then repair self-loops/duplicates by edge swaps.

    Each clash first tries random partner edges, then scans them all, so a
    clash only survives when no single swap can fix it. Returns None in that
    case (caller reshuffles stubs or resamples degrees).
    """
    n = degs.shape[0]
    stubs = np.repeat(np.arange(n), degs)
    rng.shuffle(stubs)
    pairs = stubs.reshape(-1, 2)
    edges: list[tuple[int, int]] = []
    edge_set: set[tuple[int, int]] = set()
    bad: list[tuple[int, int]] = []
    for u, v in pairs:
        u, v = int(u), int(v)
        key = (u, v) if u < v else (v, u)
        if u == v or key in edge_set:
            bad.append((u, v))
        else:
            edge_set.add(key)
            edges.append(key)
    # High-degree endpoints have the fewest open slots; place them first.
    bad.sort(key=lambda uv: -(degs[uv[0]] + degs[uv[1]]))
    for u, v in bad:
        placed = False
        for _ in range(_REWIRE_ATTEMPTS):
            if not edges:
                break
            if _try_swap(u, v, int(rng.integers(len(edges))), edges, edge_set, rng):
                placed = True
                break
        if not placed:
            for k in rng.permutation(len(edges)):
                if _try_swap(u, v, int(k), edges, edge_set, rng):
                    placed = True
                    break
        if not placed:
            return None
    adj = empty_graph(n)
    for u, v in edge_set:
        adj[u, v] = 1
        adj[v, u] = 1
    return adj


def powerlaw_cm(n: int, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Configuration-model graph with power-law degrees on {2, .., n-1}.

    Simple-graph target: clashes are repaired by degree-preserving rewiring
    so the minimum degree of 2 survives; if repair fails the degree sequence
    is resampled.
    """
    for _ in range(_RESAMPLE_ATTEMPTS):
        degs = powerlaw_degree_sequence(n, alpha, rng)
        for _ in range(10):  # reshuffle stubs before giving up on the sequence
            adj = _stub_match_simple(degs, rng)
            if adj is not None:
                return adj
    raise RuntimeError(
        f"could not realize a simple graph for n={n}, alpha={alpha} "
        f"after {_RESAMPLE_ATTEMPTS} degree resamples"
    )


def clustered(n_type1: int, s: int, rng: np.random.Generator) -> np.ndarray:
    """Bipartite projection model: type-1 nodes (degree 2) join cliques of size s.

    A random bipartite graph with type-1 degree 2 and type-2 degree s is
    projected onto the type-1 nodes, so each type-2 node becomes an s-clique.
    Returns the projected graph on the n_type1 nodes.
    """
    if s < 2:
        raise ValueError(f"s must be >= 2, got {s}")
    if n_type1 < s:
        raise ValueError(f"n_type1={n_type1} must be >= s={s}")
    if (2 * n_type1) % s != 0:
        raise ValueError(
            f"infeasible bipartite degrees: 2*{n_type1} stubs not divisible by s={s}"
        )
    n2 = 2 * n_type1 // s
    for _ in range(_RESAMPLE_ATTEMPTS):
        members = np.repeat(np.arange(n_type1), 2)
        rng.shuffle(members)
        groups = members.reshape(n2, s)
        if _repair_duplicate_memberships(groups, rng):
            break
    else:
        raise RuntimeError(f"could not build simple bipartite graph for ({n_type1}, {s})")
    adj = empty_graph(n_type1)
    for group in groups:
        for a in range(s):
            for b in range(a + 1, s):
                u, v = int(group[a]), int(group[b])
                adj[u, v] = 1
                adj[v, u] = 1
    return adj


def _repair_duplicate_memberships(groups: np.ndarray, rng: np.random.Generator) -> bool:
    """Swap members between cliques until no clique holds a node twice."""
    n2, s = groups.shape
    for _ in range(_REWIRE_ATTEMPTS):
        dup = None
        for w in range(n2):
            vals, counts = np.unique(groups[w], return_counts=True)
            if (counts > 1).any():
                node = vals[counts > 1][0]
                pos = int(np.nonzero(groups[w] == node)[0][1])
                dup = (w, pos)
                break
        if dup is None:
            return True
        w, pos = dup
        for _ in range(_REWIRE_ATTEMPTS):
            w2 = int(rng.integers(n2))
            p2 = int(rng.integers(s))
            if w2 == w:
                continue
            a, b = groups[w, pos], groups[w2, p2]
            if a == b:
                continue
            if b in groups[w] or a in groups[w2]:
                continue
            groups[w, pos], groups[w2, p2] = b, a
            break
        else:
            return False
    return False


def small_world(n: int, p: float, rng: np.random.Generator, k: int = 6) -> np.ndarray:
    """Watts-Strogatz graph: ring lattice of even degree k, edges rewired with probability p."""
    if k % 2 != 0 or k < 2:
        raise ValueError(f"k must be a positive even integer, got {k}")
    if n <= k + 1:
        raise ValueError(f"n={n} too small for ring degree k={k}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must be in [0, 1], got {p}")
    adj = empty_graph(n)
    for d in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + d) % n
            adj[u, v] = 1
            adj[v, u] = 1
    # Rewire each lattice edge (u, u+d) to (u, w) with probability p.
    for d in range(1, k // 2 + 1):
        for u in range(n):
            if rng.random() >= p:
                continue
            v = (u + d) % n
            if adj[u].sum() >= n - 1:
                continue
            w = int(rng.integers(n))
            while w == u or adj[u, w]:
                w = int(rng.integers(n))
            adj[u, v] = adj[v, u] = 0
            adj[u, w] = adj[w, u] = 1
    return adj


def sbm_two_block(
    n: int, epsilon: float, rng: np.random.Generator, mean_degree: float = 10.0
) -> np.ndarray:
    """Two equal blocks at fixed expected mean degree, imbalance epsilon.

    epsilon=0 matches an Erdos-Renyi graph of the same density; epsilon=1
    removes all between-block edges. p_in - p_out grows linearly in epsilon
    while the expected mean degree stays constant.
    """
    if n % 2 != 0:
        raise ValueError(f"n must be even for equal blocks, got {n}")
    if not (0.0 <= epsilon <= 1.0):
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    half = n // 2
    w_in = half - 1  # potential same-block neighbors
    w_out = half  # potential cross-block neighbors
    p_out = (1.0 - epsilon) * mean_degree / (w_in + w_out)
    p_in = (mean_degree - p_out * w_out) / w_in
    if p_in > 1.0 or p_out > 1.0:
        raise ValueError(
            f"mean_degree={mean_degree} infeasible for n={n}, epsilon={epsilon}"
        )
    block = np.arange(n) >= half
    iu, ju = np.triu_indices(n, 1)
    prob = np.where(block[iu] == block[ju], p_in, p_out)
    mask = rng.random(iu.shape[0]) < prob
    adj = empty_graph(n)
    adj[iu[mask], ju[mask]] = 1
    adj[ju[mask], iu[mask]] = 1
    return adj


# Canonical 34-node, 78-edge karate club instance (0-indexed).
ZKC_EDGES: tuple[tuple[int, int], ...] = (
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10),
    (0, 11), (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2),
    (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21), (1, 30), (2, 3),
    (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32), (3, 7),
    (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16), (6, 16),
    (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33),
    (15, 32), (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33),
    (22, 32), (22, 33), (23, 25), (23, 27), (23, 29), (23, 32), (23, 33),
    (24, 25), (24, 27), (24, 31), (25, 31), (26, 29), (26, 33), (27, 33),
    (28, 31), (28, 33), (29, 32), (29, 33), (30, 32), (30, 33), (31, 32),
    (31, 33), (32, 33),
)


def zkc() -> np.ndarray:
    """The karate club network: 34 nodes, 78 edges."""
    return from_edges(34, ZKC_EDGES)


_MODEL_BUILDERS = {
    "er": lambda spec, rng: erdos_renyi(spec["n"], spec["p"], rng),
    "powerlaw_cm": lambda spec, rng: powerlaw_cm(spec["n"], spec["alpha"], rng),
    "clustered": lambda spec, rng: clustered(spec["n_type1"], spec["s"], rng),
    "small_world": lambda spec, rng: small_world(
        spec["n"], spec["p"], rng, k=spec.get("k", 6)
    ),
    "sbm": lambda spec, rng: sbm_two_block(
        spec["n"], spec["epsilon"], rng, spec.get("mean_degree", 10.0)
    ),
    "zkc": lambda spec, rng: zkc(),
}


def generate_network(spec: dict, rng: np.random.Generator) -> np.ndarray:
    """Build a graph from a model spec dict, e.g. {"model": "er", "n": 50, "p": 0.2}."""
    spec = dict(spec)
    model = spec.pop("model")
    try:
        builder = _MODEL_BUILDERS[model]
    except KeyError:
        raise ValueError(
            f"unknown network model {model!r}; choose from {sorted(_MODEL_BUILDERS)}"
        ) from None
    return builder(spec, rng)
