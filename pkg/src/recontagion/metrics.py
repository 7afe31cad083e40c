"""Reconstruction-quality metrics and dynamical regime descriptors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sp_stats

from .graph import degrees, n_pairs


@dataclass(frozen=True)
class RocResult:
    auroc: float
    n_positive: int
    n_negative: int


def auroc(q: np.ndarray, a_true: np.ndarray) -> RocResult:
    """Tie-aware rank AUROC of edge scores q against binary edges a_true.

    Computed over unordered off-diagonal pairs via the Mann-Whitney rank
    statistic; ties receive average rank, so a constant predictor scores 0.5.
    """
    q = np.asarray(q, dtype=np.float64)
    a_true = np.asarray(a_true)
    if q.shape != a_true.shape:
        raise ValueError(f"shape mismatch: {q.shape} vs {a_true.shape}")
    iu, ju = np.triu_indices(q.shape[0], 1)
    scores = q[iu, ju]
    labels = a_true[iu, ju].astype(bool)
    pos = int(labels.sum())
    neg = int(labels.size - pos)
    if pos == 0 or neg == 0:
        raise ValueError(f"degenerate labels: {pos} edges, {neg} non-edges")
    ranks = sp_stats.rankdata(scores)
    value = (ranks[labels].sum() - pos * (pos + 1) / 2.0) / (pos * neg)
    return RocResult(auroc=float(value), n_positive=pos, n_negative=neg)


def density_quality(rho_samples, rho_true: float) -> float:
    """1 minus the mean absolute error of the sampled densities."""
    rho_samples = np.asarray(rho_samples, dtype=np.float64)
    if rho_samples.size == 0:
        raise ValueError("empty density sample list")
    return float(1.0 - np.abs(rho_samples - rho_true).mean())


def sample_densities(samples) -> np.ndarray:
    """Edge density |E_s| / C(N,2) of each sampled adjacency matrix."""
    samples = np.asarray(samples)
    n = samples.shape[-1]
    counts = np.triu(samples, 1).sum(axis=(-2, -1))
    return counts / n_pairs(n)


def nodal_recovery(q: np.ndarray, a_true: np.ndarray) -> np.ndarray:
    """Per-node recovery: 1 minus the mean absolute row error of Q against A."""
    q = np.asarray(q, dtype=np.float64)
    a_true = np.asarray(a_true, dtype=np.float64)
    if q.shape != a_true.shape:
        raise ValueError(f"shape mismatch: {q.shape} vs {a_true.shape}")
    n = q.shape[0]
    return 1.0 - np.abs(q - a_true).sum(axis=1) / n


def nodal_recovery_by_coreness(q: np.ndarray, a_true: np.ndarray) -> dict[int, float]:
    """Mean per-node recovery within each coreness class of the true graph."""
    phi = nodal_recovery(q, a_true)
    core = kcore(a_true)
    return {int(k): float(phi[core == k].mean()) for k in np.unique(core)}


def kcore(adj: np.ndarray) -> np.ndarray:
    """Coreness of each node by iterative peeling.

    coreness(i) is the largest k such that node i survives repeated removal
    of all nodes with remaining degree < k.
    """
    adj = np.asarray(adj).astype(np.int64)
    n = adj.shape[0]
    deg = degrees(adj).copy()
    alive = np.ones(n, dtype=bool)
    core = np.zeros(n, dtype=np.int64)
    k = 1
    while alive.any():
        while True:
            peel = alive & (deg < k)
            if not peel.any():
                break
            core[peel] = k - 1
            alive[peel] = False
            # Removing peeled nodes lowers their alive neighbors' degrees.
            deg -= adj[:, peel].sum(axis=1)
            deg[~alive] = 0
        k += 1
    return core


class PowerIterationError(RuntimeError):
    """Raised when power iteration fails to converge; carries diagnostics."""

    def __init__(self, iterations: int, estimate: float, last_change: float):
        self.iterations = iterations
        self.estimate = estimate
        self.last_change = last_change
        super().__init__(
            f"power iteration did not converge after {iterations} iterations "
            f"(estimate={estimate!r}, last change={last_change!r})"
        )


def spectral_radius(
    adj: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000
) -> float:
    """Largest eigenvalue magnitude via power iteration started at all-ones.

    Iterates on A + I: the shift breaks the bipartite +/- oscillation while
    the radius of a nonnegative symmetric matrix stays the top eigenvalue.
    """
    a = np.asarray(adj, dtype=np.float64)
    n = a.shape[0]
    v = np.ones(n) / np.sqrt(n)
    lam = float(v @ (a @ v))
    change = np.inf
    for _ in range(max_iter):
        w = a @ v + v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        new_lam = float(v @ (a @ v))
        change = abs(new_lam - lam)
        lam = new_lam
        if change <= tol * max(1.0, abs(lam)):
            return lam
    raise PowerIterationError(max_iter, lam, change)


def r0(beta: float, adj: np.ndarray, gamma: float) -> float:
    """Basic reproduction number beta * spectral_radius(A) / gamma."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return beta * spectral_radius(adj) / gamma


def beta_hdpi(
    alpha: float, beta: float, mass: float = 0.5, grid_points: int = 10_000
) -> tuple[float, float]:
    """Highest-density interval of a Beta(alpha, beta) by density-level search.

    The unit interval is discretized on a midpoint grid; cells are accepted
    in decreasing density order until the requested mass is covered.
    """
    if not (0.0 < mass < 1.0):
        raise ValueError(f"mass must be in (0, 1), got {mass}")
    edges = np.linspace(0.0, 1.0, grid_points + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    dens = sp_stats.beta.pdf(mids, alpha, beta)
    cell_mass = dens / dens.sum()
    order = np.argsort(dens)[::-1]
    cum = np.cumsum(cell_mass[order])
    cutoff = int(np.searchsorted(cum, mass)) + 1
    chosen = order[:cutoff]
    return float(edges[chosen.min()]), float(edges[chosen.max() + 1])


def empirical_hdpi(values, mass: float = 0.5) -> tuple[float, float]:
    """Shortest interval containing the requested fraction of the sample."""
    if not (0.0 < mass <= 1.0):
        raise ValueError(f"mass must be in (0, 1], got {mass}")
    vals = np.sort(np.asarray(values, dtype=np.float64))
    m = vals.size
    if m == 0:
        raise ValueError("empty sample")
    window = max(1, int(np.ceil(mass * m)))
    if window >= m:
        return float(vals[0]), float(vals[-1])
    widths = vals[window - 1 :] - vals[: m - window + 1]
    start = int(np.argmin(widths))
    return float(vals[start]), float(vals[start + window - 1])
