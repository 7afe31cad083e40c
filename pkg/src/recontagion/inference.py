"""Bayesian reconstruction of the network and contagion rule from a trace.

The data -> posterior bridge is a set of integer counts: m[l]/n[l] tally
infections and non-infections of susceptible nodes with l infected
neighbors, and g/h tally persistences and recoveries of infected nodes.
With conjugate beta priors the marginal posterior over graphs reduces to
beta-function terms of those counts plus an Erdos-Renyi edge-count prior,
sampled here with a Metropolis chain whose proposal flips one node pair.

All posterior math stays in log space via log-gamma (scipy's betaln).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaln, xlogy

from .graph import edge_count, n_pairs, validate_adjacency
from .dynamics import validate_states
from .netgen import erdos_renyi
from .metrics import beta_hdpi


@dataclass(frozen=True)
class Hyperparameters:
    """Beta prior parameters; defaults are uniform (all ones)."""

    a_c: np.ndarray
    b_c: np.ndarray
    a_gamma: float = 1.0
    b_gamma: float = 1.0
    a_rho: float = 1.0
    b_rho: float = 1.0

    def __post_init__(self):
        a_c = np.asarray(self.a_c, dtype=np.float64)
        b_c = np.asarray(self.b_c, dtype=np.float64)
        object.__setattr__(self, "a_c", a_c)
        object.__setattr__(self, "b_c", b_c)
        if a_c.shape != b_c.shape or a_c.ndim != 1:
            raise ValueError("a_c and b_c must be 1-D vectors of equal length")
        if (a_c <= 0).any() or (b_c <= 0).any():
            raise ValueError("contagion hyperparameters must be strictly positive")
        for name in ("a_gamma", "b_gamma", "a_rho", "b_rho"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @classmethod
    def uniform(cls, n: int) -> "Hyperparameters":
        return cls(a_c=np.ones(n), b_c=np.ones(n))


@dataclass
class SufficientStats:
    """Counts that fully determine the likelihood.

    m[l], n[l]: infections / non-infections of susceptible nodes with l
    infected neighbors; g, h: persistences / recoveries of infected nodes.
    """

    m: np.ndarray
    n: np.ndarray
    g: int
    h: int

    def copy(self) -> "SufficientStats":
        return SufficientStats(self.m.copy(), self.n.copy(), self.g, self.h)


def neighbor_count_matrix(states: np.ndarray, adj: np.ndarray) -> np.ndarray:
    """Infected-neighbor counts nu[t, i] for every node at t = 0..T-1."""
    return np.asarray(states)[:-1].astype(np.int32) @ np.asarray(adj).astype(np.int32)


def sufficient_statistics(states: np.ndarray, adj: np.ndarray) -> SufficientStats:
    """Count (m, n, g, h) for a trace under a candidate graph."""
    states = np.asarray(states)
    adj = np.asarray(adj)
    n_nodes = adj.shape[0]
    if states.shape[1] != n_nodes:
        raise ValueError(
            f"trace has {states.shape[1]} columns but graph has {n_nodes} nodes"
        )
    xs = states[:-1].astype(bool)
    nxt = states[1:].astype(bool)
    sus = ~xs
    nu = neighbor_count_matrix(states, adj)
    m = np.bincount(nu[sus & nxt], minlength=n_nodes).astype(np.int64)
    n = np.bincount(nu[sus & ~nxt], minlength=n_nodes).astype(np.int64)
    g = int((xs & nxt).sum())
    h = int((xs & ~nxt).sum())
    return SufficientStats(m=m, n=n, g=g, h=h)


def log_likelihood_from_stats(stats: SufficientStats, gamma: float, c: np.ndarray) -> float:
    """Trace log-likelihood given the dynamics parameters, from counts alone."""
    c = np.asarray(c, dtype=np.float64)
    value = xlogy(stats.h, gamma) + xlogy(stats.g, 1.0 - gamma)
    value += xlogy(stats.m, c).sum() + xlogy(stats.n, 1.0 - c).sum()
    return float(value)


def _log_marginal_from_counts(
    m: np.ndarray, n: np.ndarray, n_edges: int, n_nodes: int, hyper: Hyperparameters
) -> float:
    pairs = n_pairs(n_nodes)
    value = betaln(n_edges + hyper.a_rho, pairs - n_edges + hyper.b_rho)
    value += betaln(m + hyper.a_c, n + hyper.b_c).sum()
    return float(value)


def log_marginal_posterior(
    adj: np.ndarray, stats: SufficientStats, hyper: Hyperparameters | None = None
) -> float:
    """Unnormalized log posterior of a graph with dynamics integrated out."""
    adj = np.asarray(adj)
    n_nodes = adj.shape[0]
    if hyper is None:
        hyper = Hyperparameters.uniform(n_nodes)
    return _log_marginal_from_counts(stats.m, stats.n, edge_count(adj), n_nodes, hyper)


def _bin_shift_deltas(
    bins_m: np.ndarray, bins_n: np.ndarray, sign: int, n_bins: int
) -> tuple[np.ndarray, np.ndarray]:
    """Count changes when the given exposure events move one bin up or down."""
    dm = np.bincount(bins_m + sign, minlength=n_bins) - np.bincount(
        bins_m, minlength=n_bins
    )
    dn = np.bincount(bins_n + sign, minlength=n_bins) - np.bincount(
        bins_n, minlength=n_bins
    )
    return dm, dn


def _event_bins(
    states: np.ndarray, nu: np.ndarray, i: int, j: int
) -> tuple[np.ndarray, np.ndarray]:
    """nu values of node i at steps where i is susceptible and j is infected,
    split by whether i is infected at the next step."""
    xs = states[:-1]
    nxt = states[1:]
    active = (xs[:, i] == 0) & (xs[:, j] == 1)
    got = active & (nxt[:, i] == 1)
    not_got = active & (nxt[:, i] == 0)
    return nu[got, i], nu[not_got, i]


def incremental_flip_delta(
    stats: SufficientStats,
    adj: np.ndarray,
    states: np.ndarray,
    pair: tuple[int, int],
    hyper: Hyperparameters | None = None,
    nu: np.ndarray | None = None,
) -> tuple[float, SufficientStats]:
    """Change in the marginal log posterior from flipping one node pair.

    Flipping (i, j) only moves the exposure events of nodes i and j between
    adjacent neighbor-count bins, at the steps where the other endpoint is
    infected. With nu precomputed this is O(T), independent of N. Returns
    the delta and the stats of the flipped graph; inputs are not mutated.
    """
    i, j = pair
    adj = np.asarray(adj)
    states = np.asarray(states)
    n_nodes = adj.shape[0]
    if i == j or not (0 <= i < n_nodes and 0 <= j < n_nodes):
        raise ValueError(f"invalid pair {pair} for n={n_nodes}")
    if hyper is None:
        hyper = Hyperparameters.uniform(n_nodes)
    if nu is None:
        nu = neighbor_count_matrix(states, adj)
    sign = -1 if adj[i, j] else 1
    bm_i, bn_i = _event_bins(states, nu, i, j)
    bm_j, bn_j = _event_bins(states, nu, j, i)
    dm, dn = _bin_shift_deltas(
        np.concatenate((bm_i, bm_j)), np.concatenate((bn_i, bn_j)), sign, n_nodes
    )
    touched = np.flatnonzero((dm != 0) | (dn != 0))
    old_terms = betaln(
        stats.m[touched] + hyper.a_c[touched], stats.n[touched] + hyper.b_c[touched]
    )
    new_terms = betaln(
        stats.m[touched] + dm[touched] + hyper.a_c[touched],
        stats.n[touched] + dn[touched] + hyper.b_c[touched],
    )
    n_edges = edge_count(adj)
    pairs = n_pairs(n_nodes)
    delta = float(new_terms.sum() - old_terms.sum())
    delta += float(
        betaln(n_edges + sign + hyper.a_rho, pairs - n_edges - sign + hyper.b_rho)
        - betaln(n_edges + hyper.a_rho, pairs - n_edges + hyper.b_rho)
    )
    new_stats = SufficientStats(stats.m + dm, stats.n + dn, stats.g, stats.h)
    return delta, new_stats


class _EventIndex:
    """Precomputed exposure-event positions for every unordered node pair.

    For pair k = (i, j), flat_m[k] / flat_n[k] hold positions into a
    node-major flattened nu array (node i at offset i*T) of the steps whose
    m / n events move bins when the pair flips: steps where one endpoint is
    susceptible and the other infected, split by the susceptible endpoint's
    next state. Fixed for a given trace, shared across chains.
    """

    def __init__(self, states: np.ndarray):
        xs = states[:-1].astype(bool)
        nxt = states[1:].astype(bool)
        sus = ~xs
        t_len, n_nodes = xs.shape
        self.t_len = t_len
        self.n_nodes = n_nodes
        times_m: list[list[np.ndarray]] = []
        times_n: list[list[np.ndarray]] = []
        for i in range(n_nodes):
            base_m = (sus[:, i] & nxt[:, i])[:, None] & xs
            base_n = (sus[:, i] & ~nxt[:, i])[:, None] & xs
            times_m.append(self._split_columns(base_m))
            times_n.append(self._split_columns(base_n))
        iu, ju = np.triu_indices(n_nodes, 1)
        dtype = np.int32 if n_nodes * t_len < 2**31 else np.int64
        self.flat_m: list[np.ndarray] = []
        self.flat_n: list[np.ndarray] = []
        for i, j in zip(iu.tolist(), ju.tolist()):
            self.flat_m.append(
                np.concatenate(
                    (times_m[i][j] + i * t_len, times_m[j][i] + j * t_len)
                ).astype(dtype, copy=False)
            )
            self.flat_n.append(
                np.concatenate(
                    (times_n[i][j] + i * t_len, times_n[j][i] + j * t_len)
                ).astype(dtype, copy=False)
            )

    @staticmethod
    def _split_columns(mask: np.ndarray) -> list[np.ndarray]:
        _, tt = np.nonzero(mask.T)
        counts = mask.sum(axis=0)
        return list(np.split(tt.astype(np.int64), np.cumsum(counts)[:-1]))


class _ChainState:
    """One chain's graph, neighbor counts, integer stats, and cached terms.

    Neighbor counts are stored node-major, nu[i, t], so per-pair gathers hit
    contiguous memory. nu[i] is kept correct at every step where i is
    susceptible (the only entries the likelihood reads); entries at infected
    steps go stale.
    """

    def __init__(
        self,
        states: np.ndarray,
        adj: np.ndarray,
        hyper: Hyperparameters,
        index: _EventIndex,
    ):
        self.index = index
        self.adj = adj.copy()
        self.n_nodes = adj.shape[0]
        nu = np.ascontiguousarray(neighbor_count_matrix(states, adj).T)
        self.nu_flat = nu.reshape(-1)
        stats = sufficient_statistics(states, adj)
        self.m = stats.m
        self.n = stats.n
        self.g = stats.g
        self.h = stats.h
        self.e = edge_count(adj)
        self.a_c = hyper.a_c
        self.b_c = hyper.b_c
        self.log_mn = betaln(self.m + self.a_c, self.n + self.b_c)
        pairs = n_pairs(self.n_nodes)
        es = np.arange(pairs + 1, dtype=np.float64)
        self.prior_table = betaln(es + hyper.a_rho, pairs - es + hyper.b_rho)

    def propose(self, k: int, i: int, j: int):
        sign = -1 if self.adj[i, j] else 1
        idx_m = self.index.flat_m[k]
        idx_n = self.index.flat_n[k]
        bins_m = self.nu_flat.take(idx_m)
        bins_n = self.nu_flat.take(idx_n)
        dm, dn = _bin_shift_deltas(bins_m, bins_n, sign, self.n_nodes)
        touched = np.flatnonzero(dm | dn)
        new_lb = betaln(
            self.m[touched] + dm[touched] + self.a_c[touched],
            self.n[touched] + dn[touched] + self.b_c[touched],
        )
        delta = float(new_lb.sum() - self.log_mn[touched].sum())
        delta += self.prior_table[self.e + sign] - self.prior_table[self.e]
        pending = (i, j, sign, dm, dn, touched, new_lb, idx_m, idx_n)
        return delta, pending

    def apply(self, pending) -> None:
        i, j, sign, dm, dn, touched, new_lb, idx_m, idx_n = pending
        self.m += dm
        self.n += dn
        self.log_mn[touched] = new_lb
        self.nu_flat[idx_m] += sign
        self.nu_flat[idx_n] += sign
        new_bit = 1 if sign > 0 else 0
        self.adj[i, j] = new_bit
        self.adj[j, i] = new_bit
        self.e += sign

    def log_posterior(self, hyper: Hyperparameters) -> float:
        return _log_marginal_from_counts(self.m, self.n, self.e, self.n_nodes, hyper)


@dataclass(frozen=True)
class McmcConfig:
    burn_in: int = 100_000
    thinning: int = 10_000
    n_samples: int = 100
    n_chains: int = 1

    def __post_init__(self):
        for name in ("burn_in", "thinning", "n_samples", "n_chains"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass
class McmcResult:
    """Retained graph samples plus per-sample and per-chain diagnostics."""

    samples: np.ndarray  # (S, N, N) uint8
    log_posteriors: np.ndarray
    chain_ids: np.ndarray
    step_indices: np.ndarray
    acceptance_rates: np.ndarray
    config: McmcConfig = field(default_factory=McmcConfig)


def edge_flip_mcmc(
    states: np.ndarray,
    hyper: Hyperparameters | None = None,
    config: McmcConfig | None = None,
    rng: np.random.Generator | None = None,
    initial: np.ndarray | None = None,
) -> McmcResult:
    """Sample graphs from the marginal posterior by Metropolis edge flips.

    The proposal flips one uniformly chosen unordered node pair, accepted
    with probability min(1, exp(delta log posterior)). Each chain starts
    from an independent density-0.5 random graph (or `initial` when given)
    and keeps n_samples states after burn_in, one every `thinning` steps.
    Sample counts are per chain; samples from all chains are concatenated.
    """
    if rng is None:
        raise ValueError("rng is required")
    states = validate_states(states)
    n_nodes = states.shape[1]
    if n_nodes < 2:
        raise ValueError(f"need at least 2 nodes, got {n_nodes}")
    if hyper is None:
        hyper = Hyperparameters.uniform(n_nodes)
    if hyper.a_c.shape[0] != n_nodes:
        raise ValueError("hyperparameter vectors must have length N")
    if config is None:
        config = McmcConfig()
    index = _EventIndex(states)
    iu, ju = np.triu_indices(n_nodes, 1)
    pairs = iu.shape[0]
    total_steps = config.burn_in + config.n_samples * config.thinning

    all_samples = []
    all_logp = []
    all_chain = []
    all_step = []
    rates = []
    chain_rngs = rng.spawn(config.n_chains)
    for chain_id, chain_rng in enumerate(chain_rngs):
        adj0 = initial if initial is not None else erdos_renyi(n_nodes, 0.5, chain_rng)
        chain = _ChainState(states, validate_adjacency(adj0), hyper, index)
        accepted = 0
        block = 16384
        pos = block
        for step_no in range(1, total_steps + 1):
            if pos == block:
                ks = chain_rng.integers(0, pairs, size=block)
                log_us = np.log(chain_rng.random(block))
                pos = 0
            k = ks[pos]
            log_u = log_us[pos]
            pos += 1
            delta, pending = chain.propose(k, iu[k], ju[k])
            if delta >= 0.0 or log_u < delta:
                chain.apply(pending)
                accepted += 1
            if step_no > config.burn_in and (step_no - config.burn_in) % config.thinning == 0:
                all_samples.append(chain.adj.copy())
                all_logp.append(chain.log_posterior(hyper))
                all_chain.append(chain_id)
                all_step.append(step_no)
        rates.append(accepted / total_steps)
    return McmcResult(
        samples=np.stack(all_samples),
        log_posteriors=np.array(all_logp),
        chain_ids=np.array(all_chain, dtype=np.int64),
        step_indices=np.array(all_step, dtype=np.int64),
        acceptance_rates=np.array(rates),
        config=config,
    )


def edge_probability_matrix(samples) -> np.ndarray:
    """Elementwise mean of sampled adjacency matrices (the Q matrix)."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[0] == 0:
        raise ValueError("need a nonempty stack of adjacency samples")
    if arr.shape[1] != arr.shape[2]:
        raise ValueError(f"samples must be square matrices, got {arr.shape}")
    return arr.mean(axis=0)


@dataclass(frozen=True)
class BetaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("beta parameters must be strictly positive")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def variance(self) -> float:
        s = self.alpha + self.beta
        return self.alpha * self.beta / (s * s * (s + 1.0))

    def hdpi(self, mass: float = 0.5) -> tuple[float, float]:
        return beta_hdpi(self.alpha, self.beta, mass)


def gamma_posterior(
    stats: SufficientStats, hyper: Hyperparameters | None = None
) -> BetaParams:
    """Recovery-rate posterior Beta(h + a_gamma, g + b_gamma)."""
    a, b = (1.0, 1.0) if hyper is None else (hyper.a_gamma, hyper.b_gamma)
    return BetaParams(stats.h + a, stats.g + b)


def contagion_posterior(
    stats: SufficientStats, hyper: Hyperparameters | None = None
) -> list[BetaParams]:
    """Per-exposure-count posteriors Beta(m[l] + a[l], n[l] + b[l])."""
    n = stats.m.shape[0]
    if hyper is None:
        hyper = Hyperparameters.uniform(n)
    return [
        BetaParams(stats.m[l] + hyper.a_c[l], stats.n[l] + hyper.b_c[l])
        for l in range(n)
    ]


def rho_posterior(adj: np.ndarray, hyper: Hyperparameters | None = None) -> BetaParams:
    """Density posterior Beta(|E| + a_rho, C(N,2) - |E| + b_rho)."""
    adj = np.asarray(adj)
    n = adj.shape[0]
    if hyper is None:
        hyper = Hyperparameters.uniform(n)
    e = edge_count(adj)
    return BetaParams(e + hyper.a_rho, n_pairs(n) - e + hyper.b_rho)
