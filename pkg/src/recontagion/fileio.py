"""File formats: edge lists, state CSVs, posterior sample dumps, summaries.

Edge list: one "u v" pair per line, 0-indexed. State CSV: one row per time
step, one 0/1 column per node. Sample dump: JSON lines, one record per
retained MCMC sample. Summary: a single JSON document with the Q matrix
and the conjugate posterior parameters.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import inference, metrics
from .graph import edge_list, from_edges, validate_adjacency
from .dynamics import validate_states


def write_edge_list(path, adj: np.ndarray, n_nodes_comment: bool = True) -> None:
    adj = validate_adjacency(adj)
    lines = []
    if n_nodes_comment:
        lines.append(f"# nodes: {adj.shape[0]}")
    lines.extend(f"{u} {v}" for u, v in edge_list(adj))
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path, n: int | None = None) -> np.ndarray:
    """Read an edge list; node count from the header comment, `n`, or max index."""
    pairs = []
    header_n = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if "nodes:" in line:
                header_n = int(line.split("nodes:")[1].strip())
            continue
        u, v = line.split()
        pairs.append((int(u), int(v)))
    if n is None:
        n = header_n
    if n is None:
        if not pairs:
            raise ValueError(f"{path}: empty edge list with no node-count header")
        n = max(max(u, v) for u, v in pairs) + 1
    return from_edges(n, pairs)


def write_states(path, states: np.ndarray) -> None:
    states = validate_states(states)
    np.savetxt(path, states, fmt="%d", delimiter=",")


def read_states(path) -> np.ndarray:
    states = np.loadtxt(path, delimiter=",", dtype=np.int64)
    if states.ndim == 1:
        states = states[None, :]
    return validate_states(states)


def write_sample_dump(path, result: inference.McmcResult) -> None:
    """One JSON record per retained sample: edges, log posterior, chain, step."""
    with open(path, "w") as fh:
        for k in range(result.samples.shape[0]):
            record = {
                "chain": int(result.chain_ids[k]),
                "step": int(result.step_indices[k]),
                "log_posterior": float(result.log_posteriors[k]),
                "edges": [[int(u), int(v)] for u, v in edge_list(result.samples[k])],
            }
            fh.write(json.dumps(record) + "\n")


def read_sample_dump(path, n: int) -> tuple[np.ndarray, list[dict]]:
    """Rebuild the sample stack and raw records from a JSONL dump."""
    records = []
    mats = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        records.append(rec)
        mats.append(from_edges(n, [tuple(e) for e in rec["edges"]]))
    if not mats:
        raise ValueError(f"{path}: no samples")
    return np.stack(mats), records


def _beta_params_dict(bp: inference.BetaParams, mass: float = 0.5) -> dict:
    lo, hi = bp.hdpi(mass)
    return {
        "alpha": bp.alpha,
        "beta": bp.beta,
        "mean": bp.mean,
        "hdpi_mass": mass,
        "hdpi": [lo, hi],
    }


def posterior_summary(
    states: np.ndarray,
    result: inference.McmcResult,
    hyper: inference.Hyperparameters | None = None,
) -> dict:
    """Posterior summary with Q and beta parameters for gamma, c, and rho.

    gamma's counts do not depend on the graph, so its posterior is exact.
    The c and rho parameters use counts averaged over the retained samples
    (a point summary of the per-sample conjugate posteriors).
    """
    states = validate_states(states)
    n = states.shape[1]
    if hyper is None:
        hyper = inference.Hyperparameters.uniform(n)
    q = inference.edge_probability_matrix(result.samples)
    per_sample_stats = [
        inference.sufficient_statistics(states, s) for s in result.samples
    ]
    m_bar = np.mean([s.m for s in per_sample_stats], axis=0)
    n_bar = np.mean([s.n for s in per_sample_stats], axis=0)
    gamma_bp = inference.gamma_posterior(per_sample_stats[0], hyper)
    c_bps = [
        inference.BetaParams(m_bar[l] + hyper.a_c[l], n_bar[l] + hyper.b_c[l])
        for l in range(n)
    ]
    e_bar = float(np.mean([np.triu(s, 1).sum() for s in result.samples]))
    pairs = n * (n - 1) // 2
    rho_bp = inference.BetaParams(e_bar + hyper.a_rho, pairs - e_bar + hyper.b_rho)
    return {
        "n_nodes": n,
        "t_steps": int(states.shape[0] - 1),
        "n_samples": int(result.samples.shape[0]),
        "acceptance_rates": result.acceptance_rates.tolist(),
        "q": q.tolist(),
        "sample_densities": metrics.sample_densities(result.samples).tolist(),
        "gamma": _beta_params_dict(gamma_bp),
        "rho": _beta_params_dict(rho_bp),
        "contagion": [_beta_params_dict(bp) for bp in c_bps],
    }


def write_summary(path, summary: dict) -> None:
    Path(path).write_text(json.dumps(summary, indent=2) + "\n")


def read_summary(path) -> dict:
    return json.loads(Path(path).read_text())
