"""Config-driven experiment runner: simulate, reconstruct, evaluate, repeat.

A run compares exactly two contagion rules over a grid of cells (network
parameter x infectivity x trace length), with a fixed number of repetitions
per cell. Every random stream is derived by hashing (master seed, cell id,
repetition, role), so results are a deterministic function of the config
and seed regardless of parallelism or execution order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from . import calibrate, inference, metrics, netgen
from .dynamics import (
    DynamicsParams,
    contagion_from_spec,
    all_infected,
    is_extinct,
    simulate,
)
from .graph import density

CONFIG_VERSION = 1

_EXTINCTION_RETRIES = 20


def derive_rng(master_seed: int, *parts) -> np.random.Generator:
    """Deterministic generator keyed by the master seed and a role tuple."""
    digest = hashlib.sha256(
        json.dumps([int(master_seed), *[str(p) for p in parts]]).encode()
    ).digest()
    entropy = int.from_bytes(digest[:16], "big")
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _contagion_key(spec: dict) -> str:
    """Stable identity of a contagion spec, independent of its list position."""
    payload = {k: v for k, v in spec.items() if k not in ("name", "calibrate")}
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]


@dataclass
class ExperimentConfig:
    name: str
    network: dict
    contagions: list
    gamma: float = 0.1
    t_steps: int = 2000
    beta: float | None = None
    grid: dict = field(default_factory=dict)
    repetitions: int = 30
    mcmc: inference.McmcConfig = field(default_factory=inference.McmcConfig)
    calibration: dict = field(default_factory=dict)
    seed: int = 0
    discard_extinct: bool = False
    output_dir: str = "."
    version: int = CONFIG_VERSION

    def __post_init__(self):
        if self.version != CONFIG_VERSION:
            raise ValueError(f"unsupported config version {self.version}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if len(self.contagions) != 2:
            raise ValueError("exactly two contagion specs are compared per run")
        if len(self.grid) > 2:
            raise ValueError("at most two grid dimensions are supported")
        for axis, values in self.grid.items():
            if not values:
                raise ValueError(f"grid axis {axis!r} is empty")
        names = [c.get("name", c["kind"]) for c in self.contagions]
        if names[0] == names[1]:
            raise ValueError("contagion specs need distinct names")
        if self.contagions[0].get("calibrate"):
            raise ValueError("the first (baseline) contagion cannot be calibrated")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        mcmc = raw.pop("mcmc", None)
        cfg = cls(**raw)
        if mcmc is not None:
            cfg.mcmc = inference.McmcConfig(**mcmc)
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        out = {
            "version": self.version,
            "name": self.name,
            "network": self.network,
            "contagions": self.contagions,
            "gamma": self.gamma,
            "t_steps": self.t_steps,
            "beta": self.beta,
            "grid": self.grid,
            "repetitions": self.repetitions,
            "mcmc": {
                "burn_in": self.mcmc.burn_in,
                "thinning": self.mcmc.thinning,
                "n_samples": self.mcmc.n_samples,
                "n_chains": self.mcmc.n_chains,
            },
            "calibration": self.calibration,
            "seed": self.seed,
            "discard_extinct": self.discard_extinct,
            "output_dir": self.output_dir,
        }
        return out

    def cells(self) -> list[dict]:
        """Cartesian product of the grid axes, in config order."""
        if not self.grid:
            return [{}]
        keys = list(self.grid.keys())
        return [dict(zip(keys, combo)) for combo in product(*self.grid.values())]


def cell_id(coords: dict) -> str:
    if not coords:
        return "cell"
    return "__".join(f"{k}={coords[k]!r}" for k in coords)


def _cell_network_spec(config: ExperimentConfig, coords: dict) -> dict:
    spec = dict(config.network)
    for key, value in coords.items():
        if key not in ("beta", "t_steps"):
            spec[key] = value
    return spec


def _cell_t_steps(config: ExperimentConfig, coords: dict) -> int:
    return int(coords.get("t_steps", config.t_steps))


def _default_beta(config: ExperimentConfig, coords: dict) -> float:
    if "beta" in coords:
        return float(coords["beta"])
    if config.beta is not None:
        return float(config.beta)
    raise ValueError("no infectivity given: set beta in the spec, grid, or config")


def _baseline_beta(config: ExperimentConfig, coords: dict) -> float:
    spec = config.contagions[0]
    if "beta" in spec:
        return float(spec["beta"])
    return _default_beta(config, coords)


def _resolve_contagion(spec: dict, beta: float):
    """Contagion function for a spec, with the cell/calibrated beta filled in."""
    full = dict(spec)
    full.setdefault("beta", beta)
    return contagion_from_spec(full), float(full["beta"])


def calibrate_cell(config: ExperimentConfig, coords: dict) -> dict[int, float]:
    """Matched infectivities for the calibrated contagion specs of one cell.

    Calibration is done once per cell on a dedicated network draw; set
    calibration.per_repetition in the config to recalibrate per repetition
    (handled in the repetition runner instead).
    """
    matched: dict[int, float] = {}
    specs = [s for s in config.contagions if s.get("calibrate")]
    if not specs or config.calibration.get("per_repetition"):
        return matched
    cid = cell_id(coords)
    net_spec = _cell_network_spec(config, coords)
    adj = netgen.generate_network(net_spec, derive_rng(config.seed, "calibnet", cid))
    for idx, spec in enumerate(config.contagions):
        if not spec.get("calibrate"):
            continue
        result = _run_calibration(config, coords, adj, spec, derive_rng(
            config.seed, "calib", cid, _contagion_key(spec)
        ))
        matched[idx] = result.beta
    return matched


def _run_calibration(config, coords, adj, spec, rng) -> calibrate.CalibrationResult:
    base_beta = _baseline_beta(config, coords)
    baseline, _ = _resolve_contagion(config.contagions[0], base_beta)
    reference = DynamicsParams(gamma=config.gamma, contagion=baseline)

    def template(beta: float):
        full = dict(spec)
        full["beta"] = beta
        return contagion_from_spec(full)

    opts = config.calibration
    return calibrate.robbins_monro_match(
        adj,
        config.gamma,
        reference,
        template,
        _cell_t_steps(config, coords),
        rng,
        n_reference=opts.get("n_reference", 50),
        max_iterations=opts.get("max_iterations", 150),
        a0=opts.get("a0"),
        tolerance=opts.get("tolerance"),
        statistic=opts.get("statistic", "mean_of_max"),
    )


def _simulate_trace(adj, params, t_steps, rng, discard_extinct):
    """Simulate once; with discard_extinct, retry extinct traces on derived streams."""
    trace = simulate(adj, params, all_infected(adj.shape[0]), t_steps, rng)
    if not discard_extinct:
        return trace, is_extinct(trace)
    for _ in range(_EXTINCTION_RETRIES):
        if not is_extinct(trace):
            return trace, False
        trace = simulate(adj, params, all_infected(adj.shape[0]), t_steps, rng)
    return trace, is_extinct(trace)


def run_repetition(
    config: ExperimentConfig,
    coords: dict,
    rep: int,
    matched_betas: dict[int, float] | None = None,
) -> dict:
    """One repetition of one cell: network, traces, reconstruction, metrics."""
    t0 = time.perf_counter()
    cid = cell_id(coords)
    t_steps = _cell_t_steps(config, coords)
    base_beta = _baseline_beta(config, coords)
    adj = netgen.generate_network(
        _cell_network_spec(config, coords), derive_rng(config.seed, "net", cid, rep)
    )
    rho_true = density(adj)
    if matched_betas is None:
        matched_betas = {}
    per_contagion = []
    for idx, spec in enumerate(config.contagions):
        key = _contagion_key(spec)
        if spec.get("calibrate"):
            if idx in matched_betas:
                beta_used = matched_betas[idx]
            else:
                result = _run_calibration(
                    config, coords, adj, spec,
                    derive_rng(config.seed, "calib", cid, key, rep),
                )
                beta_used = result.beta
            contagion, beta_used = _resolve_contagion(
                {k: v for k, v in spec.items() if k != "beta"}, beta_used
            )
        else:
            fallback = spec["beta"] if "beta" in spec else _default_beta(config, coords)
            contagion, beta_used = _resolve_contagion(spec, fallback)
        params = DynamicsParams(gamma=config.gamma, contagion=contagion)
        trace, extinct = _simulate_trace(
            adj, params, t_steps,
            derive_rng(config.seed, "sim", cid, key, rep),
            config.discard_extinct,
        )
        mcmc_result = inference.edge_flip_mcmc(
            trace,
            config=config.mcmc,
            rng=derive_rng(config.seed, "mcmc", cid, key, rep),
        )
        q = inference.edge_probability_matrix(mcmc_result.samples)
        roc = metrics.auroc(q, adj)
        phi_rho = metrics.density_quality(
            metrics.sample_densities(mcmc_result.samples), rho_true
        )
        per_contagion.append(
            {
                "name": spec.get("name", spec["kind"]),
                "beta": beta_used,
                "auroc": roc.auroc,
                "phi_rho": phi_rho,
                "phi_by_coreness": {
                    str(k): v
                    for k, v in metrics.nodal_recovery_by_coreness(q, adj).items()
                },
                "extinct": bool(extinct),
                "mean_acceptance": float(mcmc_result.acceptance_rates.mean()),
            }
        )
    record = {
        "cell": coords,
        "cell_id": cid,
        "repetition": rep,
        "per_contagion": per_contagion,
        "delta_auroc": per_contagion[1]["auroc"] - per_contagion[0]["auroc"],
        "delta_phi_rho": per_contagion[1]["phi_rho"] - per_contagion[0]["phi_rho"],
        "r0": metrics.r0(base_beta, adj, config.gamma),
        "runtime_s": time.perf_counter() - t0,
        "error": None,
    }
    return record


def _safe_repetition(args) -> dict:
    config, coords, rep, matched = args
    try:
        return run_repetition(config, coords, rep, matched)
    except Exception as exc:  # recorded per repetition; the cell carries on
        return {
            "cell": coords,
            "cell_id": cell_id(coords),
            "repetition": rep,
            "per_contagion": None,
            "delta_auroc": None,
            "delta_phi_rho": None,
            "r0": None,
            "runtime_s": None,
            "error": f"{type(exc).__name__}: {exc}",
        }


@dataclass
class CellResult:
    coords: dict
    records: list
    summary: dict

    @property
    def cell_id(self) -> str:
        return cell_id(self.coords)


def _aggregate_cell(config: ExperimentConfig, coords: dict, records: list) -> CellResult:
    good = [r for r in records if r["error"] is None]
    if not good:
        raise RuntimeError(
            f"all {len(records)} repetitions failed for cell {cell_id(coords)}: "
            f"{records[0]['error']}"
        )
    names = [c.get("name", c["kind"]) for c in config.contagions]
    summary: dict = {
        "cell": coords,
        "n_repetitions": len(records),
        "n_failed": len(records) - len(good),
        "r0_median": float(np.median([r["r0"] for r in good])),
        "runtime_s": float(np.sum([r["runtime_s"] for r in good])),
    }
    for key in ("delta_auroc", "delta_phi_rho"):
        vals = np.array([r[key] for r in good], dtype=np.float64)
        lo, hi = metrics.empirical_hdpi(vals, 0.5)
        summary[key] = {"median": float(np.median(vals)), "hdpi50": [lo, hi]}
    for pos, name in enumerate(names):
        for key in ("auroc", "phi_rho"):
            vals = np.array([r["per_contagion"][pos][key] for r in good])
            lo, hi = metrics.empirical_hdpi(vals, 0.5)
            summary[f"{name}_{key}"] = {
                "median": float(np.median(vals)),
                "hdpi50": [lo, hi],
            }
    return CellResult(coords=coords, records=records, summary=summary)


def run_cell(config: ExperimentConfig, coords: dict) -> CellResult:
    """Run all repetitions of one cell sequentially."""
    matched = calibrate_cell(config, coords)
    records = [
        _safe_repetition((config, coords, rep, matched))
        for rep in range(config.repetitions)
    ]
    return _aggregate_cell(config, coords, records)


def _cells_dir(out_dir: Path) -> Path:
    return out_dir / "cells"


def _write_cell(out_dir: Path, result: CellResult) -> None:
    path = _cells_dir(out_dir) / f"{result.cell_id}.json"
    tmp = path.with_suffix(".json.tmp")
    tmp.write_text(
        json.dumps({"summary": result.summary, "records": result.records}, indent=2)
    )
    tmp.rename(path)


def _load_cell(out_dir: Path, coords: dict) -> CellResult | None:
    path = _cells_dir(out_dir) / f"{cell_id(coords)}.json"
    if not path.exists():
        return None
    data = json.loads(path.read_text())
    return CellResult(coords=coords, records=data["records"], summary=data["summary"])


def run_grid(
    config: ExperimentConfig,
    threads: int = 1,
    resume: bool = False,
    out_dir: str | os.PathLike | None = None,
) -> list[CellResult]:
    """Execute every cell, write CSV/JSON/SVG outputs, and return the results.

    Repetitions are independent tasks on a bounded worker pool. Completed
    cells are persisted under cells/ and skipped on --resume; the final CSV
    is rebuilt from the persisted cells in grid order, so an interrupted
    and resumed run yields the same file as an uninterrupted one.
    """
    out = Path(out_dir) if out_dir is not None else Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _cells_dir(out).mkdir(exist_ok=True)
    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2) + "\n")

    cells = config.cells()
    results: dict[str, CellResult] = {}
    pending: list[dict] = []
    for coords in cells:
        prior = _load_cell(out, coords) if resume else None
        if prior is not None:
            results[cell_id(coords)] = prior
        else:
            pending.append(coords)

    if pending:
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                matched_list = list(
                    pool.map(calibrate_cell, [config] * len(pending), pending)
                )
                tasks = [
                    (config, coords, rep, matched)
                    for coords, matched in zip(pending, matched_list)
                    for rep in range(config.repetitions)
                ]
                record_stream = pool.map(_safe_repetition, tasks)
                _collect_cells(config, pending, record_stream, out, results)
        else:
            matched_list = [calibrate_cell(config, coords) for coords in pending]
            tasks = [
                (config, coords, rep, matched)
                for coords, matched in zip(pending, matched_list)
                for rep in range(config.repetitions)
            ]
            _collect_cells(config, pending, map(_safe_repetition, tasks), out, results)

    ordered = [results[cell_id(coords)] for coords in cells]
    _write_csv(out / "results.csv", config, ordered)
    _write_heatmaps(out, config, ordered)
    return ordered


def _collect_cells(config, pending, record_stream, out: Path, results: dict) -> None:
    """Group the in-order repetition stream by cell, persisting each cell as
    soon as its last repetition arrives (interrupted runs keep them)."""
    record_iter = iter(record_stream)
    for coords in pending:
        recs = [next(record_iter) for _ in range(config.repetitions)]
        result = _aggregate_cell(config, coords, recs)
        _write_cell(out, result)
        results[cell_id(coords)] = result


def _write_csv(path: Path, config: ExperimentConfig, results: list[CellResult]) -> None:
    names = [c.get("name", c["kind"]) for c in config.contagions]
    dims = list(config.grid.keys())
    header = dims + ["repetition"]
    for name in names:
        header += [f"{name}_beta", f"{name}_auroc", f"{name}_phi_rho", f"{name}_extinct"]
    header += ["delta_auroc", "delta_phi_rho", "r0", "error"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for result in results:
            for rec in result.records:
                row = [rec["cell"].get(d) for d in dims] + [rec["repetition"]]
                if rec["error"] is None:
                    for pc in rec["per_contagion"]:
                        row += [pc["beta"], pc["auroc"], pc["phi_rho"], int(pc["extinct"])]
                    row += [rec["delta_auroc"], rec["delta_phi_rho"], rec["r0"], ""]
                else:
                    row += [""] * (4 * len(names) + 3) + [rec["error"]]
                writer.writerow(row)


def _write_heatmaps(out: Path, config: ExperimentConfig, results: list[CellResult]) -> None:
    from . import plots  # deferred: keep worker processes free of matplotlib

    dims = list(config.grid.keys())
    if not dims:
        return
    x_key = dims[0]
    x_values = list(config.grid[x_key])
    if len(dims) == 2:
        y_key = dims[1]
        y_values = list(config.grid[y_key])
    else:
        y_key, y_values = "", [0.0]
    shape = (len(y_values), len(x_values))
    grids = {
        "delta_auroc": np.full(shape, np.nan),
        "delta_phi_rho": np.full(shape, np.nan),
    }
    r0_grid = np.full(shape, np.nan)
    for result in results:
        xi = x_values.index(result.coords[x_key])
        yi = y_values.index(result.coords[y_key]) if len(dims) == 2 else 0
        for key in grids:
            grids[key][yi, xi] = result.summary[key]["median"]
        r0_grid[yi, xi] = result.summary["r0_median"]
    names = [c.get("name", c["kind"]) for c in config.contagions]
    for key, grid in grids.items():
        plots.heatmap_svg(
            out / f"{key}.svg",
            x_values,
            y_values,
            grid,
            r0=r0_grid,
            title=f"{key}: {names[1]} minus {names[0]} (median)",
            xlabel=x_key,
            ylabel=y_key or "",
        )
