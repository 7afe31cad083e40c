"""Command-line interface.

Subcommands: generate, simulate, infer, evaluate, calibrate, experiment.
Relative output paths are resolved against $RECONTAGION_OUTPUT when set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import calibrate as calibrate_mod
from . import experiments, fileio, inference, metrics, netgen
from .dynamics import DynamicsParams, all_infected, contagion_from_spec, simulate
from .graph import density

OUTPUT_ENV = "RECONTAGION_OUTPUT"


def _out_path(path: str) -> Path:
    p = Path(path)
    root = os.environ.get(OUTPUT_ENV)
    if root and not p.is_absolute():
        p = Path(root) / p
    if p.parent != Path("."):
        p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _network_spec_from_args(args) -> dict:
    spec = {"model": args.model, "n": args.n}
    for key in ("p", "alpha", "s", "n_type1", "epsilon", "k", "mean_degree"):
        value = getattr(args, key, None)
        if value is not None:
            spec[key] = value
    if args.model == "clustered":
        spec.pop("n", None)
    return spec


def _cmd_generate(args) -> int:
    rng = np.random.default_rng(args.seed)
    spec = _network_spec_from_args(args)
    adj = netgen.generate_network(spec, rng)
    out = _out_path(args.output)
    fileio.write_edge_list(out, adj)
    sidecar = {
        "spec": spec,
        "seed": args.seed,
        "n_nodes": int(adj.shape[0]),
        "n_edges": int(adj.sum() // 2),
        "density": density(adj),
    }
    out.with_suffix(out.suffix + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")
    print(f"wrote {out} ({sidecar['n_nodes']} nodes, {sidecar['n_edges']} edges)")
    return 0


def _contagion_spec_from_args(args) -> dict:
    spec = {"kind": args.contagion, "beta": args.beta}
    if args.contagion in ("threshold", "mixture"):
        spec["tau"] = args.tau
    if args.contagion == "mixture":
        spec["omega"] = args.omega
    return spec


def _cmd_simulate(args) -> int:
    adj = fileio.read_edge_list(args.graph)
    rng = np.random.default_rng(args.seed)
    params = DynamicsParams(
        gamma=args.gamma, contagion=contagion_from_spec(_contagion_spec_from_args(args))
    )
    x0 = all_infected(adj.shape[0])
    trace = simulate(adj, params, x0, args.steps, rng)
    out = _out_path(args.output)
    fileio.write_states(out, trace)
    print(f"wrote {out} ({args.steps} steps, {adj.shape[0]} nodes)")
    return 0


def _cmd_infer(args) -> int:
    states = fileio.read_states(args.states)
    config = inference.McmcConfig(
        burn_in=args.burn_in,
        thinning=args.thinning,
        n_samples=args.samples,
        n_chains=args.chains,
    )
    rng = np.random.default_rng(args.seed)
    result = inference.edge_flip_mcmc(states, config=config, rng=rng)
    summary = fileio.posterior_summary(states, result)
    out = _out_path(args.output)
    fileio.write_summary(out, summary)
    if args.samples_out:
        fileio.write_sample_dump(_out_path(args.samples_out), result)
    rates = ", ".join(f"{r:.3f}" for r in result.acceptance_rates)
    print(f"wrote {out} ({result.samples.shape[0]} samples, acceptance {rates})")
    return 0


def _cmd_evaluate(args) -> int:
    adj = fileio.read_edge_list(args.graph)
    summary = fileio.read_summary(args.summary)
    q = np.array(summary["q"], dtype=np.float64)
    roc = metrics.auroc(q, adj)
    report = {
        "auroc": roc.auroc,
        "n_positive": roc.n_positive,
        "n_negative": roc.n_negative,
        "phi_rho": metrics.density_quality(summary["sample_densities"], density(adj)),
        "phi_by_coreness": {
            str(k): v for k, v in metrics.nodal_recovery_by_coreness(q, adj).items()
        },
    }
    if args.beta is not None:
        report["r0"] = metrics.r0(args.beta, adj, args.gamma)
    out = _out_path(args.output)
    fileio.write_summary(out, report)
    print(f"wrote {out} (AUROC {roc.auroc:.4f})")
    return 0


def _cmd_calibrate(args) -> int:
    adj = fileio.read_edge_list(args.graph)
    rng = np.random.default_rng(args.seed)
    reference = DynamicsParams(
        gamma=args.gamma, contagion=contagion_from_spec({"kind": "simple", "beta": args.beta})
    )

    def template(beta: float):
        return contagion_from_spec(
            {"kind": args.template, "beta": beta, "tau": args.tau}
            if args.template == "threshold"
            else {"kind": args.template, "beta": beta}
        )

    result = calibrate_mod.robbins_monro_match(
        adj,
        args.gamma,
        reference,
        template,
        args.steps,
        rng,
        n_reference=args.reference_sims,
        max_iterations=args.iterations,
    )
    report = {
        "matched_beta": result.beta,
        "converged": result.converged,
        "iterations": result.iterations,
        "reference_value": result.reference_value,
        "final_betas": result.betas[-10:].tolist(),
        "final_observations": result.observations[-10:].tolist(),
    }
    out = _out_path(args.output)
    fileio.write_summary(out, report)
    print(f"wrote {out} (matched beta {result.beta:.4f}, converged={result.converged})")
    return 0


def _cmd_experiment(args) -> int:
    config = experiments.ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        config.seed = args.seed
    out_dir = _out_path(args.output or config.output_dir)
    results = experiments.run_grid(
        config, threads=args.threads, resume=args.resume, out_dir=out_dir
    )
    print(f"wrote {out_dir} ({len(results)} cells, {config.repetitions} repetitions each)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recontagion",
        description="Simulate contagions on networks and reconstruct the network "
        "and contagion rule from binary state time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a network and write an edge list")
    p.add_argument("--model", required=True,
                   choices=["er", "powerlaw_cm", "clustered", "small_world", "sbm", "zkc"])
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--p", type=float, default=None, help="edge/rewiring probability")
    p.add_argument("--alpha", type=float, default=None, help="degree-law exponent")
    p.add_argument("--s", type=int, default=None, help="clique size (clustered)")
    p.add_argument("--n-type1", dest="n_type1", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None, help="block imbalance (sbm)")
    p.add_argument("--k", type=int, default=None, help="ring degree (small_world)")
    p.add_argument("--mean-degree", dest="mean_degree", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("simulate", help="simulate a contagion trace on a network")
    p.add_argument("--graph", required=True, help="edge list file")
    p.add_argument("--contagion", default="simple",
                   choices=["simple", "threshold", "mixture"])
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--tau", type=int, default=2)
    p.add_argument("--omega", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="state CSV path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("infer", help="reconstruct the network from a state CSV")
    p.add_argument("--states", required=True)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=100_000)
    p.add_argument("--thinning", type=int, default=10_000)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="summary JSON path")
    p.add_argument("--samples-out", dest="samples_out", default=None,
                   help="optional JSONL dump of retained samples")
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("evaluate", help="score a posterior summary against a true graph")
    p.add_argument("--summary", required=True)
    p.add_argument("--graph", required=True, help="true edge list")
    p.add_argument("--beta", type=float, default=None, help="also report R0 for this beta")
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("calibrate", help="match a template contagion to a simple reference")
    p.add_argument("--graph", required=True)
    p.add_argument("--beta", type=float, required=True, help="reference infectivity")
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--template", default="threshold", choices=["threshold", "simple"])
    p.add_argument("--tau", type=int, default=2)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--reference-sims", dest="reference_sims", type=int, default=50)
    p.add_argument("--iterations", type=int, default=150)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("experiment", help="run a config-driven experiment grid")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--output", default=None, help="output directory (default: config)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--resume", action="store_true",
                   help="skip cells with a completed marker in the output directory")
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
