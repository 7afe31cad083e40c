"""Match a complex contagion's intensity to a reference process.

The matched quantity is the expected maximum, over nodes, of the number of
infection events in a trace; the free infectivity of a template contagion
family is tuned by Robbins-Monro stochastic approximation until both
processes generate a similar amount of transition data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import ContagionFunction, DynamicsParams, all_infected, simulate


def infection_event_counts(states: np.ndarray) -> np.ndarray:
    """Number of susceptible -> infected transitions of each node."""
    states = np.asarray(states)
    return ((states[:-1] == 0) & (states[1:] == 1)).sum(axis=0).astype(np.int64)


def trace_statistic(states: np.ndarray) -> int:
    """Maximum infection-event count across nodes for one trace."""
    return int(infection_event_counts(states).max())


@dataclass
class CalibrationTarget:
    """Target and schedule for the stochastic approximation.

    The step size is a_k = a0 / k; the returned value is the Polyak average
    of the final `polyak_fraction` of iterates. `statistic` selects how the
    expectation is taken: "mean_of_max" averages per-trace maxima,
    "max_of_mean" takes the maximum of per-node mean counts.
    """

    reference_value: float
    tolerance: float = 1.0
    max_iterations: int = 200
    a0: float = 0.1
    polyak_fraction: float = 0.25
    statistic: str = "mean_of_max"

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.a0 <= 0:
            raise ValueError("a0 must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (0.0 < self.polyak_fraction <= 1.0):
            raise ValueError("polyak_fraction must be in (0, 1]")
        if self.statistic not in ("mean_of_max", "max_of_mean"):
            raise ValueError(f"unknown statistic mode {self.statistic!r}")


@dataclass
class CalibrationResult:
    beta: float
    converged: bool
    iterations: int
    reference_value: float
    betas: np.ndarray = field(repr=False)
    observations: np.ndarray = field(repr=False)


def robbins_monro(
    observe: Callable[[float], float],
    target: CalibrationTarget,
    beta0: float = 0.5,
) -> CalibrationResult:
    """Drive E[observe(beta)] to target.reference_value by damped updates.

    Iterates beta_{k+1} = clamp(beta_k + a_k (reference - observed), 0, 1).
    Convergence is declared when the mean observation over the Polyak
    window is within tolerance of the reference; otherwise the Polyak
    average of the betas is still returned, flagged as unconverged.
    """
    betas = np.empty(target.max_iterations, dtype=np.float64)
    obs = np.empty(target.max_iterations, dtype=np.float64)
    beta = float(np.clip(beta0, 0.0, 1.0))
    for k in range(1, target.max_iterations + 1):
        observed = float(observe(beta))
        betas[k - 1] = beta
        obs[k - 1] = observed
        step = (target.a0 / k) * (target.reference_value - observed)
        beta = float(np.clip(beta + step, 0.0, 1.0))
    window = max(1, int(np.ceil(target.polyak_fraction * target.max_iterations)))
    polyak = float(betas[-window:].mean())
    achieved = float(obs[-window:].mean())
    converged = abs(achieved - target.reference_value) <= target.tolerance
    return CalibrationResult(
        beta=polyak,
        converged=converged,
        iterations=target.max_iterations,
        reference_value=target.reference_value,
        betas=betas,
        observations=obs,
    )


def simulated_statistic(
    adj: np.ndarray,
    params: DynamicsParams,
    t_steps: int,
    rng: np.random.Generator,
    n_traces: int = 1,
    statistic: str = "mean_of_max",
    x0: np.ndarray | None = None,
) -> float:
    """Monte Carlo estimate of the infection-intensity statistic."""
    if x0 is None:
        x0 = all_infected(adj.shape[0])
    if statistic == "mean_of_max":
        vals = [
            trace_statistic(simulate(adj, params, x0, t_steps, rng))
            for _ in range(n_traces)
        ]
        return float(np.mean(vals))
    counts = [
        infection_event_counts(simulate(adj, params, x0, t_steps, rng))
        for _ in range(n_traces)
    ]
    return float(np.stack(counts).mean(axis=0).max())


def robbins_monro_match(
    adj: np.ndarray,
    gamma: float,
    reference: DynamicsParams,
    template: Callable[[float], ContagionFunction],
    t_steps: int,
    rng: np.random.Generator,
    n_reference: int = 50,
    max_iterations: int = 200,
    a0: float | None = None,
    tolerance: float | None = None,
    statistic: str = "mean_of_max",
    beta0: float = 0.5,
) -> CalibrationResult:
    """Tune the template family's infectivity to match the reference process.

    The reference value is the Monte Carlo mean of the statistic over
    n_reference simulations of `reference` on the same graph. Defaults:
    a0 scales inversely with the reference value so the first corrections
    stay within the clamp, and tolerance is two standard errors of the
    reference mean.
    """
    ref_rng, obs_rng = rng.spawn(2)
    x0 = all_infected(adj.shape[0])
    ref_counts = np.stack(
        [
            infection_event_counts(simulate(adj, reference, x0, t_steps, ref_rng))
            for _ in range(n_reference)
        ]
    )
    per_trace_max = ref_counts.max(axis=1).astype(np.float64)
    if statistic == "max_of_mean":
        reference_value = float(ref_counts.mean(axis=0).max())
    else:
        reference_value = float(per_trace_max.mean())
    se = (
        float(per_trace_max.std(ddof=1) / np.sqrt(n_reference))
        if n_reference > 1
        else 1.0
    )
    if tolerance is None:
        tolerance = max(2.0 * se, 1e-6)
    if a0 is None:
        a0 = 1.0 / max(reference_value, 1.0)
    target = CalibrationTarget(
        reference_value=reference_value,
        tolerance=tolerance,
        max_iterations=max_iterations,
        a0=a0,
        statistic=statistic,
    )

    def observe(beta: float) -> float:
        params = DynamicsParams(gamma=gamma, contagion=template(beta))
        return simulated_statistic(
            adj, params, t_steps, obs_rng, statistic=statistic, x0=x0
        )

    return robbins_monro(observe, target, beta0=beta0)
