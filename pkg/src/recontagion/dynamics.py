"""Contagion functions and the neighborhood-based SIS process.

State conventions: 0 = susceptible, 1 = infected. A trace is a (T+1, N)
0/1 matrix whose rows are the node states at times 0..T. Updates are
synchronous: every node draws its transition from the state at time t.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STATE_DTYPE = np.uint8


def _check_probability(value: float, name: str) -> float:
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must be in [0, 1], got {value}")
    return float(value)


def eval_simple(nu: int, beta: float) -> float:
    """Infection probability under independent per-neighbor exposures."""
    _check_probability(beta, "beta")
    if nu < 0:
        raise ValueError(f"nu must be >= 0, got {nu}")
    return 1.0 - (1.0 - beta) ** nu


def eval_threshold(nu: int, beta: float, tau: int) -> float:
    """Infection probability beta once nu reaches the threshold tau, else 0."""
    _check_probability(beta, "beta")
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    return beta if nu >= tau else 0.0


def eval_mixture(nu: int, beta: float, omega: float, tau: int = 2) -> float:
    """Convex combination of the simple and threshold infection rules."""
    _check_probability(omega, "omega")
    return (1.0 - omega) * eval_simple(nu, beta) + omega * eval_threshold(nu, beta, tau)


class ContagionFunction:
    """Maps an infected-neighbor count to an infection probability."""

    def probability(self, nu: int) -> float:
        raise NotImplementedError

    def table(self, n: int) -> np.ndarray:
        """Vector of infection probabilities at nu = 0..n-1."""
        return np.array([self.probability(nu) for nu in range(n)], dtype=np.float64)


@dataclass(frozen=True)
class SimpleContagion(ContagionFunction):
    beta: float

    def __post_init__(self):
        _check_probability(self.beta, "beta")

    def probability(self, nu: int) -> float:
        return eval_simple(nu, self.beta)

    def table(self, n: int) -> np.ndarray:
        return 1.0 - (1.0 - self.beta) ** np.arange(n, dtype=np.float64)


@dataclass(frozen=True)
class ThresholdContagion(ContagionFunction):
    beta: float
    tau: int = 2

    def __post_init__(self):
        _check_probability(self.beta, "beta")
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")

    def probability(self, nu: int) -> float:
        return eval_threshold(nu, self.beta, self.tau)

    def table(self, n: int) -> np.ndarray:
        return np.where(np.arange(n) >= self.tau, self.beta, 0.0)


@dataclass(frozen=True)
class MixtureContagion(ContagionFunction):
    beta: float
    omega: float
    tau: int = 2

    def __post_init__(self):
        _check_probability(self.beta, "beta")
        _check_probability(self.omega, "omega")
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")

    def probability(self, nu: int) -> float:
        return eval_mixture(nu, self.beta, self.omega, self.tau)


@dataclass(frozen=True)
class TabulatedContagion(ContagionFunction):
    """Nonparametric rule given directly as probabilities at nu = 0..len-1."""

    values: tuple = field(default=())

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        for v in vals:
            _check_probability(v, "tabulated value")
        object.__setattr__(self, "values", vals)

    def probability(self, nu: int) -> float:
        if nu >= len(self.values):
            raise ValueError(f"nu={nu} outside tabulated range {len(self.values)}")
        return self.values[nu]

    def table(self, n: int) -> np.ndarray:
        if n > len(self.values):
            raise ValueError(f"table of size {n} exceeds tabulated range {len(self.values)}")
        return np.array(self.values[:n], dtype=np.float64)


def contagion_from_spec(spec: dict) -> ContagionFunction:
    """Build a contagion function from a config dict, e.g. {"kind": "simple", "beta": 0.04}."""
    spec = dict(spec)
    kind = spec.pop("kind")
    spec.pop("name", None)
    spec.pop("calibrate", None)
    if kind == "simple":
        return SimpleContagion(**spec)
    if kind == "threshold":
        return ThresholdContagion(**spec)
    if kind == "mixture":
        return MixtureContagion(**spec)
    if kind == "tabulated":
        return TabulatedContagion(**spec)
    raise ValueError(f"unknown contagion kind {kind!r}")


@dataclass(frozen=True)
class DynamicsParams:
    gamma: float
    contagion: ContagionFunction

    def __post_init__(self):
        _check_probability(self.gamma, "gamma")


def infected_neighbor_counts(adj: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Per-node count of infected neighbors for one state vector."""
    x = np.asarray(x)
    if x.shape[0] != adj.shape[0]:
        raise ValueError(f"state length {x.shape[0]} != node count {adj.shape[0]}")
    return adj.astype(np.int64) @ x.astype(np.int64)


def _apply_transitions(
    adj_int: np.ndarray,
    x: np.ndarray,
    c_table: np.ndarray,
    gamma: float,
    draws: np.ndarray,
) -> np.ndarray:
    """One synchronous update given one uniform draw per node.

    Infected node i recovers iff draws[i] < gamma; susceptible node i is
    infected iff draws[i] < c_table[nu_i]. Deterministic given draws, so the
    result cannot depend on any node processing order. adj_int must be an
    integer-typed adjacency (callers cast once).
    """
    nu = adj_int @ x.astype(np.int64)
    infected = x.astype(bool)
    p_infect = c_table[nu]
    new_x = np.where(infected, draws >= gamma, draws < p_infect)
    return new_x.astype(STATE_DTYPE)


def step(
    adj: np.ndarray,
    x: np.ndarray,
    params: DynamicsParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Advance the state by one time step."""
    x = np.asarray(x)
    n = adj.shape[0]
    if x.shape[0] != n:
        raise ValueError(f"state length {x.shape[0]} != node count {n}")
    c_table = params.contagion.table(n)
    adj_int = np.asarray(adj).astype(np.int64)
    return _apply_transitions(adj_int, x, c_table, params.gamma, rng.random(n))


def simulate(
    adj: np.ndarray,
    params: DynamicsParams,
    x0: np.ndarray,
    t_steps: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Run the process for t_steps transitions; returns a (t_steps+1, N) trace.

    An all-susceptible absorbing state is recorded as-is for the remaining
    steps; there is no restart.
    """
    if t_steps < 1:
        raise ValueError(f"t_steps must be >= 1, got {t_steps}")
    adj = np.asarray(adj)
    n = adj.shape[0]
    x0 = np.asarray(x0).astype(STATE_DTYPE)
    if x0.shape != (n,):
        raise ValueError(f"x0 shape {x0.shape} incompatible with n={n}")
    c_table = params.contagion.table(n)
    trace = np.empty((t_steps + 1, n), dtype=STATE_DTYPE)
    trace[0] = x0
    x = x0
    adj_int = adj.astype(np.int64)
    for t in range(t_steps):
        x = _apply_transitions(adj_int, x, c_table, params.gamma, rng.random(n))
        trace[t + 1] = x
    return trace


def all_infected(n: int) -> np.ndarray:
    """Default initial condition: everyone infected, to avoid instant extinction."""
    return np.ones(n, dtype=STATE_DTYPE)


def validate_states(states: np.ndarray, n: int | None = None) -> np.ndarray:
    """Check trace invariants and return the matrix as uint8."""
    states = np.asarray(states)
    if states.ndim != 2:
        raise ValueError(f"state matrix must be 2-D, got shape {states.shape}")
    if not np.isin(states, (0, 1)).all():
        raise ValueError("state entries must be 0 or 1")
    if n is not None and states.shape[1] != n:
        raise ValueError(f"state matrix has {states.shape[1]} columns, expected {n}")
    return states.astype(STATE_DTYPE)


def is_extinct(states: np.ndarray) -> bool:
    """True when the trace ended in the all-susceptible absorbing state."""
    return not states[-1].any()
