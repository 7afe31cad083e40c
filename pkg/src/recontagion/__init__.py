"""Network and contagion-rule reconstruction from binary state time series."""

from .dynamics import (
    ContagionFunction,
    DynamicsParams,
    MixtureContagion,
    SimpleContagion,
    TabulatedContagion,
    ThresholdContagion,
    eval_mixture,
    eval_simple,
    eval_threshold,
    infected_neighbor_counts,
    simulate,
    step,
)
from .inference import (
    BetaParams,
    Hyperparameters,
    McmcConfig,
    McmcResult,
    SufficientStats,
    contagion_posterior,
    edge_flip_mcmc,
    edge_probability_matrix,
    gamma_posterior,
    incremental_flip_delta,
    log_marginal_posterior,
    rho_posterior,
    sufficient_statistics,
)
from .netgen import (
    clustered,
    erdos_renyi,
    generate_network,
    powerlaw_cm,
    sbm_two_block,
    small_world,
    zkc,
)
from .metrics import (
    auroc,
    beta_hdpi,
    density_quality,
    empirical_hdpi,
    kcore,
    nodal_recovery,
    nodal_recovery_by_coreness,
    r0,
    spectral_radius,
)
from .calibrate import robbins_monro, robbins_monro_match, trace_statistic
from .experiments import ExperimentConfig, derive_rng, run_cell, run_grid

__version__ = "0.1.0"
