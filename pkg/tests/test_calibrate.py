import numpy as np
import pytest

from recontagion.calibrate import (
    CalibrationTarget,
    infection_event_counts,
    robbins_monro,
    robbins_monro_match,
    simulated_statistic,
    trace_statistic,
)
from recontagion.dynamics import (
    DynamicsParams,
    SimpleContagion,
    ThresholdContagion,
    all_infected,
    simulate,
)
from recontagion.netgen import zkc


class TestTraceStatistic:
    def test_no_infections(self):
        x = np.zeros((10, 4), dtype=np.uint8)
        assert trace_statistic(x) == 0

    def test_single_infection(self):
        x = np.zeros((3, 2), dtype=np.uint8)
        x[1, 0] = 1
        assert trace_statistic(x) == 1

    def test_hand_built_counts(self):
        # Node 0 infected twice, node 1 never, node 2 once.
        x = np.array(
            [
                [0, 0, 0],
                [1, 0, 0],
                [0, 0, 1],
                [1, 0, 1],
                [1, 0, 1],
            ],
            dtype=np.uint8,
        )
        assert infection_event_counts(x).tolist() == [2, 0, 1]
        assert trace_statistic(x) == 2

    def test_initial_infection_not_counted(self):
        x = np.ones((5, 3), dtype=np.uint8)
        assert trace_statistic(x) == 0


class TestRobbinsMonro:
    def test_deterministic_surrogate_hits_target_exactly(self):
        # With f(beta) = beta and a0 = 1 the first update lands on the target.
        target = CalibrationTarget(reference_value=0.3, tolerance=1e-9, a0=1.0,
                                   max_iterations=50)
        result = robbins_monro(lambda beta: beta, target, beta0=0.9)
        assert result.beta == pytest.approx(0.3, abs=1e-12)
        assert result.converged

    def test_deterministic_surrogate_default_schedule(self):
        # a0 < 1 contracts the error like k**-a0, so expect slow convergence.
        target = CalibrationTarget(reference_value=0.6, tolerance=0.05,
                                   max_iterations=400, a0=0.5)
        result = robbins_monro(lambda beta: beta, target, beta0=0.1)
        assert result.beta == pytest.approx(0.6, abs=0.05)
        assert result.converged

    def test_iterates_stay_clamped(self):
        rng = np.random.default_rng(0)
        target = CalibrationTarget(reference_value=50.0, tolerance=100.0, a0=5.0,
                                   max_iterations=60)
        result = robbins_monro(lambda beta: 100 * beta + rng.normal(0, 5), target)
        assert (result.betas >= 0.0).all() and (result.betas <= 1.0).all()

    def test_zero_reference_drives_beta_to_zero(self):
        rng = np.random.default_rng(1)
        target = CalibrationTarget(reference_value=0.0, tolerance=0.5, a0=0.2,
                                   max_iterations=150)
        result = robbins_monro(lambda beta: 40 * beta + abs(rng.normal(0, 0.1)), target)
        assert result.beta < 0.05

    def test_unconverged_flag(self):
        target = CalibrationTarget(reference_value=1000.0, tolerance=1.0,
                                   max_iterations=10, a0=0.01)
        result = robbins_monro(lambda beta: beta, target)
        assert not result.converged

    def test_target_validation(self):
        with pytest.raises(ValueError):
            CalibrationTarget(reference_value=1.0, tolerance=0.0)
        with pytest.raises(ValueError):
            CalibrationTarget(reference_value=1.0, a0=-1.0)
        with pytest.raises(ValueError):
            CalibrationTarget(reference_value=1.0, statistic="median_of_max")


class TestStatisticMonotonicity:
    def test_threshold_statistic_nondecreasing_in_beta(self):
        adj = zkc()
        rng = np.random.default_rng(2)
        means = []
        for beta in (0.1, 0.3, 0.6, 0.9):
            params = DynamicsParams(gamma=0.1, contagion=ThresholdContagion(beta, tau=2))
            means.append(simulated_statistic(adj, params, 300, rng, n_traces=20))
        assert all(b >= a - 1.0 for a, b in zip(means, means[1:])), means


class TestRobbinsMonroMatch:
    def test_fixed_point_same_family(self):
        # Matching the simple family to itself recovers the reference beta.
        adj = zkc()
        reference = DynamicsParams(gamma=0.1, contagion=SimpleContagion(0.3))
        result = robbins_monro_match(
            adj,
            0.1,
            reference,
            lambda beta: SimpleContagion(beta),
            t_steps=400,
            rng=np.random.default_rng(3),
            n_reference=40,
            max_iterations=150,
        )
        assert result.beta == pytest.approx(0.3, abs=0.08)

    def test_zkc_threshold_match_holds_on_held_out_sims(self):
        adj = zkc()
        gamma = 0.1
        reference = DynamicsParams(gamma=gamma, contagion=SimpleContagion(0.04))
        t_steps = 500
        result = robbins_monro_match(
            adj,
            gamma,
            reference,
            lambda beta: ThresholdContagion(beta, tau=2),
            t_steps=t_steps,
            rng=np.random.default_rng(4),
            n_reference=60,
            max_iterations=200,
        )
        held_out = np.random.default_rng(5)
        matched = DynamicsParams(gamma=gamma, contagion=ThresholdContagion(result.beta, tau=2))
        n_eval = 60
        ref_vals = [
            trace_statistic(simulate(adj, reference, all_infected(34), t_steps, held_out))
            for _ in range(n_eval)
        ]
        got_vals = [
            trace_statistic(simulate(adj, matched, all_infected(34), t_steps, held_out))
            for _ in range(n_eval)
        ]
        diff = np.mean(got_vals) - np.mean(ref_vals)
        se = np.sqrt(np.var(ref_vals, ddof=1) / n_eval + np.var(got_vals, ddof=1) / n_eval)
        assert abs(diff) <= 2 * se, (np.mean(ref_vals), np.mean(got_vals), se)

    def test_max_of_mean_mode(self):
        adj = zkc()
        reference = DynamicsParams(gamma=0.1, contagion=SimpleContagion(0.05))
        result = robbins_monro_match(
            adj,
            0.1,
            reference,
            lambda beta: SimpleContagion(beta),
            t_steps=200,
            rng=np.random.default_rng(6),
            n_reference=20,
            max_iterations=60,
            statistic="max_of_mean",
        )
        assert 0.0 <= result.beta <= 1.0
