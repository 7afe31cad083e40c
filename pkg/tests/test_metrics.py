import numpy as np
import pytest
from scipy import stats as sp_stats

from recontagion.graph import complete_graph, degrees, from_edges
from recontagion.metrics import (
    PowerIterationError,
    auroc,
    beta_hdpi,
    density_quality,
    empirical_hdpi,
    kcore,
    nodal_recovery,
    nodal_recovery_by_coreness,
    r0,
    sample_densities,
    spectral_radius,
)
from recontagion.netgen import erdos_renyi, zkc


def cycle_graph(n):
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(n):
    return from_edges(n, [(0, k) for k in range(1, n)])


class TestAuroc:
    def test_perfect_predictor(self):
        a = zkc()
        assert auroc(a.astype(float), a).auroc == pytest.approx(1.0)

    def test_inverted_predictor(self):
        a = zkc()
        q = 1.0 - a.astype(float)
        np.fill_diagonal(q, 0.0)
        assert auroc(q, a).auroc == pytest.approx(0.0)

    def test_constant_predictor_is_half(self):
        a = zkc()
        q = np.full((34, 34), 0.3)
        np.fill_diagonal(q, 0.0)
        assert auroc(q, a).auroc == pytest.approx(0.5)

    def test_counts(self):
        result = auroc(zkc().astype(float), zkc())
        assert result.n_positive == 78
        assert result.n_negative == 34 * 33 // 2 - 78

    def test_degenerate_labels_rejected(self):
        with pytest.raises(ValueError):
            auroc(np.zeros((4, 4)), np.zeros((4, 4)))
        with pytest.raises(ValueError):
            auroc(np.zeros((4, 4)), complete_graph(4))

    def test_invariant_under_increasing_transform(self):
        rng = np.random.default_rng(0)
        a = erdos_renyi(20, 0.3, rng)
        q = rng.random((20, 20))
        q = (q + q.T) / 2
        np.fill_diagonal(q, 0)
        base = auroc(q, a).auroc
        assert auroc(q**3, a).auroc == pytest.approx(base)
        assert auroc(np.exp(4 * q), a).auroc == pytest.approx(base)


class TestDensityQuality:
    def test_exact_samples(self):
        assert density_quality([0.3, 0.3, 0.3], 0.3) == pytest.approx(1.0)

    def test_hand_value(self):
        assert density_quality([0.0, 1.0], 0.5) == pytest.approx(0.5)

    def test_sample_densities_from_matrices(self):
        rng = np.random.default_rng(1)
        samples = np.stack([erdos_renyi(10, 0.4, rng) for _ in range(6)])
        dens = sample_densities(samples)
        for k in range(6):
            assert dens[k] == pytest.approx(np.triu(samples[k], 1).sum() / 45)

    def test_never_exceeds_one(self):
        rng = np.random.default_rng(2)
        vals = rng.random(50)
        assert density_quality(vals, 0.5) <= 1.0


class TestNodalRecovery:
    def test_perfect_samples(self):
        a = zkc()
        phi = nodal_recovery(a.astype(float), a)
        assert phi == pytest.approx(np.ones(34))

    def test_complement_is_worst(self):
        a = zkc()
        q = 1.0 - a.astype(float)
        np.fill_diagonal(q, 0.0)
        phi = nodal_recovery(q, a)
        assert phi == pytest.approx(np.full(34, 1.0 - 33 / 34))

    def test_zkc_coreness_classes(self):
        a = zkc()
        by_class = nodal_recovery_by_coreness(a.astype(float), a)
        assert sorted(by_class) == [1, 2, 3, 4]
        assert all(v == pytest.approx(1.0) for v in by_class.values())


class TestKcore:
    def test_cycle_all_two(self):
        assert (kcore(cycle_graph(8)) == 2).all()

    def test_star_all_one(self):
        assert (kcore(star_graph(7)) == 1).all()

    def test_zkc_max_four_and_class_sizes(self):
        core = kcore(zkc())
        assert core.max() == 4
        sizes = {k: int((core == k).sum()) for k in (1, 2, 3, 4)}
        assert sizes == {1: 1, 2: 11, 3: 12, 4: 10}

    def test_coreness_bounded_by_degree(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            adj = erdos_renyi(25, 0.2, rng)
            assert (kcore(adj) <= degrees(adj)).all()

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(4)
        adj = erdos_renyi(15, 0.3, rng)
        perm = rng.permutation(15)
        core = kcore(adj)
        core_p = kcore(adj[np.ix_(perm, perm)])
        assert np.array_equal(core_p, core[perm])

    def test_isolated_node(self):
        adj = np.zeros((3, 3), dtype=np.uint8)
        adj[0, 1] = adj[1, 0] = 1
        assert kcore(adj).tolist() == [1, 1, 0]


class TestSpectralRadius:
    def test_complete_graph(self):
        assert spectral_radius(complete_graph(9)) == pytest.approx(8.0, abs=1e-8)

    def test_cycle(self):
        assert spectral_radius(cycle_graph(12)) == pytest.approx(2.0, abs=1e-8)

    def test_empty(self):
        assert spectral_radius(np.zeros((5, 5))) == pytest.approx(0.0, abs=1e-12)

    def test_matches_dense_eigensolver(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            adj = erdos_renyi(8, rng.uniform(0.2, 0.9), rng)
            want = np.abs(np.linalg.eigvalsh(adj.astype(float))).max()
            assert spectral_radius(adj) == pytest.approx(want, abs=1e-8)

    def test_bounds(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            adj = erdos_renyi(20, 0.3, rng)
            deg = degrees(adj)
            sigma = spectral_radius(adj)
            assert deg.mean() - 1e-9 <= sigma <= deg.max() + 1e-9

    def test_nonconvergence_diagnostics(self):
        path = from_edges(3, [(0, 1), (1, 2)])
        with pytest.raises(PowerIterationError) as err:
            spectral_radius(path, tol=1e-15, max_iter=1)
        assert err.value.iterations == 1
        assert np.isfinite(err.value.estimate)


class TestR0:
    def test_formula(self):
        adj = complete_graph(6)
        assert r0(0.2, adj, 0.1) == pytest.approx(0.2 * 5.0 / 0.1)

    def test_rejects_zero_gamma(self):
        with pytest.raises(ValueError):
            r0(0.2, complete_graph(3), 0.0)


class TestHdpi:
    def test_symmetric_beta(self):
        lo, hi = beta_hdpi(5.0, 5.0, mass=0.5)
        assert lo == pytest.approx(1.0 - hi, abs=2e-3)
        covered = sp_stats.beta.cdf(hi, 5, 5) - sp_stats.beta.cdf(lo, 5, 5)
        assert covered == pytest.approx(0.5, abs=2e-3)

    def test_skewed_beta_hugs_boundary(self):
        lo, hi = beta_hdpi(50.0, 1.0, mass=0.5)
        assert hi == pytest.approx(1.0, abs=1e-3)
        assert lo > 0.9

    def test_no_wider_than_central_interval(self):
        for a, b in ((3, 7), (2, 2), (20, 5)):
            lo, hi = beta_hdpi(a, b, mass=0.5)
            clo, chi = sp_stats.beta.ppf([0.25, 0.75], a, b)
            assert hi - lo <= (chi - clo) + 1e-3

    def test_empirical_hand_case(self):
        lo, hi = empirical_hdpi([0.0, 0.1, 0.2, 0.9], mass=0.5)
        assert (lo, hi) == (0.0, 0.1)

    def test_empirical_full_mass(self):
        lo, hi = empirical_hdpi([3.0, 1.0, 2.0], mass=1.0)
        assert (lo, hi) == (1.0, 3.0)
