import numpy as np
import pytest

from gibbsgap.errors import ValidationError
from gibbsgap.measure import equicorrelated_binary
from gibbsgap.operators import DeterministicScan, RandomScan, l2_norm_centered, spectral_radius_centered
from gibbsgap.sampler import (
    asymptotic_variance_estimate,
    clt_variance_bound,
    empirical_tail,
    hoeffding_bound,
    point_mass_density_norm,
    replica_seeds,
    run_chain,
    scan_operator,
)


class TestRunChain:
    def test_deterministic_given_seed(self, eps_pair):
        a = run_chain(eps_pair, RandomScan.uniform(2), 50, seed=7)
        b = run_chain(eps_pair, RandomScan.uniform(2), 50, seed=7)
        np.testing.assert_array_equal(a.states, b.states)
        assert a.init == b.init

    def test_seeds_differ(self, eps_pair):
        a = run_chain(eps_pair, RandomScan.uniform(2), 200, seed=1)
        b = run_chain(eps_pair, RandomScan.uniform(2), 200, seed=2)
        assert not np.array_equal(a.states, b.states)

    def test_fixed_init(self, eps_pair):
        trace = run_chain(eps_pair, DeterministicScan((1, 2)), 10, seed=0, init=3)
        assert trace.init == 3

    def test_init_out_of_range(self, eps_pair):
        with pytest.raises(ValidationError):
            run_chain(eps_pair, DeterministicScan((1, 2)), 10, seed=0, init=4)

    def test_rsg_moves_one_coordinate_per_step(self, eps_pair):
        trace = run_chain(eps_pair, RandomScan.uniform(2), 500, seed=3, init=0)
        prev = trace.init
        for s in trace.states:
            a = eps_pair.space.multi_index(int(prev))
            b = eps_pair.space.multi_index(int(s))
            assert sum(x != y for x, y in zip(a, b)) <= 1
            prev = s

    def test_intra_sweep_recording(self, eps_pair):
        trace = run_chain(eps_pair, DeterministicScan((1, 2)), 6, seed=5, init=0,
                          record_intra_sweep=True)
        assert len(trace) == 6
        prev = trace.init
        for t, s in enumerate(trace.states):
            a = eps_pair.space.multi_index(int(prev))
            b = eps_pair.space.multi_index(int(s))
            changed = [j for j in range(2) if a[j] != b[j]]
            # step t resamples coordinate (t mod 2) + 1 only
            assert all(j == t % 2 for j in changed)
            prev = s

    def test_stationary_marginals(self, eps_pair):
        trace = run_chain(eps_pair, RandomScan.uniform(2), 40_000, seed=11)
        freq = np.bincount(trace.states, minlength=4) / len(trace)
        np.testing.assert_allclose(freq, eps_pair.pmf, atol=0.02)


class TestCltVarianceBound:
    def test_worked_value(self, eps_pair):
        f = np.array([0.0, 0.0, 1.0, 1.0])  # Var_pi = 0.25
        assert clt_variance_bound(0.5, f, eps_pair) == pytest.approx(0.75)

    def test_rho_validation(self, eps_pair):
        with pytest.raises(ValidationError):
            clt_variance_bound(1.0, np.zeros(4), eps_pair)

    def test_estimate_below_bound(self, eps_pair):
        scan = RandomScan.uniform(2)
        op = scan_operator(eps_pair, scan)
        rho = l2_norm_centered(op)
        f = np.array([0.0, 0.0, 1.0, 1.0])
        trace = run_chain(eps_pair, scan, 100_000, seed=42)
        est, se = asymptotic_variance_estimate(trace, f)
        assert est <= clt_variance_bound(rho, f, eps_pair) + 3.0 * se

    def test_estimator_iid_sanity(self, uniform_2x2):
        # an iid-like fast-mixing chain: asymptotic variance near Var_pi
        scan = DeterministicScan((1, 2))
        f = np.array([0.0, 1.0, 0.0, 1.0])  # depends on the freshly drawn coordinate
        trace = run_chain(uniform_2x2, scan, 50_000, seed=9)
        est, se = asymptotic_variance_estimate(trace, f)
        assert est == pytest.approx(0.25, abs=10.0 * se + 0.02)

    def test_estimator_validation(self, eps_pair):
        trace = run_chain(eps_pair, RandomScan.uniform(2), 50, seed=0)
        with pytest.raises(ValidationError):
            asymptotic_variance_estimate(trace, np.zeros(4), batch_count=5)
        with pytest.raises(ValidationError):
            asymptotic_variance_estimate(trace, np.zeros(4), batch_count=10)


class TestHoeffding:
    def test_worked_value(self):
        expected = float(np.exp(-10.0 / 3.0))
        assert hoeffding_bound(0.5, 1000, 0.1) == pytest.approx(expected, rel=1e-12)

    def test_density_norm_scales(self):
        assert hoeffding_bound(0.5, 100, 0.1, 2.0) == pytest.approx(
            2.0 * hoeffding_bound(0.5, 100, 0.1), rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValidationError):
            hoeffding_bound(1.0, 100, 0.1)
        with pytest.raises(ValidationError):
            hoeffding_bound(0.5, 100, 0.0)
        with pytest.raises(ValidationError):
            hoeffding_bound(0.5, 100, 0.1, 0.5)

    def test_point_mass_density_norm(self, eps_pair):
        assert point_mass_density_norm(eps_pair, 0) == pytest.approx(1.0 / np.sqrt(0.375))


class TestEmpiricalTail:
    def test_rsg_tail_respects_bound(self, eps_pair):
        f = np.array([0.0, 0.0, 1.0, 1.0])
        check = empirical_tail(eps_pair, RandomScan.uniform(2), f,
                               n=200, eps=0.2, replicas=4000, seed=0)
        assert check.passed
        assert 0.0 <= check.frequency <= 1.0

    def test_dsg_tail_respects_bound(self, eps_pair):
        f = np.array([0.0, 0.0, 1.0, 1.0])
        check = empirical_tail(eps_pair, DeterministicScan((1, 2)), f,
                               n=100, eps=0.2, replicas=4000, seed=0)
        assert check.passed

    def test_rejects_unbounded_f(self, eps_pair):
        with pytest.raises(ValidationError):
            empirical_tail(eps_pair, RandomScan.uniform(2), np.array([0.0, 0.0, 1.0, 2.0]),
                           n=10, eps=0.1, replicas=10, seed=0)

    def test_rejects_impossible_threshold(self, eps_pair):
        f = np.array([0.0, 0.0, 1.0, 1.0])
        with pytest.raises(ValidationError):
            empirical_tail(eps_pair, RandomScan.uniform(2), f,
                           n=10, eps=0.9, replicas=10, seed=0)

    def test_deterministic(self, eps_pair):
        f = np.array([0.0, 0.0, 1.0, 1.0])
        a = empirical_tail(eps_pair, RandomScan.uniform(2), f, n=50, eps=0.2,
                           replicas=500, seed=4)
        b = empirical_tail(eps_pair, RandomScan.uniform(2), f, n=50, eps=0.2,
                           replicas=500, seed=4)
        assert a.frequency == b.frequency


class TestReplicaSeeds:
    def test_spawn_count_and_determinism(self):
        a = replica_seeds(123, 5)
        b = replica_seeds(123, 5)
        assert len(a) == 5
        for x, y in zip(a, b):
            assert x.generate_state(4).tolist() == y.generate_state(4).tolist()

    def test_streams_differ(self):
        seeds = replica_seeds(0, 3)
        states = [tuple(s.generate_state(4).tolist()) for s in seeds]
        assert len(set(states)) == 3
