import math

import numpy as np
import pytest

from ossmax import (
    CoverageMultilinearObjective,
    OssObjective,
    StochasticObjective,
    make_coverage_instance,
    make_semimetric_instance,
    sample_stoch_gradient,
    verify_eta_local,
    verify_oss,
    verify_semimetric,
)

from helpers import coverage_expectation_brute, fd_gradient, fd_mixed_partial

VALUE_TOL = 1e-9


class TestSemiMetricConstruction:
    def test_coincident_points_give_linear_objective(self):
        obj = make_semimetric_instance([[0.0], [0.0], [0.0]], [1.0, 1.0, 1.0])
        assert np.allclose(obj.M, 0.0)
        x = np.array([0.2, 0.5, 0.9])
        assert obj.value(x) == pytest.approx(x.sum())
        # zero Hessian keeps the smoothness inequality true for every sigma
        assert verify_oss(obj, 0.0, trials=200, seed=1).passed

    def test_collinear_points_distance_matrix(self):
        obj = make_semimetric_instance([0.0, 1.0, 3.0], [0.0, 0.0, 0.0])
        expected = np.array([[0.0, 1.0, 3.0], [1.0, 0.0, 2.0], [3.0, 2.0, 0.0]])
        assert np.allclose(obj.M, expected)
        report = verify_semimetric(obj.M, 1.0)
        assert report.passed
        # the 0-2 distance is tight: 3 = 1 + 2
        assert report.worst_violation == pytest.approx(0.0, abs=1e-12)

    def test_corrupted_entry_fails_with_witness(self):
        M = np.array([[0.0, 1.0, 10.0], [1.0, 0.0, 2.0], [10.0, 2.0, 0.0]])
        report = verify_semimetric(M, 1.0)
        assert not report.passed
        i, j, k = report.witness
        assert M[i, j] > M[i, k] + M[k, j]
        assert report.worst_violation == pytest.approx(7.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            make_semimetric_instance([[0.0], [1.0]], [1.0, 2.0, 3.0])

    def test_gradient_and_quadratic_form_closed_forms(self):
        obj = make_semimetric_instance([0.0, 1.0, 3.0], [1.0, 2.0, 0.5])
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = rng.uniform(size=3)
            u = rng.uniform(size=3)
            assert np.allclose(obj.gradient(x), obj.M @ x + obj.b)
            assert obj.hessian_quadratic_form(x, u) == pytest.approx(u @ obj.M @ u)


class TestCoverageClosedForm:
    def test_single_coordinate_single_element(self):
        obj = CoverageMultilinearObjective([1.0], [[0]])
        assert obj.value([0.3]) == pytest.approx(0.3)
        assert np.allclose(obj.gradient([0.3]), [1.0])

    def test_two_coordinates_shared_element(self):
        obj = CoverageMultilinearObjective([1.0], [[0], [0]])
        x = np.array([0.4, 0.7])
        assert obj.value(x) == pytest.approx(1.0 - (1.0 - 0.4) * (1.0 - 0.7))
        assert obj.value([1.0, 1.0]) == pytest.approx(1.0)
        assert obj.hessian_quadratic_form([0.5, 0.5], [1.0, 1.0]) == pytest.approx(-2.0)
        assert fd_mixed_partial(lambda z: obj.value(z), x, 0, 1) == pytest.approx(-1.0, abs=1e-6)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_mixed_partials_nonpositive(self, seed):
        obj = make_coverage_instance(4, 6, density=0.5, seed=seed)
        rng = np.random.default_rng(seed + 100)
        for _ in range(20):
            x = rng.uniform(0.1, 0.9, size=4)
            for i in range(4):
                for j in range(i + 1, 4):
                    assert fd_mixed_partial(lambda z: obj.value(z), x, i, j) <= 1e-6

    @pytest.mark.parametrize("n,m,seed", [(2, 3, 5), (4, 5, 6), (6, 6, 7)])
    def test_matches_subset_expectation(self, n, m, seed):
        obj = make_coverage_instance(n, m, density=0.5, seed=seed)
        rng = np.random.default_rng(seed)
        for _ in range(10):
            x = rng.uniform(size=n)
            brute = coverage_expectation_brute(obj.weights, obj.covers, x)
            assert obj.value(x) == pytest.approx(brute, abs=1e-9)

    def test_every_element_covered(self):
        for seed in range(10):
            obj = make_coverage_instance(3, 8, density=0.15, seed=seed)
            assert obj.incidence.any(axis=1).all()

    def test_generator_validation(self):
        with pytest.raises(ValueError):
            make_coverage_instance(0, 3)
        with pytest.raises(ValueError):
            make_coverage_instance(3, 3, density=0.0)
        with pytest.raises(ValueError):
            make_coverage_instance(3, 3, weight_range=(2.0, 1.0))


@pytest.fixture(scope="module")
def shipped_objectives():
    return [
        make_coverage_instance(4, 6, density=0.5, seed=21),
        make_coverage_instance(6, 8, density=0.35, seed=22),
        make_semimetric_instance([0.0, 1.0, 3.0], [1.0, 1.0, 1.0]),
        make_semimetric_instance(np.random.default_rng(23).random((5, 2)), np.full(5, 0.5)),
    ]


class TestSharedInvariants:
    def test_normalized(self, shipped_objectives):
        for obj in shipped_objectives:
            assert abs(obj.value(np.zeros(obj.dimension))) <= VALUE_TOL

    def test_monotone_on_ordered_pairs(self, shipped_objectives):
        rng = np.random.default_rng(31)
        for obj in shipped_objectives:
            n = obj.dimension
            for _ in range(1000):
                x = rng.uniform(size=n)
                y = np.minimum(x + rng.uniform(size=n) * (1.0 - x), 1.0)
                assert obj.value(x) <= obj.value(y) + VALUE_TOL

    def test_gradient_nonnegative(self, shipped_objectives):
        rng = np.random.default_rng(32)
        for obj in shipped_objectives:
            for _ in range(100):
                x = rng.uniform(size=obj.dimension)
                assert obj.gradient(x).min() >= -VALUE_TOL

    def test_gradient_matches_finite_differences(self, shipped_objectives):
        rng = np.random.default_rng(33)
        for obj in shipped_objectives:
            for _ in range(10):
                x = rng.uniform(0.1, 0.9, size=obj.dimension)
                g = obj.gradient(x)
                g_fd = fd_gradient(lambda z: obj.value(z), x)
                assert np.allclose(g, g_fd, atol=1e-4, rtol=1e-4)

    def test_counters_tally_calls(self):
        obj = make_coverage_instance(3, 4, seed=2)
        obj.reset_counters()
        x = np.full(3, 0.5)
        for _ in range(5):
            obj.value(x)
        for _ in range(3):
            obj.gradient(x)
        assert obj.value_calls == 5
        assert obj.gradient_calls == 3
        obj.value_many(np.tile(x, (7, 1)))
        assert obj.value_calls == 12

    def test_value_many_matches_value(self, shipped_objectives):
        rng = np.random.default_rng(34)
        for obj in shipped_objectives:
            X = rng.uniform(size=(50, obj.dimension))
            batch = obj.value_many(X)
            single = np.array([obj.value(row) for row in X])
            assert np.allclose(batch, single, atol=1e-12)


class TestVerifyOss:
    def test_coverage_passes_sigma_zero(self):
        obj = make_coverage_instance(5, 7, density=0.4, seed=41)
        assert verify_oss(obj, 0.0, trials=500, seed=1).passed

    def test_semimetric_passes_sigma_one(self):
        obj = make_semimetric_instance([0.0, 1.0, 3.0], [0.0, 0.0, 0.0])
        report = verify_oss(obj, 1.0, trials=1000, seed=2)
        assert report.passed

    def test_quartic_fails_sigma_zero(self):
        # F = (sum x)^4 / n^4 is strictly convex along ones; sigma=0 bounds the
        # Hessian form by zero, so every sample is a violation
        n = 3

        def value(x):
            return (x.sum() / n) ** 4

        def gradient(x):
            return np.full(n, 4.0 * x.sum() ** 3 / n**4)

        def quad(x, u):
            return 12.0 * x.sum() ** 2 * u.sum() ** 2 / n**4

        obj = OssObjective(n, value, gradient, quad, sigma_claimed=0.0)
        report = verify_oss(obj, 0.0, trials=50, seed=3)
        assert not report.passed
        assert report.worst_violation > 0.0
        x, u = report.witness
        assert quad(x, u) > 0.0

    def test_fd_hessian_fallback(self):
        # same quartic without an exact quadratic form: finite differences
        n = 2
        obj = OssObjective(
            n,
            lambda x: (x.sum() / n) ** 4,
            lambda x: np.full(n, 4.0 * x.sum() ** 3 / n**4),
        )
        x = np.full(n, 0.5)
        u = np.ones(n)
        exact = 12.0 * x.sum() ** 2 * u.sum() ** 2 / n**4
        assert obj.hessian_quadratic_form(x, u) == pytest.approx(exact, rel=1e-4)

    def test_trials_domain(self):
        obj = make_coverage_instance(2, 2, seed=1)
        with pytest.raises(ValueError):
            verify_oss(obj, 0.0, trials=0)


class TestVerifyEtaLocal:
    def test_linear_passes_any_eta(self):
        obj = make_semimetric_instance([[0.0], [0.0], [0.0]], [1.0, 2.0, 0.5])
        for eta in (0.0, 1.0, 10.0):
            assert verify_eta_local(obj, eta, trials=300, seed=4).passed

    def test_quadratic_passes_any_eta(self):
        # gradient Mx + b is nondecreasing along nonnegative directions
        obj = make_semimetric_instance([0.0, 1.0, 3.0], [1.0, 1.0, 1.0])
        assert verify_eta_local(obj, 0.0, trials=500, seed=5).passed

    def test_coverage_fails_eta_zero(self):
        obj = CoverageMultilinearObjective([1.0], [[0], [0]])
        report = verify_eta_local(obj, 0.0, trials=1000, seed=6)
        assert not report.passed
        x, u, eps = report.witness
        assert u @ obj.gradient(x + eps * u) < u @ obj.gradient(x)


class TestStochasticObjective:
    def test_zero_noise_is_exact(self):
        obj = make_coverage_instance(4, 5, seed=51)
        sobj = StochasticObjective(obj, theta=0.0, seed=0)
        x = np.full(4, 0.4)
        assert np.allclose(sample_stoch_gradient(sobj, x), obj.gradient(x))
        assert sobj.empirical_value(x, 16) == pytest.approx(obj.value(x))

    def test_seeded_reproducibility(self):
        obj = make_coverage_instance(4, 5, seed=51)
        x = np.full(4, 0.4)
        a = StochasticObjective(obj, theta=0.5, seed=123)
        b = StochasticObjective(obj, theta=0.5, seed=123)
        for _ in range(5):
            assert np.allclose(a.sample_gradient(x), b.sample_gradient(x))
        assert a.empirical_value(x, 8) == b.empirical_value(x, 8)

    def test_unbiased_mean_within_three_standard_errors(self):
        obj = make_coverage_instance(4, 5, seed=51)
        theta = 0.5
        sobj = StochasticObjective(obj, theta=theta, seed=7)
        x = np.full(4, 0.4)
        g = obj.gradient(x)
        samples = np.stack([sobj.sample_gradient(x) for _ in range(10_000)])
        per_coord_sd = theta / math.sqrt(4)
        standard_error = per_coord_sd / math.sqrt(10_000)
        assert np.all(np.abs(samples.mean(axis=0) - g) <= 3.0 * standard_error)

    def test_per_sample_variance_bounded(self):
        obj = make_coverage_instance(4, 5, seed=51)
        theta = 0.5
        sobj = StochasticObjective(obj, theta=theta, seed=8)
        x = np.full(4, 0.4)
        g = obj.gradient(x)
        sq = [float(np.sum((sobj.sample_gradient(x) - g) ** 2)) for _ in range(10_000)]
        assert np.mean(sq) <= theta**2 * 1.05

    def test_counters(self):
        obj = make_coverage_instance(3, 4, seed=52)
        sobj = StochasticObjective(obj, theta=0.1, seed=9)
        x = np.full(3, 0.2)
        for _ in range(4):
            sobj.sample_gradient(x)
        for _ in range(3):
            sobj.empirical_value(x, 10)
        assert sobj.gradient_sample_calls == 4
        assert sobj.value_batch_calls == 3

    def test_spawned_streams_differ(self):
        obj = make_coverage_instance(3, 4, seed=52)
        parent = StochasticObjective(obj, theta=0.5, seed=10)
        x = np.full(3, 0.2)
        child_a = parent.spawn()
        child_b = parent.spawn()
        assert not np.allclose(child_a.sample_gradient(x), child_b.sample_gradient(x))

    def test_gaussian_noise_model(self):
        obj = make_coverage_instance(3, 4, seed=52)
        sobj = StochasticObjective(obj, theta=0.5, seed=11, noise="gaussian")
        x = np.full(3, 0.2)
        g = obj.gradient(x)
        samples = np.stack([sobj.sample_gradient(x) for _ in range(4000)])
        assert np.allclose(samples.mean(axis=0), g, atol=0.05)

    def test_validation(self):
        obj = make_coverage_instance(3, 4, seed=52)
        with pytest.raises(ValueError):
            StochasticObjective(obj, theta=-0.1)
        with pytest.raises(ValueError):
            StochasticObjective(obj, theta=0.1, noise="cauchy")
