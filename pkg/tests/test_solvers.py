import math

import numpy as np
import pytest
from scipy.optimize import brentq

from moddenoise import (
    FunctionSpec,
    ModDenoiseDegeneracyError,
    ModDenoiseDomainError,
    ModDenoiseParameterError,
    ModDenoiseValidationError,
    NoiseModel,
    SolverMethod,
    TorusSignal,
    add_modulo_noise,
    build_custom_graph,
    build_graph,
    denoise,
    estimate,
    laplacian,
    lift_to_torus,
    make_generator,
    mse,
    project_to_torus,
    sample_function,
    solve_trs,
    solve_ucqp,
    spectral_decomposition,
)
from moddenoise.bounds import gamma_rule
from moddenoise.models import BoundQuery
from moddenoise.solvers import trs_objective, trs_secular


def _random_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 200))
    edges = {(int(rng.integers(1, j)), j) for j in range(2, n + 1)}
    for _ in range(n // 2):
        i, j = sorted(int(v) for v in rng.choice(np.arange(1, n + 1), size=2, replace=False))
        edges.add((i, j))
    graph = build_custom_graph(n, sorted(edges))
    z = TorusSignal(values=np.exp(2j * np.pi * rng.random(n)), on_torus=True)
    gamma = float(10 ** rng.uniform(-2, 2))
    return graph, z, gamma


INSTANCES = [_random_instance(seed) for seed in range(50)]


class TestSolveUcqp:
    def test_zero_gamma_returns_input(self):
        spectrum = spectral_decomposition(build_graph("path", 4))
        z = np.array([1, 1j, -1, -1j])
        np.testing.assert_array_equal(solve_ucqp(z, spectrum, 0.0).g_hat, z)

    def test_single_edge(self):
        spectrum = spectral_decomposition(build_graph("path", 2))
        solution = solve_ucqp(np.array([1.0, -1.0]), spectrum, 1.0)
        np.testing.assert_allclose(solution.g_hat, [1 / 3, -1 / 3], atol=1e-14)

    def test_constant_signal_unchanged(self):
        spectrum = spectral_decomposition(build_graph("star", 6))
        z = np.full(6, np.exp(0.3j))
        np.testing.assert_allclose(solve_ucqp(z, spectrum, 17.0).g_hat, z, atol=1e-12)

    def test_negative_gamma(self):
        spectrum = spectral_decomposition(build_graph("path", 2))
        with pytest.raises(ModDenoiseParameterError) as exc_info:
            solve_ucqp(np.ones(2), spectrum, -1.0)
        assert "gamma must be >= 0" in str(exc_info.value)

    def test_length_mismatch(self):
        spectrum = spectral_decomposition(build_graph("path", 3))
        with pytest.raises(ModDenoiseValidationError) as exc_info:
            solve_ucqp(np.ones(2), spectrum, 1.0)
        assert "n=3" in str(exc_info.value)

    @pytest.mark.parametrize("graph,z,gamma", INSTANCES[:25])
    def test_spectral_matches_direct(self, graph, z, gamma):
        spectrum = spectral_decomposition(graph)
        spectral = solve_ucqp(z, spectrum, gamma, backend="spectral")
        direct = solve_ucqp(z, spectrum, gamma, backend="direct", graph=graph)
        scale = np.linalg.norm(direct.g_hat)
        assert np.linalg.norm(spectral.g_hat - direct.g_hat) <= 1e-9 * scale
        system = np.eye(graph.n) + gamma * laplacian(graph)
        residual = np.linalg.norm(system @ spectral.g_hat - z.values) / np.linalg.norm(z.values)
        assert residual <= 1e-10
        assert spectral.residual <= 1e-10


class TestTrsSecular:
    def test_zero_gamma(self):
        spectrum = spectral_decomposition(build_graph("path", 5))
        z = lift_to_torus(np.linspace(0, 1, 5))
        for mu in (0.5, 1.0, 2.0):
            assert trs_secular(mu, z, spectrum, 0.0) == pytest.approx(4 * 5 / mu**2)

    def test_hand_expansion(self):
        spectrum = spectral_decomposition(build_graph("path", 2))
        assert trs_secular(1.0, np.array([1, 1j]), spectrum, 0.25) == pytest.approx(5.0)

    def test_matches_dense_inverse(self):
        graph, z, gamma = INSTANCES[0]
        spectrum = spectral_decomposition(graph)
        mu = 0.7
        g = 2 * np.linalg.solve(2 * gamma * laplacian(graph) + mu * np.eye(graph.n), z.values)
        assert trs_secular(mu, z, spectrum, gamma) == pytest.approx(np.vdot(g, g).real, rel=1e-10)

    def test_non_positive_mu(self):
        spectrum = spectral_decomposition(build_graph("path", 2))
        with pytest.raises(ModDenoiseDomainError) as exc_info:
            trs_secular(0.0, np.ones(2), spectrum, 1.0)
        assert "mu must be > 0" in str(exc_info.value)


class TestSolveTrs:
    def test_zero_gamma(self):
        spectrum = spectral_decomposition(build_graph("path", 6))
        z = lift_to_torus(np.linspace(0, 2, 6))
        solution = solve_trs(z, spectrum, 0.0)
        assert solution.mu_star == pytest.approx(2.0, abs=1e-10)
        np.testing.assert_allclose(solution.g_hat, z.values, atol=1e-10)

    def test_single_edge_root(self):
        spectrum = spectral_decomposition(build_graph("path", 2))
        z = TorusSignal.from_values([1, 1j])
        solution = solve_trs(z, spectrum, 0.25)
        oracle = brentq(lambda mu: 4 * (1 / mu**2 + 1 / (1 + mu) ** 2) - 2, 1e-6, 2, xtol=1e-15)
        assert solution.mu_star == pytest.approx(oracle, abs=1e-10)
        assert solution.kkt_residual <= 1e-8

    def test_orthogonal_to_null_space(self):
        spectrum = spectral_decomposition(build_graph("path", 2))
        with pytest.raises(ModDenoiseDegeneracyError) as exc_info:
            solve_trs(TorusSignal.from_values([1, -1]), spectrum, 1.0)
        assert "orthogonal" in str(exc_info.value)
        assert exc_info.value.projection == 0.0

    def test_bad_tolerance(self):
        spectrum = spectral_decomposition(build_graph("path", 2))
        with pytest.raises(ModDenoiseParameterError) as exc_info:
            solve_trs(np.ones(2), spectrum, 1.0, tol=0.0)
        assert "tol must be > 0" in str(exc_info.value)

    @pytest.mark.parametrize("graph,z,gamma", INSTANCES)
    def test_random_instances(self, graph, z, gamma):
        spectrum = spectral_decomposition(graph)
        solution = solve_trs(z, spectrum, gamma)
        n = graph.n
        assert 0 < solution.mu_star <= 2
        assert abs(np.vdot(solution.g_hat, solution.g_hat).real - n) / n <= 1e-10
        assert solution.kkt_residual <= 1e-8

        matrix = 2 * gamma * laplacian(graph)

        def sphere_gap(mu):
            g = 2 * np.linalg.solve(matrix + mu * np.eye(n), z.values)
            return np.vdot(g, g).real - n

        grid = np.linspace(1e-3, 2.0, 60)
        gaps = np.array([sphere_gap(mu) for mu in grid])
        sign_change = int(np.argmax(gaps <= 0))
        oracle = brentq(sphere_gap, grid[sign_change - 1], grid[sign_change], xtol=1e-14)
        assert solution.mu_star == pytest.approx(oracle, abs=1e-8)

    def test_minimizes_objective_on_sphere(self):
        graph, z, gamma = INSTANCES[3]
        spectrum = spectral_decomposition(graph)
        solution = solve_trs(z, spectrum, gamma)
        best = trs_objective(solution.g_hat, z, spectrum, gamma)
        rng = np.random.default_rng(0)
        for _ in range(20):
            g = solution.g_hat + 0.05 * (rng.standard_normal(graph.n) + 1j * rng.standard_normal(graph.n))
            g *= math.sqrt(graph.n) / np.linalg.norm(g)
            assert trs_objective(g, z, spectrum, gamma) >= best - 1e-9


class TestProjectToTorus:
    def test_zero_maps_to_one(self):
        np.testing.assert_array_equal(project_to_torus(np.array([0.0])).values, [1.0])

    def test_imaginary(self):
        np.testing.assert_allclose(project_to_torus(np.array([3j])).values, [1j])

    def test_real(self):
        np.testing.assert_array_equal(project_to_torus(np.array([-2.0, 0.5])).values, [-1.0, 1.0])

    def test_scale_invariance_and_contraction(self):
        rng = np.random.default_rng(7)
        for _ in range(2000):
            n = int(rng.integers(1, 8))
            w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            h = np.exp(2j * np.pi * rng.random(n))
            t = float(rng.uniform(0.01, 100))
            projected = project_to_torus(w).values
            np.testing.assert_allclose(project_to_torus(t * w).values, projected, atol=1e-12)
            for order in (1, 2, np.inf):
                assert np.linalg.norm(projected - h, order) <= 2 * np.linalg.norm(w - h, order) + 1e-12


class TestDenoise:
    def test_constant_signal_clean(self):
        graph = build_graph("path", 10)
        h = lift_to_torus(np.full(10, 0.3))
        np.testing.assert_allclose(denoise(h, graph, 5.0).values, h.values, atol=1e-12)

    def test_trs_zero_gamma_clean(self):
        graph = build_graph("path", 10)
        h = lift_to_torus(np.linspace(0, 0.4, 10))
        np.testing.assert_allclose(
            denoise(h, graph, 0.0, method="trs").values, h.values, atol=1e-10
        )

    def test_estimate_rejects_input_label(self):
        spectrum = spectral_decomposition(build_graph("path", 2))
        with pytest.raises(ModDenoiseParameterError) as exc_info:
            estimate(np.ones(2), spectrum, 1.0, SolverMethod.INPUT)
        assert "method must be" in str(exc_info.value)

    def test_ucqp_reduces_error(self):
        n, sigma = 500, 0.05
        graph = build_graph("path", n)
        spectrum = spectral_decomposition(graph)
        h = lift_to_torus(sample_function(FunctionSpec(kind="f2"), n)[1])
        gamma = gamma_rule("path-lipschitz", BoundQuery(n=n, sigma=sigma))
        wins = 0
        for t in range(30):
            z = add_modulo_noise(h, NoiseModel(sigma=sigma), make_generator(0, t))
            estimate_ = denoise(z, graph, gamma, spectrum=spectrum)
            wins += mse(estimate_, h) < mse(z, h)
        assert wins >= 25
