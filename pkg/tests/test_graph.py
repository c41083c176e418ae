import numpy as np
import pytest

from moddenoise import (
    GraphFamily,
    ModDenoiseConnectivityError,
    ModDenoiseUnsupportedFamilyError,
    ModDenoiseValidationError,
    analytic_spectrum,
    build_custom_graph,
    build_graph,
    laplacian,
    spectral_decomposition,
    spectral_sets,
)
from moddenoise.graph import adjacency_matrix
from moddenoise.models import Graph


def _random_connected_graph(rng, n):
    # random spanning tree plus a few chords
    edges = {(int(rng.integers(1, j)), j) for j in range(2, n + 1)}
    for _ in range(n):
        i, j = sorted(int(v) for v in rng.choice(np.arange(1, n + 1), size=2, replace=False))
        edges.add((i, j))
    return build_custom_graph(n, sorted(edges))


class TestBuildGraph:
    def test_path(self):
        graph = build_graph(GraphFamily.PATH, 3)
        assert graph.edges == ((1, 2), (2, 3))
        assert graph.max_degree == 2
        assert graph.family == GraphFamily.PATH

    def test_complete(self):
        graph = build_graph("complete", 3)
        assert len(graph.edges) == 3
        assert graph.max_degree == 2

    def test_star(self):
        graph = build_graph("star", 4)
        assert graph.edges == ((1, 2), (1, 3), (1, 4))
        assert graph.max_degree == 3

    def test_invalid_size(self):
        with pytest.raises(ModDenoiseValidationError) as exc_info:
            build_graph("path", 1)
        assert "n must be >= 2" in str(exc_info.value)

    def test_custom_family_rejected(self):
        with pytest.raises(ModDenoiseValidationError) as exc_info:
            build_graph("custom", 4)
        assert "edge list" in str(exc_info.value)


class TestBuildCustomGraph:
    def test_single_edge(self):
        graph = build_custom_graph(2, [(1, 2)])
        assert graph.max_degree == 1
        assert graph.family == GraphFamily.CUSTOM

    def test_cycle(self):
        graph = build_custom_graph(4, [(1, 2), (2, 3), (3, 4), (4, 1)])
        assert graph.max_degree == 2
        assert graph.edges == ((1, 2), (1, 4), (2, 3), (3, 4))

    def test_disconnected(self):
        with pytest.raises(ModDenoiseConnectivityError) as exc_info:
            build_custom_graph(3, [(1, 2)])
        assert "graph not connected" in str(exc_info.value)
        assert exc_info.value.components == [1, 3]

    def test_self_loop(self):
        with pytest.raises(ModDenoiseValidationError) as exc_info:
            build_custom_graph(3, [(1, 2), (2, 2), (2, 3)])
        assert "self-loop" in str(exc_info.value)

    def test_duplicate_edge(self):
        with pytest.raises(ModDenoiseValidationError) as exc_info:
            build_custom_graph(3, [(1, 2), (2, 1), (2, 3)])
        assert "duplicate edge" in str(exc_info.value)

    def test_vertex_out_of_range(self):
        with pytest.raises(ModDenoiseValidationError) as exc_info:
            build_custom_graph(3, [(1, 2), (2, 4)])
        assert "range [1, 3]" in str(exc_info.value)

    def test_graph_model_normalizes_edges(self):
        graph = Graph(n=3, edges=[(3, 2), (2, 1)])
        assert graph.edges == ((1, 2), (2, 3))


class TestLaplacian:
    def test_adjacency_is_symmetric_csr(self):
        adjacency = adjacency_matrix(build_graph("star", 4))
        assert adjacency.format == "csr"
        dense = adjacency.toarray()
        np.testing.assert_array_equal(dense, dense.T)
        assert dense.sum(axis=1).tolist() == [3.0, 1.0, 1.0, 1.0]

    def test_single_edge(self):
        np.testing.assert_array_equal(
            laplacian(build_graph("path", 2)), [[1.0, -1.0], [-1.0, 1.0]]
        )

    def test_triangle(self):
        np.testing.assert_array_equal(
            laplacian(build_graph("complete", 3)),
            [[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]],
        )

    def test_path_three(self):
        np.testing.assert_array_equal(
            laplacian(build_graph("path", 3)),
            [[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]],
        )

    def test_rows_sum_to_zero(self):
        graph = _random_connected_graph(np.random.default_rng(3), 30)
        np.testing.assert_allclose(laplacian(graph).sum(axis=1), 0.0, atol=1e-12)


class TestSpectralDecomposition:
    def test_triangle(self):
        spectrum = spectral_decomposition(build_graph("complete", 3))
        np.testing.assert_allclose(spectrum.eigenvalues, [3.0, 3.0, 0.0], atol=1e-12)

    def test_path_three(self):
        spectrum = spectral_decomposition(build_graph("path", 3))
        np.testing.assert_allclose(spectrum.eigenvalues, [3.0, 1.0, 0.0], atol=1e-12)
        assert spectrum.lambda_min == pytest.approx(1.0)
        assert spectrum.lambda_1 == pytest.approx(3.0)

    def test_star_four(self):
        spectrum = spectral_decomposition(build_graph("star", 4))
        np.testing.assert_allclose(spectrum.eigenvalues, [4.0, 1.0, 1.0, 0.0], atol=1e-12)

    @pytest.mark.parametrize("family", ["path", "complete", "star"])
    @pytest.mark.parametrize("n", [3, 10, 100, 500])
    def test_matches_analytic_spectrum(self, family, n):
        spectrum = spectral_decomposition(build_graph(family, n))
        np.testing.assert_allclose(
            spectrum.eigenvalues, analytic_spectrum(family, n), rtol=0, atol=1e-8
        )

    def test_null_space_pinned(self):
        spectrum = spectral_decomposition(build_graph("path", 7))
        assert spectrum.eigenvalues[-1] == 0.0
        np.testing.assert_array_equal(spectrum.eigenvector(7), np.full(7, 1 / np.sqrt(7)))

    def test_orthonormal_and_reconstructs(self):
        graph = _random_connected_graph(np.random.default_rng(11), 40)
        spectrum = spectral_decomposition(graph)
        q = spectrum.eigenvectors
        np.testing.assert_allclose(q.T @ q, np.eye(40), atol=1e-10)
        np.testing.assert_allclose(spectrum.laplacian(), laplacian(graph), atol=1e-10)

    def test_descending(self):
        spectrum = spectral_decomposition(build_graph("path", 20))
        assert np.all(np.diff(spectrum.eigenvalues) <= 1e-12)

    def test_repeated_eigenvalue_projector_is_basis_invariant(self):
        spectrum = spectral_decomposition(build_graph("complete", 6))
        projector = spectrum.projector(range(1, 6))
        np.testing.assert_allclose(projector, np.eye(6) - np.full((6, 6), 1 / 6), atol=1e-10)

    def test_arrays_are_read_only(self):
        spectrum = spectral_decomposition(build_graph("path", 4))
        with pytest.raises(ValueError):
            spectrum.eigenvalues[0] = 1.0

    def test_too_large(self):
        graph = build_graph("path", 3001)
        with pytest.raises(ModDenoiseValidationError) as exc_info:
            spectral_decomposition(graph)
        assert "dense eigensolver" in str(exc_info.value)

    def test_eigenvalue_index_out_of_range(self):
        spectrum = spectral_decomposition(build_graph("path", 3))
        with pytest.raises(ModDenoiseValidationError) as exc_info:
            spectrum.eigenvalue(4)
        assert "range [1, 3]" in str(exc_info.value)

    def test_valid_gap_indices(self):
        assert spectral_decomposition(build_graph("star", 5)).valid_gap_indices() == [1, 4]
        assert spectral_decomposition(build_graph("complete", 5)).valid_gap_indices() == [1]
        assert spectral_decomposition(build_graph("path", 5)).valid_gap_indices() == [1, 2, 3, 4]


class TestAnalyticSpectrum:
    def test_path(self):
        np.testing.assert_allclose(analytic_spectrum("path", 3), [3.0, 1.0, 0.0], atol=1e-12)

    def test_complete(self):
        np.testing.assert_array_equal(analytic_spectrum("complete", 5), [5.0, 5.0, 5.0, 5.0, 0.0])

    def test_star(self):
        np.testing.assert_array_equal(analytic_spectrum("star", 5), [5.0, 1.0, 1.0, 1.0, 0.0])

    def test_custom_unsupported(self):
        with pytest.raises(ModDenoiseUnsupportedFamilyError) as exc_info:
            analytic_spectrum("custom", 5)
        assert "custom" in str(exc_info.value)


class TestSpectralSets:
    def test_complete_at_n_is_empty(self):
        spectrum = spectral_decomposition(build_graph("complete", 8))
        sets = spectral_sets(spectrum, 8.0)
        assert sets.low_set == ()
        assert sets.high_set == tuple(range(1, 8))
        assert sets.low_size == 0

    def test_path_at_one(self):
        sets = spectral_sets(spectral_decomposition(build_graph("path", 3)), 1.0)
        assert sets.low_set == ()
        assert sets.high_set == (1, 2)

    def test_path_at_three(self):
        sets = spectral_sets(spectral_decomposition(build_graph("path", 3)), 3.0)
        assert sets.low_set == (2,)
        assert sets.high_set == (1,)

    def test_partition(self):
        spectrum = spectral_decomposition(build_graph("path", 50))
        sets = spectral_sets(spectrum, 0.5)
        assert sorted(sets.low_set + sets.high_set) == list(range(1, 50))

    def test_out_of_range(self):
        spectrum = spectral_decomposition(build_graph("path", 3))
        with pytest.raises(ModDenoiseValidationError) as exc_info:
            spectral_sets(spectrum, 3.5)
        assert "lambda_bar must be in range" in str(exc_info.value)
