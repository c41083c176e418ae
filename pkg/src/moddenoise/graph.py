"""Graph construction, Laplacian assembly and spectral decomposition.

Graphs are simple, undirected and connected, with vertices numbered 1..n.
Spectra follow the descending convention used by every bound formula:
lambda_1 is the largest eigenvalue and lambda_n = 0.

Example:
    Decomposing a path graph::

        from moddenoise import GraphFamily, build_graph, spectral_decomposition

        graph = build_graph(GraphFamily.PATH, 3)
        spectrum = spectral_decomposition(graph)
        spectrum.eigenvalues   # array([3., 1., 0.])
"""

import logging
from itertools import combinations
from typing import Iterable, Union

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import laplacian as csgraph_laplacian

from .exceptions import (
    ModDenoiseNumericalError,
    ModDenoiseUnsupportedFamilyError,
    ModDenoiseValidationError,
)
from .models import Graph, SpectralDecomposition, SpectralIndexSets
from .types import MAX_DENSE_VERTICES, GraphFamily

logger = logging.getLogger(__name__)

_SIGN_THRESHOLD = 1e-12


def _validate_size(n: int) -> None:
    if n < 2:
        raise ModDenoiseValidationError(f"n must be >= 2, got {n}")


def build_graph(family: Union[GraphFamily, str], n: int) -> Graph:
    """Build a path, complete or star graph on n vertices.

    Args:
        family: PATH ({i, i+1}), COMPLETE (all pairs) or STAR (vertex 1
            joined to every other vertex).
        n: Number of vertices (>= 2).

    Returns:
        Graph tagged with ``family``.

    Raises:
        ModDenoiseValidationError: If n < 2 or family is CUSTOM.

    Example:
        >>> build_graph(GraphFamily.STAR, 4).edges
        ((1, 2), (1, 3), (1, 4))
    """
    family = GraphFamily(family)
    _validate_size(n)
    if family == GraphFamily.PATH:
        edges = [(i, i + 1) for i in range(1, n)]
    elif family == GraphFamily.COMPLETE:
        edges = list(combinations(range(1, n + 1), 2))
    elif family == GraphFamily.STAR:
        edges = [(1, j) for j in range(2, n + 1)]
    else:
        raise ModDenoiseValidationError(
            "custom graphs need an edge list; use build_custom_graph"
        )
    return Graph(n=n, edges=edges, family=family)


def build_custom_graph(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Build a connected graph from a 1-based edge list.

    Raises:
        ModDenoiseValidationError: On self-loops, duplicates or bad vertices.
        ModDenoiseConnectivityError: If the graph is disconnected.

    Example:
        >>> build_custom_graph(4, [(1, 2), (2, 3), (3, 4), (4, 1)]).max_degree
        2
    """
    _validate_size(n)
    return Graph(n=n, edges=list(edges), family=GraphFamily.CUSTOM)


def adjacency_matrix(graph: Graph) -> csr_matrix:
    """Symmetric 0/1 adjacency matrix in CSR format."""
    rows, cols = graph.edge_arrays()
    data = np.ones(2 * len(rows))
    return csr_matrix(
        (data, (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(graph.n, graph.n),
    )


def laplacian(graph: Graph) -> np.ndarray:
    """Combinatorial Laplacian L = D - A as a dense array.

    Example:
        >>> laplacian(build_graph("path", 2))
        array([[ 1., -1.],
               [-1.,  1.]])
    """
    return csgraph_laplacian(adjacency_matrix(graph)).toarray()


def spectral_decomposition(graph: Graph) -> SpectralDecomposition:
    """Dense eigen-decomposition of the Laplacian in descending order.

    LAPACK returns eigenvalues in ascending order; index a (0-based) of its
    output becomes j = n - a here. Each eigenvector is flipped so that its
    first coordinate of modulus above 1e-12 is positive. The null-space pair
    is pinned to lambda_n = 0 and q_n = 1/sqrt(n), which is exact for a
    connected graph.

    Raises:
        ModDenoiseValidationError: If n exceeds MAX_DENSE_VERTICES.
        ModDenoiseNumericalError: If the eigensolver does not converge.
    """
    n = graph.n
    if n > MAX_DENSE_VERTICES:
        raise ModDenoiseValidationError(
            f"n must be in range [2, {MAX_DENSE_VERTICES}] for the dense eigensolver, got {n}"
        )
    matrix = laplacian(graph)
    try:
        values, vectors = scipy.linalg.eigh(matrix)
    except np.linalg.LinAlgError as e:
        raise ModDenoiseNumericalError(
            "Laplacian eigensolver did not converge",
            {"n": n, "family": graph.family.value, "reason": str(e)},
        ) from e

    values = np.ascontiguousarray(values[::-1])
    vectors = np.ascontiguousarray(vectors[:, ::-1])
    values[-1] = 0.0
    vectors[:, -1] = 1.0 / np.sqrt(n)

    first = np.argmax(np.abs(vectors) > _SIGN_THRESHOLD, axis=0)
    signs = np.sign(vectors[first, np.arange(n)])
    signs[signs == 0] = 1.0
    vectors *= signs

    logger.debug(
        f"Decomposed {graph.family.value} Laplacian: n={n}, "
        f"lambda_1={values[0]:.6g}, lambda_min={values[-2]:.6g}"
    )
    return SpectralDecomposition(eigenvalues=values, eigenvectors=vectors)


def analytic_spectrum(family: Union[GraphFamily, str], n: int) -> np.ndarray:
    """Closed-form Laplacian eigenvalues in descending order.

    * P_n: lambda_j = 4 sin^2(pi (n - j) / (2n)).
    * K_n: lambda_1 = ... = lambda_(n-1) = n.
    * S_n: lambda_1 = n, lambda_2 = ... = lambda_(n-1) = 1.

    Raises:
        ModDenoiseUnsupportedFamilyError: For CUSTOM.

    Example:
        >>> analytic_spectrum("star", 5)
        array([5., 1., 1., 1., 0.])
    """
    family = GraphFamily(family)
    _validate_size(n)
    if family == GraphFamily.PATH:
        j = np.arange(1, n + 1)
        values = 4.0 * np.sin(np.pi * (n - j) / (2.0 * n)) ** 2
        values[-1] = 0.0
        return values
    if family == GraphFamily.COMPLETE:
        values = np.full(n, float(n))
    elif family == GraphFamily.STAR:
        values = np.ones(n)
        values[0] = float(n)
    else:
        raise ModDenoiseUnsupportedFamilyError(family.value)
    values[-1] = 0.0
    return values


def spectral_sets(spectrum: SpectralDecomposition, lambda_bar: float) -> SpectralIndexSets:
    """Low and high frequency index sets at the cutoff ``lambda_bar``.

    Raises:
        ModDenoiseValidationError: If lambda_bar is outside [lambda_min, lambda_1].

    Example:
        >>> spectral_sets(spectral_decomposition(build_graph("path", 3)), 3.0).low_set
        (2,)
    """
    return spectrum.index_sets(lambda_bar)


__all__ = [
    "adjacency_matrix",
    "analytic_spectrum",
    "build_custom_graph",
    "build_graph",
    "laplacian",
    "spectral_decomposition",
    "spectral_sets",
]
