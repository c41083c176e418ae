"""Caching of Laplacian spectral decompositions.

A decomposition costs O(n^3) and every trial of a sweep reuses the same one,
so decompositions are kept in memory and, optionally, on disk.

1. **Memory**: a dict keyed by the graph fingerprint, guarded by a lock so
   worker threads can share one cache.
2. **Disk**: one ``.npz`` archive per graph in ``cache_dir``, holding the
   eigenvalues and eigenvectors.

Cache file naming:
    Files are named ``{family}_{n}_{digest}.npz``, where digest is the first
    16 hex characters of the graph fingerprint (e.g. "path_500_3f9c0a...npz").

Example:
    Sharing decompositions across runs::

        from pathlib import Path
        from moddenoise import SpectrumCache, build_graph

        cache = SpectrumCache(Path.home() / ".cache" / "moddenoise")
        spectrum = cache.get_or_compute(build_graph("path", 500))
"""

import hashlib
import logging
import threading
from pathlib import Path
from typing import Optional

import numpy as np

from .graph import spectral_decomposition
from .models import Graph, SpectralDecomposition

logger = logging.getLogger(__name__)


def graph_fingerprint(graph: Graph) -> str:
    """SHA-256 of the vertex count and sorted edge list.

    The family tag is not hashed, so a custom edge list equal to a path
    shares its decomposition.

    Example:
        >>> len(graph_fingerprint(build_graph("path", 3)))
        64
    """
    digest = hashlib.sha256()
    digest.update(f"n={graph.n};".encode())
    for i, j in graph.edges:
        digest.update(f"{i},{j};".encode())
    return digest.hexdigest()


class SpectrumCache:
    """Memory cache of decompositions with an optional ``.npz`` directory.

    Args:
        cache_dir: Directory for ``.npz`` archives. Created if it does not
            exist. Memory only when None.

    Example:
        >>> cache = SpectrumCache()
        >>> first = cache.get_or_compute(build_graph("star", 10))
        >>> cache.get_or_compute(build_graph("star", 10)) is first
        True
    """

    def __init__(self, cache_dir: Optional[Path] = None) -> None:
        self.cache_dir = cache_dir
        if cache_dir is not None:
            cache_dir.mkdir(parents=True, exist_ok=True)
        self._memory: dict[str, SpectralDecomposition] = {}
        self._lock = threading.Lock()

    def _get_cache_file(self, graph: Graph, key: str) -> Optional[Path]:
        if self.cache_dir is None:
            return None
        return self.cache_dir / f"{graph.family.value}_{graph.n}_{key[:16]}.npz"

    def _load(self, graph: Graph, key: str) -> Optional[SpectralDecomposition]:
        cache_file = self._get_cache_file(graph, key)
        if cache_file is None or not cache_file.exists():
            return None
        try:
            with np.load(cache_file) as archive:
                spectrum = SpectralDecomposition(
                    eigenvalues=np.array(archive["eigenvalues"]),
                    eigenvectors=np.array(archive["eigenvectors"]),
                )
        except Exception as e:
            logger.warning(f"Failed to load spectrum cache {cache_file}: {e}")
            return None
        if spectrum.n != graph.n:
            logger.warning(f"Ignoring spectrum cache {cache_file}: size {spectrum.n} != {graph.n}")
            return None
        return spectrum

    def _save(self, graph: Graph, key: str, spectrum: SpectralDecomposition) -> None:
        cache_file = self._get_cache_file(graph, key)
        if cache_file is None:
            return
        try:
            with open(cache_file, "wb") as f:
                np.savez(f, eigenvalues=spectrum.eigenvalues, eigenvectors=spectrum.eigenvectors)
            logger.debug(f"Saved spectrum cache to {cache_file}")
        except Exception as e:
            logger.error(f"Failed to save spectrum cache {cache_file}: {e}")

    def get(self, graph: Graph) -> Optional[SpectralDecomposition]:
        """Return a cached decomposition from memory or disk, or None."""
        key = graph_fingerprint(graph)
        with self._lock:
            spectrum = self._memory.get(key)
            if spectrum is None:
                spectrum = self._load(graph, key)
                if spectrum is not None:
                    self._memory[key] = spectrum
        if spectrum is None:
            logger.debug(f"Spectrum cache miss: {graph.family.value} n={graph.n}")
        else:
            logger.debug(f"Spectrum cache hit: {graph.family.value} n={graph.n}")
        return spectrum

    def set(self, graph: Graph, spectrum: SpectralDecomposition) -> None:
        key = graph_fingerprint(graph)
        with self._lock:
            self._memory[key] = spectrum
            self._save(graph, key, spectrum)

    def get_or_compute(self, graph: Graph) -> SpectralDecomposition:
        """Return the cached decomposition, computing and storing it on a miss."""
        spectrum = self.get(graph)
        if spectrum is None:
            spectrum = spectral_decomposition(graph)
            self.set(graph, spectrum)
        return spectrum

    def clear(self) -> None:
        """Drop the memory cache. Files on disk are kept."""
        with self._lock:
            self._memory.clear()

    def __len__(self) -> int:
        return len(self._memory)


__all__ = ["SpectrumCache", "graph_fingerprint"]
