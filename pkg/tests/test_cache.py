import tempfile
from pathlib import Path

import numpy as np

from moddenoise import SpectrumCache, build_custom_graph, build_graph, graph_fingerprint


class TestGraphFingerprint:
    def test_length(self):
        assert len(graph_fingerprint(build_graph("path", 3))) == 64

    def test_family_tag_not_hashed(self):
        path = build_graph("path", 4)
        custom = build_custom_graph(4, [(3, 4), (1, 2), (2, 3)])
        assert graph_fingerprint(path) == graph_fingerprint(custom)

    def test_distinct_graphs(self):
        assert graph_fingerprint(build_graph("path", 4)) != graph_fingerprint(build_graph("star", 4))
        assert graph_fingerprint(build_graph("path", 4)) != graph_fingerprint(build_graph("path", 5))


class TestSpectrumCache:
    def test_memory_hit_is_same_object(self):
        cache = SpectrumCache()
        first = cache.get_or_compute(build_graph("star", 10))
        assert cache.get_or_compute(build_graph("star", 10)) is first
        assert len(cache) == 1

    def test_miss_returns_none(self):
        assert SpectrumCache().get(build_graph("path", 5)) is None

    def test_init_creates_directory(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            cache_dir = Path(tmpdir) / "spectra"
            SpectrumCache(cache_dir)
            assert cache_dir.exists()

    def test_file_name(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            graph = build_graph("path", 12)
            SpectrumCache(Path(tmpdir)).get_or_compute(graph)
            files = list(Path(tmpdir).glob("*.npz"))
            assert [f.name for f in files] == [f"path_12_{graph_fingerprint(graph)[:16]}.npz"]

    def test_disk_round_trip(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            graph = build_graph("complete", 8)
            stored = SpectrumCache(Path(tmpdir)).get_or_compute(graph)
            fresh = SpectrumCache(Path(tmpdir))
            loaded = fresh.get(graph)
            assert loaded is not None
            np.testing.assert_array_equal(loaded.eigenvalues, stored.eigenvalues)
            np.testing.assert_array_equal(loaded.eigenvectors, stored.eigenvectors)
            assert fresh.get(graph) is loaded

    def test_clear_keeps_files(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            graph = build_graph("path", 6)
            cache = SpectrumCache(Path(tmpdir))
            cache.get_or_compute(graph)
            cache.clear()
            assert len(cache) == 0
            assert cache.get(graph) is not None

    def test_corrupt_file_is_ignored(self, caplog):
        with tempfile.TemporaryDirectory() as tmpdir:
            graph = build_graph("path", 6)
            name = f"path_6_{graph_fingerprint(graph)[:16]}.npz"
            (Path(tmpdir) / name).write_bytes(b"not an archive")
            cache = SpectrumCache(Path(tmpdir))
            assert cache.get(graph) is None
            assert "Failed to load spectrum cache" in caplog.text
            spectrum = cache.get_or_compute(graph)
            assert spectrum.n == 6
