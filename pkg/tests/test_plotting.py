import builtins
import tempfile
from pathlib import Path

import pytest

from moddenoise import (
    ExperimentConfig,
    FunctionSpec,
    GammaRule,
    SolverMethod,
    SweepResult,
    SweepRow,
)


def _result():
    cfg = ExperimentConfig(
        n=20,
        function=FunctionSpec(kind="f2"),
        sigma_grid=[0.01, 0.02],
        trials=2,
        gamma_rule=GammaRule(kind="path-lipschitz"),
    )
    rows = []
    for sigma in cfg.sigma_grid:
        for method, scale in ((SolverMethod.INPUT, 2.0), (SolverMethod.UCQP, 1.0), (SolverMethod.TRS, 1.5)):
            rows.append(
                SweepRow(
                    sigma=sigma,
                    method=method,
                    mean_mse=scale * sigma,
                    stderr_mse=0.1 * sigma,
                    mean_mu_star=1.9 if method == SolverMethod.TRS else None,
                    trials=2,
                    gamma=1.0,
                )
            )
    return SweepResult(config=cfg, rows=rows)


class TestPlotSweep:
    def test_writes_svg(self):
        pytest.importorskip("matplotlib")
        from moddenoise.plotting import plot_sweep

        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "sweep.svg"
            plot_sweep(_result(), path)
            content = path.read_text()
        assert content.lstrip().startswith("<?xml")
        assert "<svg" in content

    def test_bound_overlay(self):
        pytest.importorskip("matplotlib")
        from moddenoise.plotting import plot_sweep

        bound = [(0.01, 5.0, False), (0.02, 6.0, True)]
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "sweep.svg"
            plot_sweep(_result(), path, bound=bound, title="f2 sweep")
            assert path.stat().st_size > 0

    def test_missing_matplotlib(self, monkeypatch):
        from moddenoise import plotting

        real_import = builtins.__import__

        def fake_import(name, *args, **kwargs):
            if name == "matplotlib" or name.startswith("matplotlib."):
                raise ImportError("No module named 'matplotlib'")
            return real_import(name, *args, **kwargs)

        monkeypatch.setattr(builtins, "__import__", fake_import)
        with pytest.raises(ImportError) as exc_info:
            plotting.plot_sweep(_result(), "unused.svg")
        assert "pip install moddenoise[plot]" in str(exc_info.value)
