"""SVG line plots of sweep results.

Requirements:
    matplotlib >= 3.7 must be installed. Install with:
        pip install moddenoise[plot]

Example:
    Plotting a sweep::

        from moddenoise import sweep_sigma
        from moddenoise.plotting import plot_sweep

        plot_sweep(sweep_sigma(config), "sweep.svg")
"""

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

from .models import SweepResult
from .types import SolverMethod

logger = logging.getLogger(__name__)

_STYLES = {
    SolverMethod.INPUT: {"color": "0.4", "linestyle": "--", "marker": "o", "label": "input"},
    SolverMethod.UCQP: {"color": "tab:blue", "linestyle": "-", "marker": "s", "label": "UCQP"},
    SolverMethod.TRS: {"color": "tab:red", "linestyle": "-", "marker": "^", "label": "TRS"},
}


def _check_matplotlib() -> None:
    """Check if matplotlib is installed and raise informative error if not."""
    try:
        import matplotlib  # noqa: F401
    except ImportError as e:
        raise ImportError(
            "matplotlib is required for plotting. "
            "Install it with: pip install moddenoise[plot]"
        ) from e


def plot_sweep(
    result: SweepResult,
    path: Union[str, Path],
    *,
    bound: Optional[Sequence[tuple[float, float, bool]]] = None,
    title: Optional[str] = None,
) -> None:
    """Write a log-log plot of mean squared error against sigma as SVG.

    One series per method, with standard-error bars. ``bound`` overlays a
    curve from ``bound_curve``; points outside the bound's domain are drawn
    hollow.

    Raises:
        ImportError: If matplotlib is not installed.
    """
    _check_matplotlib()
    from matplotlib.figure import Figure

    fig = Figure(figsize=(5.0, 3.6))
    ax = fig.add_subplot(1, 1, 1)
    methods = [SolverMethod.INPUT, *result.config.methods]
    for method in methods:
        rows = result.series(method)
        style = dict(_STYLES[method])
        ax.errorbar(
            [r.sigma for r in rows],
            [r.mean_mse for r in rows],
            yerr=[r.stderr_mse for r in rows],
            markersize=3,
            linewidth=1.0,
            capsize=2,
            **style,
        )
    if bound:
        sigmas = [s for s, _, _ in bound]
        values = [v for _, v, _ in bound]
        ax.plot(sigmas, values, color="k", linewidth=0.8, linestyle=":", label="bound")
        outside = [(s, v) for s, v, ok in bound if not ok]
        if outside:
            ax.scatter(*zip(*outside), s=10, facecolors="none", edgecolors="k")

    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\sigma$")
    ax.set_ylabel(r"$\|\cdot - h\|_2^2$ (mean over trials)")
    cfg = result.config
    ax.set_title(title or f"{cfg.function.kind.value}, n={cfg.n}, {cfg.trials} trials", fontsize=9)
    ax.grid(True, which="major", linestyle=":", linewidth=0.5)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    fig.savefig(str(path), format="svg")
    logger.debug(f"Wrote plot to {path}")


__all__ = ["plot_sweep"]
