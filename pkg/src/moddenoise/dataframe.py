"""Table conversion and CSV I/O for spectra, signals, sweeps and bound curves.

Every float is written with ``%.17g`` so a file read back reproduces the
exact binary values.

File formats:
    - spectrum: ``j,lambda_j``
    - signal: ``i,re,im`` (1-based i)
    - samples: ``i,x,f``
    - sweep: ``sigma,method,mean_mse,stderr_mse,mean_mu_star,trials,gamma``
      (mean_mu_star is empty except for trs rows)
    - bounds: ``sigma,bound_value,condition_ok``
    - trials: ``sigma,sigma_index,trial_index,gamma,method,mse,mu_star``
    - edge list: one ``i j`` pair per line (whitespace or comma separated,
      1-based, ``#`` starts a comment)

Example:
    Writing a sweep::

        from moddenoise import sweep_sigma
        from moddenoise.dataframe import to_dataframe, write_csv

        result = sweep_sigma(config)
        write_csv(to_dataframe(result), "sweep.csv")
"""

import logging
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .exceptions import ModDenoiseValidationError
from .graph import build_custom_graph
from .models import Graph, SpectralDecomposition, SweepResult, TorusSignal, TrialRecord
from .types import CSV_FLOAT_FORMAT, INPUT_TORUS_TOLERANCE, SolverMethod

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SWEEP_COLUMNS = ["sigma", "method", "mean_mse", "stderr_mse", "mean_mu_star", "trials", "gamma"]
BOUND_COLUMNS = ["sigma", "bound_value", "condition_ok"]
TRIAL_COLUMNS = ["sigma", "sigma_index", "trial_index", "gamma", "method", "mse", "mu_star"]


def _read_table(path: PathLike, columns: list[str]) -> pd.DataFrame:
    try:
        df = pd.read_csv(path)
    except FileNotFoundError as e:
        raise ModDenoiseValidationError(f"file not found: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ModDenoiseValidationError(f"cannot parse {path}: {e}") from e
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise ModDenoiseValidationError(
            f"{path} must have columns {','.join(columns)}; missing {','.join(missing)}"
        )
    return df


def write_csv(df: pd.DataFrame, path: PathLike) -> None:
    """Write without the index, floats at full precision."""
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    logger.debug(f"Wrote {len(df)} rows to {path}")


def read_edge_list(path: PathLike, n: Optional[int] = None) -> Graph:
    """Read a 1-based edge list into a custom graph.

    Args:
        path: Text file with one ``i j`` pair per line.
        n: Vertex count; the largest vertex mentioned when omitted.

    Raises:
        ModDenoiseValidationError: On unreadable or non-integer rows.
        ModDenoiseConnectivityError: If the graph is disconnected.

    Example:
        >>> read_edge_list("square.txt").edges
        ((1, 2), (1, 4), (2, 3), (3, 4))
    """
    try:
        df = pd.read_csv(path, sep=r"[\s,]+", comment="#", header=None, engine="python")
    except FileNotFoundError as e:
        raise ModDenoiseValidationError(f"file not found: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ModDenoiseValidationError(f"cannot parse edge list {path}: {e}") from e
    df = df.dropna(axis=1, how="all")
    if df.shape[1] != 2:
        raise ModDenoiseValidationError(
            f"edge list {path} must have 2 columns per row, got {df.shape[1]}"
        )
    values = df.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    if not np.all(np.isfinite(values)) or not np.all(values == np.round(values)):
        raise ModDenoiseValidationError(f"edge list {path} must contain integer vertex ids")
    edges = [(int(i), int(j)) for i, j in values]
    if n is None:
        n = int(values.max())
    return build_custom_graph(n, edges)


def spectrum_to_dataframe(spectrum: SpectralDecomposition) -> pd.DataFrame:
    """One row per eigenvalue, j = 1..n in descending order."""
    return pd.DataFrame(
        {"j": np.arange(1, spectrum.n + 1), "lambda_j": spectrum.eigenvalues}
    )


def signal_to_dataframe(signal: Union[TorusSignal, np.ndarray]) -> pd.DataFrame:
    values = signal.values if isinstance(signal, TorusSignal) else np.asarray(signal, dtype=np.complex128)
    return pd.DataFrame(
        {"i": np.arange(1, values.shape[0] + 1), "re": values.real, "im": values.imag}
    )


def read_signal_csv(
    path: PathLike,
    *,
    tolerance: float = INPUT_TORUS_TOLERANCE,
    require_torus: bool = True,
) -> TorusSignal:
    """Read an ``i,re,im`` file.

    Entries within ``tolerance`` of unit modulus are renormalized onto the
    torus.

    Args:
        path: CSV file.
        tolerance: Accepted modulus deviation.
        require_torus: Reject signals off the torus; pass False for raw
            complex input.

    Raises:
        ModDenoiseValidationError: On a malformed file or, with
            ``require_torus``, an off-torus signal.
    """
    df = _read_table(path, ["i", "re", "im"]).sort_values("i")
    expected = np.arange(1, len(df) + 1)
    if not np.array_equal(df["i"].to_numpy(), expected):
        raise ModDenoiseValidationError(f"{path}: column i must list 1..{len(df)}")
    signal = TorusSignal.from_values(
        df["re"].to_numpy(dtype=float) + 1j * df["im"].to_numpy(dtype=float), tolerance
    )
    if require_torus and not signal.on_torus:
        raise ModDenoiseValidationError(
            f"{path}: max ||v_i| - 1| must be <= {tolerance}, got {signal.modulus_deviation():.3g}"
        )
    return signal


def samples_to_dataframe(x: np.ndarray, f: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"i": np.arange(1, len(x) + 1), "x": x, "f": f})


def read_samples_csv(path: PathLike) -> tuple[np.ndarray, np.ndarray]:
    """Read an ``i,x,f`` file as (x, f) arrays."""
    df = _read_table(path, ["i", "x", "f"]).sort_values("i")
    return df["x"].to_numpy(dtype=float), df["f"].to_numpy(dtype=float)


def sweep_to_dataframe(result: SweepResult) -> pd.DataFrame:
    """One row per (sigma, method); squared errors are raw l2 sums."""
    rows = [
        {
            "sigma": row.sigma,
            "method": row.method.value,
            "mean_mse": row.mean_mse,
            "stderr_mse": row.stderr_mse,
            "mean_mu_star": np.nan if row.mean_mu_star is None else row.mean_mu_star,
            "trials": row.trials,
            "gamma": row.gamma,
        }
        for row in result.rows
    ]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def read_sweep_csv(path: PathLike) -> pd.DataFrame:
    return _read_table(path, SWEEP_COLUMNS)


def trials_to_dataframe(records: Sequence[TrialRecord]) -> pd.DataFrame:
    """Long table of per-trial errors, used to dump the completed part of a failed sweep."""
    rows = []
    for record in records:
        for method, error in record.mse.items():
            rows.append(
                {
                    "sigma": record.sigma,
                    "sigma_index": record.sigma_index,
                    "trial_index": record.trial_index,
                    "gamma": record.gamma,
                    "method": method.value,
                    "mse": error,
                    "mu_star": record.mu_star if method == SolverMethod.TRS else np.nan,
                }
            )
    return pd.DataFrame(rows, columns=TRIAL_COLUMNS)


def bounds_to_dataframe(rows: Sequence[tuple[float, float, bool]]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=BOUND_COLUMNS)


def to_dataframe(obj: Any) -> pd.DataFrame:
    """Convert a sweep result, spectrum, signal or list of trial records.

    Raises:
        ModDenoiseValidationError: If the object type is not supported.

    Example:
        >>> to_dataframe(spectral_decomposition(build_graph("path", 3)))["lambda_j"].round(12).tolist()
        [3.0, 1.0, 0.0]
    """
    if isinstance(obj, SweepResult):
        return sweep_to_dataframe(obj)
    if isinstance(obj, SpectralDecomposition):
        return spectrum_to_dataframe(obj)
    if isinstance(obj, TorusSignal):
        return signal_to_dataframe(obj)
    if isinstance(obj, (list, tuple)) and all(isinstance(r, TrialRecord) for r in obj):
        return trials_to_dataframe(obj)
    raise ModDenoiseValidationError(
        f"Unsupported type: {type(obj).__name__}. "
        "Expected SweepResult, SpectralDecomposition, TorusSignal or a list of TrialRecord."
    )


__all__ = [
    "bounds_to_dataframe",
    "read_edge_list",
    "read_samples_csv",
    "read_signal_csv",
    "read_sweep_csv",
    "samples_to_dataframe",
    "signal_to_dataframe",
    "spectrum_to_dataframe",
    "sweep_to_dataframe",
    "to_dataframe",
    "trials_to_dataframe",
    "write_csv",
]
