"""Ground-truth signals on the torus, the modulo noise model and error metrics.

A real function f on [0, 1] is sampled on the uniform grid x_i = (i-1)/(n-1)
and lifted to the unit circle as h_i = exp(2 pi i f(x_i)). Observations are
z_i = h_i exp(2 pi i eta_i) with eta_i ~ N(0, sigma^2) i.i.d., which is the
lift of the modulo samples y_i = (f(x_i) + eta_i) mod 1.

Random streams:
    Every draw comes from ``make_generator(seed, *stream)``: a PCG64 bit
    generator seeded through numpy's SeedSequence, which hashes the entropy
    words (seed, stream...) into independent states. Gaussian variates use
    numpy's ziggurat ``standard_normal``. A trial is replayed bit-identically
    from (seed, sigma index, trial index).

Example:
    Sampling f2 and corrupting it::

        from moddenoise import FunctionSpec, NoiseModel
        from moddenoise.signal import add_modulo_noise, lift_to_torus, sample_function

        x, f = sample_function(FunctionSpec(kind="f2"), 500)
        h = lift_to_torus(f)
        z = add_modulo_noise(h, NoiseModel(sigma=0.05, seed=7))
"""

import math
from typing import Optional, Union

import numpy as np

from .exceptions import ModDenoiseValidationError
from .models import FunctionSpec, Graph, NoiseModel, SpectralDecomposition, TorusSignal

SignalLike = Union[TorusSignal, np.ndarray]


def _values(signal: SignalLike) -> np.ndarray:
    if isinstance(signal, TorusSignal):
        return signal.values
    return np.asarray(signal, dtype=np.complex128).reshape(-1)


def _check_lengths(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape[0] != v.shape[0]:
        raise ModDenoiseValidationError(
            f"signal lengths must match, got {u.shape[0]} and {v.shape[0]}"
        )


def uniform_grid(n: int) -> np.ndarray:
    """Equispaced grid x_i = (i-1)/(n-1), i = 1..n.

    Example:
        >>> uniform_grid(5)
        array([0.  , 0.25, 0.5 , 0.75, 1.  ])
    """
    if n < 2:
        raise ModDenoiseValidationError(f"n must be >= 2, got {n}")
    return np.linspace(0.0, 1.0, n)


def f1(x: np.ndarray) -> np.ndarray:
    """3x cos^2(2 pi x) - sin^2(2 pi x) + 0.7."""
    x = np.asarray(x, dtype=np.float64)
    return 3.0 * x * np.cos(2 * np.pi * x) ** 2 - np.sin(2 * np.pi * x) ** 2 + 0.7


def f2(x: np.ndarray) -> np.ndarray:
    """sin(2 pi x)."""
    return np.sin(2 * np.pi * np.asarray(x, dtype=np.float64))


def sample_function(spec: FunctionSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Sample a built-in function on the uniform grid.

    Returns:
        Tuple (x, f(x)).
    """
    x = uniform_grid(n)
    return x, spec.evaluate(x)


def lift_to_torus(samples: np.ndarray) -> TorusSignal:
    """Map real samples to h_i = exp(2 pi i s_i).

    Samples are reduced mod 1 first, so integer shifts give the same lift.

    Raises:
        ModDenoiseValidationError: If any sample is not finite.

    Example:
        >>> lift_to_torus([0.0, 0.25]).values.round(12)
        array([1.+0.j, 0.+1.j])
    """
    s = np.asarray(samples, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(s)):
        raise ModDenoiseValidationError("samples must be finite")
    return TorusSignal(values=np.exp(2j * np.pi * np.mod(s, 1.0)), on_torus=True)


def make_generator(seed: int, *stream: int) -> np.random.Generator:
    """Deterministic PCG64 generator for the stream (seed, *stream).

    Example:
        >>> make_generator(0, 3, 7).standard_normal() == make_generator(0, 3, 7).standard_normal()
        True
    """
    entropy = [int(seed), *(int(s) for s in stream)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def draw_phase_noise(n: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Draw eta ~ N(0, sigma^2 I_n)."""
    return sigma * rng.standard_normal(n)


def add_modulo_noise(
    h: TorusSignal,
    noise: NoiseModel,
    rng: Optional[np.random.Generator] = None,
) -> TorusSignal:
    """Corrupt a torus signal with wrapped Gaussian phase noise.

    Args:
        h: Clean signal (must lie on the torus).
        noise: Noise level and seed.
        rng: Generator to draw from; ``make_generator(noise.seed)`` if omitted.

    Returns:
        z with z_i = h_i exp(2 pi i eta_i). At sigma = 0, z equals h exactly.
    """
    if not h.on_torus:
        raise ModDenoiseValidationError("the clean signal must lie on the torus")
    if rng is None:
        rng = make_generator(noise.seed)
    eta = draw_phase_noise(h.n, noise.sigma, rng)
    return TorusSignal(values=h.values * np.exp(2j * np.pi * eta), on_torus=True)


def modulo_samples(f: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Observed modulo samples y = (f + eta) mod 1, in [0, 1)."""
    return np.mod(np.asarray(f, dtype=np.float64) + np.asarray(eta, dtype=np.float64), 1.0)


def smoothness(h: SignalLike, graph: Graph) -> float:
    """B_n = h* L h as the edge sum of |h_i - h_j|^2.

    Example:
        >>> smoothness(np.array([1, 1j, -1]), build_graph("path", 3))
        4.0
    """
    values = _values(h)
    if values.shape[0] != graph.n:
        raise ModDenoiseValidationError(
            f"signal length must equal n={graph.n}, got {values.shape[0]}"
        )
    rows, cols = graph.edge_arrays()
    return math.fsum(np.abs(values[rows] - values[cols]) ** 2)


def quadratic_variation_bound(samples: np.ndarray) -> float:
    """4 pi^2 sum (f(x_i) - f(x_(i+1)))^2, an upper bound on B_n for the path.

    Example:
        >>> round(quadratic_variation_bound([0.0, 0.5]), 12) == round(math.pi ** 2, 12)
        True
    """
    f = np.asarray(samples, dtype=np.float64).reshape(-1)
    if f.shape[0] < 2:
        raise ModDenoiseValidationError(f"at least 2 samples are required, got {f.shape[0]}")
    return 4.0 * math.pi**2 * math.fsum(np.diff(f) ** 2)


def lipschitz_smoothness_bound(M: float, n: int) -> float:
    """8 pi^2 M^2 / n, the path-graph B_n budget of an M-Lipschitz function."""
    if n < 2:
        raise ModDenoiseValidationError(f"n must be >= 2, got {n}")
    return 8.0 * math.pi**2 * M**2 / n


def lipschitz_estimate(samples: np.ndarray, x: np.ndarray) -> float:
    """Largest finite-difference slope; a lower bound on the Lipschitz constant."""
    f = np.asarray(samples, dtype=np.float64).reshape(-1)
    grid = np.asarray(x, dtype=np.float64).reshape(-1)
    if f.shape != grid.shape or f.shape[0] < 2:
        raise ModDenoiseValidationError("samples and grid must have equal length >= 2")
    return float(np.max(np.abs(np.diff(f) / np.diff(grid))))


def mse(u: SignalLike, v: SignalLike) -> float:
    """Squared l2 distance ||u - v||^2 (a sum, not a per-sample mean)."""
    a, b = _values(u), _values(v)
    _check_lengths(a, b)
    return math.fsum(np.abs(a - b) ** 2)


def spectral_energy(
    h: SignalLike, spectrum: SpectralDecomposition, lam: float
) -> tuple[float, float]:
    """Split |<h, q_j>|^2 at the cutoff ``lam``.

    Returns:
        (sum over the high set, sum over the low set plus index n).
    """
    values = _values(h)
    _check_lengths(values, spectrum.eigenvalues)
    energy = np.abs(spectrum.coefficients(values)) ** 2
    sets = spectrum.index_sets(lam)
    high = np.asarray(sets.high_set, dtype=np.intp) - 1
    low = np.asarray(sets.low_set + (spectrum.n,), dtype=np.intp) - 1
    return math.fsum(energy[high]), math.fsum(energy[low])


def laplacian_moment(h: SignalLike, spectrum: SpectralDecomposition) -> float:
    """sum_(j < n) lambda_j^2 |<h, q_j>|^2, i.e. ||L h||^2."""
    values = _values(h)
    _check_lengths(values, spectrum.eigenvalues)
    energy = np.abs(spectrum.coefficients(values)) ** 2
    return math.fsum(spectrum.eigenvalues[:-1] ** 2 * energy[:-1])


__all__ = [
    "add_modulo_noise",
    "draw_phase_noise",
    "f1",
    "f2",
    "laplacian_moment",
    "lift_to_torus",
    "lipschitz_estimate",
    "lipschitz_smoothness_bound",
    "make_generator",
    "modulo_samples",
    "mse",
    "quadratic_variation_bound",
    "sample_function",
    "smoothness",
    "spectral_energy",
    "uniform_grid",
]
