"""Estimators: the graph-Tikhonov solve, the trust-region solve and the projection.

UCQP:
    min_g ||g - z||^2 + gamma g* L g, solved in closed form by
    g_hat = (I + gamma L)^-1 z.

TRS:
    The same objective on the sphere ||g||^2 = n. With c = Q^T z and
    d_j = 2 gamma lambda_j the solution is g_hat = 2 Q (c / (d + mu*)), where
    mu* is the unique root of the secular equation

        phi(mu) = 4 sum_j |c_j|^2 / (d_j + mu)^2 = n.

    phi decreases strictly on (0, inf). The root is bracketed in
    (mu_lo, mu_hi] with mu_hi = 2 ||z|| / sqrt(n) (exactly 2 on the torus),
    then refined by Newton steps on 1 / sqrt(phi), which is nearly linear
    in mu, falling back to bisection whenever a step leaves the bracket.

Both estimates are returned to the torus entrywise by ``project_to_torus``.

Example:
    Denoising with the trust-region estimator::

        from moddenoise import SolverMethod, build_graph, denoise

        graph = build_graph("path", 500)
        estimate = denoise(z, graph, gamma=40.0, method=SolverMethod.TRS)
"""

import logging
import math
from typing import Optional, Union

import numpy as np
import scipy.linalg

from .exceptions import (
    ModDenoiseDegeneracyError,
    ModDenoiseDomainError,
    ModDenoiseNumericalError,
    ModDenoiseParameterError,
    ModDenoiseValidationError,
)
from .graph import laplacian, spectral_decomposition
from .models import Graph, SpectralDecomposition, TorusSignal, TrsSolution, UcqpSolution
from .types import (
    DEGENERACY_FACTOR,
    TRS_BRACKET_WIDTH,
    TRS_MAX_ITERATIONS,
    TRS_TOLERANCE,
    SolverMethod,
    UcqpBackend,
)

logger = logging.getLogger(__name__)

SignalLike = Union[TorusSignal, np.ndarray]

_NORM_GAP_TOLERANCE = 1e-10


def _signal_values(z: SignalLike, spectrum: SpectralDecomposition) -> np.ndarray:
    values = z.values if isinstance(z, TorusSignal) else np.asarray(z, dtype=np.complex128)
    values = values.reshape(-1)
    if values.shape[0] != spectrum.n:
        raise ModDenoiseValidationError(
            f"signal length must equal n={spectrum.n}, got {values.shape[0]}"
        )
    return values


def _validate_gamma(gamma: float) -> None:
    if not gamma >= 0 or not math.isfinite(gamma):
        raise ModDenoiseParameterError(f"gamma must be >= 0, got {gamma}", field="gamma")


def solve_ucqp(
    z: SignalLike,
    spectrum: SpectralDecomposition,
    gamma: float,
    backend: Union[UcqpBackend, str] = UcqpBackend.SPECTRAL,
    graph: Optional[Graph] = None,
) -> UcqpSolution:
    """Solve (I + gamma L) g = z.

    Args:
        z: Noisy signal.
        spectrum: Decomposition of the graph Laplacian.
        gamma: Regularization parameter (>= 0).
        backend: SPECTRAL filters the eigen-coefficients by 1 / (1 + gamma
            lambda_j); DIRECT runs a dense Cholesky solve.
        graph: Source of the exact L for DIRECT. Without it L is rebuilt
            from the decomposition.

    Raises:
        ModDenoiseParameterError: If gamma < 0.

    Example:
        >>> spectrum = spectral_decomposition(build_graph("path", 2))
        >>> solve_ucqp(np.array([1, -1]), spectrum, 1.0).g_hat.real.round(12)
        array([ 0.33333333, -0.33333333])
    """
    _validate_gamma(gamma)
    backend = UcqpBackend(backend)
    values = _signal_values(z, spectrum)
    z_norm = float(np.linalg.norm(values)) or 1.0

    if gamma == 0:
        return UcqpSolution(g_hat=values.copy(), gamma=0.0, backend=backend, residual=0.0)

    if backend == UcqpBackend.SPECTRAL:
        scale = 1.0 + gamma * spectrum.eigenvalues
        coefficients = spectrum.coefficients(values)
        g_hat = spectrum.synthesize(coefficients / scale)
        residual = np.linalg.norm(scale * spectrum.coefficients(g_hat) - coefficients) / z_norm
    else:
        matrix = laplacian(graph) if graph is not None else spectrum.laplacian()
        system = np.eye(spectrum.n) + gamma * matrix
        try:
            g_hat = scipy.linalg.solve(system, values, assume_a="pos")
        except np.linalg.LinAlgError as e:
            raise ModDenoiseNumericalError(
                "Cholesky solve of I + gamma L failed", {"gamma": gamma, "n": spectrum.n}
            ) from e
        residual = np.linalg.norm(system @ g_hat - values) / z_norm

    logger.debug(f"UCQP {backend.value}: gamma={gamma:.6g}, residual={residual:.3g}")
    return UcqpSolution(g_hat=g_hat, gamma=gamma, backend=backend, residual=float(residual))


def _secular_terms(
    values: np.ndarray, spectrum: SpectralDecomposition, gamma: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    coefficients = spectrum.coefficients(values)
    weights = np.abs(coefficients) ** 2
    shifts = 2.0 * gamma * spectrum.eigenvalues
    return coefficients, weights, shifts


def _phi(mu: float, weights: np.ndarray, shifts: np.ndarray) -> float:
    return 4.0 * math.fsum(weights / (shifts + mu) ** 2)


def _phi_derivative(mu: float, weights: np.ndarray, shifts: np.ndarray) -> float:
    return -8.0 * math.fsum(weights / (shifts + mu) ** 3)


def trs_secular(
    mu: float, z: SignalLike, spectrum: SpectralDecomposition, gamma: float
) -> float:
    """Evaluate phi(mu) = ||2 (2 gamma L + mu I)^-1 z||^2.

    Raises:
        ModDenoiseDomainError: If mu <= 0.

    Example:
        >>> spectrum = spectral_decomposition(build_graph("path", 2))
        >>> round(trs_secular(1.0, np.array([1, 1j]), spectrum, 0.25), 12)
        5.0
    """
    if not mu > 0:
        raise ModDenoiseDomainError(f"mu must be > 0, got {mu}")
    _validate_gamma(gamma)
    _, weights, shifts = _secular_terms(_signal_values(z, spectrum), spectrum, gamma)
    return _phi(mu, weights, shifts)


def solve_trs(
    z: SignalLike,
    spectrum: SpectralDecomposition,
    gamma: float,
    tol: float = TRS_TOLERANCE,
    max_iterations: int = TRS_MAX_ITERATIONS,
) -> TrsSolution:
    """Solve min ||g - z||^2 + gamma g* L g subject to ||g||^2 = n.

    Args:
        z: Noisy signal with <z, q_n> != 0.
        spectrum: Decomposition of the graph Laplacian.
        gamma: Regularization parameter (>= 0).
        tol: Relative tolerance |phi(mu) - n| / n of the root.
        max_iterations: Cap shared by the bracketing and refinement loops.

    Returns:
        TrsSolution with mu* in (0, 2] for torus inputs.

    Raises:
        ModDenoiseParameterError: If gamma < 0 or tol <= 0.
        ModDenoiseDegeneracyError: If |<z, q_n>| < 1e-12 sqrt(n).
        ModDenoiseNumericalError: If the root is not found within the cap,
            or the returned vector misses the sphere.
    """
    _validate_gamma(gamma)
    if not tol > 0:
        raise ModDenoiseParameterError(f"tol must be > 0, got {tol}", field="tol")
    values = _signal_values(z, spectrum)
    n = spectrum.n
    coefficients, weights, shifts = _secular_terms(values, spectrum, gamma)

    threshold = DEGENERACY_FACTOR * math.sqrt(n)
    null_projection = float(abs(coefficients[-1]))
    if null_projection < threshold:
        raise ModDenoiseDegeneracyError(null_projection, threshold)

    on_torus = isinstance(z, TorusSignal) and z.on_torus
    mu_hi = 2.0 if on_torus else 2.0 * float(np.linalg.norm(values)) / math.sqrt(n)
    phi_hi = _phi(mu_hi, weights, shifts)
    iterations = 0

    if abs(phi_hi - n) / n <= tol:
        mu = mu_hi
    else:
        mu_lo = 0.5 * mu_hi
        while _phi(mu_lo, weights, shifts) <= n:
            iterations += 1
            if iterations >= max_iterations:
                raise ModDenoiseNumericalError(
                    "secular root bracket could not be established",
                    {"mu_lo": mu_lo, "mu_hi": mu_hi, "iterations": iterations},
                )
            mu_lo *= 0.5
        mu = mu_lo
        lo, hi = mu_lo, mu_hi
        target = 1.0 / math.sqrt(n)
        converged = False
        while iterations < max_iterations:
            iterations += 1
            phi = _phi(mu, weights, shifts)
            if abs(phi - n) / n <= tol:
                converged = True
                break
            if phi > n:
                lo = mu
            else:
                hi = mu
            if hi - lo <= TRS_BRACKET_WIDTH:
                mu = 0.5 * (lo + hi)
                converged = True
                break
            slope = -0.5 * phi**-1.5 * _phi_derivative(mu, weights, shifts)
            candidate = mu - (phi**-0.5 - target) / slope
            if not (lo < candidate < hi) or not math.isfinite(candidate):
                candidate = 0.5 * (lo + hi)
            mu = candidate
        if not converged:
            raise ModDenoiseNumericalError(
                "secular equation did not converge",
                {
                    "bracket": (lo, hi),
                    "mu": mu,
                    "phi": _phi(mu, weights, shifts),
                    "iterations": iterations,
                },
            )

    scaled = 2.0 * coefficients / (shifts + mu)
    g_hat = spectrum.synthesize(scaled)
    norm_gap = abs(float(np.vdot(g_hat, g_hat).real) - n)
    z_norm = float(np.linalg.norm(values))
    kkt_residual = float(
        np.linalg.norm((shifts + mu) * spectrum.coefficients(g_hat) - 2.0 * coefficients) / z_norm
    )
    if norm_gap / n > _NORM_GAP_TOLERANCE:
        raise ModDenoiseNumericalError(
            "TRS solution is off the sphere",
            {"mu": mu, "norm_gap": norm_gap, "iterations": iterations},
        )

    logger.debug(
        f"TRS: gamma={gamma:.6g}, mu*={mu:.15g}, iterations={iterations}, "
        f"kkt={kkt_residual:.3g}"
    )
    return TrsSolution(
        g_hat=g_hat,
        mu_star=float(mu),
        gamma=float(gamma),
        kkt_residual=kkt_residual,
        norm_gap=norm_gap,
        iterations=iterations,
    )


def trs_objective(
    g: SignalLike, z: SignalLike, spectrum: SpectralDecomposition, gamma: float
) -> float:
    """||g - z||^2 + gamma g* L g."""
    g_values = _signal_values(g, spectrum)
    z_values = _signal_values(z, spectrum)
    energy = np.abs(spectrum.coefficients(g_values)) ** 2
    return math.fsum(np.abs(g_values - z_values) ** 2) + gamma * math.fsum(
        spectrum.eigenvalues * energy
    )


def project_to_torus(g: SignalLike) -> TorusSignal:
    """Entrywise projection g_i / |g_i|, with exact zeros mapped to 1.

    Example:
        >>> project_to_torus(np.array([-2.0, 0.5, 0.0])).values
        array([-1.+0.j,  1.+0.j,  1.+0.j])
    """
    values = g.values if isinstance(g, TorusSignal) else np.asarray(g, dtype=np.complex128)
    values = values.reshape(-1)
    projected = np.ones(values.shape[0], dtype=np.complex128)
    magnitude = np.abs(values)
    nonzero = magnitude > 0
    projected[nonzero] = values[nonzero] / magnitude[nonzero]
    return TorusSignal(values=projected, on_torus=True)


def estimate(
    z: SignalLike,
    spectrum: SpectralDecomposition,
    gamma: float,
    method: Union[SolverMethod, str],
    backend: Union[UcqpBackend, str] = UcqpBackend.SPECTRAL,
    graph: Optional[Graph] = None,
) -> Union[UcqpSolution, TrsSolution]:
    """Run one estimator and return its unprojected solution."""
    method = SolverMethod(method)
    if method == SolverMethod.UCQP:
        return solve_ucqp(z, spectrum, gamma, backend=backend, graph=graph)
    if method == SolverMethod.TRS:
        return solve_trs(z, spectrum, gamma)
    raise ModDenoiseParameterError(
        f"method must be 'ucqp' or 'trs', got '{method.value}'", field="method"
    )


def denoise(
    z: SignalLike,
    graph: Graph,
    gamma: float,
    method: Union[SolverMethod, str] = SolverMethod.UCQP,
    spectrum: Optional[SpectralDecomposition] = None,
    backend: Union[UcqpBackend, str] = UcqpBackend.SPECTRAL,
) -> TorusSignal:
    """Decompose, solve and project back to the torus.

    Args:
        z: Noisy signal on ``graph``.
        graph: The graph.
        gamma: Regularization parameter.
        method: UCQP or TRS.
        spectrum: Precomputed decomposition of ``graph``; computed if omitted.
        backend: UCQP backend.

    Returns:
        The projected estimate.
    """
    if spectrum is None:
        spectrum = spectral_decomposition(graph)
    solution = estimate(z, spectrum, gamma, method, backend=backend, graph=graph)
    return project_to_torus(solution.g_hat)


__all__ = [
    "denoise",
    "estimate",
    "project_to_torus",
    "solve_trs",
    "solve_ucqp",
    "trs_objective",
    "trs_secular",
]
