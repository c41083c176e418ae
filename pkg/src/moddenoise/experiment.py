"""Deterministic Monte-Carlo harness: trials, noise-level sweeps and
empirical checks of the noise identities and concentration events.

Every random draw comes from ``make_generator(base_seed, sigma_index,
trial_index)``, so a sweep is a pure function of its ExperimentConfig and
trials may run in any order on any number of threads.

Key features:
    - Experiment: async context manager owning the worker pool and the
      per-config context (graph, spectrum, ground truth)
    - run_trial / sweep_sigma / sweep_sigma_async
    - verify_identity: Monte-Carlo estimates of closed-form noise moments
    - verify_event_bound: violation frequencies of high-probability events
    - Bundled reproduction configs for the sqrt-gamma and linear-gamma sweeps

Example:
    Running the linear-gamma sweep for f2::

        from moddenoise import FunctionKind, linear_gamma_sweep_config, sweep_sigma

        result = sweep_sigma(linear_gamma_sweep_config(FunctionKind.F2))
        for row in result.rows:
            print(row.sigma, row.method.value, row.mean_mse)
"""

import asyncio
import logging
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional, Union

import numpy as np

from .bounds import (
    concentration_failure_probability,
    concentration_mean,
    concentration_rhs,
    gamma_rule,
    mu_star_lower_bound,
)
from .cache import SpectrumCache
from .exceptions import (
    ModDenoiseError,
    ModDenoiseParameterError,
    ModDenoiseTrialError,
    ModDenoiseValidationError,
)
from .graph import build_graph, spectral_decomposition
from .models import (
    BoundQuery,
    EventCheck,
    EventParams,
    ExperimentConfig,
    FunctionSpec,
    GammaRule,
    Graph,
    IdentityCheck,
    NoiseModel,
    SpectralDecomposition,
    SweepResult,
    SweepRow,
    TorusSignal,
    TrialRecord,
)
from .signal import add_modulo_noise, lift_to_torus, make_generator, mse, sample_function, smoothness
from .solvers import estimate, project_to_torus, solve_trs
from .types import (
    CAPTION_SIGMA_RANGE,
    DEFAULT_TRIALS,
    LINEAR_GAMMA_SLOPE,
    LOW_SIGMA_RANGE,
    REPRODUCTION_SIZE,
    SIGMA_POINTS_PER_DECADE,
    THREADS_ENV_VAR,
    ConcentrationItem,
    EventKind,
    FunctionKind,
    GammaRuleKind,
    GraphFamily,
    NoiseIdentity,
    SolverMethod,
)

logger = logging.getLogger(__name__)

_MIN_IDENTITY_TRIALS = 30


def log_sigma_grid(
    lo: float, hi: float, per_decade: int = SIGMA_POINTS_PER_DECADE
) -> list[float]:
    """Log-spaced noise levels from ``lo`` to ``hi`` inclusive.

    The grid has ceil(per_decade * log10(hi / lo)) + 1 points.

    Example:
        >>> len(log_sigma_grid(1e-3, 0.096))
        25
        >>> len(log_sigma_grid(1e-4, 1e-3))
        13
    """
    if not 0 < lo <= hi:
        raise ModDenoiseValidationError(f"grid endpoints must satisfy 0 < lo <= hi, got {lo}, {hi}")
    if per_decade < 1:
        raise ModDenoiseValidationError(f"per_decade must be >= 1, got {per_decade}")
    if lo == hi:
        return [float(lo)]
    count = math.ceil(per_decade * math.log10(hi / lo) - 1e-9) + 1
    grid = np.geomspace(lo, hi, max(count, 2))
    grid[0], grid[-1] = lo, hi
    return [float(s) for s in grid]


def resolve_max_workers(max_workers: Optional[int] = None) -> int:
    """Worker cap: explicit value, else MODDENOISE_THREADS, else the CPU count."""
    if max_workers is not None:
        return max_workers
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            value = int(env)
        except ValueError:
            logger.warning(f"Ignoring {THREADS_ENV_VAR}={env!r}: not an integer")
        else:
            if value >= 1:
                return value
            logger.warning(f"Ignoring {THREADS_ENV_VAR}={env!r}: must be >= 1")
    return os.cpu_count() or 1


@dataclass(frozen=True)
class TrialContext:
    """Read-only state shared by every trial of one config."""

    graph: Graph
    spectrum: SpectralDecomposition
    x: np.ndarray
    samples: np.ndarray
    h: TorusSignal
    B_n: float


def _build_context(
    n: int,
    family: GraphFamily,
    function: FunctionSpec,
    cache: Optional[SpectrumCache] = None,
) -> TrialContext:
    graph = build_graph(family, n)
    spectrum = cache.get_or_compute(graph) if cache is not None else spectral_decomposition(graph)
    x, samples = sample_function(function, n)
    samples.setflags(write=False)
    h = lift_to_torus(samples)
    return TrialContext(
        graph=graph,
        spectrum=spectrum,
        x=x,
        samples=samples,
        h=h,
        B_n=smoothness(h, graph),
    )


def _gamma_for(rule: GammaRule, context: TrialContext, function: FunctionSpec, sigma: float) -> float:
    lambda_bar = rule.lambda_bar if rule.lambda_bar is not None else context.spectrum.lambda_min
    q = BoundQuery.from_spectrum(
        context.spectrum,
        context.graph,
        lambda_bar=lambda_bar,
        sigma=sigma,
        B_n=context.B_n,
        M=function.lipschitz,
        theta=rule.theta,
    )
    return gamma_rule(rule, q)


class Experiment:
    """Runs the trials of one ExperimentConfig on a thread pool.

    The graph, its decomposition and the ground truth are built once, on
    first use, and shared read-only by every trial.

    Args:
        config: The sweep to run.
        cache: Decomposition cache; a private memory cache if omitted.

    Attributes:
        config: The ExperimentConfig.
        _executor: Lazily created ThreadPoolExecutor.

    Example:
        Using as async context manager (recommended)::

            async with Experiment(config) as experiment:
                result = await experiment.sweep()

        Manual resource management::

            experiment = Experiment(config)
            try:
                result = await experiment.sweep()
            finally:
                await experiment.close()
    """

    def __init__(self, config: ExperimentConfig, *, cache: Optional[SpectrumCache] = None) -> None:
        self.config = config
        self._cache = cache if cache is not None else SpectrumCache()
        self._executor: Optional[ThreadPoolExecutor] = None
        self._context: Optional[TrialContext] = None
        self._gammas: dict[float, float] = {}
        self._lock = threading.Lock()

    async def __aenter__(self) -> "Experiment":
        self._ensure_executor()
        return self

    async def __aexit__(self, *args: Any) -> None:
        await self.close()

    def _ensure_executor(self) -> ThreadPoolExecutor:
        if self._executor is None:
            workers = resolve_max_workers(self.config.max_workers)
            self._executor = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="moddenoise")
            logger.debug(f"Started trial pool with {workers} workers")
        return self._executor

    async def close(self) -> None:
        """Shut the worker pool down. Safe to call multiple times."""
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    @property
    def context(self) -> TrialContext:
        with self._lock:
            if self._context is None:
                cfg = self.config
                self._context = _build_context(cfg.n, cfg.graph_family, cfg.function, self._cache)
                logger.debug(
                    f"Built trial context: {cfg.graph_family.value} n={cfg.n}, "
                    f"{cfg.function.kind.value}, B_n={self._context.B_n:.6g}"
                )
            return self._context

    def gamma(self, sigma: float) -> float:
        """Regularization chosen by the config's rule at ``sigma``."""
        context = self.context
        with self._lock:
            if sigma not in self._gammas:
                self._gammas[sigma] = _gamma_for(
                    self.config.gamma_rule, context, self.config.function, sigma
                )
            return self._gammas[sigma]

    def run_trial(self, sigma: float, trial_index: int, sigma_index: int = 0) -> TrialRecord:
        """Run every configured estimator on one noisy draw.

        The draw uses the stream (base_seed, sigma_index, trial_index), so the
        same indices always reproduce the same record.

        Raises:
            ModDenoiseTrialError: If an estimator fails. The solver error is
                chained as ``__cause__`` and ``partial`` is empty.
        """
        cfg = self.config
        context = self.context
        gamma = self.gamma(sigma)
        rng = make_generator(cfg.base_seed, sigma_index, trial_index)
        z = add_modulo_noise(context.h, NoiseModel(sigma=sigma, seed=cfg.base_seed), rng)

        errors = {SolverMethod.INPUT: mse(z, context.h)}
        mu_star = None
        for method in cfg.methods:
            try:
                solution = estimate(
                    z, context.spectrum, gamma, method, backend=cfg.backend, graph=context.graph
                )
            except ModDenoiseError as e:
                logger.debug(f"{method.value} failed in trial {trial_index} at sigma={sigma:.6g}: {e}")
                raise ModDenoiseTrialError(sigma, trial_index) from e
            errors[method] = mse(project_to_torus(solution.g_hat), context.h)
            if method == SolverMethod.TRS:
                mu_star = solution.mu_star
        return TrialRecord(
            sigma=sigma,
            sigma_index=sigma_index,
            trial_index=trial_index,
            gamma=gamma,
            mse=errors,
            mu_star=mu_star,
        )

    async def sweep(self) -> SweepResult:
        """Run trials x sigma_grid concurrently and aggregate.

        Raises:
            ModDenoiseTrialError: If any trial fails. The earliest failing
                (sigma, trial) is reported and every completed record is
                attached as ``partial``.
        """
        cfg = self.config
        executor = self._ensure_executor()
        loop = asyncio.get_running_loop()
        context = self.context

        tasks = [
            (sigma_index, trial_index, sigma)
            for sigma_index, sigma in enumerate(cfg.sigma_grid)
            for trial_index in range(cfg.trials)
        ]
        logger.info(
            f"Sweeping {len(cfg.sigma_grid)} noise levels x {cfg.trials} trials "
            f"({', '.join(m.value for m in cfg.methods)}; B_n={context.B_n:.6g})"
        )
        futures = [
            loop.run_in_executor(executor, self.run_trial, sigma, trial_index, sigma_index)
            for sigma_index, trial_index, sigma in tasks
        ]
        outcomes = await asyncio.gather(*futures, return_exceptions=True)

        records = [r for r in outcomes if isinstance(r, TrialRecord)]
        for (sigma_index, trial_index, sigma), outcome in zip(tasks, outcomes):
            if isinstance(outcome, BaseException):
                cause = outcome
                if isinstance(outcome, ModDenoiseTrialError) and outcome.__cause__ is not None:
                    cause = outcome.__cause__
                logger.error(f"Trial {trial_index} at sigma={sigma:.6g} failed: {cause}")
                raise ModDenoiseTrialError(sigma, trial_index, _sorted(records)) from cause
        return SweepResult(config=cfg, rows=aggregate(records, cfg.methods))


def _sorted(records: list[TrialRecord]) -> list[TrialRecord]:
    return sorted(records, key=lambda r: (r.sigma_index, r.trial_index))


def _mean_and_stderr(values: list[float]) -> tuple[float, float]:
    count = len(values)
    mean = math.fsum(values) / count
    if count < 2:
        return mean, 0.0
    variance = math.fsum((v - mean) ** 2 for v in values) / (count - 1)
    return mean, math.sqrt(variance / count)


def aggregate(records: list[TrialRecord], methods: list[SolverMethod]) -> list[SweepRow]:
    """Mean and standard error per (sigma, method), input first.

    Records are sorted by (sigma_index, trial_index) before summation, so the
    result does not depend on completion order.
    """
    grouped: dict[int, list[TrialRecord]] = {}
    for record in _sorted(records):
        grouped.setdefault(record.sigma_index, []).append(record)

    rows = []
    for sigma_index in sorted(grouped):
        group = grouped[sigma_index]
        first = group[0]
        for method in [SolverMethod.INPUT, *methods]:
            mean, stderr = _mean_and_stderr([r.mse[method] for r in group])
            mean_mu_star = None
            if method == SolverMethod.TRS:
                mean_mu_star, _ = _mean_and_stderr([r.mu_star for r in group])
            rows.append(
                SweepRow(
                    sigma=first.sigma,
                    method=method,
                    mean_mse=mean,
                    stderr_mse=stderr,
                    mean_mu_star=mean_mu_star,
                    trials=len(group),
                    gamma=first.gamma,
                )
            )
    return rows


def run_trial(
    cfg: ExperimentConfig, sigma: float, trial_index: int, sigma_index: int = 0
) -> TrialRecord:
    """Run one trial outside a sweep.

    Example:
        >>> first = run_trial(cfg, 0.05, trial_index=3, sigma_index=1)
        >>> first == run_trial(cfg, 0.05, trial_index=3, sigma_index=1)
        True
    """
    return Experiment(cfg).run_trial(sigma, trial_index, sigma_index)


async def sweep_sigma_async(
    cfg: ExperimentConfig, *, cache: Optional[SpectrumCache] = None
) -> SweepResult:
    async with Experiment(cfg, cache=cache) as experiment:
        return await experiment.sweep()


def sweep_sigma(cfg: ExperimentConfig, *, cache: Optional[SpectrumCache] = None) -> SweepResult:
    """Blocking wrapper around ``sweep_sigma_async``."""
    return asyncio.run(sweep_sigma_async(cfg, cache=cache))


# Bundled reproduction configs


def sqrt_gamma_sweep_config(
    function: Union[FunctionKind, str],
    *,
    sigma_range: tuple[float, float] = CAPTION_SIGMA_RANGE,
    trials: int = DEFAULT_TRIALS,
    base_seed: int = 0,
) -> ExperimentConfig:
    """Path graph, n = 500, gamma = (sigma^2 n^(10/3))^(1/4).

    With the default range this is the main sweep; with LOW_SIGMA_RANGE it is
    the low-noise run where the estimators only match the input.
    """
    return ExperimentConfig(
        n=REPRODUCTION_SIZE,
        function=FunctionSpec(kind=FunctionKind(function)),
        graph_family=GraphFamily.PATH,
        sigma_grid=log_sigma_grid(*sigma_range),
        trials=trials,
        gamma_rule=GammaRule(kind=GammaRuleKind.PATH_LIPSCHITZ),
        base_seed=base_seed,
    )


def linear_gamma_sweep_config(
    function: Union[FunctionKind, str],
    *,
    slope: float = LINEAR_GAMMA_SLOPE,
    sigma_range: tuple[float, float] = LOW_SIGMA_RANGE,
    trials: int = DEFAULT_TRIALS,
    base_seed: int = 0,
) -> ExperimentConfig:
    """Path graph, n = 500, gamma = 400 sigma over the low-noise range."""
    return ExperimentConfig(
        n=REPRODUCTION_SIZE,
        function=FunctionSpec(kind=FunctionKind(function)),
        graph_family=GraphFamily.PATH,
        sigma_grid=log_sigma_grid(*sigma_range),
        trials=trials,
        gamma_rule=GammaRule(kind=GammaRuleKind.LINEAR, constant=slope),
        base_seed=base_seed,
    )


# Empirical verification


def _identity_statistic(
    identity: NoiseIdentity, z: np.ndarray, h: np.ndarray, u: np.ndarray, shrink: float
) -> float:
    n = h.shape[0]
    if identity == NoiseIdentity.MEAN:
        return float(np.vdot(h, z).real) / n
    if identity == NoiseIdentity.CENTRED_PROJECTION:
        return float(abs(np.vdot(u, z - shrink * h)) ** 2)
    if identity == NoiseIdentity.PROJECTION_ENERGY:
        return float(abs(np.vdot(u, z)) ** 2)
    if identity == NoiseIdentity.CENTRED_NORM:
        return math.fsum(np.abs(z - shrink * h) ** 2)
    return math.fsum(np.abs(z - h) ** 2)


def _identity_value(identity: NoiseIdentity, n: int, sigma: float, h: np.ndarray, u: np.ndarray) -> float:
    e2 = math.exp(-2.0 * math.pi**2 * sigma**2)
    e4 = math.exp(-4.0 * math.pi**2 * sigma**2)
    if identity == NoiseIdentity.MEAN:
        return e2
    if identity == NoiseIdentity.CENTRED_PROJECTION:
        return 1.0 - e4
    if identity == NoiseIdentity.PROJECTION_ENERGY:
        return e4 * float(abs(np.vdot(u, h)) ** 2) + 1.0 - e4
    if identity == NoiseIdentity.CENTRED_NORM:
        return n * (1.0 - e4)
    return 2.0 * n * (1.0 - e2)


def verify_identity(
    identity: Union[NoiseIdentity, str],
    n: int,
    sigma: float,
    trials: int = 200,
    seed: int = 0,
    function: Union[FunctionKind, str] = FunctionKind.F2,
) -> IdentityCheck:
    """Monte-Carlo check of a closed-form moment of the noise model.

    h is the lift of ``function`` on the uniform grid. The projection
    identities use a complex Gaussian direction u, normalized to unit length
    and drawn once from the stream (seed, trials). Trial t draws its noise
    from the stream (seed, t).

    Statistics:
        * MEAN: Re<z, h> / n against e^(-2 pi^2 sigma^2).
        * CENTRED_PROJECTION: |<z - e^(-2 pi^2 sigma^2) h, u>|^2.
        * PROJECTION_ENERGY: |<z, u>|^2.
        * CENTRED_NORM: ||z - e^(-2 pi^2 sigma^2) h||^2.
        * INPUT_ERROR, INPUT_ERROR_SANDWICH: ||z - h||^2; the sandwich also
          reports [2 pi^2 sigma^2 n, 4 pi^2 sigma^2 n] as (lower, upper).

    Raises:
        ModDenoiseParameterError: If trials < 30.
    """
    identity = NoiseIdentity(identity)
    if trials < _MIN_IDENTITY_TRIALS:
        raise ModDenoiseParameterError(
            f"trials must be >= {_MIN_IDENTITY_TRIALS}, got {trials}", field="trials"
        )
    spec = FunctionSpec(kind=FunctionKind(function))
    _, samples = sample_function(spec, n)
    h_signal = lift_to_torus(samples)
    h = h_signal.values
    direction = make_generator(seed, trials)
    u = direction.standard_normal(n) + 1j * direction.standard_normal(n)
    u /= np.linalg.norm(u)
    shrink = math.exp(-2.0 * math.pi**2 * sigma**2)
    noise = NoiseModel(sigma=sigma, seed=seed)

    values = []
    for t in range(trials):
        z = add_modulo_noise(h_signal, noise, make_generator(seed, t)).values
        values.append(_identity_statistic(identity, z, h, u, shrink))
    empirical, stderr = _mean_and_stderr(values)
    theoretical = _identity_value(identity, n, sigma, h, u)

    scale = max(1.0, abs(theoretical))
    discrepancy = empirical - theoretical
    if stderr > 1e-14 * scale:
        z_score = discrepancy / stderr
    else:
        z_score = 0.0 if abs(discrepancy) <= 1e-12 * scale else math.copysign(math.inf, discrepancy)

    lower = upper = None
    if identity == NoiseIdentity.INPUT_ERROR_SANDWICH:
        lower = 2.0 * math.pi**2 * sigma**2 * n
        upper = 4.0 * math.pi**2 * sigma**2 * n
        if sigma > 1.0 / (math.pi * math.sqrt(2.0)):
            logger.warning(f"sigma={sigma} exceeds 1/(pi sqrt 2); the sandwich is not guaranteed")

    logger.debug(
        f"{identity.value}: empirical={empirical:.6g}, theoretical={theoretical:.6g}, z={z_score:.3g}"
    )
    return IdentityCheck(
        identity=identity.value,
        empirical=empirical,
        theoretical=theoretical,
        stderr=stderr,
        z_score=z_score,
        lower=lower,
        upper=upper,
    )


def _default_k(params: EventParams) -> int:
    if params.k is not None:
        return params.k
    if params.family == GraphFamily.PATH:
        return min(1 + math.isqrt(params.n), params.n - 1)
    return 1


def verify_event_bound(
    item: Union[EventKind, str],
    params: EventParams,
    trials: int = 10_000,
    seed: int = 0,
) -> EventCheck:
    """Count how often a high-probability event fails.

    U holds the k lowest-frequency eigenvectors of the graph in ``params``.
    Trial t draws from the stream (seed, t).

    Events:
        * PROJECTED_ENERGY: ||U^T (z - e^(-2 pi^2 sigma^2) h)||^2 stays below
          concentration_rhs(II). Budget 2/n^2.
        * INPUT_ERROR_DEVIATION: ||z - h||^2 exceeds its mean by at most
          concentration_rhs(III). Budget 2/n^2.
        * CENTRED_NORM_DEVIATION: the same for ||z - e^(-2 pi^2 sigma^2) h||^2
          and concentration_rhs(IV). Budget 2/n^2.
        * MULTIPLIER_LOWER_BOUND: the solved mu* is at least
          mu_star_lower_bound. Budget 4/n^2; ``conditions_hold`` reports
          whether the bound's hypotheses are met.

    With ``two_sided`` the reversed deviation is counted as well and the
    budget doubles.

    A frequency is compatible with its budget p when it is at most
    p + 3 sqrt(p (1 - p) / trials); 1/p trials are needed before a single
    violation is informative.
    """
    item = EventKind(item)
    if trials < 1:
        raise ModDenoiseParameterError(f"trials must be >= 1, got {trials}", field="trials")
    n, sigma = params.n, params.sigma
    context = _build_context(n, params.family, FunctionSpec(kind=params.function))
    spectrum = context.spectrum
    h = context.h.values
    k = _default_k(params)
    shrink = math.exp(-2.0 * math.pi**2 * sigma**2)
    noise = NoiseModel(sigma=sigma, seed=seed)

    conditions_hold: Optional[bool] = None
    if item == EventKind.MULTIPLIER_LOWER_BOUND:
        gamma = params.gamma
        if gamma is None:
            gamma = gamma_rule(
                GammaRuleKind.PATH_LIPSCHITZ, BoundQuery(n=n, sigma=sigma)
            )
        q = BoundQuery.from_spectrum(spectrum, context.graph, k=k, sigma=sigma, B_n=context.B_n)
        bound = mu_star_lower_bound(q, gamma)
        conditions_hold = bound.conditions_hold
        probability = 4.0 / n**2
    else:
        concentration = {
            EventKind.PROJECTED_ENERGY: ConcentrationItem.II,
            EventKind.INPUT_ERROR_DEVIATION: ConcentrationItem.III,
            EventKind.CENTRED_NORM_DEVIATION: ConcentrationItem.IV,
        }[item]
        mean = concentration_mean(concentration, n, sigma, k=k)
        rhs = concentration_rhs(concentration, n, sigma, k=k)
        deviation = rhs - mean if concentration == ConcentrationItem.II else rhs
        probability = concentration_failure_probability(concentration, n)
        if params.two_sided:
            probability *= 2.0
        basis = spectrum.low_frequency_basis(k)

    violations = 0
    for t in range(trials):
        z = add_modulo_noise(context.h, noise, make_generator(seed, t))
        if item == EventKind.MULTIPLIER_LOWER_BOUND:
            mu_star = solve_trs(z, spectrum, gamma).mu_star
            violations += mu_star < bound.value
            continue
        if item == EventKind.PROJECTED_ENERGY:
            lhs = float(np.sum(np.abs(basis.T @ (z.values - shrink * h)) ** 2))
        elif item == EventKind.INPUT_ERROR_DEVIATION:
            lhs = math.fsum(np.abs(z.values - h) ** 2)
        else:
            lhs = math.fsum(np.abs(z.values - shrink * h) ** 2)
        excess = lhs - mean
        violations += excess > deviation or (params.two_sided and excess < -deviation)

    check = EventCheck(
        event=item.value,
        violations=int(violations),
        trials=trials,
        failure_budget=probability,
        conditions_hold=conditions_hold,
    )
    logger.debug(
        f"{item.value}: {check.violations}/{trials} violations, budget {probability:.3g}"
    )
    return check


__all__ = [
    "Experiment",
    "TrialContext",
    "aggregate",
    "linear_gamma_sweep_config",
    "log_sigma_grid",
    "resolve_max_workers",
    "run_trial",
    "sqrt_gamma_sweep_config",
    "sweep_sigma",
    "sweep_sigma_async",
    "verify_event_bound",
    "verify_identity",
]
