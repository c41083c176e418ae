"""Denoising of modulo-1 samples on graphs.

A smooth function is observed only through the fractional part of noisy
samples. Each sample is mapped to the unit circle, h_i = exp(2 pi i f_i mod 1),
and the noisy points z_i are denoised by smoothing over a graph whose edges
join related samples. Two estimators are provided:

    - **UCQP**: unconstrained quadratic smoothing,
      (I + gamma L) g = z, then entrywise projection onto the circle.
    - **TRS**: a trust-region form on the sphere ||g|| = sqrt(n), solved
      exactly through its secular equation, then projected.

Key features:
    - Path, cycle, complete and star graphs, or any connected edge list
    - Closed-form and high-probability error bounds with their hypotheses
      reported inequality by inequality
    - Regularization rules for gamma (general, path-Lipschitz, linear)
    - Noise-sweep harness with reproducible per-trial seeds and an
      async context-managed worker pool
    - Monte-Carlo checks of the noise identities and concentration events
    - CSV output via pandas and optional SVG plots via matplotlib

Experiments:
    Sweeps run on a thread pool behind an async context manager::

        from moddenoise import Experiment, sqrt_gamma_sweep_config

        async with Experiment(sqrt_gamma_sweep_config("f1")) as experiment:
            result = await experiment.sweep()

Example:
    Denoise a path-graph sample::

        from moddenoise import (
            FunctionSpec, NoiseModel, add_modulo_noise, build_graph,
            denoise, lift_to_torus, mse, sample_function,
        )

        graph = build_graph("path", 500)
        _, f = sample_function(FunctionSpec(kind="f1"), 500)
        h = lift_to_torus(f)
        z = add_modulo_noise(h, NoiseModel(sigma=0.05, seed=1))
        g = denoise(z, graph, gamma=30.0, method="trs")
        print(mse(z, h), mse(g, h))

    Check the hypotheses of a claim::

        from moddenoise import check_denoising_conditions, BoundQuery

        q = BoundQuery(n=500, delta=2, sigma=0.01, B_n=0.5, lambda_bar=0.01, L_size=15)
        print(check_denoising_conditions("ucqp-high-probability", q))

See Also:
    - ``moddenoise --help`` for the command-line front end
"""

from .bounds import (
    bound_curve,
    check_denoising_conditions,
    concentration_failure_probability,
    concentration_mean,
    concentration_rhs,
    gamma_rule,
    mu_star_lower_bound,
    mu_star_spectral_lower_bound,
    order_level_error_bound,
    simplified_concentration,
    trs_highprob_bound,
    trs_oracle_bound,
    ucqp_expected_bound,
    ucqp_highprob_bound,
    ucqp_oracle_bound,
)
from .cache import SpectrumCache, graph_fingerprint
from .exceptions import (
    ModDenoiseConnectivityError,
    ModDenoiseDegeneracyError,
    ModDenoiseDomainError,
    ModDenoiseError,
    ModDenoiseNumericalError,
    ModDenoiseParameterError,
    ModDenoiseTrialError,
    ModDenoiseUnsupportedFamilyError,
    ModDenoiseValidationError,
)
from .experiment import (
    Experiment,
    linear_gamma_sweep_config,
    log_sigma_grid,
    run_trial,
    sqrt_gamma_sweep_config,
    sweep_sigma,
    sweep_sigma_async,
    verify_event_bound,
    verify_identity,
)
from .graph import (
    analytic_spectrum,
    build_custom_graph,
    build_graph,
    laplacian,
    spectral_decomposition,
    spectral_sets,
)
from .models import (
    BoundQuery,
    ConditionCheck,
    ConditionReport,
    EventCheck,
    EventParams,
    ExperimentConfig,
    ExpectedBound,
    FunctionSpec,
    GammaRule,
    Graph,
    HighProbabilityBound,
    IdentityCheck,
    MuStarBound,
    NoiseModel,
    SpectralDecomposition,
    SpectralIndexSets,
    SweepResult,
    SweepRow,
    TorusSignal,
    TrialRecord,
    TrsSolution,
    UcqpSolution,
)
from .signal import (
    add_modulo_noise,
    lift_to_torus,
    make_generator,
    mse,
    sample_function,
    smoothness,
)
from .solvers import denoise, estimate, project_to_torus, solve_trs, solve_ucqp
from .types import (
    BoundKind,
    ConcentrationItem,
    DenoisingClaim,
    EventKind,
    ExitCode,
    FunctionKind,
    GammaRuleKind,
    GraphFamily,
    NoiseIdentity,
    SimplifiedConcentration,
    SolverMethod,
    UcqpBackend,
)

__version__ = "1.0.0"

__all__ = [
    # graphs and spectra
    "Graph",
    "GraphFamily",
    "SpectralDecomposition",
    "SpectralIndexSets",
    "SpectrumCache",
    "analytic_spectrum",
    "build_custom_graph",
    "build_graph",
    "graph_fingerprint",
    "laplacian",
    "spectral_decomposition",
    "spectral_sets",
    # signals
    "FunctionKind",
    "FunctionSpec",
    "NoiseModel",
    "TorusSignal",
    "add_modulo_noise",
    "lift_to_torus",
    "make_generator",
    "mse",
    "sample_function",
    "smoothness",
    # estimators
    "SolverMethod",
    "TrsSolution",
    "UcqpBackend",
    "UcqpSolution",
    "denoise",
    "estimate",
    "project_to_torus",
    "solve_trs",
    "solve_ucqp",
    # bounds
    "BoundKind",
    "BoundQuery",
    "ConcentrationItem",
    "ConditionCheck",
    "ConditionReport",
    "DenoisingClaim",
    "ExpectedBound",
    "GammaRule",
    "GammaRuleKind",
    "HighProbabilityBound",
    "MuStarBound",
    "SimplifiedConcentration",
    "bound_curve",
    "check_denoising_conditions",
    "concentration_failure_probability",
    "concentration_mean",
    "concentration_rhs",
    "gamma_rule",
    "mu_star_lower_bound",
    "mu_star_spectral_lower_bound",
    "order_level_error_bound",
    "simplified_concentration",
    "trs_highprob_bound",
    "trs_oracle_bound",
    "ucqp_expected_bound",
    "ucqp_highprob_bound",
    "ucqp_oracle_bound",
    # experiments
    "EventCheck",
    "EventKind",
    "EventParams",
    "Experiment",
    "ExperimentConfig",
    "IdentityCheck",
    "NoiseIdentity",
    "SweepResult",
    "SweepRow",
    "TrialRecord",
    "linear_gamma_sweep_config",
    "log_sigma_grid",
    "run_trial",
    "sqrt_gamma_sweep_config",
    "sweep_sigma",
    "sweep_sigma_async",
    "verify_event_bound",
    "verify_identity",
    # errors
    "ExitCode",
    "ModDenoiseConnectivityError",
    "ModDenoiseDegeneracyError",
    "ModDenoiseDomainError",
    "ModDenoiseError",
    "ModDenoiseNumericalError",
    "ModDenoiseParameterError",
    "ModDenoiseTrialError",
    "ModDenoiseUnsupportedFamilyError",
    "ModDenoiseValidationError",
]
