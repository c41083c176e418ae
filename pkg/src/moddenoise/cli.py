"""Command-line front end.

Subcommands:
    spectrum   Laplacian eigenvalues of a graph as ``j,lambda_j``
    denoise    Denoise a signal file or a synthetic draw, write ``i,re,im``
    sweep      Run a noise-level sweep from a JSON config
    bounds     Tabulate an error bound over a sigma grid
    check      Evaluate the hypotheses of a denoising claim

Exit codes:
    0 ok, 1 condition unsatisfied, 2 validation error, 3 degenerate input,
    4 numerical failure, 5 trial failure.

Example:
    From a shell::

        moddenoise spectrum --family path --n 3
        moddenoise sweep --config configs/sqrt_gamma_f1.json --out f1.csv --plot f1.svg
        moddenoise check thm2 --query query.json
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import pydantic

from .bounds import bound_curve, check_denoising_conditions, gamma_rule
from .dataframe import (
    bounds_to_dataframe,
    read_edge_list,
    read_signal_csv,
    signal_to_dataframe,
    spectrum_to_dataframe,
    sweep_to_dataframe,
    trials_to_dataframe,
    write_csv,
)
from .exceptions import (
    ModDenoiseDegeneracyError,
    ModDenoiseError,
    ModDenoiseNumericalError,
    ModDenoiseParameterError,
    ModDenoiseTrialError,
    ModDenoiseValidationError,
)
from .experiment import log_sigma_grid, sqrt_gamma_sweep_config, sweep_sigma
from .graph import build_graph, spectral_decomposition
from .models import BoundQuery, ExperimentConfig, FunctionSpec, GammaRule, Graph, NoiseModel
from .signal import add_modulo_noise, lift_to_torus, mse, sample_function, smoothness
from .solvers import estimate, project_to_torus
from .types import (
    CAPTION_SIGMA_RANGE,
    INPUT_TORUS_TOLERANCE,
    LINEAR_GAMMA_SLOPE,
    BoundKind,
    ExitCode,
    GammaRuleKind,
    GraphFamily,
    SolverMethod,
    UcqpBackend,
)

logger = logging.getLogger(__name__)


# Argument parsing helpers


def _parse_gamma_rule(text: str) -> GammaRule:
    """``lemma2``, ``path-lipschitz``, ``linear[:C]`` or ``family``."""
    kind, _, constant = text.partition(":")
    try:
        rule_kind = GammaRuleKind(kind.strip().lower())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"gamma rule must be one of lemma2, path-lipschitz, linear:C, family; got '{text}'"
        )
    if rule_kind == GammaRuleKind.LINEAR:
        slope = float(constant) if constant else LINEAR_GAMMA_SLOPE
        return GammaRule(kind=rule_kind, constant=slope)
    if constant:
        return GammaRule(kind=rule_kind, constant=float(constant))
    return GammaRule(kind=rule_kind)


def _parse_sigma_grid(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sigma grid must be a comma list of numbers, got '{text}'")


def _methods(choice: str) -> list[SolverMethod]:
    if choice == "both":
        return [SolverMethod.UCQP, SolverMethod.TRS]
    return [SolverMethod(choice)]


def _add_graph_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=[f.value for f in GraphFamily if f != GraphFamily.CUSTOM])
    parser.add_argument("--n", type=int, help="number of vertices")
    parser.add_argument("--edges", type=Path, metavar="FILE", help="1-based edge list")


def _graph_from_args(args: argparse.Namespace, default_family: Optional[str] = "path") -> Optional[Graph]:
    if args.edges is not None:
        return read_edge_list(args.edges, n=args.n)
    family = args.family or default_family
    if family is None:
        return None
    if args.n is None:
        raise ModDenoiseParameterError("--n is required with --family", field="n")
    return build_graph(family, args.n)


def _load_query_fields(path: Optional[Path]) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        fields = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ModDenoiseValidationError(f"query {path} is not valid JSON: {e}") from e
    if not isinstance(fields, dict):
        raise ModDenoiseValidationError(f"query {path} must hold a JSON object")
    return fields


def _build_query(args: argparse.Namespace) -> BoundQuery:
    fields = _load_query_fields(args.query)
    graph = _graph_from_args(args, default_family=None)
    if graph is None:
        return BoundQuery(**fields)
    spectrum = spectral_decomposition(graph)
    lambda_bar = fields.pop("lambda_bar", None)
    k = fields.pop("k", None)
    return BoundQuery.from_spectrum(spectrum, graph, lambda_bar=lambda_bar, k=k, **fields)


def _emit(df: Any, out: Optional[Path]) -> None:
    write_csv(df, out if out is not None else sys.stdout)


# Subcommands


def cmd_spectrum(args: argparse.Namespace) -> int:
    graph = _graph_from_args(args)
    spectrum = spectral_decomposition(graph)
    _emit(spectrum_to_dataframe(spectrum), args.out)
    print(
        f"lambda_min={spectrum.lambda_min:.17g} delta={graph.max_degree}",
        file=sys.stdout if args.out is not None else sys.stderr,
    )
    return ExitCode.OK


def _denoise_gamma(
    args: argparse.Namespace, graph: Graph, spectrum: Any, truth: Any, spec: Optional[FunctionSpec]
) -> float:
    if args.gamma is not None:
        return args.gamma
    if args.gamma_rule is None:
        raise ModDenoiseParameterError("--gamma or --gamma-rule is required", field="gamma")
    if args.sigma is None:
        raise ModDenoiseParameterError("--sigma is required with --gamma-rule", field="sigma")
    rule = args.gamma_rule
    fields: dict[str, Any] = {"sigma": args.sigma}
    if truth is not None:
        fields["B_n"] = smoothness(truth, graph)
    if spec is not None:
        fields["M"] = spec.lipschitz
    lambda_bar = rule.lambda_bar if rule.lambda_bar is not None else spectrum.lambda_min
    q = BoundQuery.from_spectrum(spectrum, graph, lambda_bar=lambda_bar, **fields)
    return gamma_rule(rule, q)


def cmd_denoise(args: argparse.Namespace) -> int:
    graph = _graph_from_args(args)
    spec = None
    truth = None
    if args.signal is not None:
        z = read_signal_csv(
            args.signal, tolerance=INPUT_TORUS_TOLERANCE, require_torus=not args.raw
        )
        if args.truth is not None:
            truth = read_signal_csv(args.truth, tolerance=INPUT_TORUS_TOLERANCE)
    else:
        if args.sigma is None:
            raise ModDenoiseParameterError("--sigma is required for a synthetic input", field="sigma")
        spec = FunctionSpec(kind=args.function)
        _, samples = sample_function(spec, graph.n)
        truth = lift_to_torus(samples)
        z = add_modulo_noise(truth, NoiseModel(sigma=args.sigma, seed=args.seed))
    if z.n != graph.n:
        raise ModDenoiseValidationError(f"signal length must equal n={graph.n}, got {z.n}")

    spectrum = spectral_decomposition(graph)
    gamma = _denoise_gamma(args, graph, spectrum, truth, spec)
    solution = estimate(z, spectrum, gamma, args.method, backend=args.backend, graph=graph)
    g_proj = project_to_torus(solution.g_hat)
    _emit(signal_to_dataframe(g_proj), args.out)

    report = [f"method={args.method} gamma={gamma:.17g}"]
    if args.method == SolverMethod.TRS.value:
        report.append(f"mu_star={solution.mu_star:.17g} kkt_residual={solution.kkt_residual:.3g}")
    else:
        report.append(f"residual={solution.residual:.3g}")
    if truth is not None:
        report.append(f"mse_input={mse(z, truth):.17g} mse_estimate={mse(g_proj, truth):.17g}")
    print(" ".join(report), file=sys.stdout if args.out is not None else sys.stderr)
    return ExitCode.OK


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        try:
            cfg = ExperimentConfig.model_validate_json(args.config.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ModDenoiseValidationError(f"file not found: {args.config}") from e
    else:
        cfg = sqrt_gamma_sweep_config(args.function)
    updates: dict[str, Any] = {}
    if args.n is not None:
        updates["n"] = args.n
    if args.sigma_grid is not None:
        updates["sigma_grid"] = args.sigma_grid
    if args.trials is not None:
        updates["trials"] = args.trials
    if args.seed is not None:
        updates["base_seed"] = args.seed
    if args.method is not None:
        updates["methods"] = _methods(args.method)
    if args.gamma_rule is not None:
        updates["gamma_rule"] = args.gamma_rule
    if updates:
        cfg = ExperimentConfig.model_validate({**cfg.model_dump(), **updates})
    return cfg


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    out = args.out
    replay = out.with_name(f"{out.stem}.replay.json")
    replay.write_text(cfg.model_dump_json(indent=2), encoding="utf-8")
    try:
        result = sweep_sigma(cfg)
    except ModDenoiseTrialError as e:
        partial = out.with_name(f"{out.stem}.partial.csv")
        write_csv(trials_to_dataframe(e.partial), partial)
        print(f"error: {e}: {e.__cause__}", file=sys.stderr)
        print(f"{len(e.partial)} completed trials written to {partial}", file=sys.stderr)
        return ExitCode.TRIAL_FAILURE
    write_csv(sweep_to_dataframe(result), out)
    print(f"wrote {len(result.rows)} rows to {out}; replay config {replay}")
    if args.plot is not None:
        from .plotting import plot_sweep

        plot_sweep(result, args.plot)
    return ExitCode.OK


def cmd_bounds(args: argparse.Namespace) -> int:
    q = _build_query(args)
    sigmas = args.sigma_grid if args.sigma_grid is not None else log_sigma_grid(*CAPTION_SIGMA_RANGE)
    rows = bound_curve(args.bound, q, sigmas)
    _emit(bounds_to_dataframe(rows), args.out)
    return ExitCode.OK


def cmd_check(args: argparse.Namespace) -> int:
    q = _build_query(args)
    report = check_denoising_conditions(args.claim, q, c=args.constant)
    print(report)
    return ExitCode.OK if report.satisfied else ExitCode.CONDITION_UNSATISFIED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moddenoise", description="Denoising of modulo-1 samples on graphs."
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="Laplacian eigenvalues of a graph")
    _add_graph_arguments(p)
    p.add_argument("--out", type=Path, metavar="FILE")
    p.set_defaults(handler=cmd_spectrum)

    p = sub.add_parser("denoise", help="denoise a signal on a graph")
    _add_graph_arguments(p)
    p.add_argument("--signal", type=Path, metavar="FILE", help="noisy input as i,re,im")
    p.add_argument("--truth", type=Path, metavar="FILE", help="ground truth as i,re,im")
    p.add_argument("--raw", action="store_true", help="accept input off the torus")
    p.add_argument("--function", choices=["f1", "f2"], default="f1")
    p.add_argument("--sigma", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float)
    p.add_argument("--gamma-rule", type=_parse_gamma_rule)
    p.add_argument("--method", choices=["ucqp", "trs"], default="ucqp")
    p.add_argument("--backend", choices=[b.value for b in UcqpBackend], default="spectral")
    p.add_argument("--out", type=Path, metavar="FILE")
    p.set_defaults(handler=cmd_denoise)

    p = sub.add_parser("sweep", help="run a noise-level sweep")
    p.add_argument("--config", type=Path, metavar="FILE", help="ExperimentConfig JSON")
    p.add_argument("--function", choices=["f1", "f2"], default="f1")
    p.add_argument("--n", type=int)
    p.add_argument("--sigma-grid", type=_parse_sigma_grid)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--gamma-rule", type=_parse_gamma_rule)
    p.add_argument("--method", choices=["ucqp", "trs", "both"])
    p.add_argument("--out", type=Path, metavar="FILE", default=Path("sweep.csv"))
    p.add_argument("--plot", type=Path, metavar="FILE", help="SVG plot (needs matplotlib)")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("bounds", help="tabulate an error bound over sigma")
    _add_graph_arguments(p)
    p.add_argument("--query", type=Path, metavar="FILE", help="BoundQuery JSON")
    p.add_argument("--bound", choices=[b.value for b in BoundKind], default=BoundKind.UCQP_HIGH_PROBABILITY.value)
    p.add_argument("--sigma-grid", type=_parse_sigma_grid)
    p.add_argument("--out", type=Path, metavar="FILE")
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser("check", help="check the hypotheses of a denoising claim")
    p.add_argument("claim", help="claim id or alias, e.g. ucqp-expectation or thm2")
    _add_graph_arguments(p)
    p.add_argument("--query", type=Path, metavar="FILE", help="BoundQuery JSON")
    p.add_argument("--constant", type=float, default=1.0, help="constant c of order-level claims")
    p.set_defaults(handler=cmd_check)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return int(args.handler(args))
    except ModDenoiseDegeneracyError as e:
        print(f"error: {e}", file=sys.stderr)
        return ExitCode.DEGENERACY
    except ModDenoiseNumericalError as e:
        print(f"error: {e}", file=sys.stderr)
        return ExitCode.NUMERICAL
    except (ModDenoiseValidationError, pydantic.ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return ExitCode.VALIDATION
    except ModDenoiseError as e:
        print(f"error: {e}", file=sys.stderr)
        return ExitCode.VALIDATION
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return ExitCode.VALIDATION


if __name__ == "__main__":
    sys.exit(main())
