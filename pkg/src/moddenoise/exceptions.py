"""Exceptions for moddenoise.

All exceptions inherit from ModDenoiseError so callers can catch every
library failure with a single except clause. The command-line interface maps
each branch of the hierarchy to a fixed exit code.

Example:
    Catching a degenerate trust-region input::

        from moddenoise import ModDenoiseDegeneracyError, solve_trs

        try:
            solution = solve_trs(z, spectrum, gamma=1.0)
        except ModDenoiseDegeneracyError as e:
            print(f"z has no constant component: {e.projection:.3g}")
"""

from typing import Any, Optional, Sequence


class ModDenoiseError(Exception):
    """Base exception for all moddenoise errors.

    Example:
        >>> try:
        ...     denoise(z, graph, gamma=1.0, method="trs")
        ... except ModDenoiseError as e:
        ...     print(f"denoising failed: {e}")
    """

    pass


class ModDenoiseValidationError(ModDenoiseError):
    """Exception raised when an input fails validation.

    Covers invalid sizes, malformed edges, non-finite samples, length
    mismatches and out-of-range parameters.

    Example:
        >>> build_graph(GraphFamily.PATH, 1)
        ModDenoiseValidationError: n must be >= 2, got 1
    """

    pass


class ModDenoiseConnectivityError(ModDenoiseValidationError):
    """Exception raised when a graph is not connected.

    Args:
        components: One representative (1-based) vertex per component.

    Attributes:
        components: Representative vertices, ordered by smallest member.
    """

    def __init__(self, components: Sequence[int]) -> None:
        self.components = list(components)
        reps = ", ".join(str(v) for v in self.components)
        super().__init__(
            f"graph not connected: {len(self.components)} components "
            f"containing vertices {reps}"
        )


class ModDenoiseParameterError(ModDenoiseValidationError):
    """Exception raised when a parameter is missing or invalid.

    Args:
        message: Human-readable description.
        field: Name of the offending field, when there is one.
        claim: Claim or rule that required the field.

    Example:
        >>> raise ModDenoiseParameterError("B_n is required", field="B_n", claim="lemma2")
        ModDenoiseParameterError: B_n is required (field 'B_n', needed by lemma2)
    """

    def __init__(
        self,
        message: str,
        *,
        field: Optional[str] = None,
        claim: Optional[str] = None,
    ) -> None:
        self.field = field
        self.claim = claim
        detail = ""
        if field is not None and claim is not None:
            detail = f" (field '{field}', needed by {claim})"
        elif field is not None:
            detail = f" (field '{field}')"
        super().__init__(f"{message}{detail}")


class ModDenoiseDomainError(ModDenoiseValidationError):
    """Exception raised when a formula is evaluated outside its domain.

    Example:
        >>> trs_secular(0.0, z, spectrum, gamma=1.0)
        ModDenoiseDomainError: mu must be > 0, got 0.0
    """

    pass


class ModDenoiseUnsupportedFamilyError(ModDenoiseValidationError):
    """Exception raised when a closed-form spectrum is requested for a custom graph."""

    def __init__(self, family: Any) -> None:
        self.family = family
        super().__init__(f"no closed-form spectrum for graph family '{family}'")


class ModDenoiseDegeneracyError(ModDenoiseError):
    """Exception raised when z is orthogonal to the Laplacian null space.

    The trust-region solution is unique only when <z, q_n> != 0; the hard
    case is rejected rather than completed with a boundary eigenvector.

    Args:
        projection: The offending |<z, q_n>|.
        threshold: The rejection threshold that was applied.
    """

    def __init__(self, projection: float, threshold: float) -> None:
        self.projection = projection
        self.threshold = threshold
        super().__init__(
            f"z is orthogonal to the Laplacian null space: "
            f"|<z, q_n>| = {projection:.3g} < {threshold:.3g}"
        )


class ModDenoiseNumericalError(ModDenoiseError):
    """Exception raised when an eigensolver or root-finder fails.

    Args:
        message: Description of the failure.
        diagnostics: Solver state at the time of failure (bracket, last
            iterate, residuals).
    """

    def __init__(self, message: str, diagnostics: Optional[dict[str, Any]] = None) -> None:
        self.diagnostics = dict(diagnostics or {})
        if self.diagnostics:
            state = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
            message = f"{message} [{state}]"
        super().__init__(message)


class ModDenoiseTrialError(ModDenoiseError):
    """Exception raised when a Monte-Carlo trial fails inside a sweep.

    The original exception is chained as ``__cause__``.

    Args:
        sigma: Noise level of the failing trial.
        trial_index: Index of the failing trial.
        partial: Records of the trials that completed before the failure.
    """

    def __init__(self, sigma: float, trial_index: int, partial: Sequence[Any] = ()) -> None:
        self.sigma = sigma
        self.trial_index = trial_index
        self.partial = list(partial)
        super().__init__(f"trial {trial_index} at sigma={sigma:.6g} failed")
