"""Enumerations and numeric constants for moddenoise.

This module defines the enumerations used to select graph families, solvers,
gamma rules and verification targets, together with the numeric defaults that
the solvers, bound evaluators and experiment harness share.

Example:
    Selecting a graph family and a solver::

        from moddenoise import GraphFamily, SolverMethod, build_graph, denoise

        graph = build_graph(GraphFamily.PATH, 500)
        estimate = denoise(z, graph, gamma=40.0, method=SolverMethod.TRS)
"""

import math
from enum import Enum, IntEnum


class GraphFamily(str, Enum):
    """Graph families with closed-form Laplacian spectra.

    Attributes:
        PATH: Path graph P_n with edges {i, i+1}.
        COMPLETE: Complete graph K_n.
        STAR: Star graph S_n centred on vertex 1.
        CUSTOM: Any connected graph supplied as an edge list.

    Example:
        >>> GraphFamily("path") is GraphFamily.PATH
        True
    """

    PATH = "path"
    COMPLETE = "complete"
    STAR = "star"
    CUSTOM = "custom"


class FunctionKind(str, Enum):
    """Ground-truth functions sampled on the uniform grid.

    Attributes:
        F1: 3x cos^2(2 pi x) - sin^2(2 pi x) + 0.7, the "hard" input.
        F2: sin(2 pi x).
        CUSTOM: User-supplied samples with a declared Lipschitz constant.
    """

    F1 = "f1"
    F2 = "f2"
    CUSTOM = "custom"


class SolverMethod(str, Enum):
    """Estimators. ``INPUT`` only labels the unprocessed noisy signal in sweep tables."""

    UCQP = "ucqp"
    TRS = "trs"
    INPUT = "input"


class UcqpBackend(str, Enum):
    """How (I + gamma L)^-1 z is evaluated.

    Attributes:
        SPECTRAL: Filter the coefficients in the Laplacian eigenbasis.
        DIRECT: Dense Cholesky solve of the linear system.
    """

    SPECTRAL = "spectral"
    DIRECT = "direct"


class GammaRuleKind(str, Enum):
    """Regularization parameter selection rules.

    Attributes:
        LEMMA2: (4 pi^2 sigma^2 n / (Delta B_n lambda_bar^2))^(1/4), the
            expectation-optimal choice for a given cutoff.
        PATH_LIPSCHITZ: (sigma^2 n^(10/3) / M^2)^(1/4), or the variant with
            M omitted that the reproduction sweeps use.
        LINEAR: c * sigma.
        FAMILY: the order-level rule for K_n, S_n or P_n.
    """

    LEMMA2 = "lemma2"
    PATH_LIPSCHITZ = "path-lipschitz"
    LINEAR = "linear"
    FAMILY = "family"


class DenoisingClaim(str, Enum):
    """Denoising guarantees whose hypotheses can be checked.

    The ``ORDER_LEVEL`` members state conditions only up to constants; the
    checker multiplies the small side by an explicit constant ``c``.
    """

    UCQP_EXPECTATION = "ucqp-expectation"
    UCQP_HIGH_PROBABILITY = "ucqp-high-probability"
    TRS_HIGH_PROBABILITY = "trs-high-probability"
    UCQP_EXPECTATION_FAMILIES = "ucqp-expectation-families"
    UCQP_HIGH_PROBABILITY_FAMILIES = "ucqp-high-probability-families"
    TRS_FAMILIES = "trs-families"
    UCQP_PATH_LIPSCHITZ = "ucqp-path-lipschitz"
    TRS_MIN_GAP = "trs-min-gap"
    TRS_PATH_LIPSCHITZ = "trs-path-lipschitz"

    @classmethod
    def parse(cls, value: str) -> "DenoisingClaim":
        """Resolve a claim id or one of its short aliases.

        Example:
            >>> DenoisingClaim.parse("thm8")
            <DenoisingClaim.TRS_HIGH_PROBABILITY: 'trs-high-probability'>
        """
        key = value.strip().lower()
        if key in CLAIM_ALIASES:
            return CLAIM_ALIASES[key]
        return cls(key)

    @property
    def order_level(self) -> bool:
        return self in _ORDER_LEVEL_CLAIMS


CLAIM_ALIASES: dict[str, DenoisingClaim] = {
    "thm2": DenoisingClaim.UCQP_EXPECTATION,
    "thm3": DenoisingClaim.UCQP_HIGH_PROBABILITY,
    "thm6": DenoisingClaim.UCQP_HIGH_PROBABILITY,
    "thm4": DenoisingClaim.TRS_HIGH_PROBABILITY,
    "thm8": DenoisingClaim.TRS_HIGH_PROBABILITY,
    "cor1": DenoisingClaim.UCQP_EXPECTATION_FAMILIES,
    "cor2": DenoisingClaim.UCQP_HIGH_PROBABILITY_FAMILIES,
    "cor3": DenoisingClaim.TRS_FAMILIES,
    "cor5": DenoisingClaim.UCQP_PATH_LIPSCHITZ,
    "cor6": DenoisingClaim.TRS_MIN_GAP,
    "cor7": DenoisingClaim.TRS_PATH_LIPSCHITZ,
}
"""dict: Short aliases accepted wherever a claim id is parsed."""

_ORDER_LEVEL_CLAIMS = frozenset(
    {
        DenoisingClaim.UCQP_EXPECTATION_FAMILIES,
        DenoisingClaim.UCQP_HIGH_PROBABILITY_FAMILIES,
        DenoisingClaim.TRS_FAMILIES,
        DenoisingClaim.UCQP_PATH_LIPSCHITZ,
        DenoisingClaim.TRS_PATH_LIPSCHITZ,
    }
)


class BoundKind(str, Enum):
    """Error bounds that can be tabulated over a noise-level grid.

    Attributes:
        UCQP_EXPECTED: Expected error of the projected UCQP estimate.
        UCQP_HIGH_PROBABILITY: High-probability UCQP error bound.
        TRS_HIGH_PROBABILITY: High-probability TRS error bound.
    """

    UCQP_EXPECTED = "ucqp-expected"
    UCQP_HIGH_PROBABILITY = "ucqp-high-probability"
    TRS_HIGH_PROBABILITY = "trs-high-probability"


class ConcentrationItem(str, Enum):
    """Concentration events for quadratic forms of the noisy signal.

    Attributes:
        I: lower deviation of z* U U^T z around its mean.
        II: upper bound on the centred projected energy.
        III: deviation of ||z - h||^2 around 2n(1 - e^(-2 pi^2 sigma^2)).
        IV: deviation of ||z - E z||^2 around n(1 - e^(-4 pi^2 sigma^2)).
    """

    I = "i"  # noqa: E741
    II = "ii"
    III = "iii"
    IV = "iv"


class SimplifiedConcentration(str, Enum):
    """Simplified thresholds used by the high-probability UCQP analysis."""

    LOW_FREQUENCY = "low-frequency"
    CENTRED_NORM = "centred-norm"
    INPUT_ERROR = "input-error"


class NoiseIdentity(str, Enum):
    """Closed-form moments of the wrapped Gaussian noise model.

    Attributes:
        MEAN: E[z] = e^(-2 pi^2 sigma^2) h, checked through Re<z, h>/n.
        CENTRED_PROJECTION: E|<z - E z, u>|^2 = 1 - e^(-4 pi^2 sigma^2).
        PROJECTION_ENERGY: E|<z, u>|^2 = e^(-4 pi^2 sigma^2)|<h, u>|^2
            + 1 - e^(-4 pi^2 sigma^2).
        CENTRED_NORM: E||z - E z||^2 = n(1 - e^(-4 pi^2 sigma^2)).
        INPUT_ERROR: E||z - h||^2 = 2n(1 - e^(-2 pi^2 sigma^2)).
        INPUT_ERROR_SANDWICH: 2 pi^2 sigma^2 n <= E||z - h||^2 <= 4 pi^2 sigma^2 n.
    """

    MEAN = "prop1_i"
    CENTRED_PROJECTION = "prop1_ii"
    PROJECTION_ENERGY = "prop1_iii"
    CENTRED_NORM = "prop1_iv"
    INPUT_ERROR = "prop1_v"
    INPUT_ERROR_SANDWICH = "eq8"


class EventKind(str, Enum):
    """High-probability events checked by Monte-Carlo frequency counting."""

    PROJECTED_ENERGY = "prop2_ii"
    INPUT_ERROR_DEVIATION = "prop2_iii"
    CENTRED_NORM_DEVIATION = "prop2_iv"
    MULTIPLIER_LOWER_BOUND = "lemma7"


class ExitCode(IntEnum):
    """Process exit codes of the command-line interface."""

    OK = 0
    CONDITION_UNSATISFIED = 1
    VALIDATION = 2
    DEGENERACY = 3
    NUMERICAL = 4
    TRIAL_FAILURE = 5


TRS_TOLERANCE = 1e-12
"""float: Default relative tolerance |phi(mu) - n| / n of the secular root."""

TRS_BRACKET_WIDTH = 1e-14
"""float: The secular root search also stops once the bracket is this narrow."""

TRS_MAX_ITERATIONS = 200
"""int: Iteration cap shared by bracket shrinking and Newton refinement."""

DEGENERACY_FACTOR = 1e-12
"""float: |<z, q_n>| below DEGENERACY_FACTOR * sqrt(n) is rejected by the TRS."""

TORUS_TOLERANCE = 1e-12
"""float: Maximum ||v_i| - 1| for a signal flagged as lying on the torus."""

INPUT_TORUS_TOLERANCE = 1e-9
"""float: Looser modulus tolerance applied to signals read from CSV files."""

SPECTRAL_TOLERANCE = 1e-10
"""float: Relative slack used when comparing eigenvalues with a cutoff."""

MAX_DENSE_VERTICES = 3000
"""int: Largest graph handed to the dense symmetric eigensolver."""

F1_LIPSCHITZ = 24.5
"""float: Upper bound on max |f1'| over [0, 1].

f1'(x) = 3 cos^2(2 pi x) - 2 pi (3x + 1) sin(4 pi x). Its modulus peaks near
x = 0.886, where it equals 24.47.
"""

F2_LIPSCHITZ = 2 * math.pi
"""float: Exact Lipschitz constant of sin(2 pi x)."""

TRS_C1 = 288 * math.pi
"""float: Constant of the sigma / lambda_bar term in the TRS error bound."""

TRS_C2 = 396160.0
"""float: Constant of the sigma^2 low-frequency term in the TRS error bound."""

TRS_C3 = 230400.0
"""float: Constant of the sigma^4 n term in the TRS error bound."""

TRS_C4 = 262144.0
"""float: Constant of the log n term in the TRS error bound."""

TRS_C5 = 144.0
"""float: Constant of the B_n^2 / (n lambda_(n-k)^2) term in the TRS error bound."""

DEFAULT_TRIALS = 30
"""int: Monte-Carlo trials per noise level in the reproduction sweeps."""

SIGMA_POINTS_PER_DECADE = 12
"""int: Density of the logarithmic noise-level grids."""

CAPTION_SIGMA_RANGE = (1e-3, 0.096)
"""tuple: Endpoints of the main noise-level sweep."""

LOW_SIGMA_RANGE = (1e-4, 1e-3)
"""tuple: Endpoints of the low-noise sweep."""

REPRODUCTION_SIZE = 500
"""int: Number of grid points in the reproduction sweeps."""

LINEAR_GAMMA_SLOPE = 400.0
"""float: Slope c of the gamma = c * sigma rule used for the low-noise sweep."""

CSV_FLOAT_FORMAT = "%.17g"
"""str: Full round-trip precision for every float written to CSV."""

THREADS_ENV_VAR = "MODDENOISE_THREADS"
"""str: Environment variable capping the sweep worker count."""
