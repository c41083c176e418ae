"""Pydantic models for graphs, signals, solutions, bound queries and experiments.

Key model groups:
    1. **Graphs**: Graph, SpectralDecomposition, SpectralIndexSets
    2. **Signals**: TorusSignal, FunctionSpec, NoiseModel
    3. **Solutions**: UcqpSolution, TrsSolution
    4. **Bounds**: BoundQuery, ConditionCheck, ConditionReport and the
       bound result records
    5. **Experiments**: GammaRule, ExperimentConfig, TrialRecord,
       SweepRow, SweepResult, IdentityCheck, EventParams, EventCheck

Numerical payloads are numpy arrays. They are marked read-only when a model
is constructed, so every model can be shared between worker threads.

Note:
    Complex vectors are complex128 arrays, whose memory layout is the
    interleaved (re, im) pair sequence; ``TorusSignal.as_pairs`` exposes it
    as an (n, 2) float view without copying.
"""

from typing import Any, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    computed_field,
    field_validator,
    model_validator,
)
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import (
    ModDenoiseConnectivityError,
    ModDenoiseValidationError,
)
from .types import (
    F1_LIPSCHITZ,
    F2_LIPSCHITZ,
    SIGMA_POINTS_PER_DECADE,
    SPECTRAL_TOLERANCE,
    TORUS_TOLERANCE,
    DenoisingClaim,
    FunctionKind,
    GammaRuleKind,
    GraphFamily,
    SolverMethod,
    UcqpBackend,
)

_ARRAY_CONFIG = ConfigDict(frozen=True, arbitrary_types_allowed=True)


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _complex_array(values: Any) -> np.ndarray:
    array = np.array(values, dtype=np.complex128).reshape(-1)
    if array.size == 0:
        raise ModDenoiseValidationError("signal must not be empty")
    if not np.all(np.isfinite(array)):
        raise ModDenoiseValidationError("signal values must be finite")
    return array


class Graph(BaseModel):
    """Simple undirected connected graph on vertices 1..n.

    Edges are normalized to sorted (i, j) pairs with i < j and stored in
    lexicographic order. Construction rejects self-loops, duplicate edges,
    out-of-range vertices and disconnected graphs.

    Attributes:
        n: Number of vertices (>= 2).
        edges: Sorted tuple of (i, j) pairs, 1-based, i < j.
        family: Family tag; CUSTOM for user-supplied edge lists.

    Example:
        >>> g = Graph(n=3, edges=[(2, 1), (2, 3)])
        >>> g.edges
        ((1, 2), (2, 3))
        >>> g.max_degree
        2
    """

    model_config = ConfigDict(frozen=True)

    n: int
    edges: tuple[tuple[int, int], ...]
    family: GraphFamily = GraphFamily.CUSTOM

    @field_validator("n")
    @classmethod
    def _check_size(cls, n: int) -> int:
        if n < 2:
            raise ModDenoiseValidationError(f"n must be >= 2, got {n}")
        return n

    @field_validator("edges", mode="before")
    @classmethod
    def _normalize_edges(cls, edges: Any) -> tuple[tuple[int, int], ...]:
        normalized = []
        seen = set()
        for edge in edges:
            i, j = (int(v) for v in edge)
            if i == j:
                raise ModDenoiseValidationError(f"self-loop at vertex {i} is not allowed")
            pair = (min(i, j), max(i, j))
            if pair in seen:
                raise ModDenoiseValidationError(f"duplicate edge {{{pair[0]}, {pair[1]}}}")
            seen.add(pair)
            normalized.append(pair)
        return tuple(sorted(normalized))

    @model_validator(mode="after")
    def _check_connected(self) -> "Graph":
        for i, j in self.edges:
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ModDenoiseValidationError(
                    f"edge {{{i}, {j}}} must have vertices in range [1, {self.n}]"
                )
        if not self.edges:
            raise ModDenoiseConnectivityError(list(range(1, self.n + 1)))
        rows, cols = self.edge_arrays()
        adjacency = coo_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n)
        )
        count, labels = connected_components(adjacency, directed=False)
        if count > 1:
            _, first = np.unique(labels, return_index=True)
            raise ModDenoiseConnectivityError(sorted(int(v) + 1 for v in first))
        return self

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Return 0-based endpoint index arrays (tails, heads)."""
        pairs = np.asarray(self.edges, dtype=np.intp).reshape(-1, 2) - 1
        return pairs[:, 0], pairs[:, 1]

    @property
    def degrees(self) -> np.ndarray:
        rows, cols = self.edge_arrays()
        return np.bincount(np.concatenate([rows, cols]), minlength=self.n)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def max_degree(self) -> int:
        return int(self.degrees.max())


class SpectralIndexSets(BaseModel):
    """Low/high frequency split of the non-null eigen-indices at a cutoff.

    Attributes:
        low_set: Indices j in [n-1] with lambda_j < threshold (1-based).
        high_set: Indices j in [n-1] with lambda_j >= threshold (1-based).
        threshold: The cutoff lambda_bar.
    """

    model_config = ConfigDict(frozen=True)

    low_set: tuple[int, ...]
    high_set: tuple[int, ...]
    threshold: float

    @property
    def low_size(self) -> int:
        return len(self.low_set)


class SpectralDecomposition(BaseModel):
    """Eigen-decomposition of a graph Laplacian in descending index order.

    Index j (1-based) addresses the j-th largest eigenvalue, so
    ``eigenvalues[0]`` is lambda_1 and ``eigenvalues[-1]`` is lambda_n = 0.
    Column j - 1 of ``eigenvectors`` is q_j. Libraries that sort ascending
    map their index a (0-based) to j = n - a.

    Attributes:
        eigenvalues: Length-n nonincreasing array.
        eigenvectors: n x n orthonormal matrix.
    """

    model_config = _ARRAY_CONFIG

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @model_validator(mode="after")
    def _check_shapes(self) -> "SpectralDecomposition":
        n = self.eigenvalues.shape[0]
        if self.eigenvalues.ndim != 1 or self.eigenvectors.shape != (n, n):
            raise ModDenoiseValidationError(
                f"eigenvectors must be {n}x{n}, got {self.eigenvectors.shape}"
            )
        _readonly(self.eigenvalues)
        _readonly(self.eigenvectors)
        return self

    @property
    def n(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def lambda_1(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_min(self) -> float:
        """Fiedler value lambda_(n-1)."""
        return float(self.eigenvalues[-2])

    def eigenvalue(self, j: int) -> float:
        """Return lambda_j for 1-based j."""
        self._check_index(j)
        return float(self.eigenvalues[j - 1])

    def eigenvector(self, j: int) -> np.ndarray:
        """Return q_j for 1-based j."""
        self._check_index(j)
        return self.eigenvectors[:, j - 1]

    def _check_index(self, j: int) -> None:
        if not 1 <= j <= self.n:
            raise ModDenoiseValidationError(f"index must be in range [1, {self.n}], got {j}")

    def coefficients(self, x: np.ndarray) -> np.ndarray:
        """Return Q^T x, the coordinates of x in the eigenbasis."""
        return self.eigenvectors.T @ np.asarray(x)

    def synthesize(self, coefficients: np.ndarray) -> np.ndarray:
        return self.eigenvectors @ np.asarray(coefficients)

    def laplacian(self) -> np.ndarray:
        """Reconstruct L = Q diag(lambda) Q^T."""
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T

    def projector(self, indices: Any) -> np.ndarray:
        """Orthogonal projector onto span{q_j : j in indices} (1-based)."""
        cols = np.asarray(sorted(indices), dtype=np.intp) - 1
        basis = self.eigenvectors[:, cols]
        return basis @ basis.T

    def low_frequency_basis(self, k: int) -> np.ndarray:
        """Columns q_(n-k+1), ..., q_n as an n x k matrix."""
        if not 1 <= k <= self.n:
            raise ModDenoiseValidationError(f"k must be in range [1, {self.n}], got {k}")
        return self.eigenvectors[:, self.n - k :]

    def index_sets(self, lambda_bar: float) -> SpectralIndexSets:
        """Split [n-1] at ``lambda_bar`` with a relative tolerance.

        Eigenvalues within SPECTRAL_TOLERANCE * max(1, lambda_1) of the
        cutoff count as equal to it, so analytically tied values such as the
        (n-1)-fold eigenvalue of K_n fall in the high set at lambda_bar = n.
        """
        slack = SPECTRAL_TOLERANCE * max(1.0, self.lambda_1)
        if not self.lambda_min - slack <= lambda_bar <= self.lambda_1 + slack:
            raise ModDenoiseValidationError(
                f"lambda_bar must be in range [{self.lambda_min:.6g}, "
                f"{self.lambda_1:.6g}], got {lambda_bar}"
            )
        head = self.eigenvalues[:-1]
        low = head < lambda_bar - slack
        indices = np.arange(1, self.n)
        return SpectralIndexSets(
            low_set=tuple(int(j) for j in indices[low]),
            high_set=tuple(int(j) for j in indices[~low]),
            threshold=float(lambda_bar),
        )

    def valid_gap_indices(self) -> list[int]:
        """All k in [n-1] with lambda_(n-k+1) < lambda_(n-k)."""
        slack = SPECTRAL_TOLERANCE * max(1.0, self.lambda_1)
        gaps = []
        for k in range(1, self.n):
            if self.eigenvalue(self.n - k + 1) < self.eigenvalue(self.n - k) - slack:
                gaps.append(k)
        return gaps


class TorusSignal(BaseModel):
    """Complex signal of length n, optionally certified to lie on the torus.

    Attributes:
        values: complex128 array.
        on_torus: Whether every entry has unit modulus (to TORUS_TOLERANCE).

    Example:
        >>> s = TorusSignal.from_values([1, 1j])
        >>> s.on_torus
        True
    """

    model_config = _ARRAY_CONFIG

    values: np.ndarray
    on_torus: bool = False

    @field_validator("values", mode="before")
    @classmethod
    def _as_complex(cls, values: Any) -> np.ndarray:
        return _complex_array(values)

    @model_validator(mode="after")
    def _check_torus(self) -> "TorusSignal":
        if self.on_torus:
            deviation = self.modulus_deviation()
            if deviation > TORUS_TOLERANCE:
                raise ModDenoiseValidationError(
                    f"max ||v_i| - 1| must be <= {TORUS_TOLERANCE}, got {deviation:.3g}"
                )
        _readonly(self.values)
        return self

    @classmethod
    def from_values(cls, values: Any, tolerance: float = TORUS_TOLERANCE) -> "TorusSignal":
        """Build a signal and set ``on_torus`` by inspecting the moduli.

        Entries within ``tolerance`` of unit modulus but outside
        TORUS_TOLERANCE are renormalized before the flag is set.
        """
        array = _complex_array(values)
        deviation = float(np.max(np.abs(np.abs(array) - 1.0)))
        if deviation > tolerance:
            return cls(values=array, on_torus=False)
        if deviation > TORUS_TOLERANCE:
            array = array / np.abs(array)
        return cls(values=array, on_torus=True)

    def modulus_deviation(self) -> float:
        return float(np.max(np.abs(np.abs(self.values) - 1.0)))

    def as_pairs(self) -> np.ndarray:
        """(n, 2) float view of interleaved (re, im) pairs."""
        return self.values.view(np.float64).reshape(-1, 2)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def __len__(self) -> int:
        return self.n


class FunctionSpec(BaseModel):
    """Ground-truth function with its Lipschitz constant.

    For f1 and f2 the constant defaults to the documented bound; custom
    functions must declare one.

    Example:
        >>> FunctionSpec(kind="f2").lipschitz
        6.283185307179586
    """

    model_config = ConfigDict(frozen=True)

    kind: FunctionKind
    lipschitz_M: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _require_constant(self) -> "FunctionSpec":
        if self.kind == FunctionKind.CUSTOM and self.lipschitz_M is None:
            raise ValueError("custom functions must declare lipschitz_M")
        return self

    @property
    def lipschitz(self) -> float:
        if self.lipschitz_M is not None:
            return self.lipschitz_M
        return F1_LIPSCHITZ if self.kind == FunctionKind.F1 else F2_LIPSCHITZ

    def evaluate(self, x: Any) -> np.ndarray:
        """Evaluate the built-in function at ``x``.

        Raises:
            ModDenoiseValidationError: For CUSTOM, which has no closed form.
        """
        from .signal import f1, f2

        if self.kind == FunctionKind.F1:
            return f1(x)
        if self.kind == FunctionKind.F2:
            return f2(x)
        raise ModDenoiseValidationError("custom functions have no closed form; supply samples")


class NoiseModel(BaseModel):
    """Wrapped Gaussian noise: z_i = h_i exp(2 pi i eta_i), eta_i ~ N(0, sigma^2)."""

    model_config = ConfigDict(frozen=True)

    sigma: float = Field(ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)


class UcqpSolution(BaseModel):
    """Solution of min ||g - z||^2 + gamma g* L g.

    Attributes:
        g_hat: (I + gamma L)^-1 z.
        gamma: Regularization parameter.
        backend: Evaluation backend.
        residual: ||(I + gamma L) g_hat - z|| / ||z||.
    """

    model_config = _ARRAY_CONFIG

    g_hat: np.ndarray
    gamma: float
    backend: UcqpBackend
    residual: float


class TrsSolution(BaseModel):
    """Solution of the sphere-constrained problem ||g||^2 = n.

    Attributes:
        g_hat: 2 (2 gamma L + mu* I)^-1 z.
        mu_star: Lagrange multiplier, in (0, 2] for torus inputs.
        gamma: Regularization parameter.
        kkt_residual: ||(2 gamma L + mu* I) g_hat - 2z|| / ||z||.
        norm_gap: | ||g_hat||^2 - n |.
        iterations: Root-finder iterations (bracketing plus refinement).
    """

    model_config = _ARRAY_CONFIG

    g_hat: np.ndarray
    mu_star: float
    gamma: float
    kkt_residual: float
    norm_gap: float
    iterations: int


class BoundQuery(BaseModel):
    """Scalar inputs shared by every bound evaluator and condition checker.

    Fields are optional; each evaluator names the ones it needs and raises
    ModDenoiseParameterError when one is missing.

    Attributes:
        n: Number of vertices.
        delta: Maximum degree.
        B_n: Smoothness budget h* L h.
        sigma: Noise level.
        lambda_bar: Spectral cutoff.
        lambda_min: Fiedler value.
        lambda_1: Largest eigenvalue.
        L_size: Size of the low-frequency set at lambda_bar.
        epsilon: Target denoising ratio in (0, 1).
        k: Spectral gap index in [n-1].
        lambda_n_minus_k: lambda_(n-k).
        lambda_n_minus_k_plus_1: lambda_(n-k+1).
        M: Lipschitz constant of the sampled function.
        theta: Path-graph cutoff exponent in [0, 1).
        family: Graph family, for the family-level claims.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    delta: Optional[float] = Field(default=None, gt=0)
    B_n: Optional[float] = Field(default=None, ge=0)
    sigma: Optional[float] = Field(default=None, ge=0)
    lambda_bar: Optional[float] = Field(default=None, gt=0)
    lambda_min: Optional[float] = Field(default=None, gt=0)
    lambda_1: Optional[float] = Field(default=None, gt=0)
    L_size: Optional[int] = Field(default=None, ge=0)
    epsilon: Optional[float] = Field(default=None, gt=0, lt=1)
    k: Optional[int] = None
    lambda_n_minus_k: Optional[float] = Field(default=None, ge=0)
    lambda_n_minus_k_plus_1: Optional[float] = Field(default=None, ge=0)
    M: Optional[float] = Field(default=None, gt=0)
    theta: Optional[float] = Field(default=None, ge=0, lt=1)
    family: Optional[GraphFamily] = None

    @model_validator(mode="after")
    def _check_consistency(self) -> "BoundQuery":
        if self.k is not None:
            if not 1 <= self.k <= self.n - 1:
                raise ValueError(
                    f"invalid gap index: k must be in range [1, {self.n - 1}], got {self.k}"
                )
            upper = self.lambda_n_minus_k
            lower = self.lambda_n_minus_k_plus_1
            if upper is not None and lower is not None and not lower < upper:
                raise ValueError(
                    f"invalid gap index: k={self.k} needs lambda_(n-k+1) < lambda_(n-k), "
                    f"got {lower} >= {upper}"
                )
        if self.lambda_min is not None and self.lambda_1 is not None:
            if self.lambda_min > self.lambda_1:
                raise ValueError("lambda_min must be <= lambda_1")
            if self.lambda_bar is not None:
                slack = SPECTRAL_TOLERANCE * max(1.0, self.lambda_1)
                if not self.lambda_min - slack <= self.lambda_bar <= self.lambda_1 + slack:
                    raise ValueError(
                        f"lambda_bar must be in range [{self.lambda_min}, {self.lambda_1}], "
                        f"got {self.lambda_bar}"
                    )
        return self

    @classmethod
    def from_spectrum(
        cls,
        spectrum: SpectralDecomposition,
        graph: Graph,
        *,
        lambda_bar: Optional[float] = None,
        k: Optional[int] = None,
        **fields: Any,
    ) -> "BoundQuery":
        """Fill the spectral mirrors from a decomposition.

        Args:
            spectrum: Decomposition of ``graph``'s Laplacian.
            graph: The graph (supplies n, Delta and the family tag).
            lambda_bar: Cutoff; sets ``L_size`` when given.
            k: Gap index; sets lambda_(n-k) and lambda_(n-k+1) when given.
            **fields: Remaining BoundQuery fields (sigma, B_n, epsilon, M, ...).
        """
        values: dict[str, Any] = {
            "n": graph.n,
            "delta": float(graph.max_degree),
            "lambda_min": spectrum.lambda_min,
            "lambda_1": spectrum.lambda_1,
            "family": graph.family,
        }
        if lambda_bar is not None:
            values["lambda_bar"] = lambda_bar
            values["L_size"] = spectrum.index_sets(lambda_bar).low_size
        if k is not None:
            n = graph.n
            values["k"] = k
            if 1 <= k <= n - 1:
                values["lambda_n_minus_k"] = spectrum.eigenvalue(n - k)
                values["lambda_n_minus_k_plus_1"] = max(0.0, spectrum.eigenvalue(n - k + 1))
        values.update(fields)
        return cls(**values)


class ConditionCheck(BaseModel):
    """One inequality lhs <= rhs of a denoising hypothesis."""

    model_config = ConfigDict(frozen=True)

    name: str
    lhs: float
    rhs: float
    tag: str
    order_level: bool = False

    @computed_field  # type: ignore[prop-decorator]
    @property
    def satisfied(self) -> bool:
        return bool(self.lhs <= self.rhs)


class ConditionReport(BaseModel):
    """Outcome of checking every hypothesis of a claim."""

    model_config = ConfigDict(frozen=True)

    claim: DenoisingClaim
    checks: list[ConditionCheck]
    constant: float = 1.0

    @computed_field  # type: ignore[prop-decorator]
    @property
    def failed_conditions(self) -> list[ConditionCheck]:
        return [c for c in self.checks if not c.satisfied]

    @computed_field  # type: ignore[prop-decorator]
    @property
    def satisfied(self) -> bool:
        return not self.failed_conditions

    def __str__(self) -> str:
        scale = " (order-level, c={:g})".format(self.constant) if self.claim.order_level else ""
        lines = [f"{self.claim.value}{scale}: {'satisfied' if self.satisfied else 'NOT satisfied'}"]
        for check in self.checks:
            mark = "ok  " if check.satisfied else "FAIL"
            lines.append(
                f"  [{mark}] {check.name}: {check.lhs:.6g} <= {check.rhs:.6g}  ({check.tag})"
            )
        return "\n".join(lines)


class ExpectedBound(BaseModel):
    """Bounds on E||Pi(g_hat) - h||^2 for the unconstrained estimator.

    Attributes:
        general: Bound at the supplied gamma (with e^x <= 1 + 2x applied).
        exact_noise_factor: Same bound keeping 8(e^(4 pi^2 sigma^2) - 1).
        simplified: Closed form at the lemma2 gamma, or None when another
            gamma was supplied.
        domain_ok: Whether sigma <= 1/(2 pi).
    """

    model_config = ConfigDict(frozen=True)

    general: float
    exact_noise_factor: float
    simplified: Optional[float]
    gamma: float
    domain_ok: bool


class HighProbabilityBound(BaseModel):
    """A high-probability error bound plus the domain checks it assumes."""

    model_config = ConfigDict(frozen=True)

    value: float
    domain_ok: bool
    violations: list[ConditionCheck] = Field(default_factory=list)


class MuStarBound(BaseModel):
    """Lower bound on the trust-region multiplier."""

    model_config = ConfigDict(frozen=True)

    value: float
    conditions_hold: bool
    report: list[ConditionCheck]


class GammaRule(BaseModel):
    """Gamma selection rule with its parameters.

    Attributes:
        kind: Rule family.
        constant: Multiplier c (the slope for LINEAR, a prefactor otherwise).
        use_lipschitz: For PATH_LIPSCHITZ, divide by M^2 inside the root.
        lambda_bar: Cutoff for LEMMA2; defaults to lambda_min in experiments.
        theta: Cutoff exponent for the P_n FAMILY rule.

    Example:
        >>> GammaRule(kind="linear", constant=400.0)
        GammaRule(kind=<GammaRuleKind.LINEAR: 'linear'>, constant=400.0, ...)
    """

    model_config = ConfigDict(frozen=True)

    kind: GammaRuleKind
    constant: float = Field(default=1.0, gt=0)
    use_lipschitz: bool = False
    lambda_bar: Optional[float] = Field(default=None, gt=0)
    theta: Optional[float] = Field(default=None, ge=0, lt=1)


class ExperimentConfig(BaseModel):
    """Complete, replayable description of a noise-level sweep.

    Attributes:
        n: Grid size.
        function: Ground-truth function.
        graph_family: Graph built on the grid (path for the reproduction).
        sigma_grid: Noise levels, positive and nondecreasing.
        trials: Trials per noise level.
        gamma_rule: How gamma is chosen at each noise level.
        base_seed: 64-bit seed from which all trial streams derive.
        methods: Estimators to run.
        backend: UCQP evaluation backend.
        max_workers: Worker cap; falls back to MODDENOISE_THREADS, then CPUs.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    function: FunctionSpec
    graph_family: GraphFamily = GraphFamily.PATH
    sigma_grid: list[float]
    trials: int = Field(default=30, ge=1)
    gamma_rule: GammaRule
    base_seed: int = Field(default=0, ge=0, lt=2**64)
    methods: list[SolverMethod] = Field(
        default_factory=lambda: [SolverMethod.UCQP, SolverMethod.TRS]
    )
    backend: UcqpBackend = UcqpBackend.SPECTRAL
    max_workers: Optional[int] = Field(default=None, ge=1)

    @field_validator("sigma_grid", mode="before")
    @classmethod
    def _expand_grid(cls, grid: Any) -> Any:
        # {"start": lo, "stop": hi, "per_decade": k} expands to the log grid
        if isinstance(grid, dict):
            from .experiment import log_sigma_grid

            return log_sigma_grid(
                float(grid["start"]),
                float(grid["stop"]),
                int(grid.get("per_decade", SIGMA_POINTS_PER_DECADE)),
            )
        return grid

    @field_validator("sigma_grid")
    @classmethod
    def _check_grid(cls, grid: list[float]) -> list[float]:
        if not grid:
            raise ValueError("sigma_grid must not be empty")
        if any(s <= 0 for s in grid):
            raise ValueError("sigma_grid must be positive")
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ValueError("sigma_grid must be sorted")
        return grid

    @field_validator("methods")
    @classmethod
    def _check_methods(cls, methods: list[SolverMethod]) -> list[SolverMethod]:
        if not methods:
            raise ValueError("methods must not be empty")
        if SolverMethod.INPUT in methods:
            raise ValueError("'input' is always recorded and is not a method")
        return list(dict.fromkeys(methods))

    @model_validator(mode="after")
    def _check_sources(self) -> "ExperimentConfig":
        if self.function.kind == FunctionKind.CUSTOM:
            raise ValueError("sweeps need a built-in function (f1 or f2)")
        if self.graph_family == GraphFamily.CUSTOM:
            raise ValueError("sweeps need a built-in graph family")
        return self


class TrialRecord(BaseModel):
    """Squared errors of one Monte-Carlo trial.

    Attributes:
        mse: Squared l2 error per method, always including ``input``.
        mu_star: Trust-region multiplier, when TRS ran.
    """

    model_config = ConfigDict(frozen=True)

    sigma: float
    sigma_index: int
    trial_index: int
    gamma: float
    mse: dict[SolverMethod, float]
    mu_star: Optional[float] = None


class SweepRow(BaseModel):
    """Aggregate over the trials of one (sigma, method) cell."""

    model_config = ConfigDict(frozen=True)

    sigma: float
    method: SolverMethod
    mean_mse: float
    stderr_mse: float = Field(ge=0)
    mean_mu_star: Optional[float] = None
    trials: int
    gamma: float


class SweepResult(BaseModel):
    """Rows covering every (sigma, method) pair of a sweep.

    Squared errors are raw ||.||_2^2 sums, not per-sample averages.
    """

    model_config = ConfigDict(frozen=True)

    config: ExperimentConfig
    rows: list[SweepRow]

    def row(self, sigma: float, method: SolverMethod) -> SweepRow:
        for row in self.rows:
            if row.method == method and row.sigma == sigma:
                return row
        raise KeyError(f"no row for sigma={sigma}, method={method.value}")

    def series(self, method: SolverMethod) -> list[SweepRow]:
        return [row for row in self.rows if row.method == method]


class IdentityCheck(BaseModel):
    """Monte-Carlo estimate of a closed-form noise moment."""

    model_config = ConfigDict(frozen=True)

    identity: str
    empirical: float
    theoretical: float
    stderr: float
    z_score: float
    lower: Optional[float] = None
    upper: Optional[float] = None

    @property
    def within_interval(self) -> bool:
        """True when the estimate is inside [lower, upper], up to 3 standard errors."""
        slack = 3.0 * self.stderr
        if self.lower is not None and self.empirical < self.lower - slack:
            return False
        if self.upper is not None and self.empirical > self.upper + slack:
            return False
        return True


class EventParams(BaseModel):
    """Setting in which a high-probability event is sampled.

    Attributes:
        n: Grid size.
        sigma: Noise level.
        k: Width of the low-frequency basis (defaults to 1 + floor(sqrt n)).
        family: Graph family providing the eigenbasis.
        function: Ground truth sampled on the uniform grid.
        gamma: Regularization for the multiplier event; the M-free
            path-Lipschitz rule when omitted.
        two_sided: Also count violations of the reversed inequality.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    sigma: float = Field(ge=0)
    k: Optional[int] = Field(default=None, ge=1)
    family: GraphFamily = GraphFamily.PATH
    function: FunctionKind = FunctionKind.F2
    gamma: Optional[float] = Field(default=None, ge=0)
    two_sided: bool = False

    @model_validator(mode="after")
    def _check_family(self) -> "EventParams":
        if self.family == GraphFamily.CUSTOM:
            raise ValueError("event checks need a built-in graph family")
        if self.function == FunctionKind.CUSTOM:
            raise ValueError("event checks need a built-in function")
        if self.k is not None and self.k > self.n - 1:
            raise ValueError(f"k must be in range [1, {self.n - 1}], got {self.k}")
        return self


class EventCheck(BaseModel):
    """Violation frequency of a high-probability event.

    ``sound`` holds when the frequency is at most the failure budget plus
    three binomial standard errors sqrt(p (1 - p) / trials).
    """

    model_config = ConfigDict(frozen=True)

    event: str
    violations: int
    trials: int
    failure_budget: float
    conditions_hold: Optional[bool] = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def violation_frequency(self) -> float:
        return self.violations / self.trials

    @computed_field  # type: ignore[prop-decorator]
    @property
    def standard_error(self) -> float:
        p = min(self.failure_budget, 1.0)
        return float(np.sqrt(p * (1.0 - p) / self.trials))

    @computed_field  # type: ignore[prop-decorator]
    @property
    def sound(self) -> bool:
        return bool(
            self.violation_frequency <= self.failure_budget + 3.0 * self.standard_error
        )
