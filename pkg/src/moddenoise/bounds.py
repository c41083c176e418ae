"""Closed-form error bounds, gamma rules and denoising-condition checks.

Every expression is evaluated literally with its published constants; nothing
is tightened. Logarithms are natural. ``expn(c)`` below stands for
exp(-c pi^2 sigma^2).

Key functions:
    - gamma_rule: regularization parameter for a noise level
    - ucqp_expected_bound, ucqp_highprob_bound, trs_highprob_bound:
      error bounds with their domain checks
    - mu_star_lower_bound, mu_star_spectral_lower_bound: multiplier bounds
    - concentration_rhs, concentration_mean, simplified_concentration:
      concentration thresholds for quadratic forms of z
    - ucqp_oracle_bound, trs_oracle_bound: deterministic bounds in terms of
      the true signal
    - check_denoising_conditions: evaluate every hypothesis of a claim

Order-level claims state their hypotheses only up to constants. Each
relation A <~ B is checked as A <= c * B with an explicit constant c
(default 1) and the check is labelled ``order_level``.

Example:
    Checking the expectation claim on a complete graph::

        from moddenoise import BoundQuery, check_denoising_conditions

        q = BoundQuery(n=1000, delta=999, B_n=1.0, sigma=0.1, lambda_bar=1000,
                       lambda_min=1000, lambda_1=1000, L_size=0, epsilon=0.5)
        report = check_denoising_conditions("ucqp-expectation", q)
        print(report)
"""

import logging
import math
from typing import Callable, Optional, Union

import numpy as np

from .exceptions import (
    ModDenoiseDomainError,
    ModDenoiseParameterError,
    ModDenoiseUnsupportedFamilyError,
    ModDenoiseValidationError,
)
from .models import (
    BoundQuery,
    ConditionCheck,
    ConditionReport,
    ExpectedBound,
    GammaRule,
    HighProbabilityBound,
    MuStarBound,
    SpectralDecomposition,
    TorusSignal,
)
from .types import (
    SPECTRAL_TOLERANCE,
    TRS_C1,
    TRS_C2,
    TRS_C3,
    TRS_C4,
    TRS_C5,
    BoundKind,
    ConcentrationItem,
    DenoisingClaim,
    GammaRuleKind,
    GraphFamily,
    SimplifiedConcentration,
)

logger = logging.getLogger(__name__)

PI2 = math.pi**2

SignalLike = Union[TorusSignal, np.ndarray]


def _require(q: BoundQuery, field: str, claim: str) -> float:
    value = getattr(q, field)
    if value is None:
        raise ModDenoiseParameterError(f"{field} is required", field=field, claim=claim)
    return value


def _require_positive_budget(q: BoundQuery, claim: str) -> float:
    B_n = _require(q, "B_n", claim)
    if B_n == 0:
        raise ModDenoiseDomainError(f"B_n must be > 0 for {claim}, got 0")
    return B_n


def _expn(c: float, sigma: float) -> float:
    return math.exp(-c * PI2 * sigma**2)


def _check(
    name: str, lhs: float, rhs: float, tag: str, order_level: bool = False
) -> ConditionCheck:
    return ConditionCheck(
        name=name, lhs=float(lhs), rhs=float(rhs), tag=tag, order_level=order_level
    )


def _values(signal: SignalLike) -> np.ndarray:
    if isinstance(signal, TorusSignal):
        return signal.values
    return np.asarray(signal, dtype=np.complex128).reshape(-1)


# Gamma rules


def gamma_rule(
    rule: Union[GammaRule, GammaRuleKind, str],
    q: BoundQuery,
    c: Optional[float] = None,
) -> float:
    """Regularization parameter for the noise level ``q.sigma``.

    Rules:
        * LEMMA2: (4 pi^2 sigma^2 n / (Delta B_n lambda_bar^2))^(1/4)
        * PATH_LIPSCHITZ: (sigma^2 n^(10/3) / M^2)^(1/4), or
          (sigma^2 n^(10/3))^(1/4) unless ``use_lipschitz`` is set
        * LINEAR: c * sigma
        * FAMILY: (sigma^2 / (n^2 B_n))^(1/4) on K_n,
          (sigma^2 / B_n)^(1/4) on S_n and
          (sigma^2 n^(5 - 4 theta) / B_n)^(1/4) on P_n

    Every rule is multiplied by the constant c (default 1; the slope for LINEAR).

    Args:
        rule: A GammaRule, or a bare rule kind.
        q: Query holding the scalars the rule reads.
        c: Overrides the rule's constant.

    Raises:
        ModDenoiseParameterError: If a required field is missing.
        ModDenoiseDomainError: If B_n = 0 for a rule dividing by it.

    Example:
        >>> gamma_rule(GammaRule(kind="linear", constant=400.0), BoundQuery(n=500, sigma=0.01))
        4.0
    """
    if not isinstance(rule, GammaRule):
        rule = GammaRule(kind=GammaRuleKind(rule))
    constant = rule.constant if c is None else c
    if not constant > 0:
        raise ModDenoiseParameterError(f"c must be > 0, got {constant}", field="c")
    tag = f"gamma rule '{rule.kind.value}'"
    sigma = _require(q, "sigma", tag)
    n = q.n

    if rule.kind == GammaRuleKind.LINEAR:
        return constant * sigma

    if rule.kind == GammaRuleKind.PATH_LIPSCHITZ:
        scale = 1.0
        if rule.use_lipschitz:
            scale = _require(q, "M", tag) ** 2
        return constant * (sigma**2 * n ** (10.0 / 3.0) / scale) ** 0.25

    if rule.kind == GammaRuleKind.LEMMA2:
        delta = _require(q, "delta", tag)
        B_n = _require_positive_budget(q, tag)
        lambda_bar = rule.lambda_bar if rule.lambda_bar is not None else q.lambda_bar
        if lambda_bar is None:
            raise ModDenoiseParameterError("lambda_bar is required", field="lambda_bar", claim=tag)
        return constant * (4.0 * PI2 * sigma**2 * n / (delta * B_n * lambda_bar**2)) ** 0.25

    family = _require(q, "family", tag)
    B_n = _require_positive_budget(q, tag)
    if family == GraphFamily.COMPLETE:
        return constant * (sigma**2 / (n**2 * B_n)) ** 0.25
    if family == GraphFamily.STAR:
        return constant * (sigma**2 / B_n) ** 0.25
    if family == GraphFamily.PATH:
        theta = rule.theta if rule.theta is not None else q.theta
        if theta is None:
            raise ModDenoiseParameterError("theta is required", field="theta", claim=tag)
        return constant * (sigma**2 * n ** (5.0 - 4.0 * theta) / B_n) ** 0.25
    raise ModDenoiseUnsupportedFamilyError(family.value)


# Error bounds


def ucqp_expected_bound(q: BoundQuery, gamma: Optional[float] = None) -> ExpectedBound:
    """Bounds on E||Pi(g_hat) - h||^2 for the UCQP estimate.

    ``general`` is 16 Delta gamma^2 B_n / (1 + gamma lambda_min)^2
    + 64 pi^2 sigma^2 (1 + |L| / (1 + gamma lambda_min)^2 + n / (1 + gamma lambda_bar)^2);
    ``exact_noise_factor`` keeps 8(e^(4 pi^2 sigma^2) - 1) in place of 64 pi^2 sigma^2.
    When gamma is omitted (or equals the LEMMA2 choice) the closed form
    64 pi (sigma / lambda_bar sqrt(Delta B_n n) + pi sigma^2 (1 + |L|)) is
    reported as ``simplified``.

    Args:
        q: Needs n, sigma, delta, B_n, lambda_min, lambda_bar, L_size.
        gamma: Regularization; the LEMMA2 rule when omitted.
    """
    claim = "ucqp expected bound"
    n = q.n
    sigma = _require(q, "sigma", claim)
    delta = _require(q, "delta", claim)
    B_n = _require(q, "B_n", claim)
    lambda_min = _require(q, "lambda_min", claim)
    lambda_bar = _require(q, "lambda_bar", claim)
    L_size = _require(q, "L_size", claim)

    rule_gamma: Optional[float] = None
    if B_n > 0:
        rule_gamma = gamma_rule(GammaRuleKind.LEMMA2, q)
    if gamma is None:
        if rule_gamma is None:
            raise ModDenoiseDomainError(f"B_n must be > 0 for {claim} without gamma, got 0")
        gamma = rule_gamma
    elif gamma < 0:
        raise ModDenoiseParameterError(f"gamma must be >= 0, got {gamma}", field="gamma")

    low = 1.0 + gamma * lambda_min
    bias = 16.0 * delta * gamma**2 * B_n / low**2
    spread = 1.0 + L_size / low**2 + n / (1.0 + gamma * lambda_bar) ** 2
    general = bias + 64.0 * PI2 * sigma**2 * spread
    exact = bias + 8.0 * math.expm1(4.0 * PI2 * sigma**2) * spread

    simplified = None
    if rule_gamma is not None and math.isclose(gamma, rule_gamma, rel_tol=1e-12, abs_tol=0.0):
        simplified = 64.0 * math.pi * (
            sigma / lambda_bar * math.sqrt(delta * B_n * n) + math.pi * sigma**2 * (1 + L_size)
        )
    domain_ok = sigma <= 1.0 / (2.0 * math.pi)
    if not domain_ok:
        logger.debug(f"{claim}: sigma={sigma} exceeds 1/(2 pi)")
    return ExpectedBound(
        general=general,
        exact_noise_factor=exact,
        simplified=simplified,
        gamma=gamma,
        domain_ok=domain_ok,
    )


def ucqp_highprob_bound(q: BoundQuery, gamma: Optional[float] = None) -> HighProbabilityBound:
    """High-probability UCQP error bound at the LEMMA2 gamma.

    72 pi sigma sqrt(Delta B_n n) / lambda_bar
    + 99040 sigma^2 (1 + |L| + sqrt((1 + |L|) log n)) + 65536 log n,
    valid for 72 log n / (pi sqrt n) <= sigma <= 1 / (2 sqrt 2 pi). Out-of-domain
    inputs are still evaluated and listed in ``violations``.

    Args:
        q: Needs n, sigma, delta, B_n, lambda_bar, L_size.
        gamma: Accepted for signature symmetry; the bound assumes LEMMA2.
    """
    claim = "ucqp high-probability bound"
    n = q.n
    sigma = _require(q, "sigma", claim)
    delta = _require(q, "delta", claim)
    B_n = _require(q, "B_n", claim)
    lambda_bar = _require(q, "lambda_bar", claim)
    L_size = _require(q, "L_size", claim)
    log_n = math.log(n)

    value = (
        72.0 * math.pi * sigma * math.sqrt(delta * B_n * n) / lambda_bar
        + 99040.0 * sigma**2 * (1 + L_size + math.sqrt((1 + L_size) * log_n))
        + 65536.0 * log_n
    )
    checks = [
        _check("noise floor 72 log n / (pi sqrt n) <= sigma", 72.0 * log_n / (math.pi * math.sqrt(n)), sigma, claim),
        _check("sigma <= 1 / (2 sqrt 2 pi)", sigma, 1.0 / (2.0 * math.sqrt(2.0) * math.pi), claim),
    ]
    violations = [c for c in checks if not c.satisfied]
    return HighProbabilityBound(value=value, domain_ok=not violations, violations=violations)


def trs_highprob_bound(q: BoundQuery, gamma: Optional[float] = None) -> HighProbabilityBound:
    """High-probability TRS error bound for a spectral gap index k.

    C1 (sigma / lambda_bar)(sqrt(Delta B_n n) + n^(3/2) lambda_(n-k+1)^2 / sqrt(Delta B_n))
    + C2 sigma^2 (1 + |L| + sqrt((1 + |L|) log n)) + C3 sigma^4 n + C4 log n
    + C5 B_n^2 / (n lambda_(n-k)^2). At k = 1, lambda_(n-k+1) = 0 and
    lambda_(n-k) = lambda_min.

    Args:
        q: Needs n, sigma, delta, B_n (> 0), lambda_bar, L_size, k,
            lambda_n_minus_k and lambda_n_minus_k_plus_1.
        gamma: Accepted for signature symmetry; the bound assumes LEMMA2.

    Raises:
        ModDenoiseDomainError: If B_n = 0.
        ModDenoiseParameterError: If k or a gap eigenvalue is missing.
    """
    claim = "trs high-probability bound"
    n = q.n
    sigma = _require(q, "sigma", claim)
    delta = _require(q, "delta", claim)
    B_n = _require_positive_budget(q, claim)
    lambda_bar = _require(q, "lambda_bar", claim)
    L_size = _require(q, "L_size", claim)
    _require(q, "k", claim)
    upper = _require(q, "lambda_n_minus_k", claim)
    lower = _require(q, "lambda_n_minus_k_plus_1", claim)
    log_n = math.log(n)
    budget = delta * B_n

    value = (
        TRS_C1 * (sigma / lambda_bar) * (math.sqrt(budget * n) + n**1.5 * lower**2 / math.sqrt(budget))
        + TRS_C2 * sigma**2 * (1 + L_size + math.sqrt((1 + L_size) * log_n))
        + TRS_C3 * sigma**4 * n
        + TRS_C4 * log_n
        + TRS_C5 * B_n**2 / (n * upper**2)
    )
    checks = [
        _check("B_n <= n lambda_(n-k) / 12", B_n, n * upper / 12.0, claim),
        _check("B_n <= n lambda_bar / 2", B_n, n * lambda_bar / 2.0, claim),
        _check("noise floor 286 (log n / sqrt n)^(1/2) <= sigma", 286.0 * math.sqrt(log_n / math.sqrt(n)), sigma, claim),
        _check("sigma <= 1 / (4 sqrt 3 pi)", sigma, 1.0 / (4.0 * math.sqrt(3.0) * math.pi), claim),
        _check("sigma <= gap ceiling", sigma, _gap_ceiling(lambda_bar, lower, budget, n), claim),
    ]
    violations = [c for c in checks if not c.satisfied]
    return HighProbabilityBound(value=value, domain_ok=not violations, violations=violations)


def _gap_ceiling(lambda_bar: float, lower: float, budget: float, n: int) -> float:
    if lower == 0:
        return math.inf
    return lambda_bar / (16.0 * lower**2) * math.sqrt(budget / (4.0 * PI2 * n))


def mu_star_lower_bound(q: BoundQuery, gamma: float) -> MuStarBound:
    """High-probability lower bound on the TRS multiplier.

    2 (1 - (B_n / (n lambda_(n-k)) + 4 pi^2 sigma^2 + 24760 log n / sqrt(n)
    + gamma lambda_(n-k+1))). The four hypotheses are reported individually;
    together they make the bound at least 1.

    Note:
        24760 log n / sqrt(n) <= 1/12 needs n of order 1e13, so the
        hypotheses never hold at desk-scale n.
    """
    claim = "multiplier lower bound"
    n = q.n
    sigma = _require(q, "sigma", claim)
    B_n = _require(q, "B_n", claim)
    _require(q, "k", claim)
    upper = _require(q, "lambda_n_minus_k", claim)
    lower = _require(q, "lambda_n_minus_k_plus_1", claim)
    if gamma < 0:
        raise ModDenoiseParameterError(f"gamma must be >= 0, got {gamma}", field="gamma")
    log_term = 24760.0 * math.log(n) / math.sqrt(n)

    deficit = B_n / (n * upper) + 4.0 * PI2 * sigma**2 + log_term + gamma * lower
    checks = [
        _check("B_n / lambda_(n-k) <= n / 12", B_n / upper, n / 12.0, claim),
        _check("sigma^2 <= 1 / (48 pi^2)", sigma**2, 1.0 / (48.0 * PI2), claim),
        _check("24760 log n / sqrt(n) <= 1 / 12", log_term, 1.0 / 12.0, claim),
        _check("gamma lambda_(n-k+1) <= 1 / 4", gamma * lower, 0.25, claim),
    ]
    return MuStarBound(
        value=2.0 * (1.0 - deficit),
        conditions_hold=all(c.satisfied for c in checks),
        report=checks,
    )


def mu_star_spectral_lower_bound(
    z: SignalLike,
    spectrum: SpectralDecomposition,
    gamma: float,
    lambda_tilde: float,
) -> Optional[float]:
    """Deterministic bound mu* >= 2 s - 2 gamma lambda_tilde.

    s = (sum over lambda_j <= lambda_tilde of |<z, q_j>|^2 / n)^(1/2).

    Returns:
        The bound, or None when s <= gamma lambda_tilde and it does not apply.
    """
    values = _values(z)
    n = spectrum.n
    slack = SPECTRAL_TOLERANCE * max(1.0, spectrum.lambda_1)
    energy = np.abs(spectrum.coefficients(values)) ** 2
    mask = spectrum.eigenvalues <= lambda_tilde + slack
    s = math.sqrt(math.fsum(energy[mask]) / n)
    if s <= gamma * lambda_tilde:
        return None
    return 2.0 * s - 2.0 * gamma * lambda_tilde


# Concentration


def concentration_rhs(
    item: Union[ConcentrationItem, str],
    n: int,
    sigma: float,
    k: int = 1,
    h_proj_inf: float = 0.0,
    h_proj_2: float = 0.0,
) -> float:
    """Right-hand side of a concentration event for z = noisy h.

    U is an n x k matrix with orthonormal columns.

    Items:
        * I: the deficit D in z* U U^T z - k(1 - expn(4)) - expn(4) h* U U^T h >= -D,
          D = 4096 log n + 32 sqrt(6k)(1 - expn(8)) sqrt(log n)
          + 11 log n (||U U^T h||_inf + sqrt(1 - expn(8)) ||U U^T h||_2).
          Probability >= 1 - 4/n^2.
        * II: the upper bound k(1 - expn(4)) + 4096 log n
          + 32 sqrt(6k)(1 - expn(8)) sqrt(log n) on the centred projected
          energy. Probability >= 1 - 2/n^2.
        * III, IV: the deviation 3 log n (2 + sqrt(4 + 9(1 - expn(8)) n)) of
          ||z - h||^2 and ||z - E z||^2 from their means.
          Probability >= 1 - 2/n^2 each.

    Example:
        >>> concentration_rhs("iii", 100, 0.0) == 12 * math.log(100)
        True
    """
    item = ConcentrationItem(item)
    if n < 2:
        raise ModDenoiseValidationError(f"n must be >= 2, got {n}")
    log_n = math.log(n)
    spread8 = 1.0 - _expn(8.0, sigma)
    if item in (ConcentrationItem.III, ConcentrationItem.IV):
        return 3.0 * log_n * (2.0 + math.sqrt(4.0 + 9.0 * spread8 * n))
    tail = 4096.0 * log_n + 32.0 * math.sqrt(6.0 * k) * spread8 * math.sqrt(log_n)
    if item == ConcentrationItem.II:
        return k * (1.0 - _expn(4.0, sigma)) + tail
    return tail + 11.0 * log_n * (h_proj_inf + math.sqrt(spread8) * h_proj_2)


def concentration_mean(
    item: Union[ConcentrationItem, str],
    n: int,
    sigma: float,
    k: int = 1,
    h_proj_2: float = 0.0,
) -> float:
    """Centring term of a concentration event.

    I: k(1 - expn(4)) + expn(4) ||U U^T h||^2; II: k(1 - expn(4));
    III: 2n(1 - expn(2)); IV: n(1 - expn(4)).
    """
    item = ConcentrationItem(item)
    spread4 = 1.0 - _expn(4.0, sigma)
    if item == ConcentrationItem.I:
        return k * spread4 + _expn(4.0, sigma) * h_proj_2**2
    if item == ConcentrationItem.II:
        return k * spread4
    if item == ConcentrationItem.III:
        return 2.0 * n * (1.0 - _expn(2.0, sigma))
    return n * spread4


def concentration_failure_probability(item: Union[ConcentrationItem, str], n: int) -> float:
    """Failure budget of a concentration event: 4/n^2 for I, 2/n^2 otherwise."""
    item = ConcentrationItem(item)
    return (4.0 if item == ConcentrationItem.I else 2.0) / n**2


def simplified_concentration(
    item: Union[SimplifiedConcentration, str],
    n: int,
    sigma: float,
    L_size: int = 0,
) -> HighProbabilityBound:
    """Simplified concentration thresholds for sigma <= 1 / (2 sqrt 2 pi).

    * LOW_FREQUENCY: deviation bound 6190 sigma^2 (sqrt((1 + |L|) log n) + 1 + |L|)
      + 4096 log n on the low-frequency projected energy.
    * CENTRED_NORM: ||z - E z||^2 <= 5 pi^2 sigma^2 n.
    * INPUT_ERROR: ||z - h||^2 >= pi^2 sigma^2 n.

    The last two also need sigma >= 72 log n / (pi sqrt n).
    """
    item = SimplifiedConcentration(item)
    log_n = math.log(n)
    tag = f"simplified concentration '{item.value}'"
    checks = [_check("sigma <= 1 / (2 sqrt 2 pi)", sigma, 1.0 / (2.0 * math.sqrt(2.0) * math.pi), tag)]
    if item == SimplifiedConcentration.LOW_FREQUENCY:
        value = 6190.0 * sigma**2 * (math.sqrt((1 + L_size) * log_n) + 1 + L_size) + 4096.0 * log_n
    else:
        checks.append(
            _check("noise floor 72 log n / (pi sqrt n) <= sigma", 72.0 * log_n / (math.pi * math.sqrt(n)), sigma, tag)
        )
        factor = 5.0 if item == SimplifiedConcentration.CENTRED_NORM else 1.0
        value = factor * PI2 * sigma**2 * n
    violations = [c for c in checks if not c.satisfied]
    return HighProbabilityBound(value=value, domain_ok=not violations, violations=violations)


# Deterministic oracle bounds


def _oracle_terms(
    z: SignalLike,
    h: SignalLike,
    spectrum: SpectralDecomposition,
    gamma: float,
    lambda_bar: float,
    B_n: float,
    delta: float,
    sigma: float,
) -> tuple[float, float, np.ndarray, list[int]]:
    z_values, h_values = _values(z), _values(h)
    if z_values.shape[0] != spectrum.n or h_values.shape[0] != spectrum.n:
        raise ModDenoiseValidationError(f"signal lengths must equal n={spectrum.n}")
    low_set = list(spectrum.index_sets(lambda_bar).low_set)
    residual = math.exp(2.0 * PI2 * sigma**2) * z_values - h_values
    energy = np.abs(spectrum.coefficients(residual)) ** 2
    low = 1.0 + gamma * spectrum.lambda_min
    low_energy = math.fsum(energy[np.asarray(low_set, dtype=np.intp) - 1]) if low_set else 0.0
    e1 = (
        energy[-1]
        + low_energy / low**2
        + math.fsum(np.abs(residual) ** 2) / (1.0 + gamma * lambda_bar) ** 2
    )
    e2 = 2.0 * gamma**2 * delta * B_n / low**2
    return float(e1), float(e2), h_values, low_set


def ucqp_oracle_bound(
    z: SignalLike,
    h: SignalLike,
    spectrum: SpectralDecomposition,
    gamma: float,
    lambda_bar: float,
    B_n: float,
    delta: float,
    sigma: float,
) -> float:
    """Deterministic bound 8 (E1 + E2) on ||Pi(g_hat) - h||^2 for UCQP.

    E1 = |<q_n, w>|^2 + sum_(j in L) |<q_j, w>|^2 / (1 + gamma lambda_min)^2
    + ||w||^2 / (1 + gamma lambda_bar)^2 with w = e^(2 pi^2 sigma^2) z - h,
    and E2 = 2 gamma^2 Delta B_n / (1 + gamma lambda_min)^2. B_n must be
    (an upper bound on) h* L h.
    """
    e1, e2, _, _ = _oracle_terms(z, h, spectrum, gamma, lambda_bar, B_n, delta, sigma)
    return 8.0 * (e1 + e2)


def trs_oracle_bound(
    z: SignalLike,
    h: SignalLike,
    spectrum: SpectralDecomposition,
    gamma: float,
    mu_star: float,
    lambda_bar: float,
    B_n: float,
    delta: float,
    sigma: float,
) -> float:
    """Deterministic bound on ||Pi(g_hat) - h||^2 for TRS.

    32 / mu*^2 (E1 + E2) + 8 (2 / mu* - 1)^2 (|<h, q_n>|^2
    + sum_(j in L) |<h, q_j>|^2 / (1 + gamma lambda_min)^2
    + B_n / (lambda_bar (1 + gamma lambda_bar)^2)), with E1, E2 as in
    ``ucqp_oracle_bound``.
    """
    if not 0 < mu_star <= 2:
        raise ModDenoiseDomainError(f"mu_star must be in range (0, 2], got {mu_star}")
    e1, e2, h_values, low_set = _oracle_terms(
        z, h, spectrum, gamma, lambda_bar, B_n, delta, sigma
    )
    h_energy = np.abs(spectrum.coefficients(h_values)) ** 2
    low = 1.0 + gamma * spectrum.lambda_min
    low_energy = math.fsum(h_energy[np.asarray(low_set, dtype=np.intp) - 1]) if low_set else 0.0
    bias = h_energy[-1] + low_energy / low**2 + B_n / (lambda_bar * (1.0 + gamma * lambda_bar) ** 2)
    return 32.0 / mu_star**2 * (e1 + e2) + 8.0 * (2.0 / mu_star - 1.0) ** 2 * float(bias)


def order_level_error_bound(
    claim: Union[DenoisingClaim, str], q: BoundQuery, c: float = 1.0
) -> float:
    """Error bound shape of the path-graph Lipschitz claims, scaled by c.

    UCQP: c ((sigma M + sigma^2) n^(2/3) + log n).
    TRS: c ((sigma (M + 1/M) + sigma^2) n^(2/3) + sigma^4 n + log n + M^4 / n).
    """
    claim = DenoisingClaim.parse(claim) if isinstance(claim, str) else claim
    n = q.n
    sigma = _require(q, "sigma", claim.value)
    M = _require(q, "M", claim.value)
    log_n = math.log(n)
    if claim == DenoisingClaim.UCQP_PATH_LIPSCHITZ:
        return c * ((sigma * M + sigma**2) * n ** (2.0 / 3.0) + log_n)
    if claim == DenoisingClaim.TRS_PATH_LIPSCHITZ:
        return c * (
            (sigma * (M + 1.0 / M) + sigma**2) * n ** (2.0 / 3.0)
            + sigma**4 * n
            + log_n
            + M**4 / n
        )
    raise ModDenoiseParameterError(
        f"no order-level error bound for claim '{claim.value}'", field="claim"
    )


# Denoising conditions


def _set_size_term(L_size: int, log_n: float) -> float:
    return 1 + L_size + math.sqrt((1 + L_size) * log_n)


def _ucqp_expectation(q: BoundQuery, c: float) -> list[ConditionCheck]:
    tag = DenoisingClaim.UCQP_EXPECTATION.value
    n = q.n
    eps = _require(q, "epsilon", tag)
    L_size = _require(q, "L_size", tag)
    lambda_bar = _require(q, "lambda_bar", tag)
    delta = _require(q, "delta", tag)
    B_n = _require(q, "B_n", tag)
    sigma = _require(q, "sigma", tag)
    return [
        _check("1 + |L| <= eps n / 64", 1 + L_size, eps * n / 64.0, tag),
        _check(
            "noise floor 64 / (pi eps lambda_bar) sqrt(Delta B_n / n) <= sigma",
            64.0 / (math.pi * eps * lambda_bar) * math.sqrt(delta * B_n / n),
            sigma,
            tag,
        ),
        _check("sigma <= 1 / (2 pi)", sigma, 1.0 / (2.0 * math.pi), tag),
    ]


def _ucqp_high_probability(q: BoundQuery, c: float) -> list[ConditionCheck]:
    tag = DenoisingClaim.UCQP_HIGH_PROBABILITY.value
    n = q.n
    eps = _require(q, "epsilon", tag)
    L_size = _require(q, "L_size", tag)
    lambda_bar = _require(q, "lambda_bar", tag)
    delta = _require(q, "delta", tag)
    B_n = _require(q, "B_n", tag)
    sigma = _require(q, "sigma", tag)
    log_n = math.log(n)
    return [
        _check(
            "noise floor 69 / (eps lambda_bar) sqrt(Delta B_n / n) <= sigma",
            69.0 / (eps * lambda_bar) * math.sqrt(delta * B_n / n),
            sigma,
            tag,
        ),
        _check(
            "noise floor 142 log n / sqrt(eps n) <= sigma",
            142.0 * log_n / math.sqrt(eps * n),
            sigma,
            tag,
        ),
        _check("sigma <= 1 / (2 sqrt 2 pi)", sigma, 1.0 / (2.0 * math.sqrt(2.0) * math.pi), tag),
        _check(
            "1 + |L| + sqrt((1 + |L|) log n) <= eps n / 10035",
            _set_size_term(L_size, log_n),
            eps * n / 10035.0,
            tag,
        ),
    ]


def _trs_common(
    q: BoundQuery, tag: str, upper: float, lower: float, with_gap: bool
) -> list[ConditionCheck]:
    n = q.n
    eps = _require(q, "epsilon", tag)
    L_size = _require(q, "L_size", tag)
    lambda_bar = _require(q, "lambda_bar", tag)
    delta = _require(q, "delta", tag)
    B_n = _require_positive_budget(q, tag)
    sigma = _require(q, "sigma", tag)
    log_n = math.log(n)
    budget = delta * B_n

    spectral_floor = math.sqrt(budget / n)
    if with_gap and lower > 0:
        spectral_floor += lower**2 * math.sqrt(n / budget)

    checks = [
        _check("B_n <= n lambda_(n-k) / 12", B_n, n * upper / 12.0, tag),
    ]
    if with_gap:
        checks.append(_check("B_n <= n lambda_bar / 2", B_n, n * lambda_bar / 2.0, tag))
    checks += [
        _check(
            "1 + |L| + sqrt((1 + |L|) log n) <= pi^2 eps n / (5 C2)",
            _set_size_term(L_size, log_n),
            PI2 * eps * n / (5.0 * TRS_C2),
            tag,
        ),
        _check("sigma <= pi sqrt(eps) / sqrt(5 C3)", sigma, math.pi * math.sqrt(eps) / math.sqrt(5.0 * TRS_C3), tag),
    ]
    if with_gap:
        checks.append(_check("sigma <= gap ceiling", sigma, _gap_ceiling(lambda_bar, lower, budget, n), tag))
    checks += [
        _check("noise floor 286 (log n / sqrt n)^(1/2) <= sigma", 286.0 * math.sqrt(log_n / math.sqrt(n)), sigma, tag),
        _check(
            "noise floor sqrt(5 C5) / pi * B_n / (n lambda_(n-k) sqrt(eps)) <= sigma",
            math.sqrt(5.0 * TRS_C5) / math.pi * B_n / (n * upper * math.sqrt(eps)),
            sigma,
            tag,
        ),
        _check(
            "noise floor sqrt(5 C4 log n / (eps pi^2 n)) <= sigma",
            math.sqrt(5.0 * TRS_C4 * log_n / (eps * PI2 * n)),
            sigma,
            tag,
        ),
        _check(
            "noise floor 5 C1 / (pi^2 eps lambda_bar) * spectral term <= sigma",
            5.0 * TRS_C1 / (PI2 * eps * lambda_bar) * spectral_floor,
            sigma,
            tag,
        ),
    ]
    return checks


def _trs_high_probability(q: BoundQuery, c: float) -> list[ConditionCheck]:
    tag = DenoisingClaim.TRS_HIGH_PROBABILITY.value
    _require(q, "k", tag)
    upper = _require(q, "lambda_n_minus_k", tag)
    lower = _require(q, "lambda_n_minus_k_plus_1", tag)
    return _trs_common(q, tag, upper, lower, with_gap=True)


def _trs_min_gap(q: BoundQuery, c: float) -> list[ConditionCheck]:
    tag = DenoisingClaim.TRS_MIN_GAP.value
    lambda_min = _require(q, "lambda_min", tag)
    return _trs_common(q, tag, lambda_min, 0.0, with_gap=False)


def _order(name: str, lhs: float, rhs: float, c: float, tag: str) -> ConditionCheck:
    return _check(name, lhs, c * rhs, tag, order_level=True)


def _family(q: BoundQuery, tag: str) -> GraphFamily:
    family = _require(q, "family", tag)
    if family == GraphFamily.CUSTOM:
        raise ModDenoiseUnsupportedFamilyError(family.value)
    return family


def _family_smoothness_floor(q: BoundQuery, family: GraphFamily, tag: str) -> tuple[str, float]:
    n = q.n
    eps = _require(q, "epsilon", tag)
    B_n = _require(q, "B_n", tag)
    if family == GraphFamily.COMPLETE:
        return "sqrt(B_n) / (n eps) <~ sigma", math.sqrt(B_n) / (n * eps)
    if family == GraphFamily.STAR:
        return "sqrt(B_n) / eps <~ sigma", math.sqrt(B_n) / eps
    theta = _require(q, "theta", tag)
    return (
        "n^((3 - 4 theta) / 2) sqrt(B_n) / eps <~ sigma",
        n ** ((3.0 - 4.0 * theta) / 2.0) * math.sqrt(B_n) / eps,
    )


def _ucqp_expectation_families(q: BoundQuery, c: float) -> list[ConditionCheck]:
    tag = DenoisingClaim.UCQP_EXPECTATION_FAMILIES.value
    family = _family(q, tag)
    n = q.n
    eps = _require(q, "epsilon", tag)
    sigma = _require(q, "sigma", tag)
    if family == GraphFamily.PATH:
        theta = _require(q, "theta", tag)
        size = _order("(1/eps)^(1 / (1 - theta)) <~ n", (1.0 / eps) ** (1.0 / (1.0 - theta)), n, c, tag)
    else:
        size = _order("1/eps <~ n", 1.0 / eps, n, c, tag)
    name, floor = _family_smoothness_floor(q, family, tag)
    return [
        size,
        _order(name, floor, sigma, c, tag),
        _order("sigma <~ 1", sigma, 1.0, c, tag),
    ]


def _size_condition_with_log(q: BoundQuery, family: GraphFamily, c: float, tag: str) -> ConditionCheck:
    n = q.n
    eps = _require(q, "epsilon", tag)
    log_n = math.log(n)
    if family == GraphFamily.PATH:
        theta = _require(q, "theta", tag)
        n_theta = n**theta
        return _order(
            "n^theta + sqrt(n^theta log n) <~ eps n",
            n_theta + math.sqrt(n_theta * log_n),
            eps * n,
            c,
            tag,
        )
    return _order("1/eps <~ n / sqrt(log n)", 1.0 / eps, n / math.sqrt(log_n), c, tag)


def _ucqp_high_probability_families(q: BoundQuery, c: float) -> list[ConditionCheck]:
    tag = DenoisingClaim.UCQP_HIGH_PROBABILITY_FAMILIES.value
    family = _family(q, tag)
    n = q.n
    eps = _require(q, "epsilon", tag)
    sigma = _require(q, "sigma", tag)
    name, floor = _family_smoothness_floor(q, family, tag)
    return [
        _size_condition_with_log(q, family, c, tag),
        _order(name, floor, sigma, c, tag),
        _order("log n / sqrt(eps n) <~ sigma", math.log(n) / math.sqrt(eps * n), sigma, c, tag),
        _order("sigma <~ 1", sigma, 1.0, c, tag),
    ]


def _trs_families(q: BoundQuery, c: float) -> list[ConditionCheck]:
    tag = DenoisingClaim.TRS_FAMILIES.value
    family = _family(q, tag)
    n = q.n
    eps = _require(q, "epsilon", tag)
    sigma = _require(q, "sigma", tag)
    B_n = _require(q, "B_n", tag)
    log_n = math.log(n)
    name, floor = _family_smoothness_floor(q, family, tag)
    if family == GraphFamily.COMPLETE:
        budget = _order("B_n <~ n^2", B_n, n**2, c, tag)
        ratio = _order("B_n / (n^2 sqrt(eps)) <~ sigma", B_n / (n**2 * math.sqrt(eps)), sigma, c, tag)
    elif family == GraphFamily.STAR:
        budget = _order("B_n <~ n", B_n, n, c, tag)
        ratio = _order("B_n / (n sqrt(eps)) <~ sigma", B_n / (n * math.sqrt(eps)), sigma, c, tag)
    else:
        budget = _order("B_n <~ 1/n", B_n, 1.0 / n, c, tag)
        ratio = _order("n B_n / sqrt(eps) <~ sigma", n * B_n / math.sqrt(eps), sigma, c, tag)
    return [
        _size_condition_with_log(q, family, c, tag),
        budget,
        _order(name, floor, sigma, c, tag),
        ratio,
        _order("(log n / sqrt n)^(1/2) <~ sigma", math.sqrt(log_n / math.sqrt(n)), sigma, c, tag),
        _order("(log n / (eps n))^(1/2) <~ sigma", math.sqrt(log_n / (eps * n)), sigma, c, tag),
        _order("sigma <~ sqrt(eps)", sigma, math.sqrt(eps), c, tag),
    ]


def _ucqp_path_lipschitz(q: BoundQuery, c: float) -> list[ConditionCheck]:
    tag = DenoisingClaim.UCQP_PATH_LIPSCHITZ.value
    n = q.n
    eps = _require(q, "epsilon", tag)
    sigma = _require(q, "sigma", tag)
    M = _require(q, "M", tag)
    return [
        _order("(1/eps)^3 <~ n", (1.0 / eps) ** 3, n, c, tag),
        _order("M / (eps n^(1/3)) <~ sigma", M / (eps * n ** (1.0 / 3.0)), sigma, c, tag),
        _order("log n / sqrt(eps n) <~ sigma", math.log(n) / math.sqrt(eps * n), sigma, c, tag),
        _order("sigma <~ 1", sigma, 1.0, c, tag),
    ]


def _trs_path_lipschitz(q: BoundQuery, c: float) -> list[ConditionCheck]:
    tag = DenoisingClaim.TRS_PATH_LIPSCHITZ.value
    n = q.n
    eps = _require(q, "epsilon", tag)
    sigma = _require(q, "sigma", tag)
    M = _require(q, "M", tag)
    log_n = math.log(n)
    return [
        _order("(1/eps)^3 <~ n", (1.0 / eps) ** 3, n, c, tag),
        _order("M^2 <~ n", M**2, n, c, tag),
        _order(
            "(M + 1/M) / (eps n^(1/3)) <~ sigma",
            (M + 1.0 / M) / (eps * n ** (1.0 / 3.0)),
            sigma,
            c,
            tag,
        ),
        _order("M^2 / (n sqrt(eps)) <~ sigma", M**2 / (n * math.sqrt(eps)), sigma, c, tag),
        _order("(log n / sqrt n)^(1/2) <~ sigma", math.sqrt(log_n / math.sqrt(n)), sigma, c, tag),
        _order("(log n / (eps n))^(1/2) <~ sigma", math.sqrt(log_n / (eps * n)), sigma, c, tag),
        _order("sigma <~ sqrt(eps)", sigma, math.sqrt(eps), c, tag),
        _order("sigma <~ n^(1/3) M", sigma, n ** (1.0 / 3.0) * M, c, tag),
    ]


_CLAIM_CHECKERS: dict[DenoisingClaim, Callable[[BoundQuery, float], list[ConditionCheck]]] = {
    DenoisingClaim.UCQP_EXPECTATION: _ucqp_expectation,
    DenoisingClaim.UCQP_HIGH_PROBABILITY: _ucqp_high_probability,
    DenoisingClaim.TRS_HIGH_PROBABILITY: _trs_high_probability,
    DenoisingClaim.UCQP_EXPECTATION_FAMILIES: _ucqp_expectation_families,
    DenoisingClaim.UCQP_HIGH_PROBABILITY_FAMILIES: _ucqp_high_probability_families,
    DenoisingClaim.TRS_FAMILIES: _trs_families,
    DenoisingClaim.UCQP_PATH_LIPSCHITZ: _ucqp_path_lipschitz,
    DenoisingClaim.TRS_MIN_GAP: _trs_min_gap,
    DenoisingClaim.TRS_PATH_LIPSCHITZ: _trs_path_lipschitz,
}


def check_denoising_conditions(
    claim: Union[DenoisingClaim, str], q: BoundQuery, c: float = 1.0
) -> ConditionReport:
    """Evaluate every hypothesis of a denoising claim.

    Args:
        claim: Claim id or alias (e.g. "ucqp-expectation" or "thm2").
        q: Query holding the scalars the claim reads.
        c: Constant used by order-level claims for each A <~ B.

    Returns:
        ConditionReport listing each inequality with its two sides.

    Raises:
        ModDenoiseParameterError: If a field the claim reads is missing.
        ModDenoiseUnsupportedFamilyError: For family claims on a custom graph.

    Example:
        >>> report = check_denoising_conditions("thm6", q)
        >>> report.claim
        <DenoisingClaim.UCQP_HIGH_PROBABILITY: 'ucqp-high-probability'>
    """
    claim = DenoisingClaim.parse(claim) if isinstance(claim, str) else claim
    if not c > 0:
        raise ModDenoiseParameterError(f"c must be > 0, got {c}", field="c")
    checks = _CLAIM_CHECKERS[claim](q, c)
    report = ConditionReport(claim=claim, checks=checks, constant=c)
    logger.debug(
        f"{claim.value}: {len(checks) - len(report.failed_conditions)}/{len(checks)} conditions hold"
    )
    return report


def bound_curve(
    kind: Union[BoundKind, str],
    q: BoundQuery,
    sigmas: list[float],
) -> list[tuple[float, float, bool]]:
    """Evaluate a bound over a noise-level grid.

    The UCQP expected bound is reported in its closed form at the LEMMA2
    gamma. Points outside a bound's domain are kept and flagged.

    Returns:
        (sigma, bound_value, condition_ok) triples.
    """
    kind = BoundKind(kind)
    rows = []
    for sigma in sigmas:
        point = q.model_copy(update={"sigma": float(sigma)})
        if kind == BoundKind.UCQP_EXPECTED:
            expected = ucqp_expected_bound(point)
            value = expected.simplified if expected.simplified is not None else expected.general
            ok = expected.domain_ok
        elif kind == BoundKind.UCQP_HIGH_PROBABILITY:
            result = ucqp_highprob_bound(point)
            value, ok = result.value, result.domain_ok
        else:
            result = trs_highprob_bound(point)
            value, ok = result.value, result.domain_ok
        rows.append((float(sigma), float(value), bool(ok)))
    flagged = sum(1 for _, _, ok in rows if not ok)
    if flagged:
        logger.warning(f"{kind.value}: {flagged} of {len(rows)} noise levels are outside the bound's domain")
    return rows


__all__ = [
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
]
