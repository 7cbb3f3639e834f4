"""
Analytic Module

Closed-form estimates of Eve's information gain and entropy on the key,
a quadrature oracle for the per-symbol information, and the
security-requirement workflow built on them.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .config import QUADRATURE_LIMIT, QUADRATURE_TOLERANCE_BITS
from .errors import AnalyticDomainError, QuadratureError
from .keystream import ndep_bound
from .transmission import AttackMode, ChannelModel, log_channel_density

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
SQRT_2PI_E = math.sqrt(2.0 * math.pi * math.e)


def info_per_symbol(M: float, sigma: float) -> float:
    """U = log2(M / (sigma sqrt(2 pi e))) - 1 bits per symbol; may be negative"""
    return math.log2(M / (sigma * SQRT_2PI_E)) - 1.0


def n0(L: float, U: float) -> float:
    """Symbols until the linear decline L - qU would reach zero"""
    if U <= 0:
        raise AnalyticDomainError(f"n0 needs a positive information rate, got U={U}")
    return L / U


@dataclass
class EstimateParams:
    L: int
    M: int
    sigma: float
    U: float = field(init=False)
    n0: Optional[float] = field(init=False)

    def __post_init__(self):
        self.U = info_per_symbol(self.M, self.sigma)
        self.n0 = n0(self.L, self.U) if self.U > 0 else None


def estimate_curve(L: float, U: float, q_values: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Linear-regime estimate max(L - qU, 0)

    Args:
        L: Key length in bits
        U: Information rate in bits per symbol (>= 0)
        q_values: Symbol counts

    Returns:
        (estimated entropies, in-domain flags with q < n0)
    """
    if U < 0:
        raise AnalyticDomainError(f"estimate needs U >= 0, got U={U}")
    q = np.asarray(q_values, dtype=float)
    values = np.maximum(L - q * U, 0.0)
    if U == 0:
        in_domain = np.ones(q.shape, dtype=bool)
    else:
        in_domain = q < L / U
    return values, in_domain


def min_prob_from_entropy(H: float) -> float:
    """Lower bound 2^-H on the probability of the correct key"""
    return 2.0 ** (-H)


def _entropy_integral(log_density, a: float, b: float, points: Sequence[float],
                      epsabs: float = QUADRATURE_TOLERANCE_BITS / 10) -> Tuple[float, float]:
    """-integral of f log2 f over [a, b], with quadrature error estimate (bits)"""

    def integrand(x):
        lf = float(log_density(x))
        if lf == -math.inf:
            return 0.0
        return -math.exp(lf) * lf / LN2

    inner = sorted({p for p in points if a < p < b})
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, error = quad(integrand, a, b, points=inner or None,
                                limit=QUADRATURE_LIMIT, epsabs=epsabs,
                                epsrel=1e-10)
        except IntegrationWarning as exc:
            # rerun without raising to report what was achieved
            warnings.simplefilter("ignore", IntegrationWarning)
            value, error = quad(integrand, a, b, points=inner or None, limit=QUADRATURE_LIMIT)
            raise QuadratureError(f"entropy quadrature on [{a}, {b}] did not converge: {exc}", error)
    return value, error


def _peak_points(center: float, sigma: float) -> List[float]:
    return [center + k * sigma for k in (-8, -4, -2, 0, 2, 4, 8)]


def exact_symbol_info(M: int, sigma: float,
                      attack: AttackMode = AttackMode.CIPHERTEXT_ONLY) -> float:
    """
    Mutual information I(Y; R) for one symbol, by quadrature

    R uniform on [0, M), the data bit uniform (ciphertext-only) or known,
    Y from the wrapped-Gaussian channel.

    Args:
        M: Number of phase points
        sigma: Noise standard deviation in symbol-index units
        attack: Marginalize (ciphertext-only) or condition on the data bit

    Returns:
        Information in bits, within QUADRATURE_TOLERANCE_BITS
    """
    if M < 2 or sigma <= 0:
        raise AnalyticDomainError(f"need M >= 2 and sigma > 0, got M={M}, sigma={sigma}")
    attack = AttackMode(attack)
    channel = ChannelModel.wrapped_gaussian(sigma)
    half = M / 2.0
    offsets = np.arange(M, dtype=float)

    # h(Y): the output density has period 1 and peaks on the integers
    def log_marginal(y):
        return np.logaddexp.reduce(log_channel_density(y - offsets, channel, M)) - math.log(M)

    h_y, err_y = _entropy_integral(log_marginal, -0.5, 0.5, _peak_points(0.0, sigma),
                                    epsabs=QUADRATURE_TOLERANCE_BITS / (10 * M))
    h_y *= M
    err_y *= M

    if attack is AttackMode.KNOWN_PLAINTEXT:
        def log_conditional(x):
            return log_channel_density(x, channel, M)

        h_cond, err_cond = _entropy_integral(log_conditional, -half, half, _peak_points(0.0, sigma))
    else:
        # antipodal mixture has period M/2
        def log_conditional(x):
            return np.logaddexp(log_channel_density(x, channel, M),
                                log_channel_density(x - half, channel, M)) - LN2

        h_cond, err_cond = _entropy_integral(log_conditional, -half / 2, half / 2,
                                             _peak_points(0.0, sigma))
        h_cond *= 2
        err_cond *= 2

    achieved = err_y + err_cond
    if achieved > QUADRATURE_TOLERANCE_BITS:
        raise QuadratureError("symbol information quadrature above tolerance", achieved)

    cap = math.log2(M / 2.0) if attack is AttackMode.CIPHERTEXT_ONLY else math.log2(M)
    info = min(max(h_y - h_cond, 0.0), cap)
    logger.debug(f"exact_symbol_info(M={M}, sigma={sigma}, {attack.value}) = {info:.6f} bits "
                 f"(quadrature error {achieved:.2g})")
    return info


def arc_information(arc_fraction: float, M: int,
                    attack: AttackMode = AttackMode.CIPHERTEXT_ONLY) -> float:
    """Exact per-symbol information of the uniform-arc channel"""
    attack = AttackMode(attack)
    width = arc_fraction * M
    if attack is AttackMode.KNOWN_PLAINTEXT:
        return math.log2(M / width)
    if width <= M / 2:
        return math.log2(M / (2.0 * width))
    # the two arcs overlap on a length 2w - M where the mixture density is 1/w
    overlap = 2.0 * width - M
    single = M - overlap
    h_mix = (overlap / width) * math.log2(width) + (single / (2.0 * width)) * math.log2(2.0 * width)
    return max(math.log2(M) - h_mix, 0.0)


def information_rate(cipher: str, channel: ChannelModel, M: int,
                     attack: AttackMode = AttackMode.CIPHERTEXT_ONLY) -> float:
    """
    Estimated bits of key information per symbol for a configuration

    The closed-form U for the Gaussian channel (one more bit with known plaintext), the
    exact arc value for the uniform arc, and 0 / 1 bit for the additive
    cipher without / with known plaintext.
    """
    attack = AttackMode(attack)
    if cipher == "additive":
        return 1.0 if attack is AttackMode.KNOWN_PLAINTEXT else 0.0
    if channel.is_gaussian:
        U = info_per_symbol(M, channel.sigma)
        return U + 1.0 if attack is AttackMode.KNOWN_PLAINTEXT else U
    return arc_information(channel.arc_fraction, M, attack)


def entropy_threshold_crossing(L: float, U: float, threshold_bits: float) -> Optional[int]:
    """
    Smallest q with L - qU <= threshold_bits

    Returns:
        The crossing symbol count, or None when U <= 0 and L > threshold
    """
    if threshold_bits >= L:
        return 0
    if U <= 0:
        return None
    return max(0, math.ceil((L - threshold_bits) / U - 1e-12))


def probability_requirement_violation(L: float, U: float, max_log2_prob: float) -> Optional[int]:
    """
    Smallest q at which the estimate proves P_E < 2^-max_log2_prob violated

    P_E >= 2^-H, so the requirement fails once the estimated entropy is at
    most max_log2_prob bits.
    """
    return entropy_threshold_crossing(L, U, max_log2_prob)


def simulated_crossing(mean_entropy: Sequence[float], threshold_bits: float) -> Optional[int]:
    """First q (1-based) whose simulated mean entropy is at most threshold_bits"""
    for q, h in enumerate(mean_entropy, start=1):
        if h <= threshold_bits:
            return q
    return None


def simulated_probability_crossing(mean_prob_correct: Sequence[float], max_log2_prob: float) -> Optional[int]:
    """
    First q (1-based) at which the simulated mean P_E reaches 2^-max_log2_prob

    This reads the requirement P_E < 2^-max_log2_prob straight off the
    ensemble; it usually fails a symbol or two before the entropy bound says so.
    """
    limit = 2.0 ** (-max_log2_prob)
    for q, p in enumerate(mean_prob_correct, start=1):
        if p >= limit:
            return q
    return None


@dataclass
class EstimateReport:
    L: int
    M: int
    sigma: float
    U: float
    n0: Optional[float]
    ndep_bound: Optional[float]
    exact_info: Optional[float]
    exact_info_known_plaintext: Optional[float]
    threshold_bits: Optional[float] = None
    crossing_q: Optional[int] = None
    max_log2_prob: Optional[float] = None
    probability_violation_q: Optional[int] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def vacuous(self) -> bool:
        return self.U <= 0

    def to_dict(self) -> Dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def lines(self) -> List[str]:
        out = [
            f"L = {self.L} bits, M = {self.M}, sigma = {self.sigma}",
            f"U (closed-form estimate)    : {self.U:.4f} bits/symbol",
        ]
        if self.exact_info is not None:
            out.append(f"I(Y;R) quadrature, CT-only  : {self.exact_info:.4f} bits/symbol")
        if self.exact_info_known_plaintext is not None:
            out.append(f"I(Y;R) quadrature, known PT : {self.exact_info_known_plaintext:.4f} bits/symbol")
        if self.ndep_bound is not None:
            out.append(f"n_dep bound L/log2(M/2)     : {self.ndep_bound:.4f}")
        for message in self.warnings:
            out.append(f"WARNING: {message}")
        if self.n0 is not None:
            out.append(f"n0 = L/U                    : {self.n0:.2f} symbols")
        if self.threshold_bits is not None:
            if self.crossing_q is None:
                out.append(f"Entropy requirement > {self.threshold_bits:g} bits: no crossing predicted")
            else:
                out.append(f"Entropy requirement > {self.threshold_bits:g} bits: estimate crosses at "
                           f"q = {self.crossing_q}; insecure for message lengths above "
                           f"{max(self.crossing_q - 1, 0)} bits")
        if self.max_log2_prob is not None and self.probability_violation_q is not None:
            out.append(f"Requirement P_E < 2^-{self.max_log2_prob:g}: provably violated for message "
                       f"lengths of {self.probability_violation_q} or more bits (P_E >= 2^-H)")
        return out


def build_estimate_report(L: int, M: int, sigma: float,
                          threshold_bits: Optional[float] = None,
                          max_log2_prob: Optional[float] = None,
                          with_quadrature: bool = True) -> EstimateReport:
    """Everything the estimate command prints, for one (L, M, sigma)"""
    U = info_per_symbol(M, sigma)
    report = EstimateReport(
        L=L, M=M, sigma=sigma, U=U,
        n0=n0(L, U) if U > 0 else None,
        ndep_bound=float(ndep_bound(L, M)) if M >= 4 and not M & (M - 1) else None,
        exact_info=exact_symbol_info(M, sigma) if with_quadrature else None,
        exact_info_known_plaintext=(exact_symbol_info(M, sigma, AttackMode.KNOWN_PLAINTEXT)
                                    if with_quadrature else None),
        threshold_bits=threshold_bits,
        max_log2_prob=max_log2_prob,
    )
    if U <= 0:
        report.warnings.append(f"U = {U:.4f} <= 0: the linear estimate is vacuous for these parameters")
    if threshold_bits is not None:
        report.crossing_q = entropy_threshold_crossing(L, U, threshold_bits)
    if max_log2_prob is not None:
        report.probability_violation_q = probability_requirement_violation(L, U, max_log2_prob)
    return report
