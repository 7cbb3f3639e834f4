"""
Transmission Module

Alpha-eta symbol encoding, the additive stream cipher baseline, and the
noisy phase measurement (wrapped Gaussian or uniform arc) with exact
likelihoods. Phases are in symbol-index units: the circle has length M.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Union

import numpy as np
from scipy.special import logsumexp

from .config import MIN_WRAP_TERMS, WRAP_TAIL_SIGMAS
from .errors import ConfigError

logger = logging.getLogger(__name__)

# Exact probability zero in the log domain
LOG_ZERO = -np.inf

LOG_HALF = math.log(0.5)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class AttackMode(str, Enum):
    CIPHERTEXT_ONLY = "ciphertext_only"
    KNOWN_PLAINTEXT = "known_plaintext"


class ChannelKind(str, Enum):
    WRAPPED_GAUSSIAN = "wrapped_gaussian"
    UNIFORM_ARC = "uniform_arc"


@dataclass(frozen=True)
class ChannelModel:
    """Phase noise: wrapped Gaussian (sigma) or uniform over an arc (arc_fraction)"""

    kind: ChannelKind
    sigma: Optional[float] = None
    arc_fraction: Optional[float] = None

    def __post_init__(self):
        try:
            kind = ChannelKind(self.kind)
        except ValueError:
            raise ConfigError("channel.kind", f"unknown channel kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind is ChannelKind.WRAPPED_GAUSSIAN:
            if self.sigma is None or not math.isfinite(self.sigma) or self.sigma <= 0:
                raise ConfigError("channel.sigma", f"must be finite and positive, got {self.sigma!r}")
            object.__setattr__(self, "sigma", float(self.sigma))
        else:
            if self.arc_fraction is None or not 0 < self.arc_fraction <= 1:
                raise ConfigError("channel.arc_fraction", f"must lie in (0, 1], got {self.arc_fraction!r}")
            object.__setattr__(self, "arc_fraction", float(self.arc_fraction))

    @classmethod
    def wrapped_gaussian(cls, sigma: float) -> "ChannelModel":
        return cls(ChannelKind.WRAPPED_GAUSSIAN, sigma=sigma)

    @classmethod
    def uniform_arc(cls, arc_fraction: float) -> "ChannelModel":
        return cls(ChannelKind.UNIFORM_ARC, arc_fraction=arc_fraction)

    @property
    def is_gaussian(self) -> bool:
        return self.kind is ChannelKind.WRAPPED_GAUSSIAN

    def arc_width(self, M: int) -> float:
        return self.arc_fraction * M

    def to_dict(self) -> Dict:
        if self.is_gaussian:
            return {"kind": self.kind.value, "sigma": self.sigma}
        return {"kind": self.kind.value, "arc_fraction": self.arc_fraction}

    @classmethod
    def from_dict(cls, data: Dict) -> "ChannelModel":
        if not isinstance(data, dict) or "kind" not in data:
            raise ConfigError("channel", "expected an object with a 'kind' field")
        kind = data["kind"]
        if kind == ChannelKind.WRAPPED_GAUSSIAN.value:
            unknown = set(data) - {"kind", "sigma"}
            if unknown:
                raise ConfigError(f"channel.{sorted(unknown)[0]}", "not a wrapped_gaussian field")
            return cls.wrapped_gaussian(_as_float(data.get("sigma"), "channel.sigma"))
        if kind == ChannelKind.UNIFORM_ARC.value:
            unknown = set(data) - {"kind", "arc_fraction"}
            if unknown:
                raise ConfigError(f"channel.{sorted(unknown)[0]}", "not a uniform_arc field")
            return cls.uniform_arc(_as_float(data.get("arc_fraction"), "channel.arc_fraction"))
        raise ConfigError("channel.kind", f"unknown channel kind {kind!r}")


def _as_float(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"expected a number, got {value!r}")
    return float(value)


def encode_symbol(r: int, b: int, M: int) -> int:
    """Phase index of data bit b in basis r: the bit picks one of two antipodal points"""
    if M % 2:
        raise ValueError(f"M must be even, got {M}")
    if not 0 <= r < M:
        raise ValueError(f"running key {r} outside [0, {M})")
    if b not in (0, 1):
        raise ValueError(f"data bit must be 0 or 1, got {b!r}")
    return (r + b * (M // 2)) % M


def measure(s: int, channel: ChannelModel, M: int, rng: np.random.Generator) -> float:
    """
    Noisy phase observation of symbol s, in [0, M)

    Consumes exactly one draw from rng.
    """
    if channel.is_gaussian:
        noise = rng.normal(0.0, channel.sigma)
    else:
        half = channel.arc_width(M) / 2.0
        noise = rng.uniform(-half, half)
    y = (s + noise) % M
    # float modulo can round up to M for tiny negative noise
    if y >= M:
        y = 0.0
    return float(y)


def wrap_displacement(delta, M: int):
    """Reduce a displacement on the circle to [-M/2, M/2]"""
    return (np.asarray(delta, dtype=float) + M / 2.0) % M - M / 2.0


def wrap_terms(sigma: float, M: int) -> int:
    """Wrap terms per side so the omitted Gaussian tail is below 1e-300 relative"""
    return max(MIN_WRAP_TERMS, math.ceil(WRAP_TAIL_SIGMAS * sigma / M + 0.5))


def log_channel_density(delta, channel: ChannelModel, M: int, terms: Optional[int] = None):
    """
    Log density of a phase displacement under the channel

    Args:
        delta: Displacement(s) on the circle (reduced to [-M/2, M/2] here)
        channel: Channel model
        M: Circle length
        terms: Wrap terms per side for the Gaussian (default: wrap_terms)

    Returns:
        Log density, LOG_ZERO outside a uniform arc
    """
    delta = wrap_displacement(delta, M)
    if channel.is_gaussian:
        sigma = channel.sigma
        J = terms if terms is not None else wrap_terms(sigma, M)
        shifts = np.arange(-J, J + 1) * float(M)
        z = (delta[..., np.newaxis] + shifts) / sigma
        log_terms = -0.5 * z * z - LOG_SQRT_2PI - math.log(sigma)
        return logsumexp(log_terms, axis=-1)

    width = channel.arc_width(M)
    inside = np.abs(delta) <= width / 2.0
    return np.where(inside, -math.log(width), LOG_ZERO)


def channel_density(delta, channel: ChannelModel, M: int, terms: Optional[int] = None):
    result = np.exp(log_channel_density(delta, channel, M, terms))
    return float(result) if np.ndim(result) == 0 else result


def running_key_log_likelihoods(y: float, channel: ChannelModel, M: int,
                                mode: AttackMode = AttackMode.CIPHERTEXT_ONLY,
                                known_bit: Optional[int] = None) -> np.ndarray:
    """
    Log-likelihood of observation y for every running key 0..M-1

    Ciphertext-only marginalizes the data bit (one half each); known-plaintext
    conditions on known_bit.
    """
    mode = AttackMode(mode)
    r = np.arange(M)
    half = M // 2
    if mode is AttackMode.KNOWN_PLAINTEXT:
        if known_bit not in (0, 1):
            raise ValueError("known_plaintext mode requires known_bit in {0, 1}")
        return log_channel_density(y - (r + known_bit * half) % M, channel, M)

    ll0 = log_channel_density(y - r, channel, M)
    ll1 = log_channel_density(y - (r + half) % M, channel, M)
    return np.logaddexp(ll0, ll1) + LOG_HALF


def symbol_log_likelihood(y: float, r: int, mode: AttackMode, known_bit: Optional[int],
                          channel: ChannelModel, M: int) -> float:
    """Log-density of observation y given running key r"""
    mode = AttackMode(mode)
    half = M // 2
    if mode is AttackMode.KNOWN_PLAINTEXT:
        if known_bit not in (0, 1):
            raise ValueError("known_plaintext mode requires known_bit in {0, 1}")
        return float(log_channel_density(y - encode_symbol(r, known_bit, M), channel, M))
    ll0 = log_channel_density(y - encode_symbol(r, 0, M), channel, M)
    ll1 = log_channel_density(y - encode_symbol(r, 1, M), channel, M)
    return float(np.logaddexp(ll0, ll1) + LOG_HALF)


def additive_encrypt(plain_bit: int, key_bit: int) -> int:
    return plain_bit ^ key_bit


def additive_log_likelihoods(cipher_bit: int,
                             mode: AttackMode = AttackMode.CIPHERTEXT_ONLY,
                             known_bit: Optional[int] = None) -> np.ndarray:
    """
    Log-likelihood of a ciphertext bit for key bits 0 and 1

    With a uniform message bit every key bit explains the ciphertext equally
    well; a known message bit leaves exactly one key bit possible.
    """
    mode = AttackMode(mode)
    if mode is AttackMode.CIPHERTEXT_ONLY:
        return np.full(2, LOG_HALF)
    if known_bit not in (0, 1):
        raise ValueError("known_plaintext mode requires known_bit in {0, 1}")
    consistent = cipher_bit ^ known_bit
    ll = np.full(2, LOG_ZERO)
    ll[consistent] = 0.0
    return ll


def coerce_attack(value: Union[str, AttackMode], field: str = "attack") -> AttackMode:
    try:
        return AttackMode(value)
    except ValueError:
        raise ConfigError(field, f"unknown attack mode {value!r}")
