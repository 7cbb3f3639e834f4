"""
Bayes Module

Eve's exact posterior over all 2^L seed keys, kept in the log domain, and
the statistics extracted from it after every symbol.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .config import MAX_KEY_BITS, MIN_KEY_BITS
from .errors import ConfigError, InconsistentObservationError, ResourceLimitError
from .keystream import KeystreamMap
from .transmission import LOG_ZERO, AttackMode, ChannelModel, running_key_log_likelihoods

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


@dataclass(frozen=True)
class PosteriorSummary:
    """Statistics of the posterior after one symbol"""

    entropy: float
    prob_correct: float
    collision: float
    nonzero_false: int
    normalization_error: float


class Posterior:
    """
    Log-probabilities of every seed key

    Single-owner and mutable: updates happen in place and return self.
    LOG_ZERO marks keys that have been ruled out exactly.
    """

    def __init__(self, log_probs: np.ndarray, key_bits: int):
        self.log_probs = np.asarray(log_probs, dtype=float)
        self.key_bits = key_bits

    @property
    def n_keys(self) -> int:
        return self.log_probs.size

    def copy(self) -> "Posterior":
        return Posterior(self.log_probs.copy(), self.key_bits)

    def probabilities(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def normalization_error(self) -> float:
        """|log sum p|, zero for a normalized posterior"""
        return abs(float(logsumexp(self.log_probs)))

    def absorb(self, key_log_likelihoods: np.ndarray, normalize: bool = True) -> "Posterior":
        """
        Multiply in one likelihood per key and renormalize

        Args:
            key_log_likelihoods: Log-likelihood of the observation for each key
            normalize: Renormalize with max-shift log-sum-exp afterwards

        Returns:
            self
        """
        updated = self.log_probs + key_log_likelihoods
        if np.all(np.isneginf(updated)):
            raise InconsistentObservationError(
                "observation has zero likelihood under every remaining seed key")
        if normalize:
            updated -= logsumexp(updated)
        self.log_probs = updated
        return self

    def absorb_by_value(self, value_log_likelihoods: np.ndarray, running_keys: np.ndarray,
                        normalize: bool = True) -> "Posterior":
        """
        Bayes update when the likelihood depends on a key only through its running key

        Args:
            value_log_likelihoods: Log-likelihood for each running-key value
            running_keys: Running key of every seed at this position

        Returns:
            self
        """
        first = value_log_likelihoods[0]
        if np.all(value_log_likelihoods == first) and np.isfinite(first):
            # uninformative observation: Bayes' rule leaves the posterior as is
            return self
        return self.absorb(value_log_likelihoods[running_keys], normalize=normalize)

    def entropy(self) -> float:
        return entropy_of_distribution(self.log_probs)

    def prob_correct(self, true_key: int) -> float:
        return float(np.exp(self.log_probs[true_key]))

    def collision_prob(self) -> float:
        p = self.probabilities()
        return float(np.dot(p, p))

    def count_nonzero_false(self, true_key: int) -> int:
        alive = np.isfinite(self.log_probs)
        return int(np.count_nonzero(alive)) - int(alive[true_key])

    def summarize(self, true_key: int, p: Optional[np.ndarray] = None) -> "PosteriorSummary":
        """
        Every per-symbol statistic from one pass over the probabilities

        Args:
            true_key: Index of the correct seed
            p: exp(log_probs), when the caller already has it
        """
        if p is None:
            p = self.probabilities()
        lp = self.log_probs
        with np.errstate(invalid="ignore"):
            live = p > 0
            total = float(p.sum())
            alive = np.isfinite(lp)
            return PosteriorSummary(
                entropy=float(-np.dot(p[live], lp[live]) / LN2),
                prob_correct=float(p[true_key]),
                collision=float(np.dot(p, p)),
                nonzero_false=int(np.count_nonzero(alive)) - int(alive[true_key]),
                normalization_error=abs(math.log(total)) if total > 0 else math.inf,
            )


def entropy_of_distribution(log_probs: np.ndarray) -> float:
    """Shannon entropy in bits from log-probabilities (0 log 0 = 0)"""
    log_probs = np.asarray(log_probs, dtype=float)
    p = np.exp(log_probs)
    mask = p > 0
    return float(-np.dot(p[mask], log_probs[mask]) / LN2)


def posterior_uniform(L: int, max_key_bits: int = MAX_KEY_BITS) -> Posterior:
    """Eve's prior: every seed key equally likely"""
    if L < MIN_KEY_BITS:
        raise ConfigError("L", f"key space must be nonempty, got L={L}")
    if L > max_key_bits:
        raise ResourceLimitError(f"L={L} exceeds the configured maximum of {max_key_bits} bits")
    return Posterior(np.full(1 << L, -L * LN2), L)


def posterior_update(p: Posterior, y: float, q: int, keystream: KeystreamMap,
                     mode: AttackMode, known_bit: Optional[int], channel: ChannelModel,
                     M: int) -> Posterior:
    """Bayes update of p for observation y of the symbol at position q"""
    values = running_key_log_likelihoods(y, channel, M, mode, known_bit)
    return p.absorb_by_value(values, keystream.column(q))


def entropy(p: Posterior) -> float:
    return p.entropy()


def prob_correct(p: Posterior, true_key: int) -> float:
    return p.prob_correct(true_key)


def collision_prob(p: Posterior) -> float:
    return p.collision_prob()


def count_nonzero_false(p: Posterior, true_key: int) -> int:
    return p.count_nonzero_false(true_key)

