"""
Keystream Module

Running keys from seed keys: an L-bit Fibonacci LFSR, an ideal-random
reference generator, and ensemble uniformity diagnostics.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from operator import xor
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import chi2

from .config import ENUMERATION_BUDGET, LFSR_PRESETS, MAX_KEY_BITS
from .errors import ConfigError, ResourceLimitError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LfsrSpec:
    """Register length and feedback taps (positions 1..L, L always tapped)"""

    length_bits: int
    taps: Tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.length_bits, int) or self.length_bits < 2:
            raise ConfigError("prng.L", f"register length must be an integer >= 2, got {self.length_bits!r}")
        if self.length_bits > MAX_KEY_BITS:
            raise ResourceLimitError(f"register length {self.length_bits} exceeds MAX_KEY_BITS={MAX_KEY_BITS}")
        taps = tuple(sorted({int(t) for t in self.taps}, reverse=True))
        if not taps:
            raise ConfigError("prng.taps", "at least one tap is required")
        if taps[0] != self.length_bits:
            raise ConfigError("prng.taps", f"tap {self.length_bits} must be present")
        if taps[-1] < 1:
            raise ConfigError("prng.taps", f"taps must lie in [1, {self.length_bits}]")
        object.__setattr__(self, "taps", taps)

    @classmethod
    def preset(cls, length_bits: int) -> "LfsrSpec":
        """Built-in primitive polynomial for this register length"""
        if length_bits not in LFSR_PRESETS:
            raise ConfigError("L", f"no built-in LFSR polynomial for L={length_bits}")
        return cls(length_bits, LFSR_PRESETS[length_bits])

    def to_dict(self) -> Dict:
        return {"L": self.length_bits, "taps": list(self.taps)}

    @classmethod
    def from_dict(cls, data: Dict) -> "LfsrSpec":
        return cls(int(data["L"]), tuple(data["taps"]))


def lfsr_next_bit(state: int, spec: LfsrSpec) -> Tuple[int, int]:
    """
    Advance a Fibonacci LFSR by one step

    The output is bit 0 of the register; the feedback bit is the XOR of the
    tapped bits (tap t reads bit L - t) and enters at bit L - 1.

    Args:
        state: Current L-bit register value
        spec: Register length and taps

    Returns:
        (output bit, new state)
    """
    length = spec.length_bits
    out = state & 1
    feedback = reduce(xor, [(state >> (length - t)) & 1 for t in spec.taps])
    return out, (state >> 1) | (feedback << (length - 1))


class LinearFeedbackShiftRegister:
    """
    Per-seed bit stream generator

    Single-owner object; the bit-by-bit reference the vectorized keystream
    tables are checked against.
    """

    def __init__(self, spec: LfsrSpec, seed: int):
        if not 0 <= seed < (1 << spec.length_bits):
            raise ValueError(f"seed {seed} outside [0, 2^{spec.length_bits})")
        self.spec = spec
        self.register = seed

    def next_bit(self) -> int:
        bit, self.register = lfsr_next_bit(self.register, self.spec)
        return bit

    def next_symbol(self, symbol_bits: int) -> int:
        """Pack the next symbol_bits output bits, most significant first"""
        symbol = 0
        for _ in range(symbol_bits):
            symbol = (symbol << 1) | self.next_bit()
        return symbol

    def skip(self, n_bits: int):
        for _ in range(n_bits):
            self.register = lfsr_next_bit(self.register, self.spec)[1]


def lfsr_period(spec: LfsrSpec, state: int = 1) -> int:
    """Number of steps until `state` recurs (1 for the all-zero state)"""
    current = lfsr_next_bit(state, spec)[1]
    steps = 1
    limit = 1 << spec.length_bits
    while current != state:
        current = lfsr_next_bit(current, spec)[1]
        steps += 1
        if steps > limit:
            raise RuntimeError(f"state {state} did not recur within {limit} steps")
    return steps


def is_full_period(spec: LfsrSpec) -> bool:
    return lfsr_period(spec, 1) == (1 << spec.length_bits) - 1


def table_dtype(symbol_bits: int):
    return np.uint16 if symbol_bits <= 16 else np.uint32


def table_nbytes(key_bits: int, symbol_bits: int, positions: int) -> int:
    """Size of a (2^L, positions) running-key table"""
    return (1 << key_bits) * positions * np.dtype(table_dtype(symbol_bits)).itemsize


def symbol_bits_for(M: int) -> int:
    """log2(M) for a power of two M >= 2"""
    if not isinstance(M, (int, np.integer)) or M < 2 or M & (M - 1):
        raise ConfigError("M", f"must be a power of two >= 2, got {M!r}")
    return int(M).bit_length() - 1


class KeystreamMap:
    """
    Deterministic seed -> running-key view of a PRNG

    An ordered list of maps from the 2^L seed keys to running keys in
    [0, 2^symbol_bits). The table for positions 1..`positions` is built once
    (vectorized over all seeds) and is read-only afterwards, so a map can be
    shared between workers.
    """

    def __init__(self, key_bits: int, symbol_bits: int, positions: int,
                 spec: Optional[LfsrSpec] = None, map_seed: Optional[int] = None):
        """
        Args:
            key_bits: L, the seed-key length
            symbol_bits: log2(M), bits consumed per running key
            positions: Number of positions to precompute
            spec: LFSR to use; None selects the ideal-random generator
            map_seed: Seed of the ideal-random map (required when spec is None)
        """
        if not isinstance(symbol_bits, (int, np.integer)) or symbol_bits < 1:
            raise ConfigError("M", f"symbol_bits must be a positive integer, got {symbol_bits!r}")
        if key_bits < 1:
            raise ConfigError("L", "key space must be nonempty")
        if key_bits > MAX_KEY_BITS:
            raise ResourceLimitError(f"L={key_bits} exceeds MAX_KEY_BITS={MAX_KEY_BITS}")
        if spec is not None and spec.length_bits != key_bits:
            raise ConfigError("prng.L", f"LFSR length {spec.length_bits} differs from L={key_bits}")
        if spec is None and map_seed is None:
            raise ConfigError("master_seed", "the ideal-random map needs a map seed")

        self.key_bits = int(key_bits)
        self.symbol_bits = int(symbol_bits)
        self.spec = spec
        self.map_seed = None if map_seed is None else int(map_seed)
        self.positions = int(positions)

        self._table = self._build_table(self.positions)
        self._table.flags.writeable = False
        logger.debug(f"Built {self.describe()} table for {self.positions} positions")

    @classmethod
    def lfsr(cls, spec: LfsrSpec, symbol_bits: int, positions: int) -> "KeystreamMap":
        return cls(spec.length_bits, symbol_bits, positions, spec=spec)

    @classmethod
    def ideal_random(cls, key_bits: int, symbol_bits: int, positions: int,
                     map_seed: int) -> "KeystreamMap":
        return cls(key_bits, symbol_bits, positions, map_seed=map_seed)

    @property
    def is_ideal(self) -> bool:
        return self.spec is None

    @property
    def n_keys(self) -> int:
        return 1 << self.key_bits

    @property
    def alphabet_size(self) -> int:
        return 1 << self.symbol_bits

    def describe(self) -> str:
        if self.is_ideal:
            return f"ideal-random(L={self.key_bits}, map_seed={self.map_seed})"
        return f"lfsr(L={self.key_bits}, taps={list(self.spec.taps)})"

    def to_dict(self) -> Dict:
        if self.is_ideal:
            return {"kind": "ideal_random", "L": self.key_bits, "map_seed": self.map_seed}
        return {"kind": "lfsr", **self.spec.to_dict()}

    @property
    def table(self) -> np.ndarray:
        """Read-only (2^L, positions) array of running keys"""
        return self._table

    def _dtype(self):
        return table_dtype(self.symbol_bits)

    def _ideal_column(self, q: int) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence([self.map_seed, q]))
        return rng.integers(0, self.alphabet_size, size=self.n_keys, dtype=np.uint32).astype(self._dtype())

    def _build_table(self, positions: int) -> np.ndarray:
        n = self.n_keys
        table = np.zeros((n, positions), dtype=self._dtype())
        if self.is_ideal:
            for q in range(1, positions + 1):
                table[:, q - 1] = self._ideal_column(q)
            return table

        length = self.key_bits
        shifts = [length - t for t in self.spec.taps]
        state = np.arange(n, dtype=np.uint32)
        for q in range(positions):
            symbol = np.zeros(n, dtype=np.uint32)
            for _ in range(self.symbol_bits):
                out = state & 1
                feedback = np.zeros(n, dtype=np.uint32)
                for shift in shifts:
                    feedback ^= (state >> shift) & 1
                state = (state >> 1) | (feedback << (length - 1))
                symbol = (symbol << 1) | out
            table[:, q] = symbol
        return table

    def _check(self, seed: int, q: int):
        if q < 1:
            raise ValueError(f"position q must be >= 1, got {q}")
        if not 0 <= seed < self.n_keys:
            raise ValueError(f"seed {seed} outside [0, 2^{self.key_bits})")

    def running_key(self, seed: int, q: int) -> int:
        """Running key at position q (1-based) for one seed"""
        self._check(seed, q)
        if q <= self.positions:
            return int(self._table[seed, q - 1])
        if self.is_ideal:
            return int(self._ideal_column(q)[seed])
        register = LinearFeedbackShiftRegister(self.spec, seed)
        register.skip((q - 1) * self.symbol_bits)
        return register.next_symbol(self.symbol_bits)

    def column(self, q: int) -> np.ndarray:
        """Running keys of all 2^L seeds at position q"""
        if q < 1:
            raise ValueError(f"position q must be >= 1, got {q}")
        if q <= self.positions:
            return self._table[:, q - 1]
        if self.is_ideal:
            return self._ideal_column(q)
        # beyond the cached table; rebuild without caching
        return self._build_table(q)[:, q - 1]


def running_key(keystream: KeystreamMap, seed: int, q: int) -> int:
    return keystream.running_key(seed, q)


@dataclass
class UniformityReport:
    """Chi-square statistics of running-key histograms over all seeds"""

    per_position: np.ndarray
    per_position_p: np.ndarray
    pooled: float
    dof: int
    pooled_p: float

    def summary(self) -> Dict:
        return {
            "pooled": self.pooled,
            "dof": self.dof,
            "pooled_p": self.pooled_p,
            "max_position_stat": float(self.per_position.max()) if self.per_position.size else 0.0,
        }


def uniformity_stat(keystream: KeystreamMap, M: int, Q: int,
                    budget: int = ENUMERATION_BUDGET) -> UniformityReport:
    """
    Chi-square of the running-key histogram at each position against uniform

    Args:
        keystream: Map to audit
        M: Alphabet size (must match the map, or 1)
        Q: Number of positions 1..Q
        budget: Largest 2^L * Q enumeration allowed

    Returns:
        UniformityReport with per-position and pooled statistics
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    if keystream.n_keys * Q > budget:
        raise ResourceLimitError(
            f"uniformity enumeration 2^{keystream.key_bits}*{Q} exceeds budget {budget}")
    if M == 1:
        zeros = np.zeros(Q)
        return UniformityReport(zeros, np.ones(Q), 0.0, 0, 1.0)
    if M != keystream.alphabet_size:
        raise ValueError(f"M={M} does not match the map alphabet {keystream.alphabet_size}")

    expected = keystream.n_keys / M
    stats: List[float] = []
    for q in range(1, Q + 1):
        counts = np.bincount(keystream.column(q), minlength=M)
        stats.append(float(np.sum((counts - expected) ** 2) / expected))
    per_position = np.asarray(stats)
    pooled = float(per_position.sum())
    dof = (M - 1) * Q
    report = UniformityReport(
        per_position=per_position,
        per_position_p=chi2.sf(per_position, M - 1),
        pooled=pooled,
        dof=dof,
        pooled_p=float(chi2.sf(pooled, dof)),
    )
    logger.info(f"Uniformity of {keystream.describe()}: pooled chi2={pooled:.1f} on {dof} dof "
                f"(p={report.pooled_p:.3g})")
    return report


def ndep_bound(L: int, M: int) -> Fraction:
    """Upper bound L / log2(M/2) on the number of independent running keys"""
    if M < 4 or M & (M - 1):
        raise ValueError(f"M must be a power of two >= 4, got {M}")
    return Fraction(L, symbol_bits_for(M) - 1)
