"""
Experiment Module

Reproducible Monte Carlo ensembles of the ciphertext-only (or
known-plaintext) key-recovery attack: configuration schema, per-trial
simulation, parallel ensemble execution and aggregation.
"""

import copy
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from . import __version__
from .analytic import estimate_curve, information_rate, simulated_crossing, simulated_probability_crossing
from .bayes import LN2, posterior_uniform
from .config import (
    CHUNK_TRIALS,
    COLLISION_RELATIVE_TOLERANCE,
    DEFAULT_THREADS,
    EVALUATION_CEILING,
    IDEAL_MAP_STREAM,
    KEYSTREAM_TABLE_BUDGET,
    MAX_KEY_BITS,
    MEAN_POSTERIOR_BUDGET,
    RESULT_COLUMNS,
)
from .errors import ConfigError, ResourceLimitError
from .keystream import KeystreamMap, LfsrSpec, symbol_bits_for, table_nbytes
from .transmission import (
    AttackMode,
    ChannelModel,
    additive_encrypt,
    additive_log_likelihoods,
    coerce_attack,
    encode_symbol,
    measure,
    running_key_log_likelihoods,
)

logger = logging.getLogger(__name__)

CIPHERS = ("alpha_eta", "additive")
PRNG_KINDS = ("lfsr", "ideal_random")
CONFIG_FIELDS = ("L", "M", "channel", "cipher", "prng", "attack", "Q_max", "n_trials", "master_seed")
NESTED_FIELDS = {
    "channel": ("kind", "sigma", "arc_fraction"),
    "prng": ("kind", "L", "taps"),
}
SWEEPABLE_FIELDS = {
    "L": int,
    "M": int,
    "Q_max": int,
    "n_trials": int,
    "master_seed": int,
    "channel.sigma": float,
    "channel.arc_fraction": float,
}
SWEEP_ALIASES = {"sigma": "channel.sigma", "arc_fraction": "channel.arc_fraction"}

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _as_int(value, field_name: str) -> int:
    if isinstance(value, bool):
        raise ConfigError(field_name, f"expected an integer, got {value!r}")
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if not isinstance(value, int):
        raise ConfigError(field_name, f"expected an integer, got {value!r}")
    return value


@dataclass
class ExperimentConfig:
    """One Monte Carlo experiment (defaults: L=13, M=256, sigma=16, LFSR, ciphertext-only)"""

    L: int = 13
    M: int = 256
    channel: ChannelModel = field(default_factory=lambda: ChannelModel.wrapped_gaussian(16.0))
    cipher: str = "alpha_eta"
    lfsr: Optional[LfsrSpec] = field(default_factory=lambda: LfsrSpec.preset(13))
    attack: AttackMode = AttackMode.CIPHERTEXT_ONLY
    Q_max: int = 60
    n_trials: int = 2000
    master_seed: int = 0

    def __post_init__(self):
        self.validate()

    @property
    def prng_kind(self) -> str:
        return "ideal_random" if self.lfsr is None else "lfsr"

    @property
    def n_keys(self) -> int:
        return 1 << self.L

    @property
    def symbol_bits(self) -> int:
        """Bits of keystream per symbol: log2(M) for alpha-eta, one for the additive cipher"""
        return symbol_bits_for(self.M) if self.cipher == "alpha_eta" else 1

    def validate(self):
        if isinstance(self.L, bool) or not isinstance(self.L, int) or self.L < 1:
            raise ConfigError("L", f"must be a positive integer, got {self.L!r}")
        if self.L > MAX_KEY_BITS:
            raise ResourceLimitError(f"L={self.L} exceeds the maximum of {MAX_KEY_BITS} bits")
        if self.cipher not in CIPHERS:
            raise ConfigError("cipher", f"must be one of {CIPHERS}, got {self.cipher!r}")
        if self.cipher == "alpha_eta":
            symbol_bits_for(self.M)
        if self.lfsr is not None and self.lfsr.length_bits != self.L:
            raise ConfigError("prng.L", f"LFSR length {self.lfsr.length_bits} differs from L={self.L}")
        self.attack = coerce_attack(self.attack)
        if isinstance(self.Q_max, bool) or not isinstance(self.Q_max, int) or self.Q_max < 1:
            raise ConfigError("Q_max", f"must be an integer >= 1, got {self.Q_max!r}")
        if isinstance(self.n_trials, bool) or not isinstance(self.n_trials, int) or self.n_trials < 1:
            raise ConfigError("n_trials", f"must be an integer >= 1, got {self.n_trials!r}")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed <= MASK64:
            raise ConfigError("master_seed", f"must be a 64-bit unsigned integer, got {self.master_seed!r}")

    def to_dict(self) -> Dict:
        prng = {"kind": "ideal_random"} if self.lfsr is None else {"kind": "lfsr", **self.lfsr.to_dict()}
        return {
            "L": self.L,
            "M": self.M,
            "channel": self.channel.to_dict(),
            "cipher": self.cipher,
            "prng": prng,
            "attack": self.attack.value,
            "Q_max": self.Q_max,
            "n_trials": self.n_trials,
            "master_seed": self.master_seed,
        }

    @classmethod
    def from_dict(cls, doc: Dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config", "expected a JSON object")
        unknown = set(doc) - set(CONFIG_FIELDS)
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration field")

        defaults = cls()
        L = _as_int(doc.get("L", defaults.L), "L")
        if "M" in doc:
            M = _as_int(doc["M"], "M")
        else:
            M = defaults.M
        channel = ChannelModel.from_dict(doc["channel"]) if "channel" in doc else defaults.channel

        prng = doc.get("prng", {"kind": "lfsr"})
        if not isinstance(prng, dict) or prng.get("kind") not in PRNG_KINDS:
            raise ConfigError("prng.kind", f"must be one of {PRNG_KINDS}")
        unknown = set(prng) - set(NESTED_FIELDS["prng"])
        if unknown:
            raise ConfigError(f"prng.{sorted(unknown)[0]}", "unknown prng field")
        lfsr = None
        if prng["kind"] == "lfsr":
            prng_L = _as_int(prng.get("L", L), "prng.L")
            if prng_L != L:
                raise ConfigError("prng.L", f"LFSR length {prng_L} differs from L={L}")
            if "taps" in prng:
                if not isinstance(prng["taps"], list):
                    raise ConfigError("prng.taps", "expected a list of tap positions")
                taps = tuple(_as_int(t, "prng.taps") for t in prng["taps"])
                if any(t > L for t in taps):
                    raise ConfigError("prng.taps", f"taps must lie in [1, {L}]")
                lfsr = LfsrSpec(L, taps)
            else:
                lfsr = LfsrSpec.preset(L)

        return cls(
            L=L,
            M=M,
            channel=channel,
            cipher=doc.get("cipher", defaults.cipher),
            lfsr=lfsr,
            attack=coerce_attack(doc.get("attack", defaults.attack.value)),
            Q_max=_as_int(doc.get("Q_max", defaults.Q_max), "Q_max"),
            n_trials=_as_int(doc.get("n_trials", defaults.n_trials), "n_trials"),
            master_seed=_as_int(doc.get("master_seed", defaults.master_seed), "master_seed"),
        )

    def key(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _parse_override_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(doc: Dict, overrides: Sequence[str]) -> Dict:
    """
    Apply dotted key=value overrides to a config document

    Args:
        doc: Config document (not modified)
        overrides: Strings like "channel.sigma=8" or "cipher=additive"

    Returns:
        A new document
    """
    doc = copy.deepcopy(doc)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must have the form key=value")
        path, raw = item.split("=", 1)
        path = path.strip()
        value = _parse_override_value(raw.strip())
        parts = path.split(".")
        if parts[0] not in CONFIG_FIELDS:
            raise ConfigError(path, "unknown configuration field")
        if len(parts) == 1:
            if parts[0] in NESTED_FIELDS and not isinstance(value, dict):
                raise ConfigError(path, "expected a JSON object")
            doc[parts[0]] = value
            continue
        if len(parts) != 2 or parts[0] not in NESTED_FIELDS or parts[1] not in NESTED_FIELDS[parts[0]]:
            raise ConfigError(path, "unknown configuration field")
        section, name = parts
        if name == "kind":
            # a new kind starts from an empty section
            doc[section] = {"kind": value}
        else:
            doc.setdefault(section, {"kind": "lfsr"} if section == "prng" else {})
            doc[section][name] = value
    return doc


def load_config_document(path: Union[str, Path]) -> Dict:
    """Read a config document, or the config echoed in a results sidecar"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"{path}: invalid JSON at line {e.lineno}: {e.msg}")
    if isinstance(doc, dict) and "config" in doc and "library_version" in doc:
        doc = doc["config"]
    return doc


def load_config(path: Union[str, Path], overrides: Sequence[str] = ()) -> ExperimentConfig:
    doc = apply_overrides(load_config_document(path), overrides)
    return ExperimentConfig.from_dict(doc)


def _splitmix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix(master_seed: int, trial_index: int) -> int:
    """
    Per-trial 64-bit seed

    SplitMix64: the scrambled master seed plus (trial_index + 1) times the
    golden-ratio increment, through the SplitMix64 finalizer. For a fixed
    master seed this is a bijection of trial_index mod 2^64.
    """
    base = _splitmix64(master_seed & MASK64)
    return _splitmix64((base + (trial_index + 1) * GOLDEN_GAMMA) & MASK64)


def check_resources(cfg: ExperimentConfig, ceiling: int = EVALUATION_CEILING,
                    table_budget: int = KEYSTREAM_TABLE_BUDGET):
    """Refuse runs whose evaluation count or keystream table is over its limit"""
    evaluations = cfg.n_trials * cfg.Q_max * cfg.n_keys
    if evaluations > ceiling:
        raise ResourceLimitError(
            f"n_trials*Q_max*2^L = {evaluations:.3g} likelihood evaluations exceeds the ceiling {ceiling:.3g}")
    nbytes = table_nbytes(cfg.L, cfg.symbol_bits, cfg.Q_max)
    if nbytes > table_budget:
        raise ResourceLimitError(
            f"keystream table 2^{cfg.L} x {cfg.Q_max} needs {nbytes / 2 ** 30:.1f} GiB, "
            f"above the budget of {table_budget / 2 ** 30:.1f} GiB")
    return evaluations


_KEYSTREAMS: Dict[Tuple, KeystreamMap] = {}


def build_keystream(cfg: ExperimentConfig) -> KeystreamMap:
    """Keystream map of a configuration, cached per process"""
    if cfg.lfsr is None:
        key = ("ideal", cfg.L, cfg.symbol_bits, cfg.Q_max, cfg.master_seed)
    else:
        key = ("lfsr", cfg.L, cfg.lfsr.taps, cfg.symbol_bits, cfg.Q_max)
    if key not in _KEYSTREAMS:
        if cfg.lfsr is None:
            _KEYSTREAMS[key] = KeystreamMap.ideal_random(cfg.L, cfg.symbol_bits, cfg.Q_max,
                                                         map_seed=mix(cfg.master_seed, IDEAL_MAP_STREAM))
        else:
            _KEYSTREAMS[key] = KeystreamMap.lfsr(cfg.lfsr, cfg.symbol_bits, cfg.Q_max)
    return _KEYSTREAMS[key]


@dataclass
class TrialRecord:
    """Per-symbol statistics of one trial (index q-1 holds the value after symbol q)"""

    trial_index: int
    true_key: int
    entropy: np.ndarray
    prob_correct: np.ndarray
    collision: np.ndarray
    nonzero_false: np.ndarray
    max_normalization_error: float = 0.0
    collision_violations: int = 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrialRecord):
            return NotImplemented
        return (self.trial_index == other.trial_index and self.true_key == other.true_key
                and all(np.array_equal(getattr(self, k), getattr(other, k), equal_nan=True)
                        for k in ("entropy", "prob_correct", "collision", "nonzero_false")))


LikelihoodHook = Callable[[np.ndarray], np.ndarray]


class TrialEngine:
    """Runs single trials of one configuration"""

    def __init__(self, cfg: ExperimentConfig, likelihood_hook: Optional[LikelihoodHook] = None):
        """
        Args:
            cfg: Experiment configuration
            likelihood_hook: Optional transform of each per-value log-likelihood
                vector (fault injection for the invariant suite)
        """
        self.cfg = cfg
        self.keystream = build_keystream(cfg)
        self.likelihood_hook = likelihood_hook
        self._key_index = np.arange(cfg.n_keys)

    def _value_log_likelihoods(self, r: int, b: int, rng: np.random.Generator) -> np.ndarray:
        cfg = self.cfg
        known = b if cfg.attack is AttackMode.KNOWN_PLAINTEXT else None
        if cfg.cipher == "additive":
            return additive_log_likelihoods(additive_encrypt(b, r), cfg.attack, known)
        y = measure(encode_symbol(r, b, cfg.M), cfg.channel, cfg.M, rng)
        return running_key_log_likelihoods(y, cfg.channel, cfg.M, cfg.attack, known)

    def run(self, trial_index: int, mean_posterior: Optional[np.ndarray] = None) -> TrialRecord:
        """
        Simulate one trial

        Draws the true key and message bits from the trial's own generator,
        then transmits, measures and updates the posterior symbol by symbol.

        Args:
            trial_index: Index of the trial within the ensemble
            mean_posterior: Optional (Q_max, 2^L) accumulator; receives the
                posterior after each symbol with keys aligned by XOR with the true key

        Returns:
            TrialRecord
        """
        cfg = self.cfg
        Q = cfg.Q_max
        rng = np.random.default_rng(mix(cfg.master_seed, trial_index))
        true_key = int(rng.integers(0, cfg.n_keys))
        message = rng.integers(0, 2, size=Q)

        posterior = posterior_uniform(cfg.L)
        entropy = np.empty(Q)
        prob_correct = np.empty(Q)
        collision = np.empty(Q)
        nonzero_false = np.empty(Q, dtype=np.int64)
        norm_errors = np.empty(Q)
        violations = 0
        aligned = self._key_index ^ true_key

        for q in range(1, Q + 1):
            column = self.keystream.column(q)
            values = self._value_log_likelihoods(int(column[true_key]), int(message[q - 1]), rng)
            if self.likelihood_hook is not None:
                values = self.likelihood_hook(values)
            posterior.absorb_by_value(values, column)

            p = posterior.probabilities()
            stats = posterior.summarize(true_key, p)
            entropy[q - 1] = stats.entropy
            prob_correct[q - 1] = stats.prob_correct
            collision[q - 1] = stats.collision
            nonzero_false[q - 1] = stats.nonzero_false
            norm_errors[q - 1] = stats.normalization_error
            if not stats.collision >= 2.0 ** (-stats.entropy) * (1.0 - COLLISION_RELATIVE_TOLERANCE):
                violations += 1
            if mean_posterior is not None:
                mean_posterior[q - 1, aligned] += p

        return TrialRecord(
            trial_index=trial_index,
            true_key=true_key,
            entropy=entropy,
            prob_correct=prob_correct,
            collision=collision,
            nonzero_false=nonzero_false,
            max_normalization_error=float(np.max(norm_errors)),
            collision_violations=violations,
        )


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialRecord:
    return TrialEngine(cfg).run(trial_index)


_ENGINES: Dict[str, TrialEngine] = {}


def _run_chunk(cfg_doc: Dict, trial_indices: List[int],
               with_mean_posterior: bool) -> Tuple[List[TrialRecord], Optional[np.ndarray]]:
    """Worker entry point: one fixed chunk of trials, in index order"""
    cfg = ExperimentConfig.from_dict(cfg_doc)
    key = cfg.key()
    if key not in _ENGINES:
        _ENGINES[key] = TrialEngine(cfg)
    engine = _ENGINES[key]
    accumulator = np.zeros((cfg.Q_max, cfg.n_keys)) if with_mean_posterior else None
    records = [engine.run(i, accumulator) for i in trial_indices]
    logger.debug(f"Finished trials {trial_indices[0]}..{trial_indices[-1]}")
    return records, accumulator


def resolve_threads(threads: Optional[int]) -> int:
    if threads is None:
        threads = DEFAULT_THREADS
    if threads < 0:
        raise ConfigError("threads", f"must be >= 0, got {threads}")
    if threads == 0:
        threads = os.cpu_count() or 1
    return threads


def _mean_and_stderr(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Column means and standard errors with order-insensitive exact summation"""
    n = matrix.shape[0]
    means = np.array([math.fsum(col) / n for col in matrix.T])
    if n < 2:
        return means, np.zeros_like(means)
    variances = np.array([math.fsum((col - m) ** 2) / (n - 1) for col, m in zip(matrix.T, means)])
    return means, np.sqrt(variances / n)


@dataclass
class CurveAggregate:
    """Ensemble means and standard errors per q, the estimate line, and the config echo"""

    table: pd.DataFrame
    secondary: pd.DataFrame
    config: Dict
    diagnostics: Dict = field(default_factory=dict)

    @property
    def q(self) -> np.ndarray:
        return self.table["q"].to_numpy()

    @property
    def mean_entropy(self) -> np.ndarray:
        return self.table["mean_entropy"].to_numpy()

    @property
    def stderr_entropy(self) -> np.ndarray:
        return self.table["stderr_entropy"].to_numpy()

    @property
    def mean_prob_correct(self) -> np.ndarray:
        return self.table["mean_prob_correct"].to_numpy()

    def check_requirements(self, threshold_bits: Optional[float] = None,
                           max_log2_prob: Optional[float] = None) -> Dict:
        """
        Read security requirements off the simulated curves

        Records the first q with mean entropy <= threshold_bits and the first q
        with mean P_E >= 2^-max_log2_prob in diagnostics["requirements"]
        (None when the curve never gets there within Q_max).
        """
        requirements = dict(self.diagnostics.get("requirements", {}))
        if threshold_bits is not None:
            requirements["threshold_bits"] = threshold_bits
            requirements["entropy_crossing_q"] = simulated_crossing(self.mean_entropy, threshold_bits)
        if max_log2_prob is not None:
            requirements["max_log2_prob"] = max_log2_prob
            requirements["probability_crossing_q"] = simulated_probability_crossing(
                self.mean_prob_correct, max_log2_prob)
        if requirements:
            self.diagnostics["requirements"] = requirements
        return requirements

    def summary_line(self) -> str:
        last = self.table.iloc[-1]
        line = (f"q={int(last['q'])}: mean entropy {last['mean_entropy']:.6f} bits, "
                f"mean P_E {last['mean_prob_correct']:.6f} "
                f"({self.diagnostics.get('n_trials', '?')} trials)")
        requirements = self.diagnostics.get("requirements", {})
        if "threshold_bits" in requirements:
            q = requirements["entropy_crossing_q"]
            line += (f"; entropy <= {requirements['threshold_bits']:g} bits at q={q}" if q is not None
                     else f"; entropy stays above {requirements['threshold_bits']:g} bits")
        if "max_log2_prob" in requirements:
            q = requirements["probability_crossing_q"]
            line += (f"; P_E >= 2^-{requirements['max_log2_prob']:g} at q={q}" if q is not None
                     else f"; P_E stays below 2^-{requirements['max_log2_prob']:g}")
        return line


def aggregate_records(cfg: ExperimentConfig, records: Sequence[TrialRecord],
                      mean_posterior_sum: Optional[np.ndarray] = None,
                      wall_clock: float = 0.0) -> CurveAggregate:
    """Reduce trial records (any order) to a CurveAggregate"""
    records = sorted(records, key=lambda r: r.trial_index)
    n = len(records)
    entropy = np.vstack([r.entropy for r in records])
    prob_correct = np.vstack([r.prob_correct for r in records])
    collision = np.vstack([r.collision for r in records])
    nonzero = np.vstack([r.nonzero_false for r in records]).astype(float)

    mean_h, se_h = _mean_and_stderr(entropy)
    mean_p, se_p = _mean_and_stderr(prob_correct)
    mean_c, se_c = _mean_and_stderr(collision)
    mean_nz, se_nz = _mean_and_stderr(nonzero)
    mean_gap, se_gap = _mean_and_stderr(prob_correct - collision)

    q = np.arange(1, cfg.Q_max + 1)
    U = information_rate(cfg.cipher, cfg.channel, cfg.M, cfg.attack)
    if U < 0:
        estimate = np.full(q.shape, float(cfg.L))
        in_domain = np.zeros(q.shape, dtype=bool)
    else:
        estimate, in_domain = estimate_curve(cfg.L, U, q)

    table = pd.DataFrame({
        "q": q,
        "mean_entropy": mean_h,
        "stderr_entropy": se_h,
        "mean_prob_correct": mean_p,
        "stderr_prob_correct": se_p,
        "mean_collision": mean_c,
        "stderr_collision": se_c,
        "mean_nonzero_false": mean_nz,
        "estimate_entropy": estimate,
        "estimate_in_domain": in_domain,
    })[RESULT_COLUMNS]

    if mean_posterior_sum is not None:
        mean_posterior = mean_posterior_sum / n
        with np.errstate(divide="ignore", invalid="ignore"):
            log_mean = np.log(mean_posterior)
            entropy_of_mean = -np.sum(np.where(mean_posterior > 0, mean_posterior * log_mean, 0.0), axis=1) / LN2
    else:
        entropy_of_mean = np.full(q.shape, np.nan)
    with np.errstate(divide="ignore"):
        log2_mean_p = -np.log2(mean_p)
    secondary = pd.DataFrame({
        "q": q,
        "stderr_nonzero_false": se_nz,
        "mean_consistency_gap": mean_gap,
        "stderr_consistency_gap": se_gap,
        "entropy_of_mean_posterior": entropy_of_mean,
        "neg_log2_mean_prob_correct": log2_mean_p,
    })

    diagnostics = {
        "n_trials": n,
        "information_rate": U,
        "max_normalization_error": float(max(r.max_normalization_error for r in records)),
        "collision_violations": int(sum(r.collision_violations for r in records)),
        "min_nonzero_false": int(nonzero.min()),
        "max_nonzero_false": int(nonzero.max()),
        "min_entropy": float(entropy.min()),
        "max_entropy": float(entropy.max()),
        "keystream": build_keystream(cfg).to_dict(),
        "wall_clock_seconds": wall_clock,
        "library_version": __version__,
    }
    return CurveAggregate(table=table, secondary=secondary, config=cfg.to_dict(), diagnostics=diagnostics)


def run_ensemble(cfg: ExperimentConfig, threads: Optional[int] = None, progress: bool = False,
                 likelihood_hook: Optional[LikelihoodHook] = None) -> CurveAggregate:
    """
    Run n_trials independent trials and aggregate them

    Trials are scheduled in fixed chunks of CHUNK_TRIALS regardless of the
    worker count, so every exported number is independent of `threads`.

    Args:
        cfg: Experiment configuration
        threads: Worker processes (0 = one per CPU, None = ALPHAETA_THREADS)
        progress: Show a tqdm progress bar
        likelihood_hook: Fault-injection hook; forces in-process execution

    Returns:
        CurveAggregate
    """
    evaluations = check_resources(cfg)
    workers = resolve_threads(threads)
    with_mean = cfg.Q_max * cfg.n_keys <= MEAN_POSTERIOR_BUDGET
    chunks = [list(range(start, min(start + CHUNK_TRIALS, cfg.n_trials)))
              for start in range(0, cfg.n_trials, CHUNK_TRIALS)]

    logger.info(f"Running {cfg.n_trials} trials: L={cfg.L}, M={cfg.M}, channel={cfg.channel.to_dict()}, "
                f"cipher={cfg.cipher}, prng={cfg.prng_kind}, attack={cfg.attack.value}, Q_max={cfg.Q_max}")
    logger.info(f"{evaluations:.3g} likelihood evaluations on {min(workers, len(chunks))} worker(s)")
    if not with_mean:
        logger.info("Skipping the mean-posterior statistic (Q_max*2^L above MEAN_POSTERIOR_BUDGET)")

    start_time = time.time()
    records: List[TrialRecord] = []
    mean_posterior_sum = np.zeros((cfg.Q_max, cfg.n_keys)) if with_mean else None
    # accumulators are added in chunk order, so the sum does not depend on completion order
    pending: Dict[int, np.ndarray] = {}
    next_chunk = 0
    bar = tqdm(total=cfg.n_trials, desc="trials", unit="trial", disable=not progress)

    if workers == 1 or len(chunks) == 1 or likelihood_hook is not None:
        engine = TrialEngine(cfg, likelihood_hook)
        for chunk in chunks:
            accumulator = np.zeros((cfg.Q_max, cfg.n_keys)) if with_mean else None
            records.extend(engine.run(t, accumulator) for t in chunk)
            if with_mean:
                mean_posterior_sum += accumulator
            bar.update(len(chunk))
    else:
        doc = cfg.to_dict()
        with ProcessPoolExecutor(max_workers=min(workers, len(chunks))) as pool:
            futures = {pool.submit(_run_chunk, doc, chunk, with_mean): i for i, chunk in enumerate(chunks)}
            for future in as_completed(futures):
                i = futures.pop(future)
                chunk_records, accumulator = future.result()
                records.extend(chunk_records)
                if with_mean:
                    pending[i] = accumulator
                    while next_chunk in pending:
                        mean_posterior_sum += pending.pop(next_chunk)
                        next_chunk += 1
                bar.update(len(chunks[i]))
    bar.close()

    wall_clock = time.time() - start_time
    aggregate = aggregate_records(cfg, records, mean_posterior_sum, wall_clock)
    logger.info(f"Ensemble finished in {wall_clock:.2f} seconds; {aggregate.summary_line()}")
    return aggregate


def sweep_configs(doc: Dict, parameter: str, values: Sequence) -> List[Tuple[Union[int, float], ExperimentConfig]]:
    """
    One validated configuration per swept value

    Sweeping L with an LFSR resets the taps to the preset for each length.
    """
    parameter = SWEEP_ALIASES.get(parameter, parameter)
    if parameter not in SWEEPABLE_FIELDS:
        raise ConfigError(parameter, f"not a numeric sweepable field (choose from {sorted(SWEEPABLE_FIELDS)})")
    if not values:
        raise ConfigError("values", "the value list is empty")

    kind = SWEEPABLE_FIELDS[parameter]
    configs = []
    for raw in values:
        try:
            number = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(parameter, f"non-numeric sweep value {raw!r}")
        if kind is int:
            if not number.is_integer():
                raise ConfigError(parameter, f"expected an integer, got {raw!r}")
            value = int(number)
        else:
            value = number
        swept = apply_overrides(doc, [f"{parameter}={json.dumps(value)}"])
        if parameter == "L" and swept.get("prng", {}).get("kind", "lfsr") == "lfsr":
            swept["prng"] = {"kind": "lfsr"}
        configs.append((value, ExperimentConfig.from_dict(swept)))
    return configs
