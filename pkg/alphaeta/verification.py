"""
Invariant Suite

Runs a reduced ensemble and checks every module invariant by name:
keystream period, channel normalization, posterior normalization,
collision >= 2^-H, the Bayes consistency oracle, the surviving-key count,
constant entropy for an uninformative cipher, monotone decay and the
information lower bound.
"""

import logging
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.integrate import quad

from .analytic import exact_symbol_info
from .config import ENUMERATION_BUDGET, NORMALIZATION_TOLERANCE
from .errors import ConfigError, InvariantViolation, QuadratureError
from .experiment import CurveAggregate, ExperimentConfig, build_keystream, check_resources, run_ensemble
from .keystream import is_full_period, uniformity_stat
from .transmission import AttackMode, channel_density

logger = logging.getLogger(__name__)

DENSITY_TOLERANCE = 1e-6
LOWER_BOUND_SLACK_BITS = 0.05
CONSTANT_ENTROPY_TOLERANCE = 1e-9
MIN_TRIALS = 2


def corrupt_density(values: np.ndarray) -> np.ndarray:
    """Fault-injection hook: replaces every likelihood by the log of a negated density"""
    with np.errstate(invalid="ignore"):
        return np.log(-np.exp(values))


FAULTS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "corrupt_density": corrupt_density,
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    skipped: bool = False


@dataclass
class VerificationReport:
    config: Dict
    n_trials: int
    checks: List[CheckResult] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed_names(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]

    def add(self, name: str, passed: bool, detail: str = "", skipped: bool = False):
        self.checks.append(CheckResult(name, bool(passed), detail, skipped))
        level = logging.DEBUG if passed else logging.ERROR
        logger.log(level, f"{name}: {'ok' if passed else 'FAILED'} {detail}".rstrip())

    def skip(self, name: str, reason: str):
        self.add(name, True, reason, skipped=True)

    def raise_for_failure(self):
        if not self.passed:
            failed = [c for c in self.checks if not c.passed]
            raise InvariantViolation(", ".join(c.name for c in failed), failed[0].detail)

    def lines(self) -> List[str]:
        out = []
        for check in self.checks:
            status = "skip" if check.skipped else ("ok" if check.passed else "FAIL")
            out.append(f"[{status:>4}] {check.name}" + (f": {check.detail}" if check.detail else ""))
        out.extend(f"note: {note}" for note in self.notes)
        return out


def _check_keystream(cfg: ExperimentConfig, report: VerificationReport):
    keystream = build_keystream(cfg)
    if keystream.n_keys * cfg.Q_max <= ENUMERATION_BUDGET:
        uniformity = uniformity_stat(keystream, keystream.alphabet_size, cfg.Q_max)
        report.notes.append(f"running-key histogram chi2 = {uniformity.pooled:.1f} on "
                            f"{uniformity.dof} dof (p = {uniformity.pooled_p:.3g})")
    if cfg.lfsr is None:
        report.skip("keystream_full_period", "ideal-random keystream")
        return
    ok = is_full_period(cfg.lfsr)
    report.add("keystream_full_period", ok, f"taps {list(cfg.lfsr.taps)}")


def _check_density(cfg: ExperimentConfig, report: VerificationReport):
    if cfg.cipher == "additive":
        report.skip("density_normalization", "no phase channel")
        return
    M = cfg.M
    channel = cfg.channel
    if channel.is_gaussian:
        points = [0.0]
    else:
        half = channel.arc_width(M) / 2.0
        points = [p for p in (-half, half) if -M / 2 < p < M / 2]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        total, _ = quad(lambda x: channel_density(x, channel, M), -M / 2, M / 2,
                        points=points or None, limit=200)
    report.add("density_normalization", abs(total - 1.0) <= DENSITY_TOLERANCE,
               f"integral over the circle = {total:.9f}")


def _check_posterior(cfg: ExperimentConfig, agg: CurveAggregate, report: VerificationReport):
    diag = agg.diagnostics
    error = diag["max_normalization_error"]
    report.add("normalization", error <= NORMALIZATION_TOLERANCE,
               f"max |log sum p| = {error:.3g}")
    violations = diag["collision_violations"]
    report.add("collision_vs_entropy", violations == 0,
               f"{violations} posteriors with sum p^2 < 2^-H")

    gap = agg.secondary["mean_consistency_gap"].to_numpy()
    gap_se = agg.secondary["stderr_consistency_gap"].to_numpy()
    bad = ~(np.abs(gap) <= 4.0 * gap_se + 1e-12)
    if bad.any():
        q = int(agg.q[np.argmax(bad)])
        report.add("bayes_consistency", False,
                   f"|mean P_E - mean collision| = {abs(gap[q - 1]):.3g} > 4 stderr at q={q}")
    else:
        report.add("bayes_consistency", True, "mean P_E matches mean collision within 4 stderr")


def _check_nonzero_false(cfg: ExperimentConfig, agg: CurveAggregate, report: VerificationReport):
    diag = agg.diagnostics
    full = cfg.n_keys - 1
    uninformative = cfg.cipher == "additive" and cfg.attack is AttackMode.CIPHERTEXT_ONLY
    gaussian = cfg.cipher == "alpha_eta" and cfg.channel.is_gaussian
    if not (gaussian or uninformative):
        report.skip("nonzero_false", f"keys can be eliminated (surviving false keys "
                                     f"{diag['min_nonzero_false']}..{diag['max_nonzero_false']})")
        return
    ok = diag["min_nonzero_false"] == full and diag["max_nonzero_false"] == full
    report.add("nonzero_false", ok, f"expected {full} at every q, saw "
                                    f"{diag['min_nonzero_false']}..{diag['max_nonzero_false']}")


def _check_entropy(cfg: ExperimentConfig, agg: CurveAggregate, report: VerificationReport):
    diag = agg.diagnostics
    U = diag["information_rate"]
    if U == 0:
        ok = abs(diag["min_entropy"] - cfg.L) <= CONSTANT_ENTROPY_TOLERANCE and \
            abs(diag["max_entropy"] - cfg.L) <= CONSTANT_ENTROPY_TOLERANCE
        report.add("entropy_constant", ok,
                   f"entropy in [{diag['min_entropy']}, {diag['max_entropy']}], expected exactly {cfg.L}")
        if ok:
            report.notes.append(f"entropy constant at L = {cfg.L} bits for every q in every trial")
    else:
        report.skip("entropy_constant", "informative cipher")

    mean_h = agg.mean_entropy
    se = agg.stderr_entropy
    rises = mean_h[1:] > mean_h[:-1] + 2.0 * se[1:] + 1e-12
    if rises.any():
        q = int(np.argmax(rises)) + 2
        report.add("entropy_monotone", False, f"mean entropy rises at q={q}")
    else:
        report.add("entropy_monotone", True)

    rate = U
    if cfg.cipher == "alpha_eta" and cfg.channel.is_gaussian:
        try:
            rate = max(U, exact_symbol_info(cfg.M, cfg.channel.sigma, cfg.attack))
        except QuadratureError as e:
            report.notes.append(f"lower bound uses the closed-form rate only: {e}")
    if rate < 0:
        report.skip("lower_bound", "negative information rate")
        return
    bound = cfg.L - agg.q * rate - 2.0 * se - LOWER_BOUND_SLACK_BITS
    below = mean_h < bound
    if below.any():
        q = int(agg.q[np.argmax(below)])
        report.add("lower_bound", False,
                   f"mean entropy {mean_h[q - 1]:.4f} below L - q*{rate:.4f} at q={q}")
    else:
        report.add("lower_bound", True, f"rate {rate:.4f} bits/symbol")


def run_invariant_suite(cfg: ExperimentConfig, n_trials: int = 200, fault: Optional[str] = None,
                        threads: Optional[int] = None) -> VerificationReport:
    """
    Reduced ensemble with every module invariant checked by name

    Args:
        cfg: Experiment configuration (n_trials is replaced)
        n_trials: Trials of the reduced ensemble
        fault: Name of a fault-injection hook from FAULTS
        threads: Worker processes for the ensemble

    Returns:
        VerificationReport
    """
    if n_trials < MIN_TRIALS:
        raise ConfigError("trials", f"the statistical checks need at least {MIN_TRIALS} trials, got {n_trials}")
    reduced = replace(cfg, n_trials=n_trials)
    check_resources(reduced)

    hook = None
    if fault is not None:
        if fault not in FAULTS:
            raise ValueError(f"unknown fault {fault!r}, choose from {sorted(FAULTS)}")
        hook = FAULTS[fault]
        logger.warning(f"Injecting fault {fault!r}")

    report = VerificationReport(config=reduced.to_dict(), n_trials=n_trials)

    _check_keystream(reduced, report)
    _check_density(reduced, report)
    with np.errstate(invalid="ignore"):
        agg = run_ensemble(reduced, threads=threads, likelihood_hook=hook)
    _check_posterior(reduced, agg, report)
    _check_nonzero_false(reduced, agg, report)
    _check_entropy(reduced, agg, report)

    if report.passed:
        logger.info(f"All {len(report.checks)} invariant checks passed on {n_trials} trials")
    else:
        logger.error(f"Invariant checks failed: {', '.join(report.failed_names)}")
    return report
