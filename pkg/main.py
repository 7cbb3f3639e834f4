#!/usr/bin/env python3
"""
Alpha-Eta Exposure Simulator
Command-line front end

Subcommands:
1. simulate - Monte Carlo ensemble of Eve's posterior, written as CSV + sidecar
2. estimate - closed-form information rate, quadrature check and security thresholds
3. sweep    - one ensemble per value of a numeric config field, plus an index CSV
4. verify   - reduced ensemble with every invariant checked by name
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from alphaeta.analytic import build_estimate_report
from alphaeta.config import LOG_FILE
from alphaeta.errors import AlphaEtaError, ConfigError
from alphaeta.experiment import (
    SWEEP_ALIASES,
    apply_overrides,
    check_resources,
    load_config,
    load_config_document,
    run_ensemble,
    sweep_configs,
)
from alphaeta.results import write_results, write_sweep_index
from alphaeta.verification import FAULTS, run_invariant_suite

logger = logging.getLogger(__name__)

DEFAULT_RESULTS_DIR = Path("results")


def setup_logging(verbose: bool = False):
    """Console logging, plus a log file when ALPHAETA_LOG_FILE is set"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if LOG_FILE:
        handlers.append(logging.FileHandler(LOG_FILE))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
    )
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


def simulate(config_path: str, overrides: List[str], out: Optional[str] = None,
             threads: Optional[int] = None, progress: bool = False,
             threshold_bits: Optional[float] = None, max_log2_prob: Optional[float] = None) -> Path:
    """
    Run one ensemble and write its results

    Args:
        config_path: JSON config (or a results sidecar)
        overrides: Dotted key=value overrides
        out: CSV destination (default results/<config name>.csv)
        threads: Worker processes (0 = one per CPU)
        progress: Show a progress bar
        threshold_bits: Entropy requirement read off the simulated curve
        max_log2_prob: Requirement P_E < 2^-X read off the simulated curve

    Returns:
        Path of the CSV file
    """
    cfg = load_config(config_path, overrides)
    out_path = Path(out) if out else DEFAULT_RESULTS_DIR / f"{Path(config_path).stem}.csv"
    agg = run_ensemble(cfg, threads=threads, progress=progress)
    agg.check_requirements(threshold_bits, max_log2_prob)
    write_results(agg, out_path)
    print(f"{agg.summary_line()} -> {out_path}")
    return out_path


def estimate(L: int, M: int, sigma: float, threshold_bits: Optional[float] = None,
             max_log2_prob: Optional[float] = None, with_quadrature: bool = True,
             as_json: bool = False):
    """Print the analytic report for (L, M, sigma)"""
    if L < 1:
        raise ConfigError("L", f"must be a positive integer, got {L}")
    if M < 2:
        raise ConfigError("M", f"must be >= 2, got {M}")
    if not sigma > 0:
        raise ConfigError("sigma", f"must be positive, got {sigma}")
    report = build_estimate_report(L, M, sigma, threshold_bits=threshold_bits,
                                   max_log2_prob=max_log2_prob, with_quadrature=with_quadrature)
    if as_json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        for line in report.lines():
            print(line)
    return report


def sweep(config_path: str, parameter: str, values: List[str], overrides: List[str],
          out: Optional[str] = None, threads: Optional[int] = None, progress: bool = False) -> Path:
    """
    One result set per swept value plus an index keyed by the value

    Every configuration is validated before the first ensemble starts.
    """
    parameter = SWEEP_ALIASES.get(parameter, parameter)
    doc = apply_overrides(load_config_document(config_path), overrides)
    configs = sweep_configs(doc, parameter, values)
    for _, cfg in configs:
        check_resources(cfg)
    out_dir = Path(out) if out else DEFAULT_RESULTS_DIR / f"{Path(config_path).stem}_sweep"
    name = parameter.replace(".", "_")

    rows = []
    for value, cfg in configs:
        logger.info(f"Sweep {parameter}={value}")
        agg = run_ensemble(cfg, threads=threads, progress=progress)
        csv_path = write_results(agg, out_dir / f"{name}_{value}.csv")
        last = agg.table.iloc[-1]
        rows.append({
            "value": value,
            "results": csv_path.name,
            "final_mean_entropy": float(last["mean_entropy"]),
            "final_mean_prob_correct": float(last["mean_prob_correct"]),
        })
        print(f"{parameter}={value}: {agg.summary_line()}")

    index_path = write_sweep_index(out_dir, parameter, rows)
    print(f"{len(rows)} result sets, index {index_path}")
    return index_path


def verify(config_path: str, overrides: List[str], trials: int = 200,
           threads: Optional[int] = None, fault: Optional[str] = None) -> int:
    """Run the invariant suite; exit code 1 names the failed invariants"""
    cfg = load_config(config_path, overrides)
    report = run_invariant_suite(cfg, n_trials=trials, fault=fault, threads=threads)
    for line in report.lines():
        print(line)
    if not report.passed:
        print(f"invariant violated: {', '.join(report.failed_names)}")
        return 1
    print(f"all invariants hold ({trials} trials)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Alpha-Eta Exposure Simulator - eavesdropper entropy on the seed key",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py simulate --config configs/baseline.json              # 2000-trial ensemble
  python main.py simulate --config configs/baseline.json --set cipher=additive
  python main.py estimate --L 13 --M 256 --sigma 16 --threshold-bits 5
  python main.py sweep --config configs/baseline.json --param sigma --values 4 8 16 32
  python main.py verify --config configs/baseline.json                # invariant suite
        """
    )
    parser.add_argument('--verbose', '-v', action='store_true', help='Enable verbose logging')
    subparsers = parser.add_subparsers(dest='command', required=True)

    def add_run_options(sub, with_out=True):
        sub.add_argument('--config', '-c', required=True, help='JSON config file (or a results sidecar)')
        sub.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
                         help='Override a config field, e.g. channel.sigma=8 (repeatable)')
        sub.add_argument('--threads', type=int, default=None,
                         help='Worker processes, 0 = one per CPU (default: ALPHAETA_THREADS or 0)')
        if with_out:
            sub.add_argument('--out', '-o', default=None, help='Output path')
            sub.add_argument('--progress', action='store_true', help='Show a progress bar')

    sim = subparsers.add_parser('simulate', help='Run a Monte Carlo ensemble')
    add_run_options(sim)
    sim.add_argument('--threshold-bits', type=float, default=None,
                     help='Report the first q whose mean entropy is at most this many bits')
    sim.add_argument('--max-log2-prob', type=float, default=None,
                     help='Report the first q whose mean P_E reaches 2^-X')

    est = subparsers.add_parser('estimate', help='Print the analytic estimate')
    est.add_argument('--L', type=int, default=13, help='Seed key length in bits (default: 13)')
    est.add_argument('--M', type=int, default=256, help='Number of phase points (default: 256)')
    est.add_argument('--sigma', type=float, default=16.0, help='Noise std in symbol units (default: 16)')
    est.add_argument('--threshold-bits', type=float, default=None,
                     help='Required minimum entropy on the key, in bits')
    est.add_argument('--max-log2-prob', type=float, default=None,
                     help='Requirement P_E < 2^-X on the key-guessing probability')
    est.add_argument('--no-quadrature', action='store_true', help='Skip the I(Y;R) quadrature')
    est.add_argument('--json', action='store_true', help='Print the report as JSON')

    swp = subparsers.add_parser('sweep', help='Sweep one numeric config field')
    add_run_options(swp)
    swp.add_argument('--param', required=True, help='Field to sweep, e.g. channel.sigma or n_trials')
    swp.add_argument('--values', nargs='+', required=True, help='Values of the swept field')

    ver = subparsers.add_parser('verify', help='Run the invariant suite')
    add_run_options(ver, with_out=False)
    ver.add_argument('--trials', type=int, default=200, help='Trials of the reduced ensemble (default: 200)')
    ver.add_argument('--inject-fault', choices=sorted(FAULTS), default=None, help=argparse.SUPPRESS)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    setup_logging(args.verbose)

    try:
        if args.command == 'simulate':
            simulate(args.config, args.overrides, args.out, args.threads, args.progress,
                     args.threshold_bits, args.max_log2_prob)
        elif args.command == 'estimate':
            estimate(args.L, args.M, args.sigma, args.threshold_bits, args.max_log2_prob,
                     with_quadrature=not args.no_quadrature, as_json=args.json)
        elif args.command == 'sweep':
            sweep(args.config, args.param, args.values, args.overrides, args.out,
                  args.threads, args.progress)
        elif args.command == 'verify':
            return verify(args.config, args.overrides, args.trials, args.threads, args.inject_fault)
        return 0

    except AlphaEtaError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return 1


if __name__ == "__main__":
    sys.exit(main())
