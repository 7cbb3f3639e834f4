#!/usr/bin/env python3
"""
Bootstrap for the Alpha-Eta Exposure Simulator

Installs requirements.txt, then runs a reduced invariant suite and the
baseline estimate so a broken numeric stack shows up before a long run.
"""

import argparse
import logging
import subprocess
import sys

logging.basicConfig(level=logging.INFO, format='%(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

SMOKE_CONFIG = {
    "L": 8,
    "M": 64,
    "channel": {"kind": "wrapped_gaussian", "sigma": 4},
    "prng": {"kind": "lfsr"},
    "Q_max": 12,
    "n_trials": 40,
    "master_seed": 11,
}


def install_requirements() -> bool:
    try:
        subprocess.check_call([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"])
    except subprocess.CalledProcessError as e:
        logger.error(f"pip failed: {e}")
        return False
    return True


def check_stack() -> bool:
    """Baseline estimate plus a 40-trial invariant suite"""
    try:
        import numpy
        import pandas
        import scipy

        from alphaeta.analytic import build_estimate_report
        from alphaeta.experiment import ExperimentConfig
        from alphaeta.verification import run_invariant_suite
    except ImportError as e:
        logger.error(f"Import failed: {e}")
        return False
    logger.info(f"numpy {numpy.__version__}, scipy {scipy.__version__}, pandas {pandas.__version__}")

    report = build_estimate_report(13, 256, 16.0, threshold_bits=5)
    logger.info(f"Baseline U = {report.U:.4f}, I(Y;R) = {report.exact_info:.4f} bits/symbol")
    if report.crossing_q != 9:
        logger.error(f"Baseline threshold crossing at q = {report.crossing_q}, expected 9")
        return False

    suite = run_invariant_suite(ExperimentConfig.from_dict(SMOKE_CONFIG), n_trials=40, threads=1)
    if not suite.passed:
        logger.error(f"Invariants failed: {', '.join(suite.failed_names)}")
    return suite.passed


def main():
    parser = argparse.ArgumentParser(description="Install requirements and check the simulator")
    parser.add_argument('--skip-install', action='store_true', help='Only run the checks')
    args = parser.parse_args()

    ok = (args.skip_install or install_requirements()) and check_stack()
    if not ok:
        print("Setup failed, see the log above")
        sys.exit(1)
    print("Ready: python main.py simulate --config configs/baseline.json")


if __name__ == "__main__":
    main()
