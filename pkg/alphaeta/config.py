"""
Configuration settings for the alpha-eta exposure simulator
"""

import os
from typing import Dict, Tuple

from dotenv import load_dotenv

# Load .env (if present) for environment defaults
try:
    load_dotenv()
except Exception:
    pass

# Key-space limits
MAX_KEY_BITS = 20
MIN_KEY_BITS = 1

# Primitive feedback polynomials, listed as tap positions (L always present).
# (13, 4, 3, 1) is x^13 + x^4 + x^3 + x + 1.
LFSR_PRESETS: Dict[int, Tuple[int, ...]] = {
    2: (2, 1),
    3: (3, 2),
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
    11: (11, 9),
    12: (12, 6, 4, 1),
    13: (13, 4, 3, 1),
    14: (14, 5, 3, 1),
    15: (15, 14),
    16: (16, 15, 13, 4),
    17: (17, 14),
    18: (18, 11),
    19: (19, 6, 2, 1),
    20: (20, 17),
}
DEFAULT_KEY_BITS = 13
DEFAULT_LFSR_TAPS = LFSR_PRESETS[DEFAULT_KEY_BITS]

# Full-enumeration budget for uniformity diagnostics (2^L * Q)
ENUMERATION_BUDGET = 2 ** 26

# Wrapped-Gaussian truncation: at least this many wrap terms on each side
MIN_WRAP_TERMS = 5
# sqrt(2 * ln(10^300)) -- a Gaussian term this many sigmas out is < 1e-300
WRAP_TAIL_SIGMAS = 37.2

# Quadrature
QUADRATURE_TOLERANCE_BITS = 1e-4
QUADRATURE_LIMIT = 500

# Posterior tolerances
NORMALIZATION_TOLERANCE = 1e-9
COLLISION_RELATIVE_TOLERANCE = 1e-9

# Ensemble engine
EVALUATION_CEILING = int(float(os.getenv("ALPHAETA_EVALUATION_CEILING", "1e10")))
DEFAULT_THREADS = int(os.getenv("ALPHAETA_THREADS", "0"))
CHUNK_TRIALS = 25
MEAN_POSTERIOR_BUDGET = 2 ** 22  # Q_max * 2^L cells
KEYSTREAM_TABLE_BUDGET = int(float(os.getenv("ALPHAETA_TABLE_BUDGET", str(2 ** 31))))  # bytes
IDEAL_MAP_STREAM = 2 ** 64 - 1

# Log file (optional)
LOG_FILE = os.getenv("ALPHAETA_LOG_FILE")

# Output settings
RESULT_COLUMNS = [
    "q",
    "mean_entropy",
    "stderr_entropy",
    "mean_prob_correct",
    "stderr_prob_correct",
    "mean_collision",
    "stderr_collision",
    "mean_nonzero_false",
    "estimate_entropy",
    "estimate_in_domain",
]
SIDECAR_SUFFIX = ".meta.json"
SWEEP_INDEX_FILE = "index.csv"

STATISTIC_DEFINITIONS = {
    "entropy": "Shannon entropy in bits of the posterior over all 2^L seed keys, -sum p log2 p",
    "prob_correct": "posterior probability of the true seed key",
    "collision": "collision probability sum p^2 of the posterior",
    "nonzero_false": "number of false seed keys whose log-probability is not log-zero",
    "estimate_entropy": "max(L - q*U, 0) with U the information rate of the configuration",
    "estimate_in_domain": "q < n0 = L/U (true for every q when U = 0, false for every q when U < 0)",
    "stderr": "sample standard deviation (ddof=1) over trials divided by sqrt(n_trials); 0 for one trial",
    "entropy_of_mean_posterior": "entropy of the trial-averaged posterior, keys aligned by XOR with the true key",
    "consistency_gap": "per-trial prob_correct - collision; its mean is zero for an exact posterior",
}
