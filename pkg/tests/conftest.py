"""
Shared fixtures for the test suite
"""

import json
import os
import sys

import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


SMALL_CONFIG = {
    "L": 8,
    "M": 64,
    "channel": {"kind": "wrapped_gaussian", "sigma": 4},
    "cipher": "alpha_eta",
    "prng": {"kind": "lfsr"},
    "attack": "ciphertext_only",
    "Q_max": 12,
    "n_trials": 40,
    "master_seed": 11,
}


@pytest.fixture
def small_doc():
    """A fast configuration document: 256 keys, 12 symbols"""
    return json.loads(json.dumps(SMALL_CONFIG))


@pytest.fixture
def small_config_file(tmp_path, small_doc):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(small_doc))
    return path
