#!/usr/bin/env python3
"""
Tests for symbol encoding, the measurement channel and likelihoods
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from alphaeta.errors import ConfigError
from alphaeta.transmission import (
    LOG_ZERO,
    AttackMode,
    ChannelModel,
    additive_encrypt,
    additive_log_likelihoods,
    channel_density,
    encode_symbol,
    log_channel_density,
    measure,
    running_key_log_likelihoods,
    symbol_log_likelihood,
    wrap_displacement,
    wrap_terms,
)


def test_encode_symbol():
    assert encode_symbol(3, 0, 8) == 3
    assert encode_symbol(3, 1, 8) == 7
    assert encode_symbol(7, 1, 8) == 3
    with pytest.raises(ValueError):
        encode_symbol(8, 0, 8)
    with pytest.raises(ValueError):
        encode_symbol(0, 2, 8)


@pytest.mark.parametrize("channel", [
    ChannelModel.wrapped_gaussian(16.0),
    ChannelModel.wrapped_gaussian(64.0),
    ChannelModel.uniform_arc(0.25),
])
def test_density_integrates_to_one(channel):
    M = 256
    points = [0.0] if channel.is_gaussian else [-32.0, 32.0]
    total, _ = quad(lambda x: channel_density(x, channel, M), -M / 2, M / 2, points=points, limit=200)
    assert total == pytest.approx(1.0, abs=1e-9)


def test_wrapped_gaussian_matches_long_sum():
    M, sigma = 256, 64.0
    channel = ChannelModel.wrapped_gaussian(sigma)
    delta = np.linspace(-M / 2, M / 2, 33)
    k = np.arange(-200, 201)
    brute = np.exp(-0.5 * ((delta[:, None] + k * M) / sigma) ** 2).sum(axis=1) / (sigma * math.sqrt(2 * math.pi))
    assert np.allclose(np.exp(log_channel_density(delta, channel, M)), brute, rtol=1e-13, atol=0)


def test_wrap_terms_grow_with_sigma():
    assert wrap_terms(16.0, 256) == 5
    assert wrap_terms(1024.0, 256) > 5


def test_wrap_displacement():
    assert wrap_displacement(250.0, 256) == pytest.approx(-6.0)
    assert wrap_displacement(-250.0, 256) == pytest.approx(6.0)


def test_uniform_arc_is_zero_outside():
    channel = ChannelModel.uniform_arc(0.25)
    assert log_channel_density(40.0, channel, 256) == LOG_ZERO
    assert log_channel_density(32.0, channel, 256) == pytest.approx(-math.log(64.0))


def test_measure_noise_statistics():
    rng = np.random.default_rng(1234)
    channel = ChannelModel.wrapped_gaussian(16.0)
    s, M = 100, 256
    draws = np.array([measure(s, channel, M, rng) for _ in range(100_000)])
    assert np.all((draws >= 0) & (draws < M))
    unwrapped = wrap_displacement(draws - s, M)
    assert unwrapped.std() == pytest.approx(16.0, abs=0.2)


def test_measure_arc_stays_on_the_arc():
    rng = np.random.default_rng(5)
    channel = ChannelModel.uniform_arc(0.25)
    draws = np.array([measure(0, channel, 256, rng) for _ in range(2000)])
    assert np.all(np.abs(wrap_displacement(draws, 256)) <= 32.0)


@pytest.mark.parametrize("mode,known", [
    (AttackMode.CIPHERTEXT_ONLY, None),
    (AttackMode.KNOWN_PLAINTEXT, 0),
    (AttackMode.KNOWN_PLAINTEXT, 1),
])
def test_vector_likelihoods_match_scalar(mode, known):
    M = 64
    channel = ChannelModel.wrapped_gaussian(4.0)
    y = 17.3
    values = running_key_log_likelihoods(y, channel, M, mode, known)
    expected = [symbol_log_likelihood(y, r, mode, known, channel, M) for r in range(M)]
    assert np.allclose(values, expected, rtol=0, atol=1e-12)


def test_ciphertext_only_likelihood_is_antipodal_symmetric():
    M = 64
    values = running_key_log_likelihoods(5.0, ChannelModel.wrapped_gaussian(4.0), M)
    assert np.allclose(values[:M // 2], values[M // 2:], atol=1e-12)


def test_known_plaintext_requires_the_bit():
    with pytest.raises(ValueError):
        running_key_log_likelihoods(1.0, ChannelModel.wrapped_gaussian(4.0), 64,
                                    AttackMode.KNOWN_PLAINTEXT, None)


def test_additive_cipher_likelihoods():
    assert additive_encrypt(1, 1) == 0
    assert additive_encrypt(0, 1) == 1
    ct_only = additive_log_likelihoods(1)
    assert ct_only[0] == ct_only[1] == math.log(0.5)
    known = additive_log_likelihoods(1, AttackMode.KNOWN_PLAINTEXT, known_bit=0)
    assert known[1] == 0.0 and known[0] == LOG_ZERO


def test_channel_validation():
    with pytest.raises(ConfigError) as exc:
        ChannelModel.wrapped_gaussian(-1.0)
    assert exc.value.field == "channel.sigma"
    with pytest.raises(ConfigError) as exc:
        ChannelModel.uniform_arc(1.5)
    assert exc.value.field == "channel.arc_fraction"
    with pytest.raises(ConfigError) as exc:
        ChannelModel.from_dict({"kind": "wrapped_gaussian", "sigma": 4, "arc_fraction": 0.2})
    assert exc.value.field == "channel.arc_fraction"


def test_channel_dict_round_trip():
    for channel in (ChannelModel.wrapped_gaussian(8.0), ChannelModel.uniform_arc(0.5)):
        assert ChannelModel.from_dict(channel.to_dict()) == channel
