#!/usr/bin/env python3
"""
Tests for the exact posterior over seed keys
"""

import math

import numpy as np
import pytest

from alphaeta.bayes import (
    collision_prob,
    count_nonzero_false,
    entropy,
    entropy_of_distribution,
    posterior_uniform,
    posterior_update,
    prob_correct,
)
from alphaeta.errors import ConfigError, InconsistentObservationError, ResourceLimitError
from alphaeta.keystream import KeystreamMap, LfsrSpec
from alphaeta.transmission import (
    AttackMode,
    ChannelModel,
    encode_symbol,
    measure,
    symbol_log_likelihood,
)


def test_uniform_prior():
    p = posterior_uniform(13)
    assert p.n_keys == 8192
    assert entropy(p) == pytest.approx(13.0, abs=1e-9)
    assert collision_prob(p) == pytest.approx(2.0 ** -13, rel=1e-12)
    assert prob_correct(p, 5) == pytest.approx(2.0 ** -13, rel=1e-12)
    assert count_nonzero_false(p, 5) == 8191


def test_prior_limits():
    with pytest.raises(ConfigError):
        posterior_uniform(0)
    with pytest.raises(ResourceLimitError):
        posterior_uniform(21)


def test_constant_likelihood_is_a_no_op():
    p = posterior_uniform(8)
    before = p.log_probs.copy()
    p.absorb_by_value(np.full(16, math.log(1 / 16)), np.arange(256) % 16)
    assert np.array_equal(p.log_probs, before)


def test_all_keys_eliminated_raises():
    p = posterior_uniform(4)
    with pytest.raises(InconsistentObservationError):
        p.absorb(np.full(16, -np.inf))


def test_update_matches_brute_force():
    L, M = 8, 64
    channel = ChannelModel.wrapped_gaussian(4.0)
    keystream = KeystreamMap.lfsr(LfsrSpec.preset(L), symbol_bits=6, positions=5)
    rng = np.random.default_rng(3)
    true_key = 77

    p = posterior_uniform(L)
    brute = np.full(1 << L, -L * math.log(2))
    for q in range(1, 6):
        r = keystream.running_key(true_key, q)
        y = measure(encode_symbol(r, 1, M), channel, M, rng)
        posterior_update(p, y, q, keystream, AttackMode.CIPHERTEXT_ONLY, None, channel, M)
        brute = brute + np.array([
            symbol_log_likelihood(y, keystream.running_key(k, q), AttackMode.CIPHERTEXT_ONLY, None, channel, M)
            for k in range(1 << L)
        ])
        brute -= np.logaddexp.reduce(brute)
        assert np.allclose(p.log_probs, brute, atol=1e-10)
        assert p.normalization_error() < 1e-12


def test_collision_bounds_entropy_after_updates():
    L, M = 10, 64
    channel = ChannelModel.wrapped_gaussian(6.0)
    keystream = KeystreamMap.lfsr(LfsrSpec.preset(L), symbol_bits=6, positions=20)
    rng = np.random.default_rng(8)
    p = posterior_uniform(L)
    for q in range(1, 21):
        r = keystream.running_key(5, q)
        y = measure(encode_symbol(r, int(rng.integers(0, 2)), M), channel, M, rng)
        posterior_update(p, y, q, keystream, AttackMode.CIPHERTEXT_ONLY, None, channel, M)
        assert collision_prob(p) >= 2.0 ** (-entropy(p)) * (1 - 1e-12)
        # wrapped Gaussian likelihoods are never exactly zero
        assert count_nonzero_false(p, 5) == (1 << L) - 1


def test_arc_channel_eliminates_keys():
    L, M = 8, 256
    channel = ChannelModel.uniform_arc(0.25)
    keystream = KeystreamMap.ideal_random(L, symbol_bits=8, positions=3, map_seed=1)
    rng = np.random.default_rng(2)
    p = posterior_uniform(L)
    r = keystream.running_key(9, 1)
    y = measure(encode_symbol(r, 0, M), channel, M, rng)
    posterior_update(p, y, 1, keystream, AttackMode.CIPHERTEXT_ONLY, None, channel, M)
    assert np.isfinite(p.log_probs[9])
    assert count_nonzero_false(p, 9) < 255
    assert entropy(p) == pytest.approx(math.log2(count_nonzero_false(p, 9) + 1), abs=1e-9)


def test_entropy_of_distribution_ignores_zeros():
    log_probs = np.log(np.array([0.5, 0.5, 0.0, 0.0]))
    assert entropy_of_distribution(log_probs) == pytest.approx(1.0)


def test_update_order_does_not_matter():
    L, M = 10, 64
    channel = ChannelModel.wrapped_gaussian(5.0)
    keystream = KeystreamMap.lfsr(LfsrSpec.preset(L), symbol_bits=6, positions=8)
    rng = np.random.default_rng(21)
    true_key = 300
    observations = []
    for q in range(1, 9):
        r = keystream.running_key(true_key, q)
        observations.append((q, measure(encode_symbol(r, int(rng.integers(0, 2)), M), channel, M, rng)))

    prior = posterior_uniform(L)
    forward = prior.copy()
    shuffled = prior.copy()
    for q, y in observations:
        posterior_update(forward, y, q, keystream, AttackMode.CIPHERTEXT_ONLY, None, channel, M)
    for index in np.random.default_rng(4).permutation(len(observations)):
        q, y = observations[index]
        posterior_update(shuffled, y, q, keystream, AttackMode.CIPHERTEXT_ONLY, None, channel, M)

    assert np.allclose(forward.log_probs, shuffled.log_probs, rtol=0, atol=1e-9)
    assert np.array_equal(prior.log_probs, posterior_uniform(L).log_probs)


def test_eliminated_keys_stay_eliminated():
    L, M = 8, 256
    channel = ChannelModel.uniform_arc(0.25)
    keystream = KeystreamMap.ideal_random(L, symbol_bits=8, positions=6, map_seed=5)
    rng = np.random.default_rng(6)
    true_key = 40
    p = posterior_uniform(L)
    dead = np.zeros(1 << L, dtype=bool)
    for q in range(1, 7):
        r = keystream.running_key(true_key, q)
        y = measure(encode_symbol(r, int(rng.integers(0, 2)), M), channel, M, rng)
        posterior_update(p, y, q, keystream, AttackMode.CIPHERTEXT_ONLY, None, channel, M)
        assert np.all(np.isneginf(p.log_probs[dead])), f"q={q}"
        dead |= np.isneginf(p.log_probs)
    assert dead.any()
    assert not dead[true_key]

    # a likelihood that favours every key cannot revive an eliminated one
    p.absorb(np.zeros(1 << L))
    assert np.all(np.isneginf(p.log_probs[dead]))


def test_summary_matches_the_individual_statistics():
    L, M = 8, 64
    channel = ChannelModel.wrapped_gaussian(4.0)
    keystream = KeystreamMap.lfsr(LfsrSpec.preset(L), symbol_bits=6, positions=3)
    rng = np.random.default_rng(17)
    p = posterior_uniform(L)
    for q in range(1, 4):
        y = measure(encode_symbol(keystream.running_key(12, q), 0, M), channel, M, rng)
        posterior_update(p, y, q, keystream, AttackMode.CIPHERTEXT_ONLY, None, channel, M)

    stats = p.summarize(12)
    assert stats.entropy == pytest.approx(entropy(p), abs=1e-12)
    assert stats.prob_correct == prob_correct(p, 12)
    assert stats.collision == pytest.approx(collision_prob(p), rel=1e-12)
    assert stats.nonzero_false == count_nonzero_false(p, 12) == 255
    assert stats.normalization_error < 1e-12

    p.log_probs[:] = np.nan
    assert p.summarize(12).normalization_error == math.inf
