"""Sounding symbol synthesis and transmit frame assembly."""

import numpy as np
import pytest

from soundersim import fixedpoint as fp
from soundersim.config import SounderConfig
from soundersim.errors import ConfigurationError
from soundersim.waveform import (
    SoundingWaveform,
    ZcParams,
    build_sounding_symbol,
    build_tx_frame,
    generate_zc,
    occupied_bins,
)


def test_zc_starts_at_one():
    x = generate_zc(ZcParams(813, 7))
    assert x[0] == 1 + 0j


def test_zc_constant_modulus():
    x = generate_zc(ZcParams(813, 7))
    assert np.abs(np.abs(x) - 1.0).max() < 1e-12


def test_zc_ideal_circular_autocorrelation():
    # Direct O(N^2) oracle: perfect peak at lag 0, nothing anywhere else.
    x = generate_zc(ZcParams(813, 7))
    n = len(x)
    for lag in range(n):
        corr = np.sum(x * np.conj(np.roll(x, -lag)))
        if lag == 0:
            assert abs(corr - n) < 1e-9 * n
        else:
            assert abs(corr) < 1e-9 * n


def test_zc_even_length_form():
    # Even lengths use the n^2 phase profile.
    x = generate_zc(ZcParams(4, 1))
    oracle = np.exp(-1j * np.pi * np.arange(4) ** 2 / 4)
    assert np.allclose(x, oracle, atol=1e-15)


def test_zc_params_validation():
    with pytest.raises(ConfigurationError):
        ZcParams(813, 3)  # gcd(3, 813) = 3
    with pytest.raises(ConfigurationError):
        ZcParams(813, 0)
    with pytest.raises(ConfigurationError):
        ZcParams(813, 813)
    with pytest.raises(ConfigurationError):
        ZcParams(0, 1)


def test_occupied_bins_centered_on_dc():
    bins = occupied_bins(813, 1024)
    assert len(bins) == 813
    assert 0 in bins  # DC included
    assert set(range(0, 407)) <= set(bins)  # positive half
    assert set(range(618, 1024)) <= set(bins)  # negative half wraps
    assert not set(range(407, 618)) & set(bins)  # guard band empty
    with pytest.raises(ConfigurationError):
        occupied_bins(9, 8)


def test_symbol_peak_equals_backoff():
    wf = build_sounding_symbol(ZcParams(813, 7), 1024, 0.5)
    peak = max(np.abs(wf.time_signal.real).max(), np.abs(wf.time_signal.imag).max())
    assert abs(peak - 0.5) < 1e-12


def test_symbol_constant_modulus_on_occupied_bins():
    wf = build_sounding_symbol(ZcParams(813, 7), 1024, 0.5)
    mags = np.abs(wf.freq_bins[wf.occupied_mask])
    assert np.abs(mags - mags[0]).max() < 1e-12 * mags[0]
    assert np.count_nonzero(wf.occupied_mask) == 813
    assert np.all(wf.freq_bins[~wf.occupied_mask] == 0)


def test_symbol_time_signal_is_exact_idft_of_bins():
    wf = build_sounding_symbol(ZcParams(813, 7), 1024, 0.5)
    assert np.array_equal(wf.time_signal, np.fft.ifft(wf.freq_bins))


def test_symbol_parseval():
    wf = build_sounding_symbol(ZcParams(813, 7), 1024, 0.5)
    time_energy = np.sum(np.abs(wf.time_signal) ** 2)
    bin_energy = np.sum(np.abs(wf.freq_bins) ** 2)
    assert abs(time_energy * 1024 - bin_energy) < 1e-9 * bin_energy


def test_symbol_occupied_bandwidth():
    # 813 of 1024 bins at 500 Msps covers just under 400 MHz.
    sample_rate = 1.0 / 2e-9
    bandwidth = 813 / 1024 * sample_rate
    assert abs(bandwidth - 396.97e6) < 0.01e6


def test_single_bin_symbol_is_constant():
    wf = build_sounding_symbol(np.array([1.0 + 0j]), 8, 0.5)
    assert np.abs(wf.time_signal - wf.time_signal[0]).max() < 1e-15


def test_symbol_rejects_sequence_longer_than_fft():
    with pytest.raises(ConfigurationError):
        build_sounding_symbol(ZcParams(9, 2), 8, 0.5)
    with pytest.raises(ConfigurationError):
        build_sounding_symbol(ZcParams(3, 2), 8, 0.0)


def test_symbol_quantization_saturation_free_at_max_backoff():
    wf = build_sounding_symbol(ZcParams(813, 7), 1024, 1 - 2**-15)
    _, clipped = fp.quantize_clipped(wf.time_signal)
    assert clipped == 0


def test_frame_structure_standard_config():
    cfg = SounderConfig()
    wf = build_sounding_symbol(cfg.zc, cfg.signal_len, cfg.backoff)
    frame = build_tx_frame(wf, cfg)
    assert len(frame) == 2_500_000
    assert cfg.train_repetitions == 66
    train = 66 * 1024
    symbol = fp.quantize(wf.time_signal)
    assert np.array_equal(frame[:train], np.tile(symbol, 66))
    tail = frame[train:]
    assert np.all(tail["i"] == 0) and np.all(tail["q"] == 0)
    assert len(tail) == 2_432_416


def test_frame_duration_matches_rep_period():
    cfg = SounderConfig()
    assert len(build_tx_frame(
        build_sounding_symbol(cfg.zc, cfg.signal_len, cfg.backoff), cfg
    )) * cfg.sample_period_s == cfg.rep_period_s


def test_frame_single_repetition():
    # One signal, nothing discarded: the train is exactly one symbol.
    cfg = SounderConfig(
        signal_len=1024, discard_len=0, avg_count=1, shift_bits=0,
        rep_period_s=2.048e-6, sample_period_s=2e-9,
    )
    assert cfg.train_repetitions == 1
    wf = build_sounding_symbol(cfg.zc, cfg.signal_len, cfg.backoff)
    frame = build_tx_frame(wf, cfg)
    assert len(frame) == 1024
    assert np.array_equal(frame, fp.quantize(wf.time_signal))


def test_frame_rejects_mismatched_symbol():
    cfg = SounderConfig()
    wf = build_sounding_symbol(ZcParams(51, 2), 64, 0.5)
    with pytest.raises(ConfigurationError):
        build_tx_frame(wf, cfg)


def test_frame_rejects_train_longer_than_frame():
    # Window fits (66 <= 100) but whole-symbol rounding needs 128 samples.
    cfg = SounderConfig(
        signal_len=64, discard_len=2, avg_count=1, shift_bits=0,
        rep_period_s=100 * 2e-9, sample_period_s=2e-9, zc=ZcParams(51, 2),
    )
    wf = build_sounding_symbol(cfg.zc, cfg.signal_len, cfg.backoff)
    with pytest.raises(ConfigurationError):
        build_tx_frame(wf, cfg)


def test_frame_budget_identity_random_configs():
    # nonzero + zero sample counts always add up to the frame length.
    rng = np.random.default_rng(3)
    for _ in range(20):
        signal_len = int(rng.choice([64, 128, 256]))
        avg_count = int(rng.integers(1, 9))
        shift_bits = int(np.ceil(np.log2(max(avg_count, 1)))) if avg_count > 1 else 0
        discard_len = 2 * int(rng.integers(0, 200))
        window = discard_len + avg_count * signal_len
        frames = -(-window // signal_len) + int(rng.integers(0, 4))
        frame_len = frames * signal_len
        cfg = SounderConfig(
            signal_len=signal_len, discard_len=discard_len,
            avg_count=avg_count, shift_bits=shift_bits,
            rep_period_s=frame_len * 2e-9, sample_period_s=2e-9,
            zc=ZcParams(51, 2),
        )
        wf = build_sounding_symbol(cfg.zc, cfg.signal_len, cfg.backoff)
        frame = build_tx_frame(wf, cfg)
        train = cfg.train_repetitions * signal_len
        assert train + (len(frame) - train) == cfg.frame_len
        assert train <= cfg.frame_len
