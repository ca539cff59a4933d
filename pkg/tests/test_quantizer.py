import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dither_codec.dither import DitherSpec, sample_dither
from dither_codec.quantizer import (
    MID_TREAD,
    CorruptSymbolError,
    QuantizerConfig,
    SymbolBuffer,
    error_signal,
    quantize,
    reconstruct,
)


def nearest_codebook(y, cfg):
    """Brute-force oracle: closest codebook value (ties resolved upward)."""
    cb = cfg.codebook()
    d = np.abs(np.asarray(y)[:, None] - cb[None, :])
    best = np.where(np.isclose(d, d.min(axis=1, keepdims=True), rtol=0, atol=1e-15), np.arange(cb.size), -1)
    return cb[best.max(axis=1)]


def test_sign_quantizer():
    cfg = QuantizerConfig(1)
    sym = quantize([0.3, -0.7], cfg)
    assert sym.indices.tolist() == [0, -1]
    np.testing.assert_allclose(reconstruct(sym), [0.5, -0.5])


def test_saturation():
    cfg = QuantizerConfig(2)
    assert reconstruct(quantize([0.9, 5.0, -7.0], cfg)).tolist() == [0.75, 0.75, -0.75]


def test_threshold_tie_goes_up():
    cfg = QuantizerConfig(2)  # delta 0.5, thresholds -0.5, 0, 0.5
    np.testing.assert_array_equal(cfg.thresholds(), [-0.5, 0.0, 0.5])
    assert quantize([-0.5], cfg).indices.tolist() == [-1]
    assert reconstruct(quantize([-0.5], cfg)).tolist() == [-0.25]
    assert reconstruct(quantize([0.0], cfg)).tolist() == [0.25]
    # -0.25 is a codebook value, not a threshold
    assert reconstruct(quantize([-0.25], cfg)).tolist() == [-0.25]


@pytest.mark.parametrize("bits", [1, 2, 3, 5])
def test_matches_nearest_codebook_oracle(bits, rng):
    cfg = QuantizerConfig(bits)
    y = rng.uniform(-1.0, 1.0, 4000)
    np.testing.assert_array_equal(reconstruct(quantize(y, cfg)), nearest_codebook(y, cfg))
    ties = cfg.thresholds()
    np.testing.assert_array_equal(reconstruct(quantize(ties, cfg)), nearest_codebook(ties, cfg))


def test_codebook_geometry():
    for bits in (1, 2, 3, 8):
        cfg = QuantizerConfig(bits)
        cb, th = cfg.codebook(), cfg.thresholds()
        assert cb.size == 2**bits and th.size == 2**bits - 1
        np.testing.assert_allclose(np.diff(cb), cfg.delta)
        np.testing.assert_allclose(np.diff(th), cfg.delta)
        np.testing.assert_array_equal(np.sort(-cb), cb)


def test_reconstruct_examples():
    np.testing.assert_allclose(reconstruct(SymbolBuffer([0, -1, 0], QuantizerConfig(1))), [0.5, -0.5, 0.5])
    assert reconstruct(SymbolBuffer([3], QuantizerConfig(3))).tolist() == [0.875]


def test_mid_tread():
    cfg = QuantizerConfig(2, config=MID_TREAD)
    np.testing.assert_allclose(cfg.codebook(), [-1.0, -0.5, 0.0, 0.5])
    np.testing.assert_allclose(cfg.thresholds(), [-0.75, -0.25, 0.25])
    assert reconstruct(quantize([0.1, -0.25, 0.3, 2.0], cfg)).tolist() == [0.0, 0.0, 0.5, 0.5]


def test_out_of_range_index():
    with pytest.raises(CorruptSymbolError):
        SymbolBuffer([2], QuantizerConfig(2))


def test_non_finite_input():
    with pytest.raises(ValueError, match="index 1"):
        quantize([0.0, np.nan], QuantizerConfig(2))


def test_error_signal():
    np.testing.assert_allclose(error_signal([0.3], [0.5]), [0.2])
    assert np.all(error_signal([0.1, 0.2], [0.1, 0.2]) == 0)
    with pytest.raises(ValueError):
        error_signal([0.1], [0.1, 0.2])


def test_error_signal_one_bit_by_hand():
    x = np.array([0.3, -0.7])
    eps = error_signal(x, reconstruct(quantize(x, QuantizerConfig(1))))
    np.testing.assert_allclose(eps, [0.2, 0.2])


@given(st.integers(1, 8), arrays(np.float64, st.integers(1, 50), elements=st.floats(-0.999, 0.999)))
def test_granular_error_bound(bits, y):
    cfg = QuantizerConfig(bits)
    assert np.all(np.abs(reconstruct(quantize(y, cfg)) - y) <= cfg.delta / 2 + 1e-15)


@given(st.integers(1, 8), arrays(np.float64, st.integers(1, 50), elements=st.floats(-3, 3)))
def test_midrise_zero_symmetry(bits, y):
    cfg = QuantizerConfig(bits)
    assume(not np.any(np.isin(y, cfg.thresholds())) and not np.any(y == 0))
    np.testing.assert_array_equal(reconstruct(quantize(-y, cfg)), -reconstruct(quantize(y, cfg)))


@pytest.mark.slow
def test_granular_mse_floor(rng):
    cfg = QuantizerConfig(4)
    lo = 2 * cfg.delta
    y = rng.uniform(lo, lo + cfg.delta, 10**6)
    e = reconstruct(quantize(y, cfg)) - y
    assert abs(np.mean(e**2) / (cfg.delta**2 / 12) - 1) < 0.01


@pytest.mark.slow
def test_full_dither_mse(rng):
    cfg = QuantizerConfig(8)
    x = rng.uniform(-0.9, 0.9, 10**6)
    v = sample_dither(DitherSpec(1, 1.0, cfg.delta, seed=8), x.size)
    e = reconstruct(quantize(x + v, cfg)) - x
    assert abs(np.mean(e**2) / (cfg.delta**2 / 4) - 1) < 0.02


@pytest.mark.slow
def test_moment_independence_under_full_tpdf(rng):
    cfg = QuantizerConfig(3)
    x = rng.uniform(-1 + cfg.delta, 1 - cfg.delta, 2 * 10**6)
    v = sample_dither(DitherSpec(1, 1.0, cfg.delta, seed=9), x.size)
    e = reconstruct(quantize(x + v, cfg)) - x
    bins = np.linspace(-1 + cfg.delta, 1 - cfg.delta, 33)
    which = np.digitize(x, bins) - 1
    first = np.array([e[which == k].mean() for k in range(32)])
    second = np.array([np.mean(e[which == k] ** 2) for k in range(32)])
    # per-bin standard error is about (delta/2)/sqrt(62500) = 0.25% of delta
    assert np.max(np.abs(first)) < 0.015 * cfg.delta
    assert np.max(np.abs(second / (cfg.delta**2 / 4) - 1)) < 0.03
