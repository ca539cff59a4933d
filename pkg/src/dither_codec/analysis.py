"""Error metrics for the non-subtractive quantization error: MSE, lag-tau ACF, PSD."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dither import DitherSpec, sample_dither
from .quantizer import QuantizerConfig, error_signal, quantize, reconstruct

DEFAULT_TAU = 5
DEFAULT_SMOOTH = 480


class UndefinedNormalizationError(ValueError):
    pass


def mse(eps) -> float:
    eps = np.asarray(eps, dtype=np.float64)
    if eps.size == 0:
        raise ValueError("mse of an empty signal")
    return float(np.mean(eps * eps))


def autocovariance(eps, tau: int) -> float:
    """Biased lag-`tau` estimate ``sum(eps[n] * eps[n+tau]) / N``."""
    eps = np.asarray(eps, dtype=np.float64)
    n = eps.size
    if not 0 <= tau < n:
        raise ValueError(f"lag {tau} needs 0 <= tau < N={n}")
    return float(np.dot(eps[: n - tau], eps[tau:]) / n)


def acf_tau(eps, tau: int = DEFAULT_TAU) -> float:
    """Lag-`tau` autocorrelation normalized by the zero-lag energy."""
    r0 = autocovariance(eps, 0)
    if r0 == 0:
        raise UndefinedNormalizationError("error signal has zero energy; ACF undefined")
    return autocovariance(eps, tau) / r0


def moving_average(p, window: int) -> np.ndarray:
    """Centered moving average; the window is truncated at both edges."""
    p = np.asarray(p, dtype=np.float64)
    n = p.size
    half_lo = (window - 1) // 2
    half_hi = window - 1 - half_lo
    c = np.concatenate(([0.0], np.cumsum(p)))
    i = np.arange(n)
    lo = np.maximum(i - half_lo, 0)
    hi = np.minimum(i + half_hi + 1, n)
    return (c[hi] - c[lo]) / (hi - lo)


def psd(eps, smooth_window: int = DEFAULT_SMOOTH, sample_rate: float = 1.0):
    """One-sided periodogram ``|DFT(eps)|**2`` smoothed across frequency bins.

    Interior bins carry the power of both conjugate frequencies, so before
    smoothing ``psd.sum() / N == sum(eps**2)``.

    Returns
    -------
    freqs : ndarray
        Bin frequencies ``f * sample_rate / N`` for ``f = 0 .. N//2``.
    power : ndarray
        Smoothed power per bin.
    """
    eps = np.asarray(eps, dtype=np.float64)
    n = eps.size
    if n == 0:
        raise ValueError("psd of an empty signal")
    if not 1 <= smooth_window <= n:
        raise ValueError(f"smooth_window must be in [1, {n}], got {smooth_window}")
    spec = np.fft.rfft(eps)
    power = spec.real**2 + spec.imag**2
    if n % 2 == 0:
        power[1:-1] *= 2.0
    else:
        power[1:] *= 2.0
    if smooth_window > 1:
        power = moving_average(power, smooth_window)
    freqs = np.arange(power.size) * (sample_rate / n)
    return freqs, power


def peak_to_floor(power, freqs=None, band=None) -> float:
    """Ratio of the largest to smallest PSD value, optionally inside ``band=(lo, hi)`` Hz."""
    power = np.asarray(power, dtype=np.float64)
    if band is not None:
        freqs = np.asarray(freqs)
        power = power[(freqs >= band[0]) & (freqs <= band[1])]
    return float(power.max() / power.min())


def flatness_deviation(power, freqs=None, band=None) -> float:
    """Largest relative deviation of the PSD from its mean level."""
    power = np.asarray(power, dtype=np.float64)
    if band is not None:
        freqs = np.asarray(freqs)
        power = power[(freqs >= band[0]) & (freqs <= band[1])]
    level = power.mean()
    return float(np.max(np.abs(power / level - 1.0)))


@dataclass
class ErrorReport:
    mse: float
    acf: dict
    autocov: dict
    freqs: np.ndarray = field(repr=False)
    psd: np.ndarray = field(repr=False)
    smooth_window: int
    n: int


def run_chain(x, spec: DitherSpec, cfg: QuantizerConfig):
    """Dither, quantize and reconstruct `x`; returns ``(symbols, x_hat, eps)``."""
    x = np.asarray(x, dtype=np.float64)
    if not np.isclose(spec.delta, cfg.delta, rtol=1e-12, atol=0):
        raise ValueError(f"dither delta {spec.delta} != quantizer delta {cfg.delta}")
    v = sample_dither(spec, x.size)
    sym = quantize(x + v, cfg)
    x_hat = reconstruct(sym)
    return sym, x_hat, error_signal(x, x_hat)


def error_report(
    x,
    spec: DitherSpec,
    cfg: QuantizerConfig,
    taus=(DEFAULT_TAU,),
    smooth_window: int = DEFAULT_SMOOTH,
    sample_rate: float = 48000.0,
) -> ErrorReport:
    _, _, eps = run_chain(x, spec, cfg)
    r0 = autocovariance(eps, 0)
    autocov = {int(t): autocovariance(eps, t) for t in taus}
    acf = {0: 1.0} if r0 > 0 else {}
    for t in taus:
        acf[int(t)] = acf_tau(eps, t)
    freqs, power = psd(eps, min(smooth_window, eps.size), sample_rate)
    return ErrorReport(r0, acf, autocov, freqs, power, smooth_window, eps.size)
