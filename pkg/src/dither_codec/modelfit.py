"""Trade-off weight fitting for the ASR performance model and optimal dither selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_BETA_STEP = 1.0 / 99.0
DEFAULT_RATE_TOL = 1e-3


class UndefinedCorrelationError(ValueError):
    pass


class NoImprovementError(ValueError):
    pass


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("pearson needs two equal-length sequences of length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = np.sqrt(np.dot(dx, dx))
    sy = np.sqrt(np.dot(dy, dy))
    if sx == 0 or sy == 0:
        raise UndefinedCorrelationError("correlation undefined for a constant sequence")
    return float(np.clip(np.dot(dx, dy) / (sx * sy), -1.0, 1.0))


def sem(values) -> float:
    """Standard error of the mean with the n-1 sample deviation."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        raise ValueError("sem needs at least two values")
    return float(np.std(v, ddof=1) / np.sqrt(v.size))


def model_m(mse, acf_raw, beta):
    """``(beta - 1) * mse + beta * acf_raw``.

    `acf_raw` is the unnormalized lag autocovariance ``ACF_tau * mse``.
    """
    return (beta - 1.0) * np.asarray(mse) + beta * np.asarray(acf_raw)


@dataclass(frozen=True)
class BetaFit:
    beta_star: float
    pearson_r: float
    step: float
    betas: np.ndarray
    correlations: np.ndarray


def beta_grid(step: float = DEFAULT_BETA_STEP) -> np.ndarray:
    k = int(round(1.0 / step))
    if k < 1 or not np.isclose(k * step, 1.0):
        raise ValueError(f"beta step {step} must divide 1")
    return np.arange(k + 1) / k


def fit_beta(cer, mse, acf_raw, step: float = DEFAULT_BETA_STEP) -> BetaFit:
    """Grid search for the model weight most correlated with CER across alpha.

    Ties go to the smaller beta.  Raises UndefinedCorrelationError if CER is
    constant or the model is constant for some candidate weight.
    """
    cer = np.asarray(cer, dtype=np.float64)
    mse = np.asarray(mse, dtype=np.float64)
    acf_raw = np.asarray(acf_raw, dtype=np.float64)
    if not cer.size == mse.size == acf_raw.size or cer.size < 3:
        raise ValueError("fit_beta needs >= 3 alpha points with matching lengths")
    if np.ptp(cer) == 0:
        raise UndefinedCorrelationError("CER is constant across alpha")
    betas = beta_grid(step)
    r = np.array([pearson(model_m(mse, acf_raw, b), cer) for b in betas])
    best = int(np.argmax(r))  # first maximum = smallest beta
    return BetaFit(float(betas[best]), float(r[best]), float(step), betas, r)


def scaled_model_curve(cer, mse, acf_raw, beta) -> np.ndarray:
    """Affinely map M(., beta) onto the min..max range of the CER values."""
    mval = model_m(mse, acf_raw, beta)
    cer = np.asarray(cer, dtype=np.float64)
    span = np.ptp(mval)
    if span == 0:
        return np.full_like(mval, cer.mean())
    return cer.min() + (mval - mval.min()) / span * np.ptp(cer)


@dataclass(frozen=True)
class AlphaChoice:
    alpha: float
    improved: bool
    constant_rate: bool
    ratio: float | None
    cer: float
    rate: float


def optimal_alpha(alphas, cer, rate, rate_tolerance: float = DEFAULT_RATE_TOL, strict: bool = False) -> AlphaChoice:
    """Pick the dither amount trading CER gain against rate change.

    Candidates are the alphas that beat the undithered CER.  If every
    candidate keeps the rate within `rate_tolerance` of the undithered rate,
    the lowest-CER candidate wins.  Otherwise the ratio
    ``(P(0) - P(a)) / (R(0) - R(a))`` is maximized over candidates whose
    rate actually moved.

    With no improving alpha the result is ``alpha=0, improved=False``, or
    NoImprovementError when `strict`.
    """
    alphas = np.asarray(alphas, dtype=np.float64)
    cer = np.asarray(cer, dtype=np.float64)
    rate = np.asarray(rate, dtype=np.float64)
    if not alphas.size == cer.size == rate.size:
        raise ValueError("alphas, cer and rate need equal lengths")
    zero = np.flatnonzero(alphas == 0.0)
    if zero.size != 1:
        raise ValueError("alpha grid must contain 0 exactly once")
    i0 = int(zero[0])
    p0, r0 = cer[i0], rate[i0]
    cand = np.flatnonzero(cer < p0)
    if cand.size == 0:
        if strict:
            raise NoImprovementError("no alpha improves on the undithered CER")
        return AlphaChoice(0.0, False, False, None, float(p0), float(r0))

    drate = r0 - rate[cand]
    if np.max(np.abs(drate)) < rate_tolerance:
        best = cand[int(np.argmin(cer[cand]))]
        return AlphaChoice(float(alphas[best]), True, True, None, float(cer[best]), float(rate[best]))

    moved = np.abs(drate) >= rate_tolerance
    cand, drate = cand[moved], drate[moved]
    ratios = (p0 - cer[cand]) / drate
    k = int(np.argmax(ratios))
    best = cand[k]
    return AlphaChoice(float(alphas[best]), True, False, float(ratios[k]), float(cer[best]), float(rate[best]))
