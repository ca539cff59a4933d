"""Parametric non-subtractive dither.

Each family mixes a point mass at zero (weight ``1 - alpha``) with a
triangular (TPDF) component (weight ``alpha``).  Family ``m=1`` keeps the
full support ``[-delta, delta]`` for every alpha; family ``m=2`` shrinks the
support to ``[-alpha*delta, alpha*delta]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Nominal ``a**2 / 4`` variance constant often quoted for the triangular
#: component.  Integrating the density gives ``a**2 / 6``; the nominal value
#: is kept only so reports can show both.
NOMINAL_TPDF_VARIANCE_FACTOR = 1.0 / 4.0
TPDF_VARIANCE_FACTOR = 1.0 / 6.0


@dataclass(frozen=True)
class DitherSpec:
    m: int = 1
    alpha: float = 0.0
    delta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.m not in (1, 2):
            raise ValueError(f"dither family m must be 1 or 2, got {self.m}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def half_width(self) -> float:
        """Support half-width ``a = delta * ((alpha - 1) * m + 2 - alpha)``."""
        return self.delta * ((self.alpha - 1.0) * self.m + 2.0 - self.alpha)

    @property
    def atom(self) -> float:
        """Probability mass of the exact-zero component."""
        return 1.0 - self.alpha


def tpdf(v, a: float):
    """Triangular density on [-a, a] with peak 1/a."""
    v = np.abs(np.asarray(v, dtype=np.float64))
    return np.where(v <= a, (a - v) / (a * a), 0.0)


def tpdf_cdf(v, a: float):
    v = np.clip(np.asarray(v, dtype=np.float64), -a, a)
    lo = 0.5 * ((v + a) / a) ** 2
    hi = 1.0 - 0.5 * ((a - v) / a) ** 2
    return np.where(v < 0, lo, hi)


def sample_dither(spec: DitherSpec, n: int) -> np.ndarray:
    """Draw `n` iid dither samples.

    The generator always consumes three uniforms per sample (gate and two
    shape draws), so two specs differing only in ``m`` share the same gate
    and shape sequence for a given seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    gate = rng.random(n) < spec.alpha
    u = rng.random((2, n)) - 0.5
    a = spec.half_width
    v = a * (u[0] + u[1])
    return np.where(gate, v, 0.0)


def dither_pdf(spec: DitherSpec, v):
    """Continuous part of the dither density and the separate atom at zero.

    Returns ``(density, atom)``; the atom is never folded into the density.
    """
    a = spec.half_width
    if spec.alpha == 0.0 or a == 0.0:
        return np.zeros_like(np.asarray(v, dtype=np.float64)), spec.atom
    return spec.alpha * tpdf(v, a), spec.atom


def dither_cdf(spec: DitherSpec, v):
    """Distribution function of V, atom included (right-continuous)."""
    v = np.asarray(v, dtype=np.float64)
    step = np.where(v >= 0, spec.atom, 0.0)
    if spec.alpha == 0.0:
        return step
    return step + spec.alpha * tpdf_cdf(v, spec.half_width)


def dither_variance(spec: DitherSpec) -> float:
    """Exact variance ``alpha * a**2 / 6`` of the mixture."""
    return spec.alpha * spec.half_width**2 * TPDF_VARIANCE_FACTOR


def nominal_dither_variance(spec: DitherSpec) -> float:
    """Nominal form ``alpha**(2m-1) * delta**2 / 4``; larger than the exact value by 3/2."""
    return spec.alpha ** (2 * spec.m - 1) * spec.delta**2 * NOMINAL_TPDF_VARIANCE_FACTOR
