"""Uniform b-bit scalar quantizer (mid-rise by default) with saturation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MID_RISE = "mid-rise"
MID_TREAD = "mid-tread"
CONFIGS = (MID_RISE, MID_TREAD)


class CorruptSymbolError(ValueError):
    pass


@dataclass(frozen=True)
class QuantizerConfig:
    """`bits`-bit uniform quantizer spanning ``(-full_scale, full_scale)``.

    The step is ``delta = 2 * full_scale / 2**bits``.  Bin indices run over
    ``-2**(bits-1) .. 2**(bits-1) - 1``; for mid-rise the reconstruction of bin
    ``j`` is ``j*delta + delta/2`` and its lower threshold is ``j*delta``.
    """

    bits: int = 1
    full_scale: float = 1.0
    config: str = MID_RISE

    def __post_init__(self):
        if not 1 <= int(self.bits) <= 16:
            raise ValueError(f"bits must be in 1..16, got {self.bits}")
        if not self.full_scale > 0:
            raise ValueError(f"full_scale must be > 0, got {self.full_scale}")
        if self.config not in CONFIGS:
            raise ValueError(f"config must be one of {CONFIGS}, got {self.config!r}")

    @classmethod
    def from_delta(cls, bits: int, delta: float, config: str = MID_RISE) -> "QuantizerConfig":
        return cls(bits, delta * 2**bits / 2.0, config)

    @property
    def levels(self) -> int:
        return 2**self.bits

    @property
    def delta(self) -> float:
        return 2.0 * self.full_scale / self.levels

    @property
    def index_range(self) -> tuple[int, int]:
        half = self.levels // 2
        return -half, half - 1

    @property
    def offset(self) -> float:
        """Codebook offset from ``j*delta`` (delta/2 mid-rise, 0 mid-tread)."""
        return self.delta / 2.0 if self.config == MID_RISE else 0.0

    def indices(self) -> np.ndarray:
        lo, hi = self.index_range
        return np.arange(lo, hi + 1)

    def codebook(self) -> np.ndarray:
        return self.indices() * self.delta + self.offset

    def thresholds(self) -> np.ndarray:
        """Interior decision thresholds (2**bits - 1 of them), ascending."""
        j = self.indices()[1:]
        shift = 0.0 if self.config == MID_RISE else -self.delta / 2.0
        return j * self.delta + shift


@dataclass(frozen=True)
class SymbolBuffer:
    indices: np.ndarray
    config: QuantizerConfig

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        lo, hi = self.config.index_range
        if idx.size and (idx.min() < lo or idx.max() > hi):
            bad = int(np.flatnonzero((idx < lo) | (idx > hi))[0])
            raise CorruptSymbolError(
                f"bin index {idx[bad]} at position {bad} outside [{lo}, {hi}]"
            )
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return self.indices.size

    @property
    def symbols(self) -> np.ndarray:
        """Indices shifted to the non-negative alphabet 0 .. 2**bits - 1."""
        return self.indices - self.config.index_range[0]

    @classmethod
    def from_symbols(cls, symbols, config: QuantizerConfig) -> "SymbolBuffer":
        return cls(np.asarray(symbols, dtype=np.int64) + config.index_range[0], config)


def quantize(y, cfg: QuantizerConfig) -> SymbolBuffer:
    """Map each sample to the bin whose half-open cell ``[T_j, T_j+1)`` holds it.

    Samples beyond the outermost thresholds saturate to the extreme bins.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    finite = np.isfinite(y)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise ValueError(f"non-finite input sample {y[bad]} at index {bad}")
    scaled = y / cfg.delta
    if cfg.config == MID_TREAD:
        scaled = scaled + 0.5
    lo, hi = cfg.index_range
    j = np.clip(np.floor(scaled), lo, hi).astype(np.int64)
    return SymbolBuffer(j, cfg)


def reconstruct(sym: SymbolBuffer) -> np.ndarray:
    cfg = sym.config
    return sym.indices * cfg.delta + cfg.offset


def error_signal(x, x_hat) -> np.ndarray:
    """Non-subtractive error ``x_hat - x`` against the pre-dither input."""
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {x_hat.shape}")
    return x_hat - x
