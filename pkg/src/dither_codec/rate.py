"""Output-symbol entropy, the Gaussian maximum-entropy estimate, and Huffman coding."""

from __future__ import annotations

import heapq
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .dither import DitherSpec, dither_variance, tpdf
from .quantizer import QuantizerConfig, SymbolBuffer

QUAD_TOL = 1e-9


class QuadratureError(ArithmeticError):
    pass


class TruncatedStreamError(ValueError):
    pass


@dataclass(frozen=True)
class SymbolDistribution:
    probs: np.ndarray
    source: str = "empirical"

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64).ravel()
        if p.size == 0:
            raise ValueError("empty alphabet")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"not a probability vector (sum={p.sum()!r})")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size


def laplace_cdf(x, c: float, mu: float = 0.0):
    z = (np.asarray(x, dtype=np.float64) - mu) / c
    return np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0.0)), 1.0 - 0.5 * np.exp(-np.maximum(z, 0.0)))


def analytic_bin_probs(laplace_c: float, spec: DitherSpec, cfg: QuantizerConfig) -> SymbolDistribution:
    """Bin probabilities of ``Y = X + V`` for zero-mean Laplacian ``X``.

    The atom of the dither contributes the Laplace mass of each cell
    directly; the triangular part is integrated numerically against the
    Laplace CDF.  The outer bins absorb the saturated tails.
    """
    if not laplace_c > 0:
        raise ValueError("laplace_c must be > 0")
    edges = np.concatenate(([-np.inf], cfg.thresholds(), [np.inf]))
    cell_mass = np.diff(laplace_cdf(edges, laplace_c))
    probs = (1.0 - spec.alpha) * cell_mass

    a = spec.half_width
    if spec.alpha > 0 and a > 0:
        cont = np.empty(edges.size)
        for i, t in enumerate(edges):
            if np.isinf(t):
                cont[i] = 0.0 if t < 0 else 1.0
                continue
            # P(X + V_tri < t); kinks of the integrand at v = 0, v = t, v = +-a
            pts = sorted({0.0, float(np.clip(t, -a, a))})
            with warnings.catch_warnings():
                warnings.simplefilter("error", integrate.IntegrationWarning)
                try:
                    val, err = integrate.quad(
                        lambda v: tpdf(v, a) * laplace_cdf(t - v, laplace_c),
                        -a, a, points=pts, epsabs=QUAD_TOL, epsrel=0.0, limit=200,
                    )
                except integrate.IntegrationWarning as exc:
                    raise QuadratureError(f"quadrature failed at threshold {t}: {exc}") from exc
            if err > QUAD_TOL:
                raise QuadratureError(f"quadrature error {err:.3g} exceeds {QUAD_TOL:g} at threshold {t}")
            cont[i] = val
        probs = probs + spec.alpha * np.diff(cont)

    probs = np.clip(probs, 0.0, None)
    return SymbolDistribution(probs / probs.sum(), source="analytic")


def empirical_bin_probs(sym: SymbolBuffer) -> SymbolDistribution:
    if len(sym) == 0:
        raise ValueError("empirical distribution of an empty symbol buffer")
    counts = np.bincount(sym.symbols, minlength=sym.config.levels)
    return SymbolDistribution(counts / counts.sum(), source="empirical")


def shannon_entropy(dist) -> float:
    """Entropy in bits with ``0 log 0 = 0``."""
    p = dist.probs if isinstance(dist, SymbolDistribution) else np.asarray(dist, dtype=np.float64)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)) + 0.0)


def gaussian_entropy_bound(laplace_c: float, spec: DitherSpec, cfg: QuantizerConfig) -> float:
    """``0.5 * log2(2*pi*e*(2c**2 + var(V) - delta**2/12))``, evaluated literally.

    This is a differential-entropy expression: it carries no ``-log2(delta)``
    term and subtracts the grouping correction, so it is a regression guide
    rather than a strict bound on the discrete entropy.
    """
    arg = 2.0 * laplace_c**2 + dither_variance(spec) - cfg.delta**2 / 12.0
    if not arg > 0:
        raise ValueError(f"log argument {arg:.6g} is not positive (c={laplace_c}, delta={cfg.delta})")
    return 0.5 * float(np.log2(2.0 * np.pi * np.e * arg))


@dataclass(frozen=True)
class HuffmanCode:
    """Canonical prefix code; ``codes[s]`` is the integer codeword of length ``lengths[s]``."""

    lengths: tuple
    codes: tuple

    @classmethod
    def from_lengths(cls, lengths) -> "HuffmanCode":
        lengths = tuple(int(n) for n in lengths)
        if not lengths or min(lengths) < 1:
            raise ValueError("every symbol needs a codeword length >= 1")
        if kraft_sum(lengths) > 1.0 + 1e-12:
            raise ValueError(f"lengths {lengths} violate the Kraft inequality")
        codes = [0] * len(lengths)
        code = 0
        prev = 0
        for s in sorted(range(len(lengths)), key=lambda s: (lengths[s], s)):
            code <<= lengths[s] - prev
            codes[s] = code
            code += 1
            prev = lengths[s]
        return cls(lengths, tuple(codes))

    def __len__(self):
        return len(self.lengths)

    @property
    def max_length(self) -> int:
        return max(self.lengths)

    def average_length(self, dist) -> float:
        p = dist.probs if isinstance(dist, SymbolDistribution) else np.asarray(dist, dtype=np.float64)
        return float(np.dot(p, self.lengths))

    def bit_patterns(self) -> list[str]:
        return [format(c, f"0{n}b") for c, n in zip(self.codes, self.lengths)]


def kraft_sum(lengths) -> float:
    return float(sum(2.0 ** -int(n) for n in lengths))


def huffman_lengths(probs) -> list[int]:
    """Huffman codeword lengths.

    Merges the two lowest-weight nodes, ties broken by the smallest symbol
    index in each subtree.  Zero-probability symbols are given a weight far
    below every positive one so they still receive codewords.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.size == 0:
        raise ValueError("empty alphabet")
    if not np.any(p > 0):
        raise ValueError("at least one symbol needs positive probability")
    if p.size == 1:
        return [1]
    tiny = p[p > 0].min() * 1e-6 / p.size
    weights = np.where(p > 0, p, tiny)
    heap = [(float(w), s, [s]) for s, w in enumerate(weights)]
    heapq.heapify(heap)
    lengths = [0] * p.size
    while len(heap) > 1:
        w1, k1, s1 = heapq.heappop(heap)
        w2, k2, s2 = heapq.heappop(heap)
        for s in s1 + s2:
            lengths[s] += 1
        heapq.heappush(heap, (w1 + w2, min(k1, k2), s1 + s2))
    return lengths


def huffman_build(dist) -> HuffmanCode:
    p = dist.probs if isinstance(dist, SymbolDistribution) else np.asarray(dist, dtype=np.float64)
    return HuffmanCode.from_lengths(huffman_lengths(p))


def huffman_encode(sym, code: HuffmanCode) -> np.ndarray:
    """Concatenate codewords MSB first; returns a uint8 array of 0/1 bits.

    `sym` may be a SymbolBuffer or an array of alphabet symbols ``0..K-1``.
    """
    s = sym.symbols if isinstance(sym, SymbolBuffer) else np.asarray(sym, dtype=np.int64)
    if s.size == 0:
        return np.zeros(0, dtype=np.uint8)
    if s.min() < 0 or s.max() >= len(code):
        raise ValueError("symbol outside the code alphabet")
    lengths = np.asarray(code.lengths, dtype=np.int64)[s]
    codes = np.asarray(code.codes, dtype=np.int64)[s]
    total = int(lengths.sum())
    owner = np.repeat(np.arange(s.size), lengths)
    starts = np.cumsum(lengths) - lengths
    pos = np.arange(total) - starts[owner]
    shift = lengths[owner] - 1 - pos
    return ((codes[owner] >> shift) & 1).astype(np.uint8)


def huffman_decode(bits, code: HuffmanCode, n: int) -> np.ndarray:
    """Decode exactly `n` symbols from a 0/1 bit array; trailing bits are ignored."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    lmax = code.max_length
    # lookup table indexed by the next lmax bits
    sym_table = np.full(1 << lmax, -1, dtype=np.int64)
    len_table = np.zeros(1 << lmax, dtype=np.int64)
    for s, (c, ln) in enumerate(zip(code.codes, code.lengths)):
        lo = c << (lmax - ln)
        sym_table[lo : lo + (1 << (lmax - ln))] = s
        len_table[lo : lo + (1 << (lmax - ln))] = ln

    padded = np.concatenate((bits, np.zeros(lmax, dtype=np.uint8)))
    weights = 1 << np.arange(lmax - 1, -1, -1)
    windows = np.lib.stride_tricks.sliding_window_view(padded, lmax)[: bits.size] @ weights
    step = len_table[windows].tolist()
    symbol = sym_table[windows].tolist()

    out = [0] * n
    pos = 0
    nbits = bits.size
    for i in range(n):
        if pos >= nbits:
            raise TruncatedStreamError(f"bitstream ended after {i} of {n} symbols")
        s = symbol[pos]
        ln = step[pos]
        if s < 0 or pos + ln > nbits:
            raise TruncatedStreamError(f"bitstream ends inside a codeword at symbol {i}")
        out[i] = s
        pos += ln
    return np.asarray(out, dtype=np.int64)


@dataclass
class RateReport:
    shannon_entropy: float
    huffman_avg_length: float
    gaussian_bound: float | None
    analytic_entropy: float | None = None
    empirical: bool = True


def rate_report(sym: SymbolBuffer, spec: DitherSpec, laplace_c: float | None = None) -> RateReport:
    """Entropy and Huffman rate for one quantized stream.

    With `laplace_c`, the analytic entropy and the Gaussian estimate for that
    source scale are included (``None`` when the estimate is undefined).
    """
    dist = empirical_bin_probs(sym)
    code = huffman_build(dist)
    analytic = bound = None
    if laplace_c is not None and laplace_c > 0:
        analytic = shannon_entropy(analytic_bin_probs(laplace_c, spec, sym.config))
        try:
            bound = gaussian_entropy_bound(laplace_c, spec, sym.config)
        except ValueError:
            bound = None
    return RateReport(shannon_entropy(dist), code.average_length(dist), bound, analytic)
