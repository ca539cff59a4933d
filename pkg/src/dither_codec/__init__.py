"""Parametric non-subtractive dither codec for low-bit speech compression."""

__version__ = "0.1.0"

from .analysis import ErrorReport, acf_tau, autocovariance, error_report, flatness_deviation, mse, peak_to_floor, psd
from .codec import EncodedStream, decode, encode
from .dither import DitherSpec, dither_pdf, dither_variance, sample_dither
from .harness import AsrClient, SweepTable, cer, fit_table, run_sweep, transcribe, write_sweep_artifacts
from .modelfit import fit_beta, model_m, optimal_alpha, pearson, sem
from .quantizer import QuantizerConfig, SymbolBuffer, error_signal, quantize, reconstruct
from .rate import (
    HuffmanCode,
    SymbolDistribution,
    analytic_bin_probs,
    empirical_bin_probs,
    gaussian_entropy_bound,
    huffman_build,
    huffman_decode,
    huffman_encode,
    shannon_entropy,
)
from .signal import (
    AudioBuffer,
    LaplacianSource,
    SpeechLikeSource,
    load_pcm,
    normalize_trim,
    sample_laplacian,
    synth_speechlike,
    write_pcm,
)
