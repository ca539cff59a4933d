"""Audio buffers, 16-bit PCM WAV I/O and synthetic speech-like sources."""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal as sps

PCM_SCALE = 2**15


class DecodeError(ValueError):
    """Raised when a WAV file cannot be read as 16-bit linear PCM."""


class NormalizationError(ValueError):
    pass


@dataclass(frozen=True)
class AudioBuffer:
    """Mono sample sequence with its sample rate.

    Samples are stored as a read-only float64 array with nominal range [-1, 1].
    """

    samples: np.ndarray
    sample_rate: int
    label: str = ""

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64).ravel()
        if arr.size < 1:
            raise ValueError("AudioBuffer needs at least one sample")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class LaplacianSource:
    """Laplace(mu, c) amplitude model, density exp(-|x - mu| / c) / (2c)."""

    mu: float = 0.0
    c: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"Laplacian scale c must be > 0, got {self.c}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def variance(self) -> float:
        return 2.0 * self.c**2


def load_pcm(path) -> AudioBuffer:
    """Read a 16-bit linear PCM WAV file, mixing multi-channel audio to mono."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as wf:
            nch = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            comptype = wf.getcomptype()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        # the stdlib reports non-PCM format tags as "unknown format: N"
        raise DecodeError(f"{path}: bad WAV header field 'format': {exc}") from exc
    except EOFError as exc:
        raise DecodeError(f"{path}: truncated RIFF header") from exc
    if comptype != "NONE":
        raise DecodeError(f"{path}: unsupported 'compression' {comptype!r}")
    if width != 2:
        raise DecodeError(f"{path}: unsupported 'bits_per_sample' {8 * width}, expected 16")
    if nch < 1:
        raise DecodeError(f"{path}: invalid 'channels' {nch}")
    if rate <= 0:
        raise DecodeError(f"{path}: invalid 'sample_rate' {rate}")
    data = np.frombuffer(raw, dtype="<i2")
    if data.size == 0 or data.size % nch:
        raise DecodeError(f"{path}: 'data' chunk holds {data.size} samples for {nch} channels")
    frames = data.reshape(-1, nch).astype(np.float64) / PCM_SCALE
    return AudioBuffer(frames.mean(axis=1), rate, label=path.stem)


def to_pcm16(samples) -> np.ndarray:
    """Scale to 16-bit integers, rounding half away from zero and clipping to the rails."""
    x = np.asarray(samples, dtype=np.float64) * PCM_SCALE
    q = np.sign(x) * np.floor(np.abs(x) + 0.5)
    return np.clip(q, -PCM_SCALE, PCM_SCALE - 1).astype("<i2")


def write_pcm(path, buf: AudioBuffer) -> None:
    path = Path(path)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(buf.sample_rate)
        wf.writeframes(to_pcm16(buf.samples).tobytes())


def normalize_trim(buf: AudioBuffer, duration_s: float = 20.0) -> AudioBuffer:
    """Keep the first `duration_s` seconds and scale to unit peak amplitude."""
    if not duration_s > 0:
        raise ValueError(f"duration_s must be > 0, got {duration_s}")
    n = min(len(buf), int(round(duration_s * buf.sample_rate)))
    x = buf.samples[:n]
    peak = np.max(np.abs(x))
    if peak == 0:
        raise NormalizationError(f"buffer {buf.label!r} is all zeros")
    return AudioBuffer(x / peak, buf.sample_rate, buf.label)


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _laplace_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    u = rng.random(n) - 0.5
    # u == -0.5 would map to -inf
    mag = np.minimum(np.abs(u), 0.5 - 2.0**-54)
    return -np.sign(u) * np.log1p(-2.0 * mag)


def sample_laplacian(src: LaplacianSource, n: int, sample_rate: int = 48000) -> AudioBuffer:
    """Draw `n` iid Laplace samples by inverse-CDF transform of U(-1/2, 1/2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x = src.mu + src.c * _laplace_unit(_rng(src.seed), n)
    return AudioBuffer(x, sample_rate, label=f"laplace-c{src.c:g}-s{src.seed}")


def laplace_scale_mle(x) -> float:
    """Maximum-likelihood Laplace scale: mean absolute deviation about the median."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.mean(np.abs(x - np.median(x))))


@dataclass(frozen=True)
class SpeechLikeSource:
    """Resonant carrier under a random syllabic envelope.

    Noise shaped by two-pole resonators at the formant frequencies is
    multiplied by an envelope drawn once per syllable: squared amplitude
    Exp(1) (a Gaussian scale mixture with exponential variance is Laplacian),
    a log-normal level spread of `level_sd_db`, and near-silent pauses with
    probability `pause_prob`.
    """

    formants: tuple = (1000.0,)
    bandwidth: float = 120.0
    syllable_hz: float = 4.0
    level_sd_db: float = 6.0
    pause_prob: float = 0.2
    pause_level: float = 1e-3
    seed: int = 0


def synth_speechlike(src: SpeechLikeSource, n: int, sample_rate: int = 48000) -> AudioBuffer:
    """Generate a peak-normalized, speech-like test signal of `n` samples."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(src.seed)
    excitation = _laplace_unit(rng, n)
    carrier = np.zeros(n)
    r = np.exp(-np.pi * src.bandwidth / sample_rate)
    for f0 in src.formants:
        theta = 2 * np.pi * f0 / sample_rate
        carrier += sps.lfilter([1.0], [1.0, -2 * r * np.cos(theta), r * r], excitation)
    carrier /= carrier.std() or 1.0

    t = np.arange(n) / sample_rate
    n_syl = int(np.ceil(t[-1] * src.syllable_hz)) + 2
    amp = np.sqrt(rng.exponential(1.0, n_syl))
    amp *= 10.0 ** (rng.normal(0.0, src.level_sd_db, n_syl) / 20.0)
    amp[rng.random(n_syl) < src.pause_prob] = src.pause_level
    env = np.interp(t * src.syllable_hz, np.arange(n_syl), amp)

    y = carrier * env
    peak = np.max(np.abs(y))
    if peak == 0:
        raise NormalizationError("degenerate synthetic signal")
    return AudioBuffer(y / peak, sample_rate, label=f"speechlike-s{src.seed}")
