"""Self-describing bitstream for the dither -> quantize -> Huffman pipeline.

Layout (little-endian)::

    magic      4s   b"PDQC"
    version    u8
    bits       u8
    config     u8   0 mid-rise, 1 mid-tread
    m          u8   dither family
    alpha      u16  round(alpha * 65535)
    delta      f64
    rate       u32  sample rate in Hz
    n          u48  sample count
    lengths    u8 * 2**bits   Huffman codeword lengths
    payload    Huffman bits, MSB first, zero-padded to a byte

The dither realization is never stored; the decoder only looks up codebook
values, so the decoded signal is the non-subtractive reconstruction.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .analysis import run_chain
from .dither import DitherSpec
from .quantizer import MID_RISE, MID_TREAD, QuantizerConfig, SymbolBuffer, reconstruct
from .rate import HuffmanCode, TruncatedStreamError, empirical_bin_probs, huffman_build, huffman_decode, huffman_encode
from .signal import AudioBuffer

MAGIC = b"PDQC"
VERSION = 1
MAX_SAMPLES = 2**48 - 1
_FIXED = struct.Struct("<4sBBBBHdI6s")
_CONFIG_FLAGS = {MID_RISE: 0, MID_TREAD: 1}


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class StreamHeader:
    bits: int
    config: str
    m: int
    alpha_q: int
    delta: float
    sample_rate: int
    n: int
    lengths: tuple
    version: int = VERSION

    @property
    def alpha(self) -> float:
        return self.alpha_q / 65535.0

    @property
    def quantizer(self) -> QuantizerConfig:
        return QuantizerConfig.from_delta(self.bits, self.delta, self.config)

    def pack(self) -> bytes:
        if not 0 <= self.n <= MAX_SAMPLES:
            raise OverflowError(f"sample count {self.n} does not fit the 48-bit header field")
        fixed = _FIXED.pack(
            MAGIC, self.version, self.bits, _CONFIG_FLAGS[self.config], self.m,
            self.alpha_q, self.delta, self.sample_rate, self.n.to_bytes(6, "little"),
        )
        return fixed + bytes(self.lengths)

    @classmethod
    def unpack(cls, data: bytes) -> tuple["StreamHeader", int]:
        if len(data) < _FIXED.size:
            raise FormatError(f"stream too short for header ({len(data)} bytes)")
        magic, version, bits, flag, m, alpha_q, delta, rate, n6 = _FIXED.unpack_from(data)
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise FormatError(f"unsupported version {version}")
        if not 1 <= bits <= 16:
            raise FormatError(f"bad bit depth {bits}")
        if flag not in (0, 1):
            raise FormatError(f"bad quantizer config flag {flag}")
        if m not in (1, 2):
            raise FormatError(f"bad dither family {m}")
        if not (np.isfinite(delta) and delta > 0) or rate == 0:
            raise FormatError("bad step size or sample rate")
        end = _FIXED.size + 2**bits
        if len(data) < end:
            raise FormatError("stream truncated inside the codeword-length table")
        lengths = tuple(data[_FIXED.size:end])
        header = cls(bits, (MID_RISE, MID_TREAD)[flag], m, alpha_q, delta, rate,
                     int.from_bytes(n6, "little"), lengths, version)
        return header, end


@dataclass(frozen=True)
class EncodedStream:
    header: StreamHeader
    payload: bytes
    payload_bits: int

    def to_bytes(self) -> bytes:
        return self.header.pack() + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "EncodedStream":
        header, off = StreamHeader.unpack(bytes(data))
        payload = bytes(data[off:])
        return cls(header, payload, 8 * len(payload))

    @property
    def code(self) -> HuffmanCode:
        return HuffmanCode.from_lengths(self.header.lengths)

    @property
    def bits_per_sample(self) -> float:
        return self.payload_bits / max(self.header.n, 1)


def encode_symbols(sym: SymbolBuffer, spec: DitherSpec, sample_rate: int) -> EncodedStream:
    cfg = sym.config
    if len(sym) > MAX_SAMPLES:
        raise OverflowError(f"sample count {len(sym)} does not fit the 48-bit header field")
    code = huffman_build(empirical_bin_probs(sym))
    bits = huffman_encode(sym, code)
    header = StreamHeader(
        cfg.bits, cfg.config, spec.m, int(round(spec.alpha * 65535)), float(cfg.delta),
        int(sample_rate), len(sym), code.lengths,
    )
    return EncodedStream(header, np.packbits(bits).tobytes(), int(bits.size))


def encode(x: AudioBuffer, spec: DitherSpec, cfg: QuantizerConfig) -> EncodedStream:
    """Add dither to `x`, quantize and Huffman-code with a per-stream table."""
    sym, _, _ = run_chain(x.samples, spec, cfg)
    return encode_symbols(sym, spec, x.sample_rate)


def decode_symbols(stream) -> SymbolBuffer:
    if isinstance(stream, (bytes, bytearray, memoryview)):
        stream = EncodedStream.from_bytes(stream)
    h = stream.header
    cfg = h.quantizer
    try:
        code = stream.code
    except ValueError as exc:
        raise FormatError(f"invalid codeword-length table: {exc}") from exc
    bits = np.unpackbits(np.frombuffer(stream.payload, dtype=np.uint8))
    try:
        symbols = huffman_decode(bits, code, h.n)
    except TruncatedStreamError as exc:
        raise FormatError(f"truncated payload: {exc}") from exc
    used = int(np.asarray(code.lengths)[symbols].sum()) if h.n else 0
    if bits.size - used >= 8:
        raise FormatError(f"symbol count mismatch: {bits.size - used} unused payload bits after {h.n} symbols")
    return SymbolBuffer.from_symbols(symbols, cfg)


def decode(stream) -> AudioBuffer:
    """Decode a stream (bytes or EncodedStream) to codebook amplitudes.

    Raises FormatError for bad magic/version, truncated payloads or an empty stream.
    """
    sym = decode_symbols(stream)
    if len(sym) == 0:
        raise FormatError("stream holds zero samples")
    h = stream.header if isinstance(stream, EncodedStream) else StreamHeader.unpack(bytes(stream))[0]
    return AudioBuffer(reconstruct(sym), h.sample_rate)
