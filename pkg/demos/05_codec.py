# Encoding to a bitstream and back
# ================================

import numpy as np

from dither_codec import (DitherSpec, EncodedStream, LaplacianSource, QuantizerConfig, decode, encode,
                          sample_laplacian)

x = sample_laplacian(LaplacianSource(c=0.1, seed=2), 48_000)
cfg = QuantizerConfig(3)
stream = encode(x, DitherSpec(2, 0.5, cfg.delta, seed=7), cfg)
data = stream.to_bytes()
print(len(data), "bytes,", round(stream.bits_per_sample, 4), "bits/sample")
print("codeword lengths", stream.header.lengths)

# The stream carries everything the decoder needs; the dither seed is not
# part of it.

y = decode(EncodedStream.from_bytes(data))
print(y.sample_rate, y.samples[:8])
print("distinct output levels", np.unique(y.samples))
