# Mid-rise quantization
# =====================

import numpy as np

from dither_codec import QuantizerConfig, quantize, reconstruct

cfg = QuantizerConfig(bits=2, full_scale=1.0)
print("delta     ", cfg.delta)
print("codebook  ", cfg.codebook())
print("thresholds", cfg.thresholds())

# Inputs on a threshold go to the upper cell; anything past full scale
# saturates into the outer codewords.

x = np.array([-3.0, -0.5, -0.2, 0.0, 0.49, 0.5, 7.0])
sym = quantize(x, cfg)
print(np.column_stack([x, sym.indices, reconstruct(sym)]))

# Without dither the granular error is uniform on [-delta/2, delta/2), so
# its power is delta**2 / 12.

rng = np.random.default_rng(0)
y = rng.uniform(-1.0, 1.0, 10**6)
eps = reconstruct(quantize(y, cfg)) - y
print("MSE / (delta^2/12) =", eps.var() / (cfg.delta**2 / 12))
