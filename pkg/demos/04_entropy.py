# Output entropy as a function of dither
# ======================================
#
# For a Laplacian source the bin probabilities of X + V can be computed
# directly.  More dither spreads mass into the outer bins and raises the
# entropy, except at one bit where the two bins stay equiprobable.

import numpy as np

from dither_codec import DitherSpec, QuantizerConfig, analytic_bin_probs, shannon_entropy

c = 0.1
alphas = np.linspace(0, 1, 9)
for bits in (1, 2, 3):
    cfg = QuantizerConfig(bits)
    for m in (1, 2):
        h = [shannon_entropy(analytic_bin_probs(c, DitherSpec(m, a, cfg.delta), cfg)) for a in alphas]
        print(f"b={bits} m={m}  " + " ".join(f"{v:.3f}" for v in h))
