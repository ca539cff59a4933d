# Dither families
# ===============
#
# A dither sample is either exactly zero (probability 1 - alpha) or drawn
# from a triangular density.  Family m=1 keeps the triangle at full width
# +-delta; family m=2 narrows it to +-alpha*delta.

import numpy as np

from dither_codec import DitherSpec, dither_variance, sample_dither

delta = 0.5

# Draw a million samples from each family at a few alphas and compare the
# sample variance with the closed form alpha * a**2 / 6.

for m in (1, 2):
    for alpha in (0.25, 0.5, 1.0):
        spec = DitherSpec(m, alpha, delta, seed=3)
        v = sample_dither(spec, 10**6)
        print(f"m={m} alpha={alpha:<4}  half-width={spec.half_width:.3f}  "
              f"zeros={np.mean(v == 0):.3f}  var={v.var():.5f}  closed form={dither_variance(spec):.5f}")

# At alpha = 0 and alpha = 1 the two families are the same distribution, and
# with the same seed they are the same draws.

for alpha in (0.0, 1.0):
    a = sample_dither(DitherSpec(1, alpha, delta, seed=9), 5)
    b = sample_dither(DitherSpec(2, alpha, delta, seed=9), 5)
    print(alpha, np.array_equal(a, b))
