# Error power, correlation and spectrum
# =====================================
#
# One-bit quantization of a speech-like signal with a 1 kHz resonance.
# Without dither the error follows the signal, so its spectrum peaks at the
# resonance; full dither whitens it at the cost of more error power.

from dither_codec import (DitherSpec, QuantizerConfig, SpeechLikeSource, error_report, peak_to_floor,
                          synth_speechlike)

x = synth_speechlike(SpeechLikeSource(seed=1), 480_000)
cfg = QuantizerConfig(1)

for alpha in (0.0, 0.25, 0.5, 0.75, 1.0):
    for m in (1, 2):
        r = error_report(x.samples, DitherSpec(m, alpha, cfg.delta, seed=5), cfg, sample_rate=x.sample_rate)
        print(f"alpha={alpha:<5} m={m}  MSE={r.mse:.4f}  ACF5={r.acf[5]:+.4f}")

r0 = error_report(x.samples, DitherSpec(1, 0.0, cfg.delta), cfg, sample_rate=x.sample_rate)
r1 = error_report(x.samples, DitherSpec(1, 1.0, cfg.delta), cfg, sample_rate=x.sample_rate)
print("PSD peak at", r0.freqs[r0.psd.argmax()], "Hz without dither")
print("peak/floor:", peak_to_floor(r0.psd), "->", peak_to_floor(r1.psd))
