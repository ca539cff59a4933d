# A small sweep and model fit
# ===========================
#
# The sweep runs every (file, m, alpha, bits) condition through the codec.
# With a transcriber command it also scores each decoded file against the
# transcript of the original.  Here a toy transcriber stands in: it drops
# more characters the noisier the audio is.

import sys
import tempfile
from pathlib import Path

from dither_codec import AsrClient, SpeechLikeSource, fit_table, run_sweep, synth_speechlike, write_sweep_artifacts

TOY = '''
import sys, wave
import numpy as np
with wave.open(sys.argv[1]) as f:
    x = np.frombuffer(f.readframes(f.getnframes()), "<i2").astype(float)
zcr = np.mean(np.sign(x[1:]) != np.sign(x[:-1]))
text = "the quick brown fox jumps over the lazy dog"
print(text[: len(text) - int(40 * zcr)])
'''

corpus = []
for s in range(3):
    buf = synth_speechlike(SpeechLikeSource(seed=s), 24_000)
    corpus.append(type(buf)(buf.samples, buf.sample_rate, f"speaker{s}"))

with tempfile.TemporaryDirectory() as tmp:
    toy = Path(tmp) / "toy_asr.py"
    toy.write_text(TOY)
    client = AsrClient(f"{sys.executable} {toy} {{in}}")
    table = run_sweep(corpus, (0.0, 0.25, 0.5, 0.75, 1.0), ms=(1, 2), bits=(1, 2), client=client, seed=1)
    fits = fit_table(table)
    paths = write_sweep_artifacts(Path(tmp) / "out", table, fits)
    print(paths["sweep"].read_text())

for f in fits["fits"]:
    print(f["m"], f["bits"], f["beta"].get("beta_star"), f["alpha"].get("alpha_star"))

# This toy transcriber only gets worse as the audio gets noisier, so no
# alpha beats the undithered stream and every slice reports alpha* = 0.
