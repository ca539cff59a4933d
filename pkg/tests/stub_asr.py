"""Stand-in transcriber for harness tests.

usage: stub_asr.py MODE IN.wav [OUT.txt]

echo      print a fixed sentence
noisy     corrupt the sentence in proportion to the zero-crossing rate of the audio
fail      exit with status 3
flaky     fail once per input (marker file next to it), then behave like echo
sleep     sleep 30 s
empty     print nothing
"""

import sys
import time
import wave
from pathlib import Path

import numpy as np

SENTENCE = "The quick brown fox jumps over the lazy dog, while seven wizards quietly hex jumbo pies."


def zero_crossing_rate(path):
    with wave.open(str(path), "rb") as wf:
        x = np.frombuffer(wf.readframes(wf.getnframes()), dtype="<i2").astype(float)
    s = np.sign(x)
    return float(np.mean(s[1:] != s[:-1]))


def corrupt(text, k):
    chars = list(text)
    for i in range(k):
        pos = (i * 7919) % len(chars)
        chars[pos] = "xq"[i % 2]
    return "".join(chars)


def main():
    mode, src = sys.argv[1], Path(sys.argv[2])
    out = Path(sys.argv[3]) if len(sys.argv) > 3 else None
    if mode == "fail":
        sys.exit(3)
    if mode == "sleep":
        time.sleep(30)
    if mode == "flaky":
        marker = src.with_suffix(".tried")
        if not marker.exists():
            marker.write_text("1")
            sys.exit(4)
    text = SENTENCE
    if mode == "noisy":
        text = corrupt(SENTENCE, int(round(60 * zero_crossing_rate(src))))
    if mode == "empty":
        text = ""
    if out is None:
        print(text)
    else:
        out.write_text(text + "\n")


if __name__ == "__main__":
    main()
