import shlex
import sys
from pathlib import Path

import numpy as np
import pytest

from dither_codec.signal import LaplacianSource, SpeechLikeSource, sample_laplacian, synth_speechlike

STUB = Path(__file__).with_name("stub_asr.py")

_ACCEPTANCE_LINES = []


def stub_command(mode: str, use_out: bool = True) -> str:
    cmd = f"{shlex.quote(sys.executable)} {shlex.quote(str(STUB))} {mode} {{in}}"
    return cmd + (" {out}" if use_out else "")


@pytest.fixture
def report_criterion():
    """Record a one-line PASS/FAIL verdict, then assert it."""

    def _report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def laplace_1e6():
    return sample_laplacian(LaplacianSource(0.0, 0.1, seed=11), 10**6).samples


@pytest.fixture(scope="session")
def speech_1e6():
    return synth_speechlike(SpeechLikeSource(seed=1), 10**6).samples


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
