import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import stub_command
from dither_codec.cli import main
from dither_codec.signal import load_pcm


@pytest.fixture
def corpus(tmp_path, capsys):
    out = tmp_path / "corpus"
    assert main(["synth", "--out-dir", str(out), "--count", "2", "--duration", "0.1"]) == 0
    capsys.readouterr()
    return out


def test_synth_writes_files(corpus):
    files = sorted(corpus.glob("*.wav"))
    assert [f.name for f in files] == ["speaker000.wav", "speaker001.wav"]
    assert load_pcm(files[0]).samples.size == 4800


def test_encode_decode_round_trip(corpus, tmp_path, capsys):
    src = corpus / "speaker000.wav"
    bs, out = tmp_path / "a.pdqc", tmp_path / "a.wav"
    assert main(["encode", str(src), str(bs), "--bits", "2", "--alpha", "0.5", "--m", "2"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["samples"] == 4800 and bs.read_bytes()[:4] == b"PDQC"
    assert main(["decode", str(bs), str(out)]) == 0
    dec = load_pcm(out).samples
    # 2-bit mid-rise codebook at full scale 1: +-0.25, +-0.75
    assert set(np.round(np.unique(dec), 3)) <= {-0.75, -0.25, 0.25, 0.75}


def test_decode_rejects_garbage(tmp_path, capsys):
    bad = tmp_path / "bad.pdqc"
    bad.write_bytes(b"NOPE" + bytes(40))
    assert main(["decode", str(bad), str(tmp_path / "x.wav")]) == 1
    assert "magic" in capsys.readouterr().err


def test_analyze_writes_report(corpus, tmp_path, capsys):
    out = tmp_path / "rep"
    assert main(["analyze", str(corpus / "speaker001.wav"), "--alpha", "1", "--tau", "1,5",
                 "--smooth", "48", "--out-dir", str(out)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert set(rep["acf"]) == {"0", "1", "5"} and rep["mse"] > 0
    assert rep == json.loads((out / "report.json").read_text())
    psd = np.loadtxt(out / "psd.csv", delimiter=",", skiprows=1)
    assert psd.shape == (2401, 2)


def test_sweep_and_fit_commands(corpus, tmp_path, capsys):
    out = tmp_path / "sw"
    args = ["sweep", str(corpus), "--alpha-grid", "0,0.5,1", "--ms", "1", "--bits", "1",
            "--asr-cmd", stub_command("noisy"), "--out-dir", str(out)]
    assert main(args) == 0
    capsys.readouterr()
    for name in ("sweep.csv", "fits.json", "entropy.csv", "model_fit.csv", "metadata.json"):
        assert (out / name).exists()
    assert main(["fit-beta", str(out / "sweep.csv"), "--out-dir", str(out)]) == 0
    beta = json.loads(capsys.readouterr().out)
    assert beta["fits"][0]["m"] == 1 and "beta" in beta["fits"][0]
    assert main(["optimal-alpha", str(out / "sweep.csv"), "--rate-tol", "0.01"]) == 0
    alpha = json.loads(capsys.readouterr().out)
    assert alpha["rate_tolerance"] == 0.01 and "alpha" in alpha["fits"][0]
    assert (out / "fit_beta.json").exists()


def test_sweep_on_empty_directory(tmp_path):
    with pytest.raises(SystemExit):
        main(["sweep", str(tmp_path)])


def test_environment_defaults(corpus, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("DITHER_CODEC_BITS", "3")
    monkeypatch.setenv("DITHER_CODEC_ALPHA", "0.25")
    src = corpus / "speaker000.wav"
    assert main(["analyze", str(src)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["bits"] == 3 and rep["alpha"] == 0.25
    # explicit flags win
    assert main(["analyze", str(src), "--bits", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["bits"] == 1


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dither_codec.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
