"""Command-line entry point: ``dither-codec <command> ...``.

Every option can also be set through an environment variable named
``DITHER_CODEC_<OPTION>`` (upper case, dashes as underscores), e.g.
``DITHER_CODEC_BITS=2``.  Explicit flags win over the environment.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import error_report, run_chain
from .codec import EncodedStream, FormatError, decode, encode
from .dither import DitherSpec
from .harness import (
    DEFAULT_ALPHAS,
    AsrClient,
    SweepTable,
    fit_table,
    run_sweep,
    write_json,
    write_sweep_artifacts,
)
from .modelfit import DEFAULT_BETA_STEP, DEFAULT_RATE_TOL
from .quantizer import CONFIGS, MID_RISE, QuantizerConfig
from .rate import rate_report
from .signal import (
    DecodeError,
    LaplacianSource,
    SpeechLikeSource,
    laplace_scale_mle,
    load_pcm,
    normalize_trim,
    sample_laplacian,
    synth_speechlike,
    write_pcm,
)

ENV_PREFIX = "DITHER_CODEC_"
log = logging.getLogger("dither_codec")


def _env(name, default, cast=str):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    return default if raw is None else cast(raw)


def _grid(text: str) -> tuple:
    vals = tuple(float(t) for t in text.replace(",", " ").split())
    if not vals:
        raise argparse.ArgumentTypeError("empty alpha grid")
    return vals


def _ints(text: str) -> tuple:
    return tuple(int(t) for t in text.replace(",", " ").split())


def _add_condition(p, bits_default=1):
    p.add_argument("--bits", type=int, default=_env("bits", bits_default, int))
    p.add_argument("--m", type=int, choices=(1, 2), default=_env("m", 1, int))
    p.add_argument("--alpha", type=float, default=_env("alpha", 0.0, float))
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    p.add_argument("--config", choices=CONFIGS, default=_env("config", MID_RISE))


def _add_input(p):
    p.add_argument("--duration", type=float, default=_env("duration", None, float),
                   help="trim to this many seconds (default: whole file)")
    p.add_argument("--no-normalize", action="store_true", help="skip peak normalization")


def _load(path, args):
    buf = load_pcm(path)
    if args.no_normalize:
        return buf
    return normalize_trim(buf, args.duration if args.duration else len(buf) / buf.sample_rate + 1.0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dither-codec", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="WAV -> PDQC bitstream")
    p.add_argument("input")
    p.add_argument("output")
    _add_condition(p)
    _add_input(p)

    p = sub.add_parser("decode", help="PDQC bitstream -> 16-bit WAV")
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("analyze", help="error and rate report for one file and condition")
    p.add_argument("input")
    _add_condition(p)
    _add_input(p)
    p.add_argument("--tau", type=_ints, default=_env("tau", (5,), _ints))
    p.add_argument("--smooth", type=int, default=_env("smooth", 480, int))
    p.add_argument("--out-dir", default=_env("out_dir", None))

    p = sub.add_parser("sweep", help="full alpha x m x bits grid over a corpus")
    p.add_argument("corpus", help="directory of WAV files")
    p.add_argument("--alpha-grid", type=_grid, default=_env("alpha_grid", DEFAULT_ALPHAS, _grid))
    p.add_argument("--ms", type=_ints, default=_env("ms", (1, 2), _ints))
    p.add_argument("--bits", type=_ints, default=_env("bits", (1, 2, 3), _ints))
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    p.add_argument("--asr-cmd", default=_env("asr_cmd", None),
                   help="transcriber command with {in} and optional {out} placeholders")
    p.add_argument("--asr-timeout", type=float, default=_env("asr_timeout", 600.0, float))
    p.add_argument("--asr-parallel", type=int, default=_env("asr_parallel", 1, int))
    p.add_argument("--jobs", type=int, default=_env("jobs", 1, int))
    p.add_argument("--out-dir", default=_env("out_dir", "sweep-out"))
    p.add_argument("--beta-step", type=float, default=_env("beta_step", DEFAULT_BETA_STEP, float))
    p.add_argument("--rate-tol", type=float, default=_env("rate_tol", DEFAULT_RATE_TOL, float))
    _add_input(p)

    for name, helptext in (("fit-beta", "fit the model weight per (m, bits) from a sweep CSV"),
                           ("optimal-alpha", "choose alpha per (m, bits) from a sweep CSV")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("sweep_csv")
        p.add_argument("--beta-step", type=float, default=_env("beta_step", DEFAULT_BETA_STEP, float))
        p.add_argument("--rate-tol", type=float, default=_env("rate_tol", DEFAULT_RATE_TOL, float))
        p.add_argument("--out-dir", default=_env("out_dir", None))

    p = sub.add_parser("synth", help="write a synthetic corpus of WAV files")
    p.add_argument("--out-dir", default=_env("out_dir", "corpus"))
    p.add_argument("--count", type=int, default=_env("count", 2, int))
    p.add_argument("--duration", type=float, default=_env("duration", 2.0, float))
    p.add_argument("--sample-rate", type=int, default=_env("sample_rate", 48000, int))
    p.add_argument("--kind", choices=("speechlike", "laplacian"), default=_env("kind", "speechlike"))
    p.add_argument("--c", type=float, default=_env("c", 0.1, float), help="Laplacian scale")
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    return ap


def _condition(args):
    cfg = QuantizerConfig(args.bits, 1.0, args.config)
    return DitherSpec(args.m, args.alpha, cfg.delta, args.seed), cfg


def cmd_encode(args):
    buf = _load(args.input, args)
    spec, cfg = _condition(args)
    stream = encode(buf, spec, cfg)
    Path(args.output).write_bytes(stream.to_bytes())
    print(json.dumps({"samples": stream.header.n, "payload_bits": stream.payload_bits,
                      "bits_per_sample": stream.bits_per_sample}, sort_keys=True))


def cmd_decode(args):
    data = Path(args.input).read_bytes()
    write_pcm(args.output, decode(EncodedStream.from_bytes(data)))


def cmd_analyze(args):
    buf = _load(args.input, args)
    spec, cfg = _condition(args)
    er = error_report(buf.samples, spec, cfg, args.tau, args.smooth, buf.sample_rate)
    sym, _, _ = run_chain(buf.samples, spec, cfg)
    rr = rate_report(sym, spec, laplace_scale_mle(buf.samples))
    report = {
        "input": str(args.input), "bits": args.bits, "m": args.m, "alpha": args.alpha, "seed": args.seed,
        "n": er.n, "mse": er.mse, "acf": {str(k): v for k, v in er.acf.items()},
        "autocov": {str(k): v for k, v in er.autocov.items()}, "smooth_window": er.smooth_window,
        "shannon_entropy": rr.shannon_entropy, "huffman_avg_length": rr.huffman_avg_length,
        "analytic_entropy": rr.analytic_entropy, "gaussian_bound": rr.gaussian_bound,
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text + "\n")
        np.savetxt(out / "psd.csv", np.column_stack([er.freqs, er.psd]), delimiter=",",
                   header="frequency_hz,power", comments="", fmt="%.17g")


def cmd_sweep(args):
    files = sorted(Path(args.corpus).glob("*.wav"))
    if not files:
        raise SystemExit(f"no .wav files in {args.corpus}")
    corpus = [_load(f, args) for f in files]
    client = None
    if args.asr_cmd:
        client = AsrClient(args.asr_cmd, args.asr_timeout, max_parallel=args.asr_parallel)
    out = Path(args.out_dir)
    table = run_sweep(corpus, args.alpha_grid, args.ms, args.bits, client, args.seed, args.jobs,
                      work_dir=out / "wav" if client else None)
    paths = write_sweep_artifacts(out, table, fit_table(table, args.beta_step, args.rate_tol))
    for f in table.failures:
        log.warning("failed: %s %s: %s", f["file"], f["condition"], f["reason"])
    print(json.dumps({k: str(v) for k, v in paths.items()}, indent=2, sort_keys=True))


def cmd_fits(args):
    table = SweepTable.from_csv(args.sweep_csv)
    fits = fit_table(table, args.beta_step, args.rate_tol)
    key = "beta" if args.command == "fit-beta" else "alpha"
    result = {"fits": [{"m": f["m"], "bits": f["bits"], key: f[key]} for f in fits["fits"]],
              "beta_step": fits["beta_step"], "rate_tolerance": fits["rate_tolerance"]}
    if args.out_dir:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
        write_json(Path(args.out_dir) / f"{args.command.replace('-', '_')}.json", result)
    print(json.dumps(result, indent=2, sort_keys=True))


def cmd_synth(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = int(round(args.duration * args.sample_rate))
    for i in range(args.count):
        seed = args.seed + i
        if args.kind == "laplacian":
            buf = sample_laplacian(LaplacianSource(0.0, args.c, seed), n, args.sample_rate)
        else:
            buf = synth_speechlike(SpeechLikeSource(seed=seed), n, args.sample_rate)
        path = out / f"speaker{i:03d}.wav"
        write_pcm(path, buf)
        print(path)


COMMANDS = {"encode": cmd_encode, "decode": cmd_decode, "analyze": cmd_analyze, "sweep": cmd_sweep,
            "fit-beta": cmd_fits, "optimal-alpha": cmd_fits, "synth": cmd_synth}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (DecodeError, FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
