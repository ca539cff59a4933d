"""Sweep orchestration: codec runs over a corpus, external ASR, CER scoring, artifacts."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import shlex
import subprocess
import tempfile
import threading
import time
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import acf_tau, autocovariance, mse, run_chain
from .codec import decode, encode_symbols
from .dither import DitherSpec
from .modelfit import (
    DEFAULT_BETA_STEP,
    DEFAULT_RATE_TOL,
    UndefinedCorrelationError,
    fit_beta,
    optimal_alpha,
    scaled_model_curve,
    sem,
)
from .quantizer import QuantizerConfig
from .rate import empirical_bin_probs, rate_report, shannon_entropy
from .signal import AudioBuffer, laplace_scale_mle, write_pcm

log = logging.getLogger(__name__)

DEFAULT_ALPHAS = tuple(k / 8 for k in range(9))
TEXT_NORMALIZATION = "nfkc-lower-strip-PS-collapse-ws"


class TranscriptionError(RuntimeError):
    pass


class EmptyReferenceError(ValueError):
    pass


# -- scoring -----------------------------------------------------------------

def levenshtein(ref: str, hyp: str) -> int:
    """Unit-cost edit distance between two strings (two-row DP)."""
    if len(ref) < len(hyp):
        ref, hyp = hyp, ref
    prev = list(range(len(hyp) + 1))
    for i, rc in enumerate(ref, 1):
        cur = [i]
        for j, hc in enumerate(hyp, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (rc != hc)))
        prev = cur
    return prev[-1]


def normalize_text(text: str) -> str:
    """Lowercase, drop punctuation/symbol characters, collapse whitespace."""
    text = unicodedata.normalize("NFKC", text).lower()
    kept = "".join(" " if unicodedata.category(ch)[0] in "PS" else ch for ch in text)
    return " ".join(kept.split())


@dataclass(frozen=True)
class CerResult:
    reference: str
    hypothesis: str
    distance: int
    cer: float


def cer(ref: str, hyp: str) -> float:
    """Edit distance over reference length; not clamped to 1."""
    if len(ref) == 0:
        raise EmptyReferenceError("CER undefined for an empty reference")
    return levenshtein(ref, hyp) / len(ref)


def score(ref: str, hyp: str) -> CerResult:
    d = levenshtein(ref, hyp)
    if not ref:
        raise EmptyReferenceError("CER undefined for an empty reference")
    return CerResult(ref, hyp, d, d / len(ref))


# -- external ASR --------------------------------------------------------------

@dataclass
class AsrClient:
    """Runs an external transcriber.

    `command` is a template with ``{in}`` (input WAV) and ``{out}`` (transcript
    file) placeholders.  If ``{out}`` is absent the transcript is read from
    stdout.  At most `max_parallel` processes run at once.
    """

    command: str
    timeout: float = 600.0
    workdir: str | None = None
    max_parallel: int = 1
    _gate: threading.Semaphore = field(init=False, repr=False)
    calls: int = field(default=0, init=False)

    def __post_init__(self):
        if "{in}" not in self.command:
            raise ValueError("ASR command template needs an {in} placeholder")
        self._gate = threading.Semaphore(max(1, self.max_parallel))

    def _run_once(self, wav: Path) -> str:
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "transcript.txt"
            args = [a.replace("{in}", str(wav)).replace("{out}", str(out)) for a in shlex.split(self.command)]
            self.calls += 1
            proc = subprocess.run(args, cwd=self.workdir, capture_output=True, text=True, timeout=self.timeout)
            if proc.returncode != 0:
                raise TranscriptionError(f"exit status {proc.returncode}: {proc.stderr.strip()[:200]}")
            if "{out}" in self.command:
                if not out.exists():
                    raise TranscriptionError("ASR produced no transcript file")
                text = out.read_text(encoding="utf-8")
            else:
                text = proc.stdout
        return text.rstrip()


def transcribe(client: AsrClient, wav) -> str:
    """Transcribe one file, retrying once on failure; returns normalized text."""
    wav = Path(wav)
    if not wav.exists():
        raise FileNotFoundError(wav)
    last = None
    for attempt in range(2):
        try:
            with client._gate:
                raw = client._run_once(wav)
        except subprocess.TimeoutExpired as exc:
            last = TranscriptionError(f"timed out after {client.timeout}s")
            last.__cause__ = exc
            continue
        except (TranscriptionError, OSError) as exc:
            last = exc if isinstance(exc, TranscriptionError) else TranscriptionError(str(exc))
            log.debug("ASR attempt %d on %s failed: %s", attempt + 1, wav, exc)
            continue
        text = normalize_text(raw)
        if not text:
            last = TranscriptionError("empty transcript")
            continue
        return text
    raise last


# -- sweep -------------------------------------------------------------------

def derive_seed(seed: int, file_id: str, m: int, alpha: float, bits: int) -> int:
    key = f"{seed}|{file_id}|{m}|{alpha!r}|{bits}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


METRIC_FIELDS = ("mse", "acf5", "autocov5", "entropy_bits", "analytic_entropy_bits",
                 "huffman_rate_bits", "gaussian_bound_bits")


@dataclass
class FileResult:
    file_id: str
    m: int
    alpha: float
    bits: int
    metrics: dict
    cer: float | None = None
    error: str | None = None


@dataclass
class SweepRow:
    m: int
    alpha: float
    bits: int
    n_files: int
    mse: float
    acf5: float
    autocov5: float
    entropy_bits: float
    analytic_entropy_bits: float
    huffman_rate_bits: float
    gaussian_bound_bits: float
    cer_mean: float | None = None
    cer_sem: float | None = None
    n_cer: int = 0


@dataclass
class SweepTable:
    rows: list
    alphas: tuple
    has_cer: bool
    metadata: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def slice(self, m: int, bits: int) -> list:
        out = [r for r in self.rows if r.m == m and r.bits == bits]
        return sorted(out, key=lambda r: r.alpha)

    def column(self, m: int, bits: int, name: str) -> np.ndarray:
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name)
                         for r in self.slice(m, bits)], dtype=np.float64)

    def keys(self):
        return sorted({(r.m, r.bits) for r in self.rows})

    @property
    def columns(self) -> list:
        cols = ["m", "alpha", "bits", "n_files", *METRIC_FIELDS]
        if self.has_cer:
            cols += ["cer_mean", "cer_sem", "n_cer"]
        return cols

    @classmethod
    def from_csv(cls, path) -> "SweepTable":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            has_cer = "cer_mean" in (reader.fieldnames or [])
            rows = []
            for rec in reader:
                kw = {"m": int(rec["m"]), "alpha": float(rec["alpha"]), "bits": int(rec["bits"]),
                      "n_files": int(rec["n_files"])}
                kw.update({k: float(rec[k]) for k in METRIC_FIELDS})
                if has_cer:
                    kw["cer_mean"] = float(rec["cer_mean"]) if rec["cer_mean"] else None
                    kw["cer_sem"] = float(rec["cer_sem"]) if rec["cer_sem"] else None
                    kw["n_cer"] = int(rec["n_cer"])
                rows.append(SweepRow(**kw))
        alphas = tuple(sorted({r.alpha for r in rows}))
        return cls(rows, alphas, has_cer)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for r in sorted(self.rows, key=lambda r: (r.m, r.bits, r.alpha)):
                d = asdict(r)
                w.writerow([_fmt(d[c]) for c in self.columns])


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def _one_condition(buf: AudioBuffer, file_id: str, m: int, alpha: float, bits: int,
                   seed: int, laplace_c: float, wav_dir: Path | None) -> tuple[FileResult, Path | None]:
    cfg = QuantizerConfig(bits)
    spec = DitherSpec(m, alpha, cfg.delta, derive_seed(seed, file_id, m, alpha, bits))
    sym, x_hat, eps = run_chain(buf.samples, spec, cfg)
    stream = encode_symbols(sym, spec, buf.sample_rate)
    decoded = decode(stream.to_bytes())
    if not np.array_equal(decoded.samples, x_hat):
        raise AssertionError("decoder output differs from the encoder's reconstruction")
    rr = rate_report(sym, spec, laplace_c)
    energy = mse(eps)
    metrics = {
        "mse": energy,
        "acf5": acf_tau(eps, 5) if energy > 0 else float("nan"),
        "autocov5": autocovariance(eps, 5),
        "entropy_bits": shannon_entropy(empirical_bin_probs(sym)),
        "analytic_entropy_bits": rr.analytic_entropy if rr.analytic_entropy is not None else float("nan"),
        "huffman_rate_bits": stream.payload_bits / len(sym),
        "gaussian_bound_bits": rr.gaussian_bound if rr.gaussian_bound is not None else float("nan"),
    }
    wav = None
    if wav_dir is not None:
        wav = wav_dir / f"{file_id}__m{m}_a{alpha:.4f}_b{bits}.wav"
        write_pcm(wav, decoded)
    return FileResult(file_id, m, alpha, bits, metrics), wav


def run_sweep(corpus, alphas=DEFAULT_ALPHAS, ms=(1, 2), bits=(1, 2, 3), client: AsrClient | None = None,
              seed: int = 0, jobs: int = 1, work_dir=None) -> SweepTable:
    """Encode/decode every (file, m, alpha, bits) condition and aggregate metrics.

    With an ASR `client`, each decoded file is transcribed and scored against
    the transcript of the original audio.  Per-file failures are recorded in
    ``table.failures`` and excluded from aggregation.
    """
    corpus = list(corpus)
    alphas = tuple(float(a) for a in alphas)
    if not corpus or not alphas or not ms or not bits:
        raise ValueError("corpus and all grids must be nonempty")
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alpha grid must be strictly increasing")
    ids = [buf.label or f"file{i:03d}" for i, buf in enumerate(corpus)]
    if len(set(ids)) != len(ids):
        raise ValueError("corpus labels must be unique")

    tmp = None
    wav_dir = None
    if client is not None:
        if work_dir is None:
            tmp = tempfile.TemporaryDirectory()
            work_dir = tmp.name
        wav_dir = Path(work_dir)
        wav_dir.mkdir(parents=True, exist_ok=True)

    failures = []
    references = {}
    try:
        if client is not None:
            for fid, buf in zip(ids, corpus):
                ref_wav = wav_dir / f"{fid}__reference.wav"
                write_pcm(ref_wav, buf)
                try:
                    references[fid] = transcribe(client, ref_wav)
                except Exception as exc:  # noqa: BLE001 - per-file isolation
                    log.warning("reference transcription failed for %s: %s", fid, exc)
                    failures.append({"file": fid, "condition": "reference", "reason": str(exc)})

        scales = {fid: laplace_scale_mle(buf.samples) for fid, buf in zip(ids, corpus)}
        tasks = [(fid, buf, m, a, b) for fid, buf in zip(ids, corpus) for m in ms for b in bits for a in alphas]

        def work(task):
            fid, buf, m, a, b = task
            try:
                res, wav = _one_condition(buf, fid, m, a, b, seed, scales[fid], wav_dir)
            except Exception as exc:  # noqa: BLE001
                return FileResult(fid, m, a, b, {}, error=f"codec: {exc}")
            if client is not None and fid in references:
                try:
                    res.cer = cer(references[fid], transcribe(client, wav))
                except Exception as exc:  # noqa: BLE001
                    res.error = f"asr: {exc}"
            return res

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(work, tasks))
        else:
            results = [work(t) for t in tasks]
    finally:
        if tmp is not None:
            tmp.cleanup()

    for r in results:
        if r.error:
            failures.append({"file": r.file_id, "condition": f"m={r.m},alpha={r.alpha!r},bits={r.bits}",
                             "reason": r.error})

    rows = []
    for m in ms:
        for b in bits:
            for a in alphas:
                group = [r for r in results if (r.m, r.alpha, r.bits) == (m, a, b) and r.metrics]
                agg = {k: float(np.mean([g.metrics[k] for g in group])) if group else float("nan")
                       for k in METRIC_FIELDS}
                row = SweepRow(m, a, b, len(group), **agg)
                if client is not None:
                    vals = [g.cer for g in group if g.cer is not None and g.error is None]
                    row.n_cer = len(vals)
                    row.cer_mean = float(np.mean(vals)) if vals else None
                    row.cer_sem = sem(vals) if len(vals) >= 2 else None
                rows.append(row)

    meta = {
        "package_version": __version__,
        "seed": seed,
        "alphas": list(alphas),
        "ms": list(ms),
        "bits": list(bits),
        "files": ids,
        "text_normalization": TEXT_NORMALIZATION if client is not None else None,
        "asr_command": client.command if client is not None else None,
    }
    return SweepTable(rows, alphas, client is not None, meta, failures)


# -- fits ------------------------------------------------------------------------

def fit_table(table: SweepTable, beta_step: float = DEFAULT_BETA_STEP,
              rate_tolerance: float = DEFAULT_RATE_TOL) -> dict:
    """Beta* and alpha* for every (m, bits) slice; failures are reported inline."""
    fits = []
    for m, b in table.keys():
        entry = {"m": m, "bits": b, "beta": None, "alpha": None}
        alphas = table.column(m, b, "alpha")
        mse_ = table.column(m, b, "mse")
        raw = table.column(m, b, "autocov5")
        rate = table.column(m, b, "huffman_rate_bits")
        p = table.column(m, b, "cer_mean") if table.has_cer else None
        if p is None or np.isnan(p).any():
            reason = "no CER data" if p is None else "missing CER values"
            entry["beta"] = {"error": reason}
            entry["alpha"] = {"error": reason}
        else:
            try:
                bf = fit_beta(p, mse_, raw, beta_step)
                entry["beta"] = {"beta_star": bf.beta_star, "pearson_r": bf.pearson_r, "step": bf.step,
                                 "scaled_model": scaled_model_curve(p, mse_, raw, bf.beta_star).tolist()}
            except (UndefinedCorrelationError, ValueError) as exc:
                entry["beta"] = {"error": str(exc)}
            ch = optimal_alpha(alphas, p, rate, rate_tolerance)
            entry["alpha"] = {"alpha_star": ch.alpha, "improved": ch.improved, "constant_rate": ch.constant_rate,
                              "ratio": ch.ratio, "cer": ch.cer, "rate": ch.rate}
        fits.append(entry)
    return {"beta_step": beta_step, "rate_tolerance": rate_tolerance, "fits": fits}


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


def write_model_curves(path, table: SweepTable, fits: dict) -> None:
    """CSV of CER and the fitted model scaled into the CER range, per (m, bits, alpha)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "bits", "alpha", "beta_star", "cer_mean", "model_scaled"])
        for f in fits["fits"]:
            beta = f["beta"] or {}
            if "beta_star" not in beta:
                continue
            alphas = table.column(f["m"], f["bits"], "alpha")
            p = table.column(f["m"], f["bits"], "cer_mean")
            for a, pc, mv in zip(alphas, p, beta["scaled_model"]):
                w.writerow([f["m"], f["bits"], repr(float(a)), repr(beta["beta_star"]), repr(float(pc)), repr(float(mv))])


def write_entropy_curves(path, table: SweepTable) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "bits", "alpha", "entropy_bits", "analytic_entropy_bits", "huffman_rate_bits"])
        for r in sorted(table.rows, key=lambda r: (r.m, r.bits, r.alpha)):
            w.writerow([r.m, r.bits, repr(r.alpha), _fmt(r.entropy_bits), _fmt(r.analytic_entropy_bits),
                        _fmt(r.huffman_rate_bits)])


def write_sweep_artifacts(out_dir, table: SweepTable, fits: dict | None = None) -> dict:
    """Write sweep.csv, fits.json, entropy.csv, model_fit.csv and metadata.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fits = fits if fits is not None else fit_table(table)
    paths = {
        "sweep": out / "sweep.csv",
        "fits": out / "fits.json",
        "entropy": out / "entropy.csv",
        "model_fit": out / "model_fit.csv",
        "metadata": out / "metadata.json",
    }
    table.to_csv(paths["sweep"])
    write_json(paths["fits"], fits)
    write_entropy_curves(paths["entropy"], table)
    write_model_curves(paths["model_fit"], table, fits)
    meta = dict(table.metadata)
    meta["failures"] = table.failures
    meta["created_utc"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    write_json(paths["metadata"], meta)
    return paths
