"""Experiment runner: batch generate / attack / decode / detect pipelines.

Every sample is fully reproducible in isolation: the master seed fans out to
per-sample substream seeds through the pinned mixer, so record k of a run is
a pure function of (config, master_seed, k).  Per-sample JSON-lines output
is byte-identical across reruns; wall-clock latencies are therefore reported
only in the summary aggregates, never in the per-sample file.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .attacks import copy_paste, token_edit
from .config import Scheme, WatermarkConfig, secret_key_from_env
from .decoder import DecodeResult, decode, list_decode
from .detector import detect_from_decode, roc_metrics
from .messages import Message, bit_accuracy
from .rng import mix64
from .simlm import SyntheticLMConfig, default_prompt, generate
from .types import TokenStream

SCHEMA_VERSION = 1

_TAG_MSG = 0x6D736721   # "msg!"
_TAG_LMWM = 0x6C6D776D  # "lmwm"
_TAG_LMNEG = 0x6C6D6E67  # "lmng"
_TAG_ATTACK = 0x61746B21  # "atk!"


@dataclass(frozen=True)
class AttackSpec:
    kind: str = "copy_paste"  # copy_paste | token_edit
    p: float = 0.0
    fragments: int = 1
    substitution_rate: float = 0.0
    insertion_rate: float = 0.0
    deletion_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("copy_paste", "token_edit"):
            raise ValueError(f"unknown attack kind {self.kind!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    lm: SyntheticLMConfig = SyntheticLMConfig()
    wm: WatermarkConfig = WatermarkConfig()
    samples: int = 100
    token_length: int = 250
    attack: Optional[AttackSpec] = None
    list_size: int = 1
    output_path: Optional[str] = None
    master_seed: int = 0
    jobs: int = 1
    prompt_len: int = 8

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.token_length < 1:
            raise ValueError(f"token_length must be >= 1, got {self.token_length}")
        if self.list_size < 1:
            raise ValueError(f"list_size must be >= 1, got {self.list_size}")
        if self.prompt_len < max(1, self.wm.context_width):
            raise ValueError("prompt_len must cover the hash context width")
        if self.lm.vocab_size != self.wm.vocab_size:
            raise ValueError("lm and wm vocabulary sizes disagree")


@dataclass
class SampleRecord:
    index: int
    message: Optional[str]
    predicted: Optional[str]
    unrecoverable: bool
    bit_accuracy: Optional[float]
    exact_match: Optional[bool]
    list_best_accuracy: Optional[float]
    colorlisted: int
    total: int
    z_score: float
    p_value: float
    negative: dict
    error: Optional[str] = None
    encode_seconds: float = 0.0
    decode_seconds: float = 0.0

    def to_json_dict(self) -> dict:
        # timing fields are excluded: per-sample files must be byte-identical
        # across reruns of the same config and master seed
        out = dataclasses.asdict(self)
        out.pop("encode_seconds")
        out.pop("decode_seconds")
        out["schema_version"] = SCHEMA_VERSION
        return out


@dataclass
class ExperimentReport:
    config: "ExperimentConfig"
    records: list[SampleRecord]
    aggregates: dict

    def summary_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": config_to_dict(self.config),
            "aggregates": self.aggregates,
        }


def sample_seed(master_seed: int, index: int, tag: int) -> int:
    return mix64(mix64(master_seed ^ mix64(index + 1)) ^ tag)


def _apply_attack(
    spec: AttackSpec, wm_stream: TokenStream, neg_stream: TokenStream,
    vocab_size: int, sample_index: int, master_seed: int,
) -> TokenStream:
    seed = mix64(sample_seed(master_seed, sample_index, _TAG_ATTACK) ^ spec.seed)
    if spec.kind == "copy_paste":
        return copy_paste(wm_stream, neg_stream, spec.p, seed, spec.fragments)
    return token_edit(
        wm_stream,
        spec.substitution_rate,
        spec.insertion_rate,
        spec.deletion_rate,
        vocab_size,
        seed,
    )


def run_sample(cfg: ExperimentConfig, index: int) -> SampleRecord:
    """Generate, attack, decode and score one fully seeded sample."""
    try:
        return _run_sample_inner(cfg, index)
    except Exception as exc:  # per-sample failures must not kill the batch
        return SampleRecord(
            index=index, message=None, predicted=None, unrecoverable=False,
            bit_accuracy=None, exact_match=None, list_best_accuracy=None,
            colorlisted=0, total=0, z_score=0.0, p_value=1.0,
            negative={}, error=f"{type(exc).__name__}: {exc}",
        )


def _run_sample_inner(cfg: ExperimentConfig, index: int) -> SampleRecord:
    wm_cfg = cfg.wm
    zero_bit = wm_cfg.scheme is Scheme.GREENLIST
    msg_rng = np.random.Generator(
        np.random.Philox(key=sample_seed(cfg.master_seed, index, _TAG_MSG))
    )
    message = None if zero_bit else Message.random(wm_cfg.bit_width, wm_cfg.radix, msg_rng)

    lm_wm = dataclasses.replace(cfg.lm, seed=sample_seed(cfg.master_seed, index, _TAG_LMWM))
    lm_neg = dataclasses.replace(cfg.lm, seed=sample_seed(cfg.master_seed, index, _TAG_LMNEG))
    prompt_wm = default_prompt(lm_wm, cfg.prompt_len)
    prompt_neg = default_prompt(lm_neg, cfg.prompt_len)

    t0 = time.perf_counter()
    wm_stream = generate(lm_wm, wm_cfg, message, cfg.token_length, prompt_wm)
    encode_seconds = time.perf_counter() - t0
    neg_stream = generate(lm_neg, None, None, cfg.token_length, prompt_neg)

    if cfg.attack is not None:
        wm_stream = _apply_attack(
            cfg.attack, wm_stream, neg_stream, wm_cfg.vocab_size, index, cfg.master_seed
        )

    t0 = time.perf_counter()
    result = decode(wm_stream, wm_cfg)
    decode_seconds = time.perf_counter() - t0
    detection = detect_from_decode(result, wm_cfg)
    neg_result = decode(neg_stream, wm_cfg)
    neg_detection = detect_from_decode(neg_result, wm_cfg)

    acc = None
    exact = None
    list_best = None
    if message is not None:
        if result.predicted is None:
            acc = 0.0
            exact = False
        else:
            acc = bit_accuracy(message.bits, result.predicted.bits)
            exact = result.predicted.bits == message.bits
        if cfg.list_size > 1 and result.count_matrix is not None and not zero_bit:
            candidates = list_decode(result.count_matrix, wm_cfg, cfg.list_size)
            if len(candidates):
                list_best = candidates.best_accuracy(message.bits)
            else:
                list_best = acc
    return SampleRecord(
        index=index,
        message=message.bits if message is not None else None,
        predicted=result.predicted.bits if result.predicted is not None else None,
        unrecoverable=(message is not None and result.predicted is None),
        bit_accuracy=acc,
        exact_match=exact,
        list_best_accuracy=list_best,
        colorlisted=detection.colorlisted,
        total=detection.total,
        z_score=detection.z_score,
        p_value=detection.p_value,
        negative={
            "colorlisted": neg_detection.colorlisted,
            "total": neg_detection.total,
            "z_score": neg_detection.z_score,
            "p_value": neg_detection.p_value,
        },
        encode_seconds=encode_seconds,
        decode_seconds=decode_seconds,
    )


def _run_sample_star(args) -> SampleRecord:
    return run_sample(*args)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run all samples, aggregate, and (optionally) write jsonl + summary."""
    indices = list(range(cfg.samples))
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(_run_sample_star, [(cfg, i) for i in indices]))
    else:
        records = [run_sample(cfg, i) for i in indices]
    aggregates = aggregate_records(records, zero_bit=cfg.wm.scheme is Scheme.GREENLIST)
    report = ExperimentReport(config=cfg, records=records, aggregates=aggregates)
    if cfg.output_path is not None:
        write_report(report, cfg.output_path)
    return report


def aggregate_records(records: list[SampleRecord], zero_bit: bool = False) -> dict:
    ok = [r for r in records if r.error is None]
    agg: dict = {
        "samples": len(records),
        "failed_samples": len(records) - len(ok),
    }
    accs = [r.bit_accuracy for r in ok if r.bit_accuracy is not None]
    if accs:
        agg["bit_accuracy_mean"] = float(np.mean(accs))
        agg["bit_accuracy_std"] = float(np.std(accs))
        agg["packet_error"] = packet_error(ok)
    lists = [r.list_best_accuracy for r in ok if r.list_best_accuracy is not None]
    if lists:
        agg["list_best_accuracy_mean"] = float(np.mean(lists))
    if ok:
        pos = [r.z_score for r in ok]
        neg = [r.negative["z_score"] for r in ok if r.negative]
        agg["z_mean_watermarked"] = float(np.mean(pos))
        if neg:
            agg["z_mean_negative"] = float(np.mean(neg))
            roc = roc_metrics(pos, neg)
            agg["auroc"] = roc.auroc
            agg["tpr_at_fpr"] = {str(k): v for k, v in roc.tpr_at_fpr.items()}
            agg["tpr_interpolated"] = {str(k): v for k, v in roc.interpolated.items()}
        agg["encode_seconds_mean"] = float(np.mean([r.encode_seconds for r in ok]))
        agg["decode_seconds_mean"] = float(np.mean([r.decode_seconds for r in ok]))
    return agg


def packet_error(records: list[SampleRecord]) -> float:
    """Fraction of samples whose full message was not recovered exactly."""
    scored = [r for r in records if r.error is None and r.message is not None]
    if not scored:
        raise ValueError("packet_error needs at least one scored record")
    wrong = sum(1 for r in scored if not r.exact_match)
    return wrong / len(scored)


def write_report(report: ExperimentReport, output_path: str) -> tuple[Path, Path]:
    base = Path(output_path)
    base.parent.mkdir(parents=True, exist_ok=True)
    jsonl = base.with_suffix(".jsonl")
    summary = base.with_suffix(".summary.json")
    with jsonl.open("w") as fh:
        for record in report.records:
            fh.write(json.dumps(record.to_json_dict(), sort_keys=True,
                                separators=(",", ":")) + "\n")
    with summary.open("w") as fh:
        json.dump(report.summary_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    return jsonl, summary


def latency_profile(
    lm_cfg: SyntheticLMConfig,
    wm_cfg: WatermarkConfig,
    bit_widths: list[int],
    token_length: int = 250,
    runs: int = 50,
) -> dict:
    """Median encode/decode wall-clock per bit width, with ratios to the
    smallest width; identical LM seeds are used across widths."""
    if not bit_widths:
        raise ValueError("bit_widths must be non-empty")
    out: dict = {"bit_widths": list(bit_widths), "runs": runs, "per_bit": {}}
    for b in bit_widths:
        cfg_b = wm_cfg.replace(bit_width=b)
        enc_times = []
        dec_times = []
        rng = np.random.Generator(np.random.Philox(key=4242))
        for run in range(runs):
            lm_run = dataclasses.replace(lm_cfg, seed=mix64(1000 + run))
            message = Message.random(b, cfg_b.radix, rng)
            prompt = default_prompt(lm_run)
            t0 = time.perf_counter()
            stream = generate(lm_run, cfg_b, message, token_length, prompt)
            enc_times.append(time.perf_counter() - t0)
            t0 = time.perf_counter()
            decode(stream, cfg_b)
            dec_times.append(time.perf_counter() - t0)
        out["per_bit"][b] = {
            "encode_median_seconds": statistics.median(enc_times),
            "decode_median_seconds": statistics.median(dec_times),
        }
    base = min(bit_widths)
    base_enc = out["per_bit"][base]["encode_median_seconds"]
    base_dec = out["per_bit"][base]["decode_median_seconds"]
    out["encode_ratio_to_smallest"] = {
        b: out["per_bit"][b]["encode_median_seconds"] / base_enc for b in bit_widths
    }
    out["decode_ratio_to_smallest"] = {
        b: out["per_bit"][b]["decode_median_seconds"] / base_dec for b in bit_widths
    }
    return out


def auc_vs_tokens(cfg: ExperimentConfig, token_grid: list[int]) -> list[dict]:
    """Detection AUROC as a function of tokens observed.

    Streams are generated once at the largest grid value; each grid point
    decodes a truncated prefix of the same streams.
    """
    if not token_grid:
        raise ValueError("token_grid must be non-empty")
    horizon = max(token_grid)
    pos_streams = []
    neg_streams = []
    for index in range(cfg.samples):
        lm_wm = dataclasses.replace(
            cfg.lm, seed=sample_seed(cfg.master_seed, index, _TAG_LMWM))
        lm_neg = dataclasses.replace(
            cfg.lm, seed=sample_seed(cfg.master_seed, index, _TAG_LMNEG))
        msg_rng = np.random.Generator(
            np.random.Philox(key=sample_seed(cfg.master_seed, index, _TAG_MSG)))
        zero_bit = cfg.wm.scheme is Scheme.GREENLIST
        message = None if zero_bit else Message.random(cfg.wm.bit_width, cfg.wm.radix, msg_rng)
        pos_streams.append(
            generate(lm_wm, cfg.wm, message, horizon, default_prompt(lm_wm, cfg.prompt_len)))
        neg_streams.append(
            generate(lm_neg, None, None, horizon, default_prompt(lm_neg, cfg.prompt_len)))
    rows = []
    for t in token_grid:
        pos_z = []
        neg_z = []
        for stream in pos_streams:
            prefix = TokenStream(stream.tokens[: stream.prompt_len + t], stream.prompt_len)
            pos_z.append(detect_from_decode(decode(prefix, cfg.wm), cfg.wm).z_score)
        for stream in neg_streams:
            prefix = TokenStream(stream.tokens[: stream.prompt_len + t], stream.prompt_len)
            neg_z.append(detect_from_decode(decode(prefix, cfg.wm), cfg.wm).z_score)
        rows.append({
            "tokens_observed": t,
            "auroc": roc_metrics(pos_z, neg_z).auroc,
        })
    return rows


# ---------------------------------------------------------------------------
# config file (INI sections lm / wm / attack / run) and serialization helpers

def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = {
        "lm": dataclasses.asdict(cfg.lm),
        "wm": cfg.wm.get_params(),
        "run": {
            "samples": cfg.samples,
            "token_length": cfg.token_length,
            "list_size": cfg.list_size,
            "output_path": cfg.output_path,
            "master_seed": cfg.master_seed,
            "jobs": cfg.jobs,
            "prompt_len": cfg.prompt_len,
        },
    }
    out["attack"] = dataclasses.asdict(cfg.attack) if cfg.attack else None
    return out


_LM_PARSERS = {
    "vocab_size": int,
    "entropy_spread": float,
    "temperature": float,
    "seed": lambda s: int(s, 0),
}
_ATTACK_PARSERS = {
    "kind": str,
    "p": float,
    "fragments": int,
    "substitution_rate": float,
    "insertion_rate": float,
    "deletion_rate": float,
    "seed": lambda s: int(s, 0),
}
_RUN_PARSERS = {
    "samples": int,
    "token_length": int,
    "list_size": int,
    "output_path": str,
    "master_seed": lambda s: int(s, 0),
    "jobs": int,
    "prompt_len": int,
}


def _parse_section(section, parsers: dict, what: str) -> dict:
    out = {}
    for key, raw in section.items():
        if key not in parsers:
            raise ValueError(f"unknown key {key!r} in [{what}] section")
        out[key] = parsers[key](raw)
    return out


def load_experiment_config(path: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Parse the INI config; ``overrides`` maps section -> {key: value}."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError(f"config file not found or unreadable: {path}")
    merged: dict[str, dict] = {"lm": {}, "wm": {}, "attack": {}, "run": {}}
    for section in parser.sections():
        if section not in merged:
            raise ValueError(f"unknown config section [{section}]")
        merged[section].update(parser[section])
    for section, kv in (overrides or {}).items():
        merged[section].update({k: str(v) for k, v in kv.items() if v is not None})

    lm_kwargs = _parse_section(merged["lm"], _LM_PARSERS, "lm")
    lm = SyntheticLMConfig(**lm_kwargs)

    from .config import _FIELD_PARSERS as wm_parsers

    wm_kwargs = _parse_section(merged["wm"], wm_parsers, "wm")
    if "secret_key" not in wm_kwargs:
        wm_kwargs["secret_key"] = secret_key_from_env()
    wm_kwargs.setdefault("vocab_size", lm.vocab_size)
    wm = WatermarkConfig(**wm_kwargs)

    attack = None
    if merged["attack"]:
        attack = AttackSpec(**_parse_section(merged["attack"], _ATTACK_PARSERS, "attack"))

    run_kwargs = _parse_section(merged["run"], _RUN_PARSERS, "run")
    return ExperimentConfig(lm=lm, wm=wm, attack=attack, **run_kwargs)


def wm_config_hash(cfg: WatermarkConfig) -> str:
    return hashlib.sha256(cfg.to_kv_text().encode()).hexdigest()[:12]


def stream_to_json_dict(stream: TokenStream, cfg: WatermarkConfig,
                        message: Optional[Message]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tokens": list(stream.tokens),
        "prompt_len": stream.prompt_len,
        "message": message.bits if message is not None else None,
        "config_hash": wm_config_hash(cfg),
    }


def stream_from_json_dict(record: dict) -> TokenStream:
    return TokenStream(tokens=tuple(record["tokens"]), prompt_len=record["prompt_len"])


def decode_result_to_json_dict(result: DecodeResult) -> dict:
    matrix = result.count_matrix
    return {
        "schema_version": SCHEMA_VERSION,
        "counts": matrix.counts.tolist() if matrix is not None else None,
        "trials": matrix.trials.tolist() if matrix is not None else None,
        "predicted": result.predicted.bits if result.predicted is not None else None,
        "digits": list(result.predicted_digits) if result.predicted_digits else None,
        "colorlisted": result.colorlisted,
        "total": result.total,
        "confidences": list(result.confidences),
    }
