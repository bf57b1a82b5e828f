"""Command-line interface.

Subcommands: generate, decode, detect, attack, experiment, separability,
latency, plot-data.  Config files (INI sections [lm]/[wm]/[attack]/[run])
provide defaults; flags override the file.  Exit codes: 0 success, 1 usage
error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .attacks import copy_paste, token_edit
from .config import Scheme, WatermarkConfig, secret_key_from_env
from .decoder import decode
from .detector import detect_from_decode, separability_sim
from .harness import (
    ExperimentConfig,
    decode_result_to_json_dict,
    latency_profile,
    load_experiment_config,
    run_experiment,
    stream_from_json_dict,
    stream_to_json_dict,
    SCHEMA_VERSION,
)
from .messages import Message
from .rng import mix64
from .simlm import SyntheticLMConfig, default_prompt, generate


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we use 1
        raise UsageError(message)


def _add_wm_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("watermark")
    g.add_argument("--scheme", type=Scheme, choices=list(Scheme))
    g.add_argument("--gamma", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--radix", type=int)
    g.add_argument("--bit-width", type=int)
    g.add_argument("--context-width", type=int)
    g.add_argument("--secret-key", type=lambda s: int(s, 0))
    g.add_argument("--vocab-size", type=int)
    g.add_argument("--block-count", type=int)
    g.add_argument("--feedback-delta", type=float)
    g.add_argument("--unique-tokens-only", action="store_true", default=None)


def _add_lm_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("synthetic lm")
    g.add_argument("--entropy-spread", type=float)
    g.add_argument("--temperature", type=float)
    g.add_argument("--lm-seed", type=lambda s: int(s, 0))


def _wm_from_args(args) -> WatermarkConfig:
    kwargs = {}
    mapping = {
        "scheme": args.scheme, "gamma": args.gamma, "delta": args.delta,
        "radix": args.radix, "bit_width": args.bit_width,
        "context_width": args.context_width, "secret_key": args.secret_key,
        "vocab_size": args.vocab_size, "block_count": args.block_count,
        "feedback_delta": args.feedback_delta,
        "unique_tokens_only": args.unique_tokens_only,
    }
    for key, val in mapping.items():
        if val is not None:
            kwargs[key] = val
    kwargs.setdefault("secret_key", secret_key_from_env())
    return WatermarkConfig(**kwargs)


def _lm_from_args(args, vocab_size: int) -> SyntheticLMConfig:
    return SyntheticLMConfig(
        vocab_size=vocab_size,
        entropy_spread=args.entropy_spread if args.entropy_spread is not None else 1.0,
        temperature=args.temperature if args.temperature is not None else 1.0,
        seed=args.lm_seed if args.lm_seed is not None else 0,
    )


def _read_streams(path: str) -> list[dict]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def _write_lines(path: str | None, dicts) -> None:
    lines = [json.dumps(d, sort_keys=True, separators=(",", ":")) for d in dicts]
    if path is None:
        for line in lines:
            print(line)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text("\n".join(lines) + "\n")


def _cmd_generate(args) -> int:
    wm = _wm_from_args(args)
    lm = _lm_from_args(args, wm.vocab_size)
    out = []
    rng = np.random.Generator(np.random.Philox(key=mix64(args.message_seed)))
    for k in range(args.samples):
        lm_k = dataclasses.replace(lm, seed=mix64(lm.seed ^ mix64(k + 1)))
        if wm.scheme is Scheme.GREENLIST or args.no_watermark:
            message = None
        elif args.message is not None:
            message = Message.from_bits(args.message, wm.radix)
        else:
            message = Message.random(wm.bit_width, wm.radix, rng)
        stream = generate(lm_k, None if args.no_watermark else wm, message,
                          args.length, default_prompt(lm_k, args.prompt_len))
        out.append(stream_to_json_dict(stream, wm, message))
    _write_lines(args.out, out)
    return 0


def _cmd_decode(args) -> int:
    wm = _wm_from_args(args)
    results = []
    for record in _read_streams(args.input):
        stream = stream_from_json_dict(record)
        result = decode(stream, wm)
        d = decode_result_to_json_dict(result)
        d["message"] = record.get("message")
        results.append(d)
    _write_lines(args.out, results)
    return 0


def _cmd_detect(args) -> int:
    wm = _wm_from_args(args)
    results = []
    for record in _read_streams(args.input):
        stream = stream_from_json_dict(record)
        detection = detect_from_decode(decode(stream, wm), wm, exact=args.exact)
        results.append({
            "schema_version": SCHEMA_VERSION,
            "colorlisted": detection.colorlisted,
            "total": detection.total,
            "z_score": detection.z_score,
            "p_value": detection.p_value,
        })
    _write_lines(args.out, results)
    return 0


def _cmd_attack(args) -> int:
    streams = [stream_from_json_dict(r) for r in _read_streams(args.input)]
    originals = _read_streams(args.input)
    humans = None
    if args.kind == "copy_paste":
        if args.human is None:
            raise UsageError("copy_paste attack requires --human streams")
        humans = [stream_from_json_dict(r) for r in _read_streams(args.human)]
        if len(humans) < len(streams):
            raise UsageError("fewer human streams than watermarked streams")
    out = []
    for i, stream in enumerate(streams):
        seed = mix64(args.seed ^ mix64(i + 1))
        if args.kind == "copy_paste":
            attacked = copy_paste(stream, humans[i], args.p, seed, args.fragments)
        else:
            attacked = token_edit(stream, args.substitution_rate, args.insertion_rate,
                                  args.deletion_rate, args.vocab_size, seed)
        record = dict(originals[i])
        record["tokens"] = list(attacked.tokens)
        record["prompt_len"] = attacked.prompt_len
        out.append(record)
    _write_lines(args.out, out)
    return 0


def _experiment_overrides(args) -> dict:
    wm_over = {
        "scheme": args.scheme, "gamma": args.gamma, "delta": args.delta,
        "radix": args.radix, "bit_width": args.bit_width,
        "context_width": args.context_width, "secret_key": args.secret_key,
        "vocab_size": args.vocab_size, "block_count": args.block_count,
        "feedback_delta": args.feedback_delta,
        "unique_tokens_only": args.unique_tokens_only,
    }
    lm_over = {
        "entropy_spread": args.entropy_spread, "temperature": args.temperature,
        "seed": args.lm_seed, "vocab_size": args.vocab_size,
    }
    run_over = {
        "samples": args.samples, "token_length": args.token_length,
        "list_size": args.list_size, "master_seed": args.master_seed,
        "output_path": args.out, "jobs": args.jobs,
    }
    return {"wm": wm_over, "lm": lm_over, "run": run_over, "attack": {}}


def _cmd_experiment(args) -> int:
    if args.config is not None:
        cfg = load_experiment_config(args.config, _experiment_overrides(args))
    else:
        wm = _wm_from_args(args)
        lm = _lm_from_args(args, wm.vocab_size)
        cfg = ExperimentConfig(
            lm=lm, wm=wm,
            samples=args.samples or 100,
            token_length=args.token_length or 250,
            list_size=args.list_size or 1,
            master_seed=args.master_seed or 0,
            output_path=args.out,
            jobs=args.jobs or 1,
        )
    report = run_experiment(cfg)
    print(json.dumps(report.summary_dict()["aggregates"], sort_keys=True, indent=2))
    return 0


def _cmd_separability(args) -> int:
    gamma = args.gamma if args.gamma is not None else 0.25
    rows = []
    for positions in args.positions:
        for radix in args.radix_list:
            sim = separability_sim(args.tokens, positions, radix, gamma,
                                   args.epsilon, args.trials, seed=args.seed)
            rows.append({
                "positions": positions,
                "radix": radix,
                "epsilon": args.epsilon,
                "mean_diff": sim.mean_difference,
                "normalized_diff": sim.normalized_difference,
            })
    _write_csv(args.out, rows, ["positions", "radix", "epsilon", "mean_diff",
                                "normalized_diff"])
    return 0


def _cmd_latency(args) -> int:
    wm = _wm_from_args(args)
    lm = _lm_from_args(args, wm.vocab_size)
    profile = latency_profile(lm, wm, args.bit_widths, args.token_length, args.runs)
    print(json.dumps(profile, sort_keys=True, indent=2, default=str))
    return 0


def _cmd_plot_data(args) -> int:
    if args.kind == "bitacc":
        rows = []
        for b in args.bit_widths:
            over = _experiment_overrides(args)
            over["wm"]["bit_width"] = b
            if args.config is not None:
                cfg = load_experiment_config(args.config, over)
            else:
                wm = _wm_from_args(args).replace(bit_width=b)
                lm = _lm_from_args(args, wm.vocab_size)
                cfg = ExperimentConfig(lm=lm, wm=wm, samples=args.samples or 100,
                                       token_length=args.token_length or 250,
                                       list_size=args.list_size or 1,
                                       master_seed=args.master_seed or 0,
                                       jobs=args.jobs or 1)
            agg = run_experiment(dataclasses.replace(cfg, output_path=None)).aggregates
            rows.append({
                "bit_width": b,
                "bit_accuracy_mean": agg.get("bit_accuracy_mean"),
                "bit_accuracy_std": agg.get("bit_accuracy_std"),
                "list_best_accuracy_mean": agg.get("list_best_accuracy_mean"),
                "packet_error": agg.get("packet_error"),
                "auroc": agg.get("auroc"),
            })
        _write_csv(args.out, rows, list(rows[0].keys()))
        return 0
    if args.kind == "auc-at-t":
        from .harness import auc_vs_tokens

        wm = _wm_from_args(args)
        lm = _lm_from_args(args, wm.vocab_size)
        cfg = ExperimentConfig(lm=lm, wm=wm, samples=args.samples or 100,
                               token_length=args.token_length or 250,
                               master_seed=args.master_seed or 0,
                               jobs=args.jobs or 1)
        rows = auc_vs_tokens(cfg, args.token_counts)
        _write_csv(args.out, rows, ["tokens_observed", "auroc"])
        return 0
    # separability table reuses the dedicated command implementation
    return _cmd_separability(args)


def _write_csv(path: str | None, rows: list[dict], fieldnames: list[str]) -> None:
    def emit(fh):
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)

    if path is None:
        emit(sys.stdout)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            emit(fh)


def _int_list(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x]


def build_parser() -> _Parser:
    parser = _Parser(prog="allomark",
                     description="Multi-bit LM watermarking by position allocation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate (optionally watermarked) token streams")
    _add_wm_flags(p)
    _add_lm_flags(p)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--length", type=int, default=250)
    p.add_argument("--prompt-len", type=int, default=8)
    p.add_argument("--message", help="fixed payload bits; default draws random payloads")
    p.add_argument("--message-seed", type=lambda s: int(s, 0), default=0)
    p.add_argument("--no-watermark", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("decode", help="decode messages from token streams")
    _add_wm_flags(p)
    p.add_argument("--input", required=True, help="jsonl stream records")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("detect", help="zero-bit detection on token streams")
    _add_wm_flags(p)
    p.add_argument("--input", required=True)
    p.add_argument("--exact", action="store_true", help="exact binomial tail")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("attack", help="corrupt watermarked streams")
    p.add_argument("--input", required=True)
    p.add_argument("--human", help="jsonl of human streams (copy_paste)")
    p.add_argument("--kind", choices=["copy_paste", "token_edit"], default="copy_paste")
    p.add_argument("--p", type=float, default=0.0, help="human-text fraction")
    p.add_argument("--fragments", type=int, default=1)
    p.add_argument("--substitution-rate", type=float, default=0.0)
    p.add_argument("--insertion-rate", type=float, default=0.0)
    p.add_argument("--deletion-rate", type=float, default=0.0)
    p.add_argument("--vocab-size", type=int, default=1024)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("experiment", help="run a batched watermark experiment")
    _add_wm_flags(p)
    _add_lm_flags(p)
    p.add_argument("--config", help="INI config with [lm]/[wm]/[attack]/[run]")
    p.add_argument("--samples", type=int)
    p.add_argument("--token-length", type=int)
    p.add_argument("--list-size", type=int)
    p.add_argument("--master-seed", type=lambda s: int(s, 0))
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("separability", help="max-cell separability simulation")
    p.add_argument("--tokens", type=int, default=250)
    p.add_argument("--positions", type=_int_list, default=[4, 8, 16])
    p.add_argument("--radix-list", type=_int_list, default=[4])
    p.add_argument("--gamma", type=float, default=0.25)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_separability)

    p = sub.add_parser("latency", help="encode/decode latency across bit widths")
    _add_wm_flags(p)
    _add_lm_flags(p)
    p.add_argument("--bit-widths", type=_int_list, default=[8, 32])
    p.add_argument("--token-length", type=int, default=250)
    p.add_argument("--runs", type=int, default=50)
    p.set_defaults(func=_cmd_latency)

    p = sub.add_parser("plot-data", help="emit plot-ready CSV tables")
    _add_wm_flags(p)
    _add_lm_flags(p)
    p.add_argument("--kind", choices=["bitacc", "auc-at-t", "separability"],
                   required=True)
    p.add_argument("--config")
    p.add_argument("--samples", type=int)
    p.add_argument("--token-length", type=int)
    p.add_argument("--list-size", type=int)
    p.add_argument("--master-seed", type=lambda s: int(s, 0))
    p.add_argument("--jobs", type=int)
    p.add_argument("--bit-widths", type=_int_list, default=[8, 16, 24, 32])
    p.add_argument("--token-counts", type=_int_list, default=[25, 50, 100, 150, 200, 250])
    p.add_argument("--tokens", type=int, default=250)
    p.add_argument("--positions", type=_int_list, default=[4, 8, 16])
    p.add_argument("--radix-list", type=_int_list, default=[4])
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_plot_data)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
