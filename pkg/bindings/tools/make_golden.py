"""Generate golden parity cases from the reference implementation.

Each entry point gets 100 cases. Decode/detect expectations are the
reference decoder's outputs mapped through the binding's documented
empty-input rule: when nothing was scored (total == 0) the binding reports
bits = null and no confidences instead of the degenerate all-zeros message.

Run from this directory with the primary package installed:
    python tools/make_golden.py
"""

import dataclasses
import json
from pathlib import Path

import numpy as np

from allomark import (
    Message,
    Scheme,
    SyntheticLMConfig,
    TokenStream,
    WatermarkConfig,
    decode,
    default_prompt,
    detect_from_decode,
    generate,
    position_alloc_bias,
)

OUT = Path(__file__).resolve().parent.parent / "golden"
RNG = np.random.Generator(np.random.Philox(key=0xB1AD))


def _random_wm(scheme=Scheme.POSITION_ALLOC, vocab=None, bit_width=None):
    gamma, radix = [(0.5, 2), (0.25, 4), (0.25, 2), (0.125, 8), (0.125, 4)][
        int(RNG.integers(0, 5))
    ]
    return WatermarkConfig(
        gamma=gamma,
        delta=float(RNG.choice([0.0, 0.5, 2.0, 8.0])),
        radix=radix,
        bit_width=int(bit_width if bit_width is not None else RNG.choice([1, 3, 4, 8, 13, 16])),
        context_width=int(RNG.choice([1, 1, 2, 3])),
        secret_key=int(RNG.integers(0, 2**63)),
        vocab_size=int(vocab if vocab is not None else RNG.choice([32, 64, 96, 128])),
        scheme=scheme,
        unique_tokens_only=bool(RNG.integers(0, 4) == 0),
    )


def bias_cases(n=100):
    cases = []
    for _ in range(n):
        cfg = _random_wm()
        logits = RNG.standard_normal(cfg.vocab_size)
        ctx_len = cfg.context_width + int(RNG.integers(0, 3))
        context = [int(t) for t in RNG.integers(0, cfg.vocab_size, ctx_len)]
        message = Message.random(cfg.bit_width, cfg.radix, RNG)
        step = position_alloc_bias(logits, context, message, cfg)
        cases.append({
            "config": cfg.to_kv_text(),
            "context": context,
            "logits": logits.tolist(),
            "message": message.bits,
            "expected": {
                "logits": step.logits.tolist(),
                "position": step.position,
                "color": step.color,
            },
        })
    return cases


def _stream_tokens(cfg, message, length):
    lm = SyntheticLMConfig(
        vocab_size=cfg.vocab_size,
        entropy_spread=float(RNG.choice([0.0, 1.0, 4.0])),
        seed=int(RNG.integers(0, 2**62)),
    )
    stream = generate(lm, cfg if message is not None or cfg.scheme is Scheme.GREENLIST
                      else None, message, length, default_prompt(lm, max(cfg.context_width, 2)))
    return list(stream.tokens)


def decode_expected(tokens, cfg):
    result = decode(TokenStream(tuple(tokens), 0), cfg)
    detection = detect_from_decode(result, cfg)
    if result.total == 0:
        bits, confidences = None, []
    elif cfg.scheme is Scheme.GREENLIST:
        bits, confidences = None, []
    else:
        bits = result.predicted.bits if result.predicted is not None else None
        confidences = list(result.confidences)
    return {
        "bits": bits,
        "colorlisted": result.colorlisted,
        "total": result.total,
        "z_score": detection.z_score,
        "p_value": detection.p_value,
        "confidences": confidences,
    }


def decode_cases(n=100):
    cases = []
    for i in range(n):
        if i == 0:
            cfg = _random_wm()
            tokens = []  # nothing scorable
        elif i == 1:
            cfg = _random_wm()
            tokens = [int(RNG.integers(0, cfg.vocab_size))
                      for _ in range(cfg.context_width)]
        elif i % 5 == 4:
            cfg = _random_wm(scheme=Scheme.GREENLIST, bit_width=1)
            message = None
            tokens = _stream_tokens(cfg, message, int(RNG.choice([40, 100])))
        elif i % 7 == 3:
            cfg = _random_wm()  # unwatermarked stream decoded anyway
            tokens = [int(t) for t in RNG.integers(0, cfg.vocab_size,
                                                   int(RNG.choice([30, 80])))]
        else:
            cfg = _random_wm()
            message = Message.random(cfg.bit_width, cfg.radix, RNG)
            tokens = _stream_tokens(cfg, message, int(RNG.choice([30, 80, 150])))
        cases.append({
            "config": cfg.to_kv_text(),
            "tokens": tokens,
            "expected": decode_expected(tokens, cfg),
        })
    return cases


def main():
    OUT.mkdir(exist_ok=True)
    golden = {
        "bias.json": bias_cases(),
        "decode.json": decode_cases(),
        "detect.json": decode_cases(),  # same surface; detect reads (w,T,z,p)
    }
    for name, cases in golden.items():
        path = OUT / name
        path.write_text(json.dumps(cases, indent=1, sort_keys=True) + "\n")
        print(f"wrote {path} ({len(cases)} cases)")


if __name__ == "__main__":
    main()
