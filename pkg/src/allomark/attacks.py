"""Corruption procedures applied to published token streams before decoding.

Attacks operate on the generated (published) part of a stream and return a
stream with ``prompt_len`` 0: the attacked text is scored from its own start
once a full hash context is available.  Both attacks are deterministic given
their seed.
"""

from __future__ import annotations

import math

import numpy as np

from .types import TokenStream


def copy_paste(
    watermarked: TokenStream,
    human: TokenStream,
    p: float,
    seed: int,
    fragments: int = 1,
) -> TokenStream:
    """Replace a p-fraction of the watermarked text with human tokens.

    The output keeps the original length T: ceil((1-p)*T) watermarked tokens
    survive as ``fragments`` contiguous spans inserted at uniformly random
    offsets into human tokens truncated to fill the remainder.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if fragments < 1:
        raise ValueError(f"fragments must be >= 1, got {fragments}")
    wm = list(watermarked.generated)
    total = len(wm)
    if total == 0:
        raise ValueError("watermarked stream has no generated tokens")
    n_wm = math.ceil((1.0 - p) * total)
    n_human = total - n_wm
    human_pool = list(human.generated)
    if len(human_pool) < n_human:
        raise ValueError(
            f"need {n_human} human tokens to fill, stream provides {len(human_pool)}"
        )
    rng = np.random.Generator(np.random.Philox(key=seed))
    filler = human_pool[:n_human]
    if n_wm == 0:
        return TokenStream(tokens=tuple(filler), prompt_len=0)
    kept = wm[:n_wm]
    n_frag = min(fragments, n_wm)
    bounds = [(i * n_wm) // n_frag for i in range(n_frag + 1)]
    chunks = [kept[bounds[i]:bounds[i + 1]] for i in range(n_frag)]
    offsets = sorted(int(o) for o in rng.integers(0, n_human + 1, size=n_frag))
    out: list[int] = []
    prev = 0
    for chunk, off in zip(chunks, offsets):
        out.extend(filler[prev:off])
        out.extend(chunk)
        prev = off
    out.extend(filler[prev:])
    return TokenStream(tokens=tuple(out), prompt_len=0)


def token_edit(
    stream: TokenStream,
    substitution_rate: float,
    insertion_rate: float,
    deletion_rate: float,
    vocab_size: int,
    seed: int,
) -> TokenStream:
    """Independent per-token substitution / deletion / insertion edits."""
    rates = (substitution_rate, insertion_rate, deletion_rate)
    if any(r < 0.0 or r > 1.0 for r in rates):
        raise ValueError(f"rates must be in [0, 1], got {rates}")
    if sum(rates) > 1.0 + 1e-12:
        raise ValueError(f"rates sum to {sum(rates)}, must be <= 1")
    if vocab_size < 1:
        raise ValueError(f"vocab_size must be >= 1, got {vocab_size}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    out: list[int] = []
    s, ins, d = substitution_rate, insertion_rate, deletion_rate
    for tok in stream.generated:
        u = rng.random()
        if u < s:
            out.append(int(rng.integers(0, vocab_size)))
        elif u < s + d:
            continue
        elif u < s + d + ins:
            out.append(tok)
            out.append(int(rng.integers(0, vocab_size)))
        else:
            out.append(tok)
    return TokenStream(tokens=tuple(out), prompt_len=0)
