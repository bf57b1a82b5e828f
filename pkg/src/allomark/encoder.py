"""Per-step message encoding: logit biasing and sampling transforms.

Every operation here is a pure function of (logits, context, message,
config) — plus the caller-owned running counter in feedback mode — and
returns a fresh logit array.  The per-step transform is the stable boundary
for host generation pipelines: no state is retained between calls.
"""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

import numpy as np

from .config import Scheme, WatermarkConfig
from .messages import Message
from .prf import hash_context, permute_vocab, sample_position, secret_vector
from .rng import MASK64, mix64
from .types import CountMatrix


class CapacityExceededError(ValueError):
    """Message value too large for the scheme's vocabulary-bounded capacity."""


class BiasStep(NamedTuple):
    logits: np.ndarray
    position: int
    color: int


def _step_seed(context: Sequence[int], cfg: WatermarkConfig) -> int:
    if len(context) < cfg.context_width:
        raise ValueError(
            f"context of length {len(context)} shorter than h={cfg.context_width}"
        )
    return hash_context(list(context)[-cfg.context_width:], cfg.secret_key)


def _as_logits(logits, cfg: WatermarkConfig) -> np.ndarray:
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != cfg.vocab_size:
        raise ValueError(
            f"logits must be a length-{cfg.vocab_size} vector, got shape {arr.shape}"
        )
    return arr.copy()


def _check_message(message: Message, cfg: WatermarkConfig) -> None:
    if message.bit_width != cfg.bit_width:
        raise ValueError(
            f"message has {message.bit_width} bits, config expects {cfg.bit_width}"
        )


def position_alloc_bias(
    logits, context: Sequence[int], message: Message, cfg: WatermarkConfig
) -> BiasStep:
    """Bias the colorlist selected by the digit at this step's position.

    Exactly floor(gamma*|V|) logits gain delta; the allocated position and
    chosen colorlist are returned for instrumentation.
    """
    _check_message(message, cfg)
    out = _as_logits(logits, cfg)
    seed = _step_seed(context, cfg)
    pos = sample_position(seed, cfg.effective_length)
    color = message.digits[pos]
    if cfg.delta != 0.0:
        perm = permute_vocab(seed, cfg.vocab_size)
        k = cfg.greenlist_size
        out[perm[color * k:(color + 1) * k]] += cfg.delta
    return BiasStep(out, pos, color)


def greenlist_bias(logits, context: Sequence[int], cfg: WatermarkConfig) -> np.ndarray:
    """Zero-bit scheme: bias the first floor(gamma*|V|) tokens of the permutation."""
    out = _as_logits(logits, cfg)
    if cfg.delta != 0.0:
        seed = _step_seed(context, cfg)
        perm = permute_vocab(seed, cfg.vocab_size)
        out[perm[:cfg.greenlist_size]] += cfg.delta
    return out


def cyclic_shift_bias(
    logits, context: Sequence[int], message: Message, cfg: WatermarkConfig
) -> np.ndarray:
    """Rotate the permuted vocabulary by the message value, bias the head.

    Capacity is bounded by the vocabulary: rotations are only unique up to
    |V|, so values >= |V| are rejected rather than aliased.
    """
    _check_message(message, cfg)
    return _cyclic_bias_value(logits, context, message.value, cfg)


def _cyclic_bias_value(logits, context, value: int, cfg: WatermarkConfig) -> np.ndarray:
    if value >= cfg.vocab_size:
        raise CapacityExceededError(
            f"message value {value} >= vocab size {cfg.vocab_size}"
        )
    out = _as_logits(logits, cfg)
    if cfg.delta != 0.0:
        seed = _step_seed(context, cfg)
        perm = permute_vocab(seed, cfg.vocab_size)
        idx = (np.arange(cfg.greenlist_size) + value) % cfg.vocab_size
        out[perm[idx]] += cfg.delta
    return out


def message_hash_seed(seed: int, value: int) -> int:
    """Final seed: mix(seed + mix(message value)), addition modulo 2^64."""
    return mix64((seed + mix64(value)) & MASK64)


def message_hash_bias(
    logits, context: Sequence[int], message: Message, cfg: WatermarkConfig
) -> np.ndarray:
    """Greenlist selection under a seed rehashed with the whole message value."""
    _check_message(message, cfg)
    out = _as_logits(logits, cfg)
    if cfg.delta != 0.0:
        seed = message_hash_seed(_step_seed(context, cfg), message.value)
        perm = permute_vocab(seed, cfg.vocab_size)
        out[perm[:cfg.greenlist_size]] += cfg.delta
    return out


def split_blocks(bits: str, block_count: int) -> list[int]:
    """Chunk a bit string into block values, zero-padding the leading block."""
    width = -(-len(bits) // block_count)  # ceil
    padded = bits.zfill(width * block_count)
    return [int(padded[i * width:(i + 1) * width], 2) for i in range(block_count)]


def block_alloc_bias(
    logits, context: Sequence[int], message: Message, cfg: WatermarkConfig
) -> BiasStep:
    """Allocate the step to one message block, then cyclic-shift with its value."""
    _check_message(message, cfg)
    blocks = split_blocks(message.bits, cfg.block_count)
    for b in blocks:
        if b >= cfg.vocab_size:
            raise CapacityExceededError(
                f"block value {b} >= vocab size {cfg.vocab_size}"
            )
    seed = _step_seed(context, cfg)
    pos = sample_position(seed, cfg.block_count)
    out = _cyclic_bias_value(logits, context, blocks[pos], cfg)
    return BiasStep(out, pos, blocks[pos])


def ems_sample(
    probabilities, context: Sequence[int], message: Message, cfg: WatermarkConfig
) -> int:
    """Exponential-minimum sampling keyed by the digit at the step's position.

    Draws nothing: the token is argmax_v r_v**(1/p_v) with the secret vector
    flipped to 1-r when the digit is 1.  Zero-probability tokens are excluded
    (their score limit is 0).
    """
    _check_message(message, cfg)
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.ndim != 1 or probs.shape[0] != cfg.vocab_size:
        raise ValueError(
            f"probabilities must be a length-{cfg.vocab_size} vector, got {probs.shape}"
        )
    if (probs < 0).any():
        raise ValueError("probabilities must be non-negative")
    total = float(probs.sum())
    if total == 0.0:
        raise ValueError("all-zero probability vector")
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total!r}, not 1 within 1e-9")
    seed = _step_seed(context, cfg)
    pos = sample_position(seed, cfg.effective_length)
    secrets = secret_vector(seed, cfg.vocab_size)
    if message.digits[pos] == 1:
        secrets = 1.0 - secrets
    return ems_argmax(secrets, probs)


def ems_argmax(secrets: np.ndarray, probabilities: np.ndarray) -> int:
    """argmax_v secrets_v ** (1 / p_v), scored as log(secrets)/p in log space."""
    with np.errstate(divide="ignore"):
        scores = np.where(probabilities > 0.0, np.log(secrets) / probabilities, -np.inf)
    return int(np.argmax(scores))


def feedback_bias(
    logits,
    context: Sequence[int],
    message: Message,
    cfg: WatermarkConfig,
    running: CountMatrix,
) -> BiasStep:
    """Position-allocation bias with a larger magnitude while the running
    decode disagrees at this step's position (ties count as disagreement)."""
    if cfg.feedback_delta is None:
        raise ValueError("feedback_bias requires feedback_delta in the config")
    _check_message(message, cfg)
    out = _as_logits(logits, cfg)
    seed = _step_seed(context, cfg)
    pos = sample_position(seed, cfg.effective_length)
    color = message.digits[pos]
    row = running.counts[pos]
    top = row.max()
    agreed = row[color] == top and int((row == top).sum()) == 1
    delta = cfg.delta if agreed else cfg.feedback_delta
    if delta != 0.0:
        perm = permute_vocab(seed, cfg.vocab_size)
        k = cfg.greenlist_size
        out[perm[color * k:(color + 1) * k]] += delta
    return BiasStep(out, pos, color)


def bias_step(
    logits,
    context: Sequence[int],
    message: Optional[Message],
    cfg: WatermarkConfig,
    running: Optional[CountMatrix] = None,
) -> np.ndarray:
    """Scheme dispatcher for logit-bias encoders (not the sampling scheme)."""
    if cfg.scheme is Scheme.GREENLIST:
        return greenlist_bias(logits, context, cfg)
    if message is None:
        raise ValueError(f"scheme {cfg.scheme} requires a message")
    if cfg.scheme is Scheme.POSITION_ALLOC:
        if cfg.feedback_delta is not None and running is not None:
            return feedback_bias(logits, context, message, cfg, running).logits
        return position_alloc_bias(logits, context, message, cfg).logits
    if cfg.scheme is Scheme.CYCLIC_SHIFT:
        return cyclic_shift_bias(logits, context, message, cfg)
    if cfg.scheme is Scheme.MESSAGE_HASH:
        return message_hash_bias(logits, context, message, cfg)
    if cfg.scheme is Scheme.BLOCK_ALLOC:
        return block_alloc_bias(logits, context, message, cfg).logits
    raise ValueError(f"scheme {cfg.scheme} does not bias logits")
