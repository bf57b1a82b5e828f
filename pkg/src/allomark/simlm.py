"""Synthetic autoregressive token source with a controllable entropy knob.

Stands in for a neural language model at desk scale: per-step logits are
i.i.d. Gaussian with spread sigma, drawn deterministically from (lm seed,
step, previous token).  sigma = 0 gives the uniform (maximum entropy)
distribution; large sigma concentrates mass on a few tokens, which is the
regime where a fixed logit bias stops dominating the sample.

Language-model randomness, watermark hashing, and the sampling draw each use
an independent generator stream, so the three can be varied in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import Scheme, WatermarkConfig
from .encoder import bias_step, ems_sample, feedback_bias
from .messages import Message
from .prf import color_of_rank, hash_context, sample_position, token_rank
from .rng import MASK64, SAMPLING_TAG, mix64
from .types import CountMatrix, TokenStream


@dataclass(frozen=True)
class SyntheticLMConfig:
    vocab_size: int = 1024
    entropy_spread: float = 1.0
    temperature: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.vocab_size < 2:
            raise ValueError(f"vocab_size must be >= 2, got {self.vocab_size}")
        if self.entropy_spread < 0.0:
            raise ValueError(f"entropy_spread must be >= 0, got {self.entropy_spread}")
        if self.temperature <= 0.0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")


class SyntheticLM:
    """Deterministic per-step logit source; independent of watermark state."""

    def __init__(self, cfg: SyntheticLMConfig):
        self.cfg = cfg

    def next_logits(self, step: int, prev_token: int) -> np.ndarray:
        cfg = self.cfg
        if cfg.entropy_spread == 0.0:
            return np.zeros(cfg.vocab_size)
        key = (cfg.seed & MASK64) | (mix64(step ^ mix64(prev_token)) << 64)
        rng = np.random.Generator(np.random.Philox(key=key))
        return rng.standard_normal(cfg.vocab_size) * cfg.entropy_spread


def default_prompt(lm_cfg: SyntheticLMConfig, length: int = 8) -> tuple[int, ...]:
    """Fixed prompt ids derived from the LM seed (prompts are never scored)."""
    rng = np.random.Generator(np.random.Philox(key=mix64(lm_cfg.seed ^ 0x70726F6D70742121)))
    return tuple(int(t) for t in rng.integers(0, lm_cfg.vocab_size, size=length))


def generate(
    lm_cfg: SyntheticLMConfig,
    wm_cfg: Optional[WatermarkConfig],
    message: Optional[Message],
    length: int,
    prompt: Sequence[int],
) -> TokenStream:
    """Autoregressive loop applying the configured per-step encoder.

    A watermark is applied when ``wm_cfg`` is given and either a message is
    supplied or the scheme is the zero-bit greenlist; ``message=None`` with
    no scheme produces a plain (human-proxy) stream.  Identical inputs yield
    identical streams.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    prompt = [int(t) for t in prompt]
    if not prompt:
        raise ValueError("prompt must contain at least one token id")
    watermarking = wm_cfg is not None and (
        message is not None or wm_cfg.scheme is Scheme.GREENLIST
    )
    if watermarking:
        if wm_cfg.vocab_size != lm_cfg.vocab_size:
            raise ValueError("watermark and LM vocabulary sizes disagree")
        if lm_cfg.vocab_size < 2 * wm_cfg.radix:
            raise ValueError("vocabulary too small: need |V| >= 2r")
        if len(prompt) < wm_cfg.context_width:
            raise ValueError(
                f"prompt of {len(prompt)} shorter than context width {wm_cfg.context_width}"
            )
        if message is not None and message.bit_width != wm_cfg.bit_width:
            raise ValueError("message width disagrees with config bit width")
    lm = SyntheticLM(lm_cfg)
    sampler = np.random.Generator(
        np.random.Philox(key=mix64(lm_cfg.seed ^ SAMPLING_TAG))
    )
    feedback = (
        watermarking
        and wm_cfg.scheme is Scheme.POSITION_ALLOC
        and wm_cfg.feedback_delta is not None
        and message is not None
    )
    running = CountMatrix.zeros(wm_cfg.effective_length, wm_cfg.radix) if feedback else None
    tokens = list(prompt)
    h = wm_cfg.context_width if watermarking else 1
    for step in range(length):
        logits = lm.next_logits(step, tokens[-1])
        context = tokens[-h:]
        if watermarking and wm_cfg.scheme is Scheme.EMS:
            probs = _softmax(logits / lm_cfg.temperature)
            tok = ems_sample(probs, context, message, wm_cfg)
        else:
            if feedback:
                logits = feedback_bias(logits, context, message, wm_cfg, running).logits
            elif watermarking:
                logits = bias_step(logits, context, message, wm_cfg)
            tok = _sample(logits / lm_cfg.temperature, sampler)
        if feedback:
            _update_running(running, context, tok, wm_cfg)
        tokens.append(int(tok))
    return TokenStream(tokens=tuple(tokens), prompt_len=len(prompt))


def _softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max()
    e = np.exp(shifted)
    return e / e.sum()


def _sample(x: np.ndarray, rng: np.random.Generator) -> int:
    shifted = x - x.max()
    weights = np.exp(shifted)
    cum = np.cumsum(weights)
    u = rng.random() * cum[-1]
    return min(int(np.searchsorted(cum, u, side="right")), len(cum) - 1)


def _update_running(
    running: CountMatrix, context: Sequence[int], tok: int, cfg: WatermarkConfig
) -> None:
    """Decoder-view update of the feedback counter for the sampled token."""
    seed = hash_context(context, cfg.secret_key)
    pos = sample_position(seed, cfg.effective_length)
    running.trials[pos] += 1
    rank = token_rank(seed, cfg.vocab_size, tok)
    color = color_of_rank(rank, cfg.greenlist_size, cfg.radix)
    if color is not None:
        running.counts[pos, color] += 1
