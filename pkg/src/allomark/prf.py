"""Keyed context hashing, position sampling, and vocabulary partitioning.

The seed for a token step is an additive hash of the previous ``h`` token
ids: the ids are summed modulo 2^64 (order-invariant within the window),
XORed with the secret key, and passed through the SplitMix64 mixer.  All
downstream draws come from tagged substreams of that seed (see
:mod:`allomark.rng`).
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from . import kernels
from .rng import (
    MASK64,
    PERMUTE_TAG,
    POSITION_TAG,
    SECRET_TAG,
    Xoshiro256StarStar,
    mix64,
    substream_seed,
)


def hash_context(context: Sequence[int], key: int) -> int:
    """Seed for a step from the last ``h`` token ids and the secret key."""
    if len(context) == 0:
        raise ValueError("context must contain at least one token id")
    acc = 0
    for tok in context:
        acc = (acc + tok) & MASK64
    return mix64((key ^ acc) & MASK64)


def sample_position(seed: int, effective_length: int) -> int:
    """Allocate the step to a message position, uniform over [b-tilde]."""
    if effective_length < 1:
        raise ValueError(f"effective_length must be >= 1, got {effective_length}")
    if effective_length == 1:
        return 0
    rng = Xoshiro256StarStar(substream_seed(seed, POSITION_TAG))
    return rng.bounded(effective_length)


def permute_vocab(seed: int, vocab_size: int) -> np.ndarray:
    """Seeded permutation of [|V|); position in this array is a token's rank."""
    if vocab_size < 1:
        raise ValueError(f"vocab_size must be >= 1, got {vocab_size}")
    return kernels.permutation(substream_seed(seed, PERMUTE_TAG), vocab_size)


def token_rank(seed: int, vocab_size: int, token: int) -> int:
    """Rank of one token under :func:`permute_vocab`, without materializing it."""
    return kernels.token_rank(substream_seed(seed, PERMUTE_TAG), vocab_size, token)


def color_of(token: int, permutation: np.ndarray, gamma: float, radix: int) -> Optional[int]:
    """Colorlist index of a token, or None for the discarded remainder."""
    vocab_size = len(permutation)
    if not 0 <= token < vocab_size:
        raise ValueError(f"token {token} outside vocabulary of size {vocab_size}")
    rank = int(np.nonzero(permutation == token)[0][0])
    return color_of_rank(rank, int(gamma * vocab_size), radix)


def color_of_rank(rank: int, greenlist_size: int, radix: int) -> Optional[int]:
    """Colorlist index for a permutation rank; None past the colored region."""
    if rank < radix * greenlist_size:
        return rank // greenlist_size
    return None


def secret_vector(seed: int, vocab_size: int) -> np.ndarray:
    """Per-token secrets strictly inside (0, 1), for the sampling-based scheme."""
    if vocab_size < 1:
        raise ValueError(f"vocab_size must be >= 1, got {vocab_size}")
    return kernels.uniforms(substream_seed(seed, SECRET_TAG), vocab_size)
