"""Message extraction from token streams.

The counting decoder walks the stream once, allocates every scored token to
a message position, and tallies which colorlist it fell in; the message is
then read off per position by majority vote.  The whole-message baseline
schemes cannot be counted per position and are instead decoded by scoring
every candidate message value, which is what bounds their practical bit
width.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import Scheme, WatermarkConfig
from .encoder import message_hash_seed
from .levin import levin_max_cell_cdf
from .messages import Message, MessageOverflowError, from_radix
from .prf import color_of_rank, hash_context, sample_position, secret_vector, token_rank
from .types import CountMatrix, TokenStream

# Exhaustive candidate scoring is exponential in the bit width; refuse
# rather than hang.  Position-allocated schemes have no such bound.
MAX_SEARCH_BITS = 16


@dataclass(frozen=True)
class DecodeResult:
    """Counting-decoder output (count_matrix is None for search decoders)."""

    count_matrix: Optional[CountMatrix]
    predicted: Optional[Message]
    predicted_digits: Optional[tuple[int, ...]]
    colorlisted: int
    total: int
    confidences: tuple[float, ...]

    @property
    def unrecoverable(self) -> bool:
        return self.predicted is None


@dataclass(frozen=True)
class CandidateList:
    """Messages ordered most-confident first; the argmax message leads."""

    candidates: tuple[Message, ...]

    def __len__(self) -> int:
        return len(self.candidates)

    def best_accuracy(self, truth: str) -> float:
        from .messages import bit_accuracy

        return max(bit_accuracy(truth, c.bits) for c in self.candidates)


def _scored_range(stream: TokenStream, cfg: WatermarkConfig) -> range:
    start = max(stream.prompt_len, cfg.context_width)
    return range(start, len(stream.tokens))


def count_colorlists(stream: TokenStream, cfg: WatermarkConfig) -> CountMatrix:
    """Tally scored tokens into the positions-by-colors counter.

    Every scored token increments its position's trial count; remainder
    tokens (outside the r colored blocks) hit no colorlist cell.  With
    ``unique_tokens_only`` a (context window, token) pair is scored once.
    """
    h = cfg.context_width
    btilde = cfg.effective_length
    matrix = CountMatrix.zeros(btilde, cfg.radix)
    tokens = stream.tokens
    k = cfg.greenlist_size
    seen: set | None = set() if cfg.unique_tokens_only else None
    for t in _scored_range(stream, cfg):
        context = tokens[t - h:t]
        if seen is not None:
            key = (context, tokens[t])
            if key in seen:
                continue
            seen.add(key)
        seed = hash_context(context, cfg.secret_key)
        pos = sample_position(seed, btilde)
        matrix.trials[pos] += 1
        rank = token_rank(seed, cfg.vocab_size, tokens[t])
        color = color_of_rank(rank, k, cfg.radix)
        if color is not None:
            matrix.counts[pos, color] += 1
    return matrix


def _count_ems(stream: TokenStream, cfg: WatermarkConfig) -> CountMatrix:
    """Binary counting for the sampling scheme: which half of (0,1) the
    sampled token's secret fell in votes for digit 0 or 1."""
    h = cfg.context_width
    btilde = cfg.effective_length
    matrix = CountMatrix.zeros(btilde, 2)
    tokens = stream.tokens
    seen: set | None = set() if cfg.unique_tokens_only else None
    for t in _scored_range(stream, cfg):
        context = tokens[t - h:t]
        if seen is not None:
            key = (context, tokens[t])
            if key in seen:
                continue
            seen.add(key)
        seed = hash_context(context, cfg.secret_key)
        pos = sample_position(seed, btilde)
        matrix.trials[pos] += 1
        secret = secret_vector(seed, cfg.vocab_size)[tokens[t]]
        matrix.counts[pos, 0 if secret >= 0.5 else 1] += 1
    return matrix


def argmax_digits(matrix: CountMatrix) -> tuple[int, ...]:
    """Per-position majority vote; ties resolve to the lowest color index."""
    return tuple(int(np.argmax(matrix.counts[i])) for i in range(matrix.positions))


def predict_message(matrix: CountMatrix, cfg: WatermarkConfig) -> tuple[Optional[Message], int]:
    """Majority-vote message and the colorlisted-token statistic w.

    Digit vectors whose integer value exceeds the bit width decode to None
    (unrecoverable); w is returned regardless.
    """
    w = int(matrix.counts.max(axis=1).sum()) if matrix.positions else 0
    digits = argmax_digits(matrix)
    try:
        bits = from_radix(digits, cfg.radix, cfg.bit_width)
    except MessageOverflowError:
        return None, w
    return Message.from_bits(bits, cfg.radix), w


def position_confidence(matrix: CountMatrix, position: int, cfg: WatermarkConfig) -> float:
    """Null CDF of the winning cell count; 0 when nothing was allocated."""
    if not 0 <= position < matrix.positions:
        raise ValueError(f"position {position} outside matrix with {matrix.positions} rows")
    n = int(matrix.trials[position])
    if n == 0:
        return 0.0
    cells = matrix.radix
    probs = np.full(cells, 1.0 / cells)
    a = int(matrix.counts[position].max())
    return levin_max_cell_cdf(n, cells, probs, a)


def _confidences(matrix: CountMatrix, cfg: WatermarkConfig) -> tuple[float, ...]:
    return tuple(position_confidence(matrix, i, cfg) for i in range(matrix.positions))


def decode(stream: TokenStream, cfg: WatermarkConfig) -> DecodeResult:
    """Scheme-dispatching decoder."""
    stream.validate_vocab(cfg.vocab_size)
    scheme = cfg.scheme
    if scheme in (Scheme.POSITION_ALLOC, Scheme.GREENLIST, Scheme.EMS):
        matrix = _count_ems(stream, cfg) if scheme is Scheme.EMS else count_colorlists(stream, cfg)
        if scheme is Scheme.GREENLIST:
            # zero-bit: the statistic is the single known greenlist's count
            return DecodeResult(
                count_matrix=matrix,
                predicted=None,
                predicted_digits=None,
                colorlisted=int(matrix.counts[0, 0]),
                total=matrix.total_trials,
                confidences=(),
            )
        predicted, w = predict_message(matrix, cfg)
        return DecodeResult(
            count_matrix=matrix,
            predicted=predicted,
            predicted_digits=argmax_digits(matrix),
            colorlisted=w,
            total=matrix.total_trials,
            confidences=_confidences(matrix, cfg),
        )
    if scheme is Scheme.CYCLIC_SHIFT:
        return _decode_cyclic_shift(stream, cfg)
    if scheme is Scheme.MESSAGE_HASH:
        return _decode_message_hash(stream, cfg)
    if scheme is Scheme.BLOCK_ALLOC:
        return _decode_block_alloc(stream, cfg)
    raise ValueError(f"no decoder for scheme {scheme}")


def _rotation_votes(stream: TokenStream, cfg: WatermarkConfig) -> tuple[np.ndarray, int]:
    """Per-shift greenlist-hit counts, computed by interval accumulation.

    A token of permutation rank rho is in the rotated greenlist of shift m
    exactly when m lies in [rho-k+1, rho] (mod |V|), so each token adds one
    vote to a contiguous shift interval; this reproduces exhaustive scoring
    of every shift at O(|V| + T) per stream instead of O(|V| * T).
    """
    vocab = cfg.vocab_size
    k = cfg.greenlist_size
    votes = np.zeros(vocab, dtype=np.int64)
    total = 0
    tokens = stream.tokens
    h = cfg.context_width
    for t in _scored_range(stream, cfg):
        seed = hash_context(tokens[t - h:t], cfg.secret_key)
        rho = token_rank(seed, vocab, tokens[t])
        lo = (rho - k + 1) % vocab
        if lo <= rho:
            votes[lo:rho + 1] += 1
        else:
            votes[lo:] += 1
            votes[:rho + 1] += 1
        total += 1
    return votes, total


def _decode_cyclic_shift(stream: TokenStream, cfg: WatermarkConfig) -> DecodeResult:
    if cfg.bit_width > MAX_SEARCH_BITS:
        raise ValueError(
            f"cyclic-shift decoding enumerates 2^b messages; b={cfg.bit_width} "
            f"exceeds the supported {MAX_SEARCH_BITS}"
        )
    n_msgs = 1 << cfg.bit_width
    if n_msgs > cfg.vocab_size:
        raise ValueError(
            f"2^{cfg.bit_width} messages exceed vocabulary of {cfg.vocab_size}; "
            "rotation capacity is bounded by |V|"
        )
    votes, total = _rotation_votes(stream, cfg)
    best = int(np.argmax(votes[:n_msgs]))
    message = Message.from_bits(format(best, f"0{cfg.bit_width}b"), cfg.radix)
    return DecodeResult(
        count_matrix=None,
        predicted=message,
        predicted_digits=message.digits,
        colorlisted=int(votes[best]),
        total=total,
        confidences=(),
    )


def _decode_message_hash(stream: TokenStream, cfg: WatermarkConfig) -> DecodeResult:
    if cfg.bit_width > 12:
        raise ValueError(
            f"message-hash decoding scores 2^b candidate seeds per token; "
            f"b={cfg.bit_width} exceeds the supported 12"
        )
    tokens = stream.tokens
    h = cfg.context_width
    steps = [
        (hash_context(tokens[t - h:t], cfg.secret_key), tokens[t])
        for t in _scored_range(stream, cfg)
    ]
    total = len(steps)
    n_msgs = 1 << cfg.bit_width
    k = cfg.greenlist_size
    scores = np.zeros(n_msgs, dtype=np.int64)
    rank_cache: dict[tuple[int, int], int] = {}
    for value in range(n_msgs):
        hit = 0
        for seed, tok in steps:
            final = message_hash_seed(seed, value)
            key = (final, tok)
            rank = rank_cache.get(key)
            if rank is None:
                rank = token_rank(final, cfg.vocab_size, tok)
                rank_cache[key] = rank
            if rank < k:
                hit += 1
        scores[value] = hit
    best = int(np.argmax(scores))
    message = Message.from_bits(format(best, f"0{cfg.bit_width}b"), cfg.radix)
    return DecodeResult(
        count_matrix=None,
        predicted=message,
        predicted_digits=message.digits,
        colorlisted=int(scores[best]),
        total=total,
        confidences=(),
    )


def _decode_block_alloc(stream: TokenStream, cfg: WatermarkConfig) -> DecodeResult:
    n = cfg.block_count
    width = -(-cfg.bit_width // n)
    n_vals = 1 << width
    if n_vals > cfg.vocab_size:
        raise ValueError(
            f"block values span 2^{width} >= vocabulary {cfg.vocab_size}"
        )
    vocab = cfg.vocab_size
    k = cfg.greenlist_size
    votes = np.zeros((n, vocab), dtype=np.int64)
    total = 0
    tokens = stream.tokens
    h = cfg.context_width
    for t in _scored_range(stream, cfg):
        seed = hash_context(tokens[t - h:t], cfg.secret_key)
        pos = sample_position(seed, n)
        rho = token_rank(seed, vocab, tokens[t])
        lo = (rho - k + 1) % vocab
        if lo <= rho:
            votes[pos, lo:rho + 1] += 1
        else:
            votes[pos, lo:] += 1
            votes[pos, :rho + 1] += 1
        total += 1
    blocks = [int(np.argmax(votes[i, :n_vals])) for i in range(n)]
    w = int(sum(votes[i, blocks[i]] for i in range(n)))
    bits = "".join(format(b, f"0{width}b") for b in blocks)[-cfg.bit_width:]
    message = Message.from_bits(bits, cfg.radix)
    return DecodeResult(
        count_matrix=None,
        predicted=message,
        predicted_digits=message.digits,
        colorlisted=w,
        total=total,
        confidences=(),
    )


def runner_up_color(row: np.ndarray) -> int:
    """Second-largest cell, ties broken by the lowest index."""
    order = np.argsort(-row, kind="stable")
    return int(order[1])


def list_decode(matrix: CountMatrix, cfg: WatermarkConfig, list_size: int) -> CandidateList:
    """Candidate messages by greedily flipping low-confidence positions.

    Candidates enumerate subsets of flip positions in binary-counter order
    over positions sorted by ascending confidence, each flip replacing the
    argmax digit with the runner-up color; the empty subset (the argmax
    message itself) comes first.  Digit vectors that overflow the bit width
    are skipped.
    """
    if list_size < 1:
        raise ValueError(f"list_size must be >= 1, got {list_size}")
    if cfg.scheme not in (Scheme.POSITION_ALLOC, Scheme.EMS):
        raise ValueError(f"list decoding requires a counting scheme, not {cfg.scheme}")
    radix = cfg.radix
    base = argmax_digits(matrix)
    conf = _confidences(matrix, cfg)
    order = sorted(range(matrix.positions), key=lambda i: (conf[i], i))
    flips = [(i, runner_up_color(matrix.counts[i])) for i in order]
    candidates: list[Message] = []
    mask = 0
    limit = 1 << min(matrix.positions, 20)
    while len(candidates) < list_size and mask < limit:
        digits = list(base)
        for bit, (pos, color) in enumerate(flips):
            if mask & (1 << bit):
                digits[pos] = color
        try:
            bits = from_radix(digits, radix, cfg.bit_width)
        except MessageOverflowError:
            mask += 1
            continue
        candidates.append(Message.from_bits(bits, radix))
        mask += 1
    return CandidateList(candidates=tuple(candidates))
