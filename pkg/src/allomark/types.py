"""Shared value types for streams, decode counts, and detection results."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TokenStream:
    """A token-id sequence with the prompt/generation boundary marked."""

    tokens: tuple[int, ...]
    prompt_len: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(int(t) for t in self.tokens))
        if not 0 <= self.prompt_len <= len(self.tokens):
            raise ValueError(
                f"prompt_len {self.prompt_len} outside stream of length {len(self.tokens)}"
            )

    @property
    def generated(self) -> tuple[int, ...]:
        return self.tokens[self.prompt_len:]

    def __len__(self) -> int:
        return len(self.tokens)

    def validate_vocab(self, vocab_size: int) -> None:
        for t in self.tokens:
            if not 0 <= t < vocab_size:
                raise ValueError(f"token id {t} outside vocabulary of size {vocab_size}")


@dataclass
class CountMatrix:
    """Per-position colorlist counters plus per-position trial totals.

    ``counts[p][m]`` is the number of scored tokens allocated to position p
    that landed in colorlist m; ``trials[p]`` counts every token allocated to
    p, including remainder tokens that hit no colorlist, so a row may sum to
    less than its trial count.
    """

    counts: np.ndarray
    trials: np.ndarray

    @classmethod
    def zeros(cls, positions: int, radix: int) -> "CountMatrix":
        return cls(
            counts=np.zeros((positions, radix), dtype=np.int64),
            trials=np.zeros(positions, dtype=np.int64),
        )

    @property
    def positions(self) -> int:
        return self.counts.shape[0]

    @property
    def radix(self) -> int:
        return self.counts.shape[1]

    @property
    def total_trials(self) -> int:
        return int(self.trials.sum())

    def validate(self) -> None:
        if self.counts.shape[0] != self.trials.shape[0]:
            raise ValueError("counts and trials disagree on position count")
        if (self.counts < 0).any() or (self.trials < 0).any():
            raise ValueError("negative counter")
        if (self.counts.sum(axis=1) > self.trials).any():
            raise ValueError("row sum exceeds trial count")

    def copy(self) -> "CountMatrix":
        return CountMatrix(self.counts.copy(), self.trials.copy())


@dataclass(frozen=True)
class DetectionResult:
    """Colorlisted-token statistic with its normal-approximation test."""

    colorlisted: int
    total: int
    z_score: float
    p_value: float

    def __post_init__(self):
        if self.colorlisted > self.total:
            raise ValueError("colorlisted count exceeds total trials")
