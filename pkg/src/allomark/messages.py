"""Bit-string payloads and the fixed-width radix codec.

The payload is treated as one big-endian integer when converting between its
binary form and base-r digits (most significant digit first, leading zeros
kept).  A digit vector whose value does not fit back into ``bit_width`` bits
raises :class:`MessageOverflowError`; decoders surface that case as an
unrecoverable message instead of truncating silently.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import effective_length


class MessageOverflowError(ValueError):
    """Digit vector encodes an integer outside the configured bit width."""


def to_radix(bits: str, radix: int) -> tuple[int, ...]:
    """Fixed-width base-r digits (most significant first) of a bit string."""
    _check_bits(bits)
    if radix < 2:
        raise ValueError(f"radix must be >= 2, got {radix}")
    width = effective_length(len(bits), radix)
    value = int(bits, 2)
    digits = [0] * width
    for i in range(width - 1, -1, -1):
        digits[i] = value % radix
        value //= radix
    return tuple(digits)


def from_radix(digits, radix: int, bit_width: int) -> str:
    """Inverse of :func:`to_radix`; fixed width with leading zeros."""
    if radix < 2:
        raise ValueError(f"radix must be >= 2, got {radix}")
    if bit_width < 1:
        raise ValueError(f"bit_width must be >= 1, got {bit_width}")
    value = 0
    for d in digits:
        if not 0 <= d < radix:
            raise ValueError(f"digit {d} out of range for radix {radix}")
        value = value * radix + d
    if value >= (1 << bit_width):
        raise MessageOverflowError(
            f"digits encode {value}, which exceeds {bit_width}-bit capacity"
        )
    return format(value, f"0{bit_width}b")


def bit_accuracy(truth: str, predicted: str) -> float:
    """Fraction of matching bits; symmetric in its arguments."""
    _check_bits(truth)
    _check_bits(predicted)
    if len(truth) != len(predicted):
        raise ValueError(
            f"length mismatch: {len(truth)} vs {len(predicted)} bits"
        )
    same = sum(a == b for a, b in zip(truth, predicted))
    return same / len(truth)


@dataclass(frozen=True)
class Message:
    """A payload as bits plus its base-r digit representation."""

    bits: str
    digits: tuple[int, ...]
    radix: int

    @classmethod
    def from_bits(cls, bits: str, radix: int) -> "Message":
        return cls(bits=bits, digits=to_radix(bits, radix), radix=radix)

    @classmethod
    def from_digits(cls, digits, radix: int, bit_width: int) -> "Message":
        bits = from_radix(digits, radix, bit_width)
        return cls(bits=bits, digits=tuple(digits), radix=radix)

    @classmethod
    def random(cls, bit_width: int, radix: int, rng) -> "Message":
        """Uniform random payload drawn from a numpy Generator."""
        bits = "".join("1" if b else "0" for b in rng.integers(0, 2, bit_width))
        return cls.from_bits(bits, radix)

    @property
    def bit_width(self) -> int:
        return len(self.bits)

    @property
    def value(self) -> int:
        return int(self.bits, 2)

    def __post_init__(self):
        _check_bits(self.bits)
        if to_radix(self.bits, self.radix) != tuple(self.digits):
            raise ValueError("digits are not the base-r form of bits")


def _check_bits(bits: str) -> None:
    if not bits:
        raise ValueError("empty bit string")
    if any(c not in "01" for c in bits):
        raise ValueError(f"bit string may contain only 0/1, got {bits!r}")
