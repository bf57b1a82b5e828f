"""Watermark scheme configuration and validation."""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, fields

from .rng import MASK64

SECRET_KEY_ENV = "ALLOMARK_SECRET_KEY"
DEFAULT_SECRET_KEY = 0x5AFE5EED5AFE5EED


class Scheme(str, enum.Enum):
    """Message encoding scheme applied at each generation step."""

    GREENLIST = "greenlist"          # zero-bit: bias one fixed list
    POSITION_ALLOC = "position_alloc"  # multi-bit via per-token position allocation
    CYCLIC_SHIFT = "cyclic_shift"    # whole-message greenlist rotation
    MESSAGE_HASH = "message_hash"    # whole-message seed rehashing
    BLOCK_ALLOC = "block_alloc"      # position allocation over message blocks
    EMS = "ems"                      # exponential-minimum sampling variant

    def __str__(self) -> str:  # argparse/serialization friendliness
        return self.value


def effective_length(bit_width: int, radix: int) -> int:
    """Number of radix-r digits needed for a b-bit payload.

    Computed in exact integer arithmetic as the smallest t with
    radix**t >= 2**bit_width (equals ceil(b / log2 r), without the float).
    """
    if bit_width < 1:
        raise ValueError(f"bit_width must be >= 1, got {bit_width}")
    if radix < 2:
        raise ValueError(f"radix must be >= 2, got {radix}")
    t = 1
    cap = radix
    target = 1 << bit_width
    while cap < target:
        cap *= radix
        t += 1
    return t


def secret_key_from_env(default: int = DEFAULT_SECRET_KEY) -> int:
    """Read the secret key from the environment (never log its value)."""
    raw = os.environ.get(SECRET_KEY_ENV)
    if raw is None:
        return default
    return int(raw, 0) & MASK64


@dataclass(frozen=True)
class WatermarkConfig:
    """All scheme parameters. Immutable; safe to share across threads."""

    gamma: float = 0.25
    delta: float = 2.0
    radix: int = 4
    bit_width: int = 8
    context_width: int = 1
    secret_key: int = DEFAULT_SECRET_KEY
    vocab_size: int = 1024
    scheme: Scheme = Scheme.POSITION_ALLOC
    block_count: int = 1
    feedback_delta: float | None = None
    unique_tokens_only: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not 0.0 < self.gamma <= 0.5:
            raise ValueError(f"gamma must be in (0, 0.5], got {self.gamma}")
        if self.delta < 0.0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if self.radix < 2:
            raise ValueError(f"radix must be >= 2, got {self.radix}")
        if self.radix > int(1.0 / self.gamma):
            raise ValueError(
                f"radix {self.radix} exceeds floor(1/gamma) = {int(1.0 / self.gamma)}"
            )
        if self.bit_width < 1:
            raise ValueError(f"bit_width must be >= 1, got {self.bit_width}")
        if self.context_width < 1:
            raise ValueError(f"context_width must be >= 1, got {self.context_width}")
        if not 0 <= self.secret_key <= MASK64:
            raise ValueError("secret_key must fit in 64 bits")
        if self.vocab_size < self.radix:
            raise ValueError(
                f"vocab_size {self.vocab_size} smaller than radix {self.radix}"
            )
        if self.radix * self.greenlist_size > self.vocab_size:
            raise ValueError("colorlists would overlap: r * floor(gamma*|V|) > |V|")
        if self.block_count < 1:
            raise ValueError(f"block_count must be >= 1, got {self.block_count}")
        if self.feedback_delta is not None and self.feedback_delta <= self.delta:
            raise ValueError(
                f"feedback_delta {self.feedback_delta} must exceed delta {self.delta}"
            )
        if self.scheme is Scheme.EMS and self.radix != 2:
            raise ValueError("EMS encodes binary digits only; set radix=2")

    @property
    def effective_length(self) -> int:
        """Digit count b-tilde; 1 for the zero-bit greenlist scheme."""
        if self.scheme is Scheme.GREENLIST:
            return 1
        if self.scheme is Scheme.BLOCK_ALLOC:
            return self.block_count
        return effective_length(self.bit_width, self.radix)

    @property
    def greenlist_size(self) -> int:
        """Tokens per colorlist: floor(gamma * |V|)."""
        return int(self.gamma * self.vocab_size)

    def get_params(self) -> dict:
        """Flat parameter dict (scheme as its string value)."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.value if isinstance(v, Scheme) else v
        return out

    def replace(self, **updates) -> "WatermarkConfig":
        params = self.get_params()
        params.update(updates)
        return WatermarkConfig(**params)

    def to_kv_text(self) -> str:
        """Serialize as the documented ``key = value`` text schema."""
        lines = []
        for k, v in self.get_params().items():
            if v is None:
                continue
            if isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_kv_text(cls, text: str) -> "WatermarkConfig":
        """Parse the ``key = value`` schema produced by :meth:`to_kv_text`."""
        kwargs = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in _FIELD_PARSERS:
                raise ValueError(f"line {lineno}: unknown config key {key!r}")
            kwargs[key] = _FIELD_PARSERS[key](val)
        return cls(**kwargs)


def _parse_bool(s: str) -> bool:
    low = s.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


_FIELD_PARSERS = {
    "gamma": float,
    "delta": float,
    "radix": int,
    "bit_width": int,
    "context_width": int,
    "secret_key": lambda s: int(s, 0),
    "vocab_size": int,
    "scheme": Scheme,
    "block_count": int,
    "feedback_delta": float,
    "unique_tokens_only": _parse_bool,
}
