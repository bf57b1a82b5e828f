"""Pinned deterministic randomness primitives.

Encoder and decoder must agree bit-exactly on every pseudo-random decision,
including across reimplementations in other languages.  Everything here is
therefore pinned to fixed, widely documented algorithms:

* SplitMix64 (Steele et al.) as the 64-bit mixer / stream seeder.
* xoshiro256** (Blackman & Vigna) as the draw generator.
* Backward Fisher-Yates for permutations, with ``next() % (i + 1)`` as the
  bounded draw (modulo bias is < n / 2^64, irrelevant at vocabulary scale).

Position sampling, vocabulary shuffling and secret-vector generation consume
independent substreams derived from the same context seed via fixed tags, so
e.g. changing the message length never perturbs the vocabulary permutation.

Do not "fix" any constant or operation order here without versioning the
wire format: it would silently invalidate every previously embedded mark.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Substream tags (ASCII, 8 bytes each).
POSITION_TAG = 0x706F736974696F6E  # "position"
PERMUTE_TAG = 0x73687566666C6521   # "shuffle!"
SECRET_TAG = 0x7365637265742121   # "secret!!"
SAMPLING_TAG = 0x73616D706C652121  # "sample!!"


def splitmix64(state: int) -> tuple[int, int]:
    """One SplitMix64 step: return (output, advanced state)."""
    state = (state + _GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31), state


def mix64(x: int) -> int:
    """SplitMix64 output for a state, used as the keyed one-shot mixer."""
    out, _ = splitmix64(x & MASK64)
    return out


def substream_seed(seed: int, tag: int) -> int:
    """Derive an independent substream seed from a context seed and a tag."""
    return mix64((seed ^ tag) & MASK64)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    """Pinned xoshiro256** generator, state seeded by four SplitMix64 steps."""

    __slots__ = ("_s",)

    def __init__(self, seed: int):
        s = []
        state = seed & MASK64
        for _ in range(4):
            out, state = splitmix64(state)
            s.append(out)
        self._s = s

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def bounded(self, n: int) -> int:
        """Draw from [0, n). Pinned as a plain modulo reduction."""
        if n <= 0:
            raise ValueError(f"bounded() needs n >= 1, got {n}")
        return self.next_u64() % n

    def uniform01(self) -> float:
        """Draw strictly inside (0, 1): 53 bits plus a half-ulp offset."""
        return (float(self.next_u64() >> 11) + 0.5) * 2.0 ** -53

    def shuffle(self, items: list) -> list:
        """In-place backward Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.bounded(i + 1)
            items[i], items[j] = items[j], items[i]
        return items
