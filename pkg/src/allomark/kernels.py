"""Hot-path implementations of the pinned generators.

The numba kernels are bit-for-bit equivalent to the pure-Python reference in
:mod:`allomark.rng` (enforced by tests); they exist because a vocabulary
permutation runs once per token on both the encode and decode side.  When
numba is unavailable the reference path is used, which is correct but slow.
"""

from __future__ import annotations

import numpy as np

from .rng import Xoshiro256StarStar

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on stripped installs
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return deco

_U = np.uint64


@njit(cache=True)
def _sm64(state):
    state = state + _U(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> _U(30))) * _U(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U(27))) * _U(0x94D049BB133111EB)
    return z ^ (z >> _U(31)), state


@njit(cache=True)
def _xo_init(seed):
    s = np.empty(4, dtype=np.uint64)
    state = seed
    for i in range(4):
        out, state = _sm64(state)
        s[i] = out
    return s


@njit(cache=True)
def _xo_next(s):
    x = s[1] * _U(5)
    result = ((x << _U(7)) | (x >> _U(57))) * _U(9)
    t = s[1] << _U(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << _U(45)) | (s[3] >> _U(19))
    return result


@njit(cache=True)
def _perm_nb(seed, n):
    s = _xo_init(seed)
    arr = np.arange(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        j = int(_xo_next(s) % _U(i + 1))
        tmp = arr[i]
        arr[i] = arr[j]
        arr[j] = tmp
    return arr


@njit(cache=True)
def _rank_nb(seed, n, token):
    # Tracks only where `token` ends up under the same Fisher-Yates swaps,
    # avoiding the O(n) array when the caller needs a single rank.
    s = _xo_init(seed)
    pos = token
    for i in range(n - 1, 0, -1):
        j = int(_xo_next(s) % _U(i + 1))
        if pos == i:
            pos = j
        elif pos == j:
            pos = i
    return pos


@njit(cache=True)
def _uniforms_nb(seed, n):
    s = _xo_init(seed)
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = (np.float64(_xo_next(s) >> _U(11)) + 0.5) * (2.0 ** -53)
    return out


def _perm_py(seed: int, n: int) -> np.ndarray:
    rng = Xoshiro256StarStar(seed)
    return np.asarray(rng.shuffle(list(range(n))), dtype=np.int64)


def _rank_py(seed: int, n: int, token: int) -> int:
    rng = Xoshiro256StarStar(seed)
    pos = token
    for i in range(n - 1, 0, -1):
        j = rng.bounded(i + 1)
        if pos == i:
            pos = j
        elif pos == j:
            pos = i
    return pos


def _uniforms_py(seed: int, n: int) -> np.ndarray:
    rng = Xoshiro256StarStar(seed)
    return np.asarray([rng.uniform01() for _ in range(n)], dtype=np.float64)


if HAVE_NUMBA:

    def permutation(seed: int, n: int) -> np.ndarray:
        return _perm_nb(_U(seed), n)

    def token_rank(seed: int, n: int, token: int) -> int:
        return int(_rank_nb(_U(seed), n, token))

    def uniforms(seed: int, n: int) -> np.ndarray:
        return _uniforms_nb(_U(seed), n)

else:  # pragma: no cover
    permutation = _perm_py
    token_rank = _rank_py
    uniforms = _uniforms_py
