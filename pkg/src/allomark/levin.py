"""Distribution of the maximum cell of a multinomial.

The closed-form route follows Levin's representation: for any s > 0,

    P(max <= a) = N! / (s^N e^-s) * prod_i P(X_i <= a) * P(W = N)

with X_i ~ Poisson(s * p_i) and W the sum of the X_i truncated to [0, a].
We take s = N, apply Stirling to N! (the prefactor collapses to
sqrt(2*pi*N)), approximate P(W = N) by a continuity-corrected normal, and
evaluate everything in log space.  The raw approximation can dip slightly in
its upper tail, so values are released through a running maximum, keeping
the returned CDF monotone in ``a``.  For tiny samples (N <= 12) the
approximation is poor and an exact truncated-generating-function evaluation
is used instead.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .mathx import stdnorm_cdf_vec

EXACT_MAX_TRIALS = 12


def _check_probs(probs, cells: int) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.shape[0] != cells:
        raise ValueError(f"probs must be a length-{cells} vector, got shape {p.shape}")
    if (p < 0).any():
        raise ValueError("probabilities must be non-negative")
    if abs(float(p.sum()) - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {float(p.sum())!r}, not 1")
    return p


def levin_max_cell_cdf(trials: int, cells: int, probs, a: int) -> float:
    """P(max cell <= a) for Multinomial(trials, probs), monotone in ``a``."""
    if trials < 0:
        raise ValueError(f"trials must be >= 0, got {trials}")
    if cells < 1:
        raise ValueError(f"cells must be >= 1, got {cells}")
    p = _check_probs(probs, cells)
    if trials == 0 or a >= trials:
        return 1.0
    if a < -(-trials // cells):  # pigeonhole: max cell is at least ceil(N/r)
        return 0.0
    return _levin_point(trials, tuple(float(x) for x in p), int(a))


@lru_cache(maxsize=65536)
def _levin_point(trials: int, probs: tuple[float, ...], a: int) -> float:
    # decoders evaluate this for the same small (trials, a) grid over and
    # over; memoizing the pure function keeps decode cost flat in bit width
    if trials <= EXACT_MAX_TRIALS:
        return exact_max_cell_cdf(trials, probs, a)
    table = _levin_raw_table(trials, np.asarray(probs), a)
    return float(np.maximum.accumulate(table)[a])


def _cell_table(n: int, lam: float, amax: int, logfact: np.ndarray):
    """Per-cell truncated-Poisson quantities for a = 0..amax."""
    ks = np.arange(amax + 1, dtype=np.float64)
    logpmf = -lam + ks * math.log(lam) - logfact
    logcdf = np.minimum(np.logaddexp.accumulate(logpmf), 0.0)
    # truncated-Poisson moments on [0, a]:
    #   E[Y]      = lam * F(a-1) / F(a)
    #   E[Y(Y-1)] = lam^2 * F(a-2) / F(a)
    mean = np.zeros(amax + 1)
    mean[1:] = lam * np.exp(logcdf[:-1] - logcdf[1:])
    ex2 = mean.copy()
    if amax >= 2:
        ex2[2:] += lam * lam * np.exp(logcdf[:-2] - logcdf[2:])
    return logcdf, mean, ex2 - mean * mean


def _levin_raw_table(n: int, probs: np.ndarray, amax: int) -> np.ndarray:
    """Raw Levin approximation of the max-cell CDF for a = 0..amax."""
    ks = np.arange(amax + 1, dtype=np.float64)
    logfact = np.concatenate(([0.0], np.cumsum(np.log(ks[1:]))))
    cells = len(probs)
    if np.all(probs == probs[0]):
        # equal cells share one truncated-Poisson table
        logcdf, mean, v = _cell_table(n, n * float(probs[0]), amax, logfact)
        log_prod = cells * logcdf
        mu = cells * mean
        var = cells * v
    else:
        log_prod = np.zeros(amax + 1)
        mu = np.zeros(amax + 1)
        var = np.zeros(amax + 1)
        for p in probs:
            lam = n * p
            if lam == 0.0:
                continue
            logcdf, mean, v = _cell_table(n, lam, amax, logfact)
            log_prod += logcdf
            mu += mean
            var += v
    log_pref = 0.5 * math.log(2.0 * math.pi * n)
    with np.errstate(divide="ignore", invalid="ignore"):
        sd = np.sqrt(np.maximum(var, 0.0))
        hi = stdnorm_cdf_vec((n + 0.5 - mu) / np.where(sd > 0.0, sd, np.inf))
        lo = stdnorm_cdf_vec((n - 0.5 - mu) / np.where(sd > 0.0, sd, np.inf))
        pw = hi - lo
    pw = np.where(sd > 0.0, pw, (mu == float(n)).astype(np.float64))
    out = np.where(
        pw > 0.0,
        np.exp(log_pref + log_prod + np.log(np.maximum(pw, 1e-320))),
        0.0,
    )
    return np.clip(out, 0.0, 1.0)


def exact_max_cell_cdf(trials: int, probs, a: int) -> float:
    """Exact P(max cell <= a) for small samples.

    Truncated generating functions: the probability equals
    N! * [x^N] prod_i (sum_{k<=a} (p_i x)^k / k!), evaluated by polynomial
    convolution; exact up to float rounding for the N <= 12 regime it serves.
    """
    if trials == 0:
        return 1.0
    if a < 0:
        return 0.0
    return _exact_cached(trials, tuple(float(p) for p in probs), a)


@lru_cache(maxsize=4096)
def _exact_cached(trials: int, probs: tuple[float, ...], a: int) -> float:
    fact = [1.0] * (trials + 1)
    for k in range(1, trials + 1):
        fact[k] = fact[k - 1] * k
    poly = [1.0]
    for p in probs:
        width = min(a, trials)
        base = [p ** k / fact[k] for k in range(width + 1)]
        out = [0.0] * min(len(poly) + width, trials + 1)
        for i, ci in enumerate(poly):
            if ci == 0.0:
                continue
            for j, bj in enumerate(base):
                if i + j <= trials:
                    out[i + j] += ci * bj
        poly = out
    coeff = poly[trials] if trials < len(poly) else 0.0
    return min(coeff * fact[trials], 1.0)
