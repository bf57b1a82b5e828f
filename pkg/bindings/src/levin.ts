/**
 * Max-multinomial-cell CDF (Levin representation) and pinned normal math.
 *
 * Operation-for-operation mirror of the reference implementation so that
 * confidence values agree to float precision: Poisson terms are accumulated
 * with the same log-add-exp recurrence, P(W = N) uses the same
 * continuity-corrected normal on the same pinned erfc, values pass through
 * the same running-max envelope, and samples with N <= 12 take the same
 * exact generating-function convolution.
 */

const SQRT2 = Math.sqrt(2.0);

/** Complementary error function, pinned rational approximation. */
export function erfcPinned(x: number): number {
  const t = 1.0 / (1.0 + 0.5 * Math.abs(x));
  const poly =
    -1.26551223 +
    t *
      (1.00002368 +
        t *
          (0.37409196 +
            t *
              (0.09678418 +
                t *
                  (-0.18628806 +
                    t *
                      (0.27886807 +
                        t *
                          (-1.13520398 +
                            t * (1.48851587 + t * (-0.82215223 + t * 0.17087277))))))));
  const ans = t * Math.exp(-x * x + poly);
  return x >= 0.0 ? ans : 2.0 - ans;
}

export function stdnormCdf(x: number): number {
  return 0.5 * erfcPinned(-x / SQRT2);
}

export function stdnormSf(x: number): number {
  return 0.5 * erfcPinned(x / SQRT2);
}

function logAddExp(a: number, b: number): number {
  if (a === -Infinity) return b;
  if (b === -Infinity) return a;
  const hi = a >= b ? a : b;
  const lo = a >= b ? b : a;
  return hi + Math.log1p(Math.exp(lo - hi));
}

const EXACT_MAX_TRIALS = 12;

/** P(max cell <= a) for Multinomial(trials, uniform 1/cells), monotone in a. */
export function levinMaxCellCdf(trials: number, cells: number, a: number): number {
  if (trials < 0) throw new RangeError(`trials must be >= 0, got ${trials}`);
  if (cells < 1) throw new RangeError(`cells must be >= 1, got ${cells}`);
  if (trials === 0 || a >= trials) return 1.0;
  if (a < Math.ceil(trials / cells)) return 0.0;
  if (trials <= EXACT_MAX_TRIALS) return exactMaxCellCdf(trials, cells, a);
  const table = rawTable(trials, cells, a);
  let running = 0.0;
  for (let i = 0; i <= a; i++) running = Math.max(running, table[i]);
  return running;
}

/** Raw Levin approximation for a = 0..amax with equal cell probabilities. */
function rawTable(n: number, cells: number, amax: number): Float64Array {
  const logfact = new Float64Array(amax + 1);
  for (let k = 1; k <= amax; k++) logfact[k] = logfact[k - 1] + Math.log(k);
  const lam = n * (1.0 / cells);
  const logcdf = new Float64Array(amax + 1);
  let acc = -Infinity;
  for (let k = 0; k <= amax; k++) {
    const logpmf = -lam + k * Math.log(lam) - logfact[k];
    acc = logAddExp(acc, logpmf);
    logcdf[k] = Math.min(acc, 0.0);
  }
  // truncated-Poisson moments on [0, a]:
  //   E[Y]      = lam * F(a-1) / F(a)
  //   E[Y(Y-1)] = lam^2 * F(a-2) / F(a)
  const mean = new Float64Array(amax + 1);
  for (let k = 1; k <= amax; k++) mean[k] = lam * Math.exp(logcdf[k - 1] - logcdf[k]);
  const ex2 = Float64Array.from(mean);
  for (let k = 2; k <= amax; k++) {
    ex2[k] += lam * lam * Math.exp(logcdf[k - 2] - logcdf[k]);
  }
  const logPref = 0.5 * Math.log(2.0 * Math.PI * n);
  const out = new Float64Array(amax + 1);
  for (let k = 0; k <= amax; k++) {
    const logProd = cells * logcdf[k];
    const mu = cells * mean[k];
    const variance = cells * (ex2[k] - mean[k] * mean[k]);
    let pw: number;
    if (variance > 0.0) {
      const sd = Math.sqrt(Math.max(variance, 0.0));
      pw = stdnormCdf((n + 0.5 - mu) / sd) - stdnormCdf((n - 0.5 - mu) / sd);
    } else {
      pw = mu === n ? 1.0 : 0.0;
    }
    const value =
      pw > 0.0 ? Math.exp(logPref + logProd + Math.log(Math.max(pw, 1e-320))) : 0.0;
    out[k] = Math.min(Math.max(value, 0.0), 1.0);
  }
  return out;
}

/** Exact small-sample CDF via truncated generating functions. */
export function exactMaxCellCdf(trials: number, cells: number, a: number): number {
  if (trials === 0) return 1.0;
  if (a < 0) return 0.0;
  const fact = new Float64Array(trials + 1);
  fact[0] = 1.0;
  for (let k = 1; k <= trials; k++) fact[k] = fact[k - 1] * k;
  const p = 1.0 / cells;
  let poly: number[] = [1.0];
  const width = Math.min(a, trials);
  const base = new Float64Array(width + 1);
  for (let k = 0; k <= width; k++) base[k] = Math.pow(p, k) / fact[k];
  for (let cell = 0; cell < cells; cell++) {
    const outLen = Math.min(poly.length + width, trials + 1);
    const out = new Array<number>(outLen).fill(0.0);
    for (let i = 0; i < poly.length; i++) {
      const ci = poly[i];
      if (ci === 0.0) continue;
      for (let j = 0; j <= width; j++) {
        if (i + j <= trials) out[i + j] += ci * base[j];
      }
    }
    poly = out;
  }
  const coeff = trials < poly.length ? poly[trials] : 0.0;
  return Math.min(coeff * fact[trials], 1.0);
}
