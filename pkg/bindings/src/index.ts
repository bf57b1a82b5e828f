/**
 * Thin bindings for position-allocation LM watermarking.
 *
 * Three stateless entry points for host pipelines whose logits originate
 * elsewhere: {@link biasStep} (the per-step logit transform),
 * {@link decodeTokens} (counting decoder with confidences), and
 * {@link detect} (binomial z-test). Configuration crosses the boundary as
 * the documented `key = value` text and is validated here; numeric behavior
 * is bit-compatible with the reference implementation (verified against
 * golden files in the test suite).
 */

import {
  BindingError,
  configEffectiveLength,
  greenlistSize,
  parseConfig,
  WatermarkConfig,
} from "./config.js";
import { levinMaxCellCdf, stdnormSf } from "./levin.js";
import { fromRadix, toRadix, checkBits } from "./radix.js";
import {
  MASK64,
  PERMUTE_TAG,
  POSITION_TAG,
  Xoshiro256StarStar,
  mix64,
  permutation,
  substreamSeed,
  tokenRank,
} from "./u64.js";

export const VERSION = "0.1.0";

export { BindingError, parseConfig } from "./config.js";
export type { WatermarkConfig, Scheme } from "./config.js";

/** Additive keyed hash of the last h token ids. */
export function hashContext(context: number[], key: bigint): bigint {
  if (context.length === 0) {
    throw new BindingError("context must contain at least one token id");
  }
  let acc = 0n;
  for (const tok of context) acc = (acc + BigInt(tok)) & MASK64;
  return mix64((key ^ acc) & MASK64);
}

function samplePosition(seed: bigint, effectiveLength: number): number {
  if (effectiveLength < 1) {
    throw new BindingError(`effective length must be >= 1, got ${effectiveLength}`);
  }
  if (effectiveLength === 1) return 0;
  const rng = new Xoshiro256StarStar(substreamSeed(seed, POSITION_TAG));
  return rng.bounded(effectiveLength);
}

function checkTokens(tokens: number[], cfg: WatermarkConfig): void {
  for (const tok of tokens) {
    if (!Number.isInteger(tok) || tok < 0 || tok >= cfg.vocabSize) {
      throw new BindingError(
        `token id ${tok} outside vocabulary of size ${cfg.vocabSize}`,
      );
    }
  }
}

function stepSeed(context: number[], cfg: WatermarkConfig): bigint {
  if (context.length < cfg.contextWidth) {
    throw new BindingError(
      `context of length ${context.length} shorter than h=${cfg.contextWidth}`,
    );
  }
  return hashContext(context.slice(-cfg.contextWidth), cfg.secretKey);
}

/**
 * Per-step encoder transform: add delta to the colorlist selected by the
 * payload digit at this step's pseudo-random position. Pure; returns a new
 * array, element-for-element equal to the reference implementation.
 */
export function biasStep(
  contextIds: number[],
  logits: ArrayLike<number>,
  messageBits: string,
  configText: string,
): Float64Array {
  const cfg = parseConfig(configText);
  if (cfg.scheme !== "position_alloc") {
    throw new BindingError(`biasStep implements position_alloc, not ${cfg.scheme}`);
  }
  if (logits.length !== cfg.vocabSize) {
    throw new BindingError(
      `logits length ${logits.length} != vocab_size ${cfg.vocabSize}`,
    );
  }
  checkBits(messageBits);
  if (messageBits.length !== cfg.bitWidth) {
    throw new BindingError(
      `message has ${messageBits.length} bits, config expects ${cfg.bitWidth}`,
    );
  }
  checkTokens(contextIds, cfg);
  const out = Float64Array.from(logits as ArrayLike<number>);
  const seed = stepSeed(contextIds, cfg);
  const pos = samplePosition(seed, configEffectiveLength(cfg));
  const digits = toRadix(messageBits, cfg.radix);
  const color = digits[pos];
  if (cfg.delta !== 0.0) {
    const perm = permutation(substreamSeed(seed, PERMUTE_TAG), cfg.vocabSize);
    const k = greenlistSize(cfg);
    for (let i = color * k; i < (color + 1) * k; i++) {
      out[perm[i]] += cfg.delta;
    }
  }
  return out;
}

export interface DecodeOutput {
  /** Recovered payload bits, or null when nothing was scored (or zero-bit). */
  bits: string | null;
  /** Colorlisted-token statistic w. */
  colorlisted: number;
  /** Scored trials T. */
  total: number;
  zScore: number;
  /** Per-position null CDF of the winning cell (empty when nothing scored). */
  confidences: number[];
}

/** Counting decoder over raw token ids (scored once a full context exists). */
export function decodeTokens(tokenIds: number[], configText: string): DecodeOutput {
  const cfg = parseConfig(configText);
  if (cfg.scheme !== "position_alloc" && cfg.scheme !== "greenlist") {
    throw new BindingError(`decodeTokens implements counting schemes, not ${cfg.scheme}`);
  }
  checkTokens(tokenIds, cfg);
  const h = cfg.contextWidth;
  const btilde = configEffectiveLength(cfg);
  const k = greenlistSize(cfg);
  const counts: number[][] = Array.from({ length: btilde }, () =>
    new Array<number>(cfg.radix).fill(0),
  );
  const trials = new Array<number>(btilde).fill(0);
  const seen = cfg.uniqueTokensOnly ? new Set<string>() : null;
  for (let t = h; t < tokenIds.length; t++) {
    const context = tokenIds.slice(t - h, t);
    if (seen !== null) {
      const key = `${context.join(",")}|${tokenIds[t]}`;
      if (seen.has(key)) continue;
      seen.add(key);
    }
    const seed = hashContext(context, cfg.secretKey);
    const pos = samplePosition(seed, btilde);
    trials[pos] += 1;
    const rank = tokenRank(substreamSeed(seed, PERMUTE_TAG), cfg.vocabSize, tokenIds[t]);
    if (rank < cfg.radix * k) {
      counts[pos][Math.floor(rank / k)] += 1;
    }
  }
  const total = trials.reduce((a, b) => a + b, 0);
  if (cfg.scheme === "greenlist") {
    const w = counts[0][0];
    return {
      bits: null,
      colorlisted: w,
      total,
      zScore: zScore(w, total, cfg.gamma),
      confidences: [],
    };
  }
  let w = 0;
  const digits = new Array<number>(btilde).fill(0);
  for (let i = 0; i < btilde; i++) {
    let best = 0;
    for (let m = 1; m < cfg.radix; m++) {
      if (counts[i][m] > counts[i][best]) best = m;
    }
    digits[i] = best;
    w += counts[i][best];
  }
  if (total === 0) {
    return { bits: null, colorlisted: 0, total: 0, zScore: 0.0, confidences: [] };
  }
  const confidences = trials.map((n, i) => {
    if (n === 0) return 0.0;
    let maxCell = 0;
    for (let m = 0; m < cfg.radix; m++) maxCell = Math.max(maxCell, counts[i][m]);
    return levinMaxCellCdf(n, cfg.radix, maxCell);
  });
  return {
    bits: fromRadix(digits, cfg.radix, cfg.bitWidth),
    colorlisted: w,
    total,
    zScore: zScore(w, total, cfg.gamma),
    confidences,
  };
}

export interface DetectionOutput {
  colorlisted: number;
  total: number;
  zScore: number;
  pValue: number;
}

/** One-sided binomial test of the colorlisted-token count. */
export function detect(tokenIds: number[], configText: string): DetectionOutput {
  const result = decodeTokens(tokenIds, configText);
  return {
    colorlisted: result.colorlisted,
    total: result.total,
    zScore: result.zScore,
    pValue: result.total === 0 ? 1.0 : stdnormSf(result.zScore),
  };
}

function zScore(colorlisted: number, total: number, gamma: number): number {
  if (total === 0) return 0.0;
  return (colorlisted - gamma * total) / Math.sqrt(gamma * (1.0 - gamma) * total);
}
