/**
 * Watermark configuration: the `key = value` text schema and validation.
 *
 * The config crosses the binding boundary as a serialized string and is
 * validated here; malformed input raises {@link BindingError} with a
 * message, never a crash.
 */

import { MASK64 } from "./u64.js";

/** Raised for malformed configs and inconsistent array lengths. */
export class BindingError extends Error {}

export type Scheme =
  | "greenlist"
  | "position_alloc"
  | "cyclic_shift"
  | "message_hash"
  | "block_alloc"
  | "ems";

const SCHEMES: Scheme[] = [
  "greenlist",
  "position_alloc",
  "cyclic_shift",
  "message_hash",
  "block_alloc",
  "ems",
];

export interface WatermarkConfig {
  gamma: number;
  delta: number;
  radix: number;
  bitWidth: number;
  contextWidth: number;
  secretKey: bigint;
  vocabSize: number;
  scheme: Scheme;
  blockCount: number;
  feedbackDelta: number | null;
  uniqueTokensOnly: boolean;
}

/** Digit count for a payload: smallest t with radix**t >= 2**bitWidth. */
export function effectiveLength(bitWidth: number, radix: number): number {
  if (bitWidth < 1) throw new BindingError(`bit_width must be >= 1, got ${bitWidth}`);
  if (radix < 2) throw new BindingError(`radix must be >= 2, got ${radix}`);
  let t = 1;
  let cap = BigInt(radix);
  const target = 1n << BigInt(bitWidth);
  while (cap < target) {
    cap *= BigInt(radix);
    t += 1;
  }
  return t;
}

export function configEffectiveLength(cfg: WatermarkConfig): number {
  if (cfg.scheme === "greenlist") return 1;
  if (cfg.scheme === "block_alloc") return cfg.blockCount;
  return effectiveLength(cfg.bitWidth, cfg.radix);
}

export function greenlistSize(cfg: WatermarkConfig): number {
  return Math.floor(cfg.gamma * cfg.vocabSize);
}

const DEFAULTS: WatermarkConfig = {
  gamma: 0.25,
  delta: 2.0,
  radix: 4,
  bitWidth: 8,
  contextWidth: 1,
  secretKey: 0x5afe5eed5afe5eedn,
  vocabSize: 1024,
  scheme: "position_alloc",
  blockCount: 1,
  feedbackDelta: null,
  uniqueTokensOnly: false,
};

function parseBool(value: string, key: string): boolean {
  const low = value.toLowerCase();
  if (["true", "1", "yes"].includes(low)) return true;
  if (["false", "0", "no"].includes(low)) return false;
  throw new BindingError(`config key ${key}: not a boolean: ${value}`);
}

function parseNumber(value: string, key: string): number {
  const parsed = Number(value);
  if (!Number.isFinite(parsed)) {
    throw new BindingError(`config key ${key}: not a number: ${value}`);
  }
  return parsed;
}

function parseInteger(value: string, key: string): number {
  const parsed = parseNumber(value, key);
  if (!Number.isInteger(parsed)) {
    throw new BindingError(`config key ${key}: not an integer: ${value}`);
  }
  return parsed;
}

/** Parse the documented `key = value` schema (comments and blanks allowed). */
export function parseConfig(text: string): WatermarkConfig {
  const cfg: WatermarkConfig = { ...DEFAULTS };
  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "" || line.startsWith("#")) continue;
    const eq = line.indexOf("=");
    if (eq < 0) {
      throw new BindingError(`config line ${i + 1}: expected 'key = value', got ${line}`);
    }
    const key = line.slice(0, eq).trim();
    const value = line.slice(eq + 1).trim();
    switch (key) {
      case "gamma":
        cfg.gamma = parseNumber(value, key);
        break;
      case "delta":
        cfg.delta = parseNumber(value, key);
        break;
      case "radix":
        cfg.radix = parseInteger(value, key);
        break;
      case "bit_width":
        cfg.bitWidth = parseInteger(value, key);
        break;
      case "context_width":
        cfg.contextWidth = parseInteger(value, key);
        break;
      case "secret_key":
        try {
          cfg.secretKey = BigInt(value) & MASK64;
        } catch {
          throw new BindingError(`config key secret_key: not an integer: ${value}`);
        }
        break;
      case "vocab_size":
        cfg.vocabSize = parseInteger(value, key);
        break;
      case "scheme":
        if (!SCHEMES.includes(value as Scheme)) {
          throw new BindingError(`unknown scheme ${value}`);
        }
        cfg.scheme = value as Scheme;
        break;
      case "block_count":
        cfg.blockCount = parseInteger(value, key);
        break;
      case "feedback_delta":
        cfg.feedbackDelta = parseNumber(value, key);
        break;
      case "unique_tokens_only":
        cfg.uniqueTokensOnly = parseBool(value, key);
        break;
      default:
        throw new BindingError(`unknown config key ${key}`);
    }
  }
  validateConfig(cfg);
  return cfg;
}

export function validateConfig(cfg: WatermarkConfig): void {
  if (!(cfg.gamma > 0 && cfg.gamma <= 0.5)) {
    throw new BindingError(`gamma must be in (0, 0.5], got ${cfg.gamma}`);
  }
  if (cfg.delta < 0) throw new BindingError(`delta must be >= 0, got ${cfg.delta}`);
  if (cfg.radix < 2) throw new BindingError(`radix must be >= 2, got ${cfg.radix}`);
  if (cfg.radix > Math.floor(1 / cfg.gamma)) {
    throw new BindingError(
      `radix ${cfg.radix} exceeds floor(1/gamma) = ${Math.floor(1 / cfg.gamma)}`,
    );
  }
  if (cfg.bitWidth < 1) throw new BindingError(`bit_width must be >= 1, got ${cfg.bitWidth}`);
  if (cfg.contextWidth < 1) {
    throw new BindingError(`context_width must be >= 1, got ${cfg.contextWidth}`);
  }
  if (cfg.vocabSize < cfg.radix) {
    throw new BindingError(`vocab_size ${cfg.vocabSize} smaller than radix ${cfg.radix}`);
  }
  if (cfg.radix * greenlistSize(cfg) > cfg.vocabSize) {
    throw new BindingError("colorlists would overlap: r * floor(gamma*|V|) > |V|");
  }
  if (cfg.blockCount < 1) {
    throw new BindingError(`block_count must be >= 1, got ${cfg.blockCount}`);
  }
  if (cfg.feedbackDelta !== null && cfg.feedbackDelta <= cfg.delta) {
    throw new BindingError(
      `feedback_delta ${cfg.feedbackDelta} must exceed delta ${cfg.delta}`,
    );
  }
  if (cfg.scheme === "ems" && cfg.radix !== 2) {
    throw new BindingError("EMS encodes binary digits only; set radix=2");
  }
}
