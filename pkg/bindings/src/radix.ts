/** Fixed-width radix codec for bit-string payloads (big-endian integer). */

import { BindingError, effectiveLength } from "./config.js";

export function checkBits(bits: string): void {
  if (bits.length === 0) throw new BindingError("empty bit string");
  if (!/^[01]+$/.test(bits)) {
    throw new BindingError(`bit string may contain only 0/1, got ${bits}`);
  }
}

/** Base-r digits (most significant first, leading zeros kept). */
export function toRadix(bits: string, radix: number): number[] {
  checkBits(bits);
  if (radix < 2) throw new BindingError(`radix must be >= 2, got ${radix}`);
  const width = effectiveLength(bits.length, radix);
  let value = BigInt("0b" + bits);
  const digits = new Array<number>(width).fill(0);
  const base = BigInt(radix);
  for (let i = width - 1; i >= 0; i--) {
    digits[i] = Number(value % base);
    value /= base;
  }
  return digits;
}

/** Inverse of {@link toRadix}; null when the value overflows the width. */
export function fromRadix(digits: number[], radix: number, bitWidth: number): string | null {
  let value = 0n;
  const base = BigInt(radix);
  for (const d of digits) {
    if (d < 0 || d >= radix) {
      throw new BindingError(`digit ${d} out of range for radix ${radix}`);
    }
    value = value * base + BigInt(d);
  }
  if (value >= 1n << BigInt(bitWidth)) return null;
  return value.toString(2).padStart(bitWidth, "0");
}
