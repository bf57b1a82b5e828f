/**
 * Pinned 64-bit randomness primitives.
 *
 * These mirror the reference implementation operation for operation:
 * SplitMix64 as the keyed mixer / stream seeder and xoshiro256** as the
 * draw generator, with `next() % n` as the bounded draw and backward
 * Fisher-Yates for permutations. Any change here breaks bit parity with
 * marks embedded by the reference implementation.
 */

export const MASK64 = (1n << 64n) - 1n;
const GOLDEN = 0x9e3779b97f4a7c15n;
const MIX1 = 0xbf58476d1ce4e5b9n;
const MIX2 = 0x94d049bb133111ebn;

/** Substream tags (ASCII, 8 bytes each). */
export const POSITION_TAG = 0x706f736974696f6en; // "position"
export const PERMUTE_TAG = 0x73687566666c6521n; // "shuffle!"
export const SECRET_TAG = 0x7365637265742121n; // "secret!!"

/** One SplitMix64 step: [output, advanced state]. */
export function splitmix64(state: bigint): [bigint, bigint] {
  state = (state + GOLDEN) & MASK64;
  let z = state;
  z = ((z ^ (z >> 30n)) * MIX1) & MASK64;
  z = ((z ^ (z >> 27n)) * MIX2) & MASK64;
  return [z ^ (z >> 31n), state];
}

/** SplitMix64 output for a state, used as the keyed one-shot mixer. */
export function mix64(x: bigint): bigint {
  return splitmix64(x & MASK64)[0];
}

/** Derive an independent substream seed from a context seed and a tag. */
export function substreamSeed(seed: bigint, tag: bigint): bigint {
  return mix64((seed ^ tag) & MASK64);
}

function rotl(x: bigint, k: bigint): bigint {
  return ((x << k) | (x >> (64n - k))) & MASK64;
}

/** Pinned xoshiro256**, state seeded by four SplitMix64 steps. */
export class Xoshiro256StarStar {
  private s: bigint[];

  constructor(seed: bigint) {
    this.s = [];
    let state = seed & MASK64;
    for (let i = 0; i < 4; i++) {
      const [out, next] = splitmix64(state);
      this.s.push(out);
      state = next;
    }
  }

  nextU64(): bigint {
    const s = this.s;
    const result = (rotl((s[1] * 5n) & MASK64, 7n) * 9n) & MASK64;
    const t = (s[1] << 17n) & MASK64;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45n);
    return result;
  }

  /** Draw from [0, n), pinned as a plain modulo reduction. */
  bounded(n: number): number {
    if (n <= 0) throw new RangeError(`bounded() needs n >= 1, got ${n}`);
    return Number(this.nextU64() % BigInt(n));
  }

  /** Draw strictly inside (0, 1): 53 bits plus a half-ulp offset. */
  uniform01(): number {
    return (Number(this.nextU64() >> 11n) + 0.5) * 2 ** -53;
  }
}

/** Backward Fisher-Yates permutation of [0, n) under a substream seed. */
export function permutation(subSeed: bigint, n: number): Int32Array {
  const rng = new Xoshiro256StarStar(subSeed);
  const arr = new Int32Array(n);
  for (let i = 0; i < n; i++) arr[i] = i;
  for (let i = n - 1; i > 0; i--) {
    const j = rng.bounded(i + 1);
    const tmp = arr[i];
    arr[i] = arr[j];
    arr[j] = tmp;
  }
  return arr;
}

/** Rank of one value under the same Fisher-Yates swaps, O(1) space. */
export function tokenRank(subSeed: bigint, n: number, token: number): number {
  const rng = new Xoshiro256StarStar(subSeed);
  let pos = token;
  for (let i = n - 1; i > 0; i--) {
    const j = rng.bounded(i + 1);
    if (pos === i) pos = j;
    else if (pos === j) pos = i;
  }
  return pos;
}
