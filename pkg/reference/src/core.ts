/**
 * Independent reimplementation of the verifiable-dropout primitives.
 *
 * Everything here is rebuilt from the protocol definition using only
 * `node:crypto` — no code or constants are imported from the Python
 * package, so agreement between the two implementations is evidence that
 * the protocol itself, not a shared library, produces the vectors.
 */

import {
  createHash,
  createPrivateKey,
  createPublicKey,
  sign as cryptoSign,
  verify as cryptoVerify,
  type KeyObject,
} from "node:crypto";

export const CONTEXT_TAG = "VDO-CTX-v1";
export const JOURNAL_TAG = "VDO-JRN-v1";
export const PROOF_VERSION = "vdo-proof-v1";
export const BACKEND_ID = "reexec-v1";

export const I32_MAX = 2147483647;
export const I32_MIN = -2147483648;

export function sha256(data: Buffer): Buffer {
  return createHash("sha256").update(data).digest();
}

export function le64(value: bigint): Buffer {
  if (value < 0n || value > 0xffffffffffffffffn) {
    throw new RangeError("value out of u64 range");
  }
  const out = Buffer.alloc(8);
  out.writeBigUInt64LE(value);
  return out;
}

function lengthPrefixed(text: string): Buffer {
  const raw = Buffer.from(text, "utf8");
  const prefix = Buffer.alloc(4);
  prefix.writeUInt32LE(raw.length);
  return Buffer.concat([prefix, raw]);
}

export interface InvocationContext {
  modelId: string;
  step: bigint;
  batchId: bigint;
  nonce: Buffer;
  layerId: string;
}

/** Canonical context serialization: tag, model id, step, batch id, nonce, layer id. */
export function packContext(ctx: InvocationContext): Buffer {
  if (ctx.nonce.length !== 32) {
    throw new RangeError("nonce must be exactly 32 bytes");
  }
  return Buffer.concat([
    Buffer.from(CONTEXT_TAG, "ascii"),
    lengthPrefixed(ctx.modelId),
    le64(ctx.step),
    le64(ctx.batchId),
    ctx.nonce,
    lengthPrefixed(ctx.layerId),
  ]);
}

/** The 32-byte message the trainer signs: SHA-256 of the packed context. */
export function vrfInput(ctx: InvocationContext): Buffer {
  return sha256(packContext(ctx));
}

// Ed25519 raw 32-byte seeds/keys wrapped in the fixed DER envelopes that
// node:crypto expects.
const PKCS8_ED25519_PREFIX = Buffer.from("302e020100300506032b657004220420", "hex");
const SPKI_ED25519_PREFIX = Buffer.from("302a300506032b6570032100", "hex");

export interface SigningKeyPair {
  privateKey: KeyObject;
  publicKey: Buffer;
}

export function keyFromSeed(seed: Buffer): SigningKeyPair {
  if (seed.length !== 32) {
    throw new RangeError("seed must be exactly 32 bytes");
  }
  const privateKey = createPrivateKey({
    key: Buffer.concat([PKCS8_ED25519_PREFIX, seed]),
    format: "der",
    type: "pkcs8",
  });
  const spki = createPublicKey(privateKey).export({ format: "der", type: "spki" });
  return { privateKey, publicKey: Buffer.from(spki.subarray(spki.length - 32)) };
}

export function signEd25519(keys: SigningKeyPair, message: Buffer): Buffer {
  return cryptoSign(null, message, keys.privateKey);
}

export function verifyEd25519(publicKey: Buffer, message: Buffer, signature: Buffer): boolean {
  const key = createPublicKey({
    key: Buffer.concat([SPKI_ED25519_PREFIX, publicKey]),
    format: "der",
    type: "spki",
  });
  return cryptoVerify(null, message, key, signature);
}

/**
 * Hash-expander words: block i is SHA-256(seed || le64(i)); each block
 * yields eight little-endian u32 words, consumed in order.
 */
export function prgWords(seed: Buffer, n: number): number[] {
  const words: number[] = new Array(n);
  for (let block = 0; block * 8 < n; block++) {
    const digest = sha256(Buffer.concat([seed, le64(BigInt(block))]));
    for (let j = 0; j < 8 && block * 8 + j < n; j++) {
      words[block * 8 + j] = digest.readUInt32LE(4 * j);
    }
  }
  return words;
}

/** Exact drop threshold: floor(pNum * 2^32 / pDen). */
export function threshold(pNum: number, pDen: number): number {
  if (!Number.isInteger(pNum) || !Number.isInteger(pDen)) {
    throw new RangeError("p must be an integer ratio");
  }
  if (pDen < 1 || pNum < 0 || pNum > pDen) {
    throw new RangeError("p must satisfy 0 <= pNum <= pDen, pDen >= 1");
  }
  return Number((BigInt(pNum) << 32n) / BigInt(pDen));
}

/** Keep mask over n elements: byte j is 1 when word j >= threshold. */
export function generateMask(seed: Buffer, pNum: number, pDen: number, n: number): Buffer {
  const t = threshold(pNum, pDen);
  const words = prgWords(seed, n);
  const mask = Buffer.alloc(n);
  for (let j = 0; j < n; j++) {
    mask[j] = (words[j] as number) >= t ? 1 : 0;
  }
  return mask;
}

/** Nearest integer, ties away from zero. Exact for the quantization domain. */
export function roundHalfAwayFromZero(value: number): number {
  if (!Number.isFinite(value)) {
    throw new RangeError("value must be finite");
  }
  const magnitude = Math.abs(value);
  const floor = Math.floor(magnitude);
  const rounded = magnitude - floor >= 0.5 ? floor + 1 : floor;
  return value < 0 ? -rounded : rounded;
}

/** q_j = round(x_j * scale), ties away from zero, saturated to i32. */
export function quantize(data: readonly number[], scale: number): Int32Array {
  if (!Number.isInteger(scale) || scale < 1) {
    throw new RangeError("scale must be a positive integer");
  }
  const out = new Int32Array(data.length);
  for (let j = 0; j < data.length; j++) {
    const rounded = roundHalfAwayFromZero((data[j] as number) * scale);
    out[j] = Math.min(I32_MAX, Math.max(I32_MIN, rounded));
  }
  return out;
}

/**
 * round(value * num / den) with ties away from zero, saturated to i32.
 * BigInt arithmetic keeps every intermediate exact.
 */
export function scaleRoundDiv(value: number, num: number, den: number): number {
  if (!Number.isInteger(value) || !Number.isInteger(num) || !Number.isInteger(den)) {
    throw new RangeError("arguments must be integers");
  }
  if (den < 1) {
    throw new RangeError("den must be >= 1");
  }
  if (num < 0) {
    throw new RangeError("num must be >= 0");
  }
  const product = BigInt(value) * BigInt(num);
  const divisor = BigInt(den);
  const negative = product < 0n;
  const magnitude = negative ? -product : product;
  let quotient = magnitude / divisor;
  if (2n * (magnitude % divisor) >= divisor) {
    quotient += 1n;
  }
  const signed = negative ? -quotient : quotient;
  if (signed > BigInt(I32_MAX)) return I32_MAX;
  if (signed < BigInt(I32_MIN)) return I32_MIN;
  return Number(signed);
}

/** Inverted dropout on quantized values: kept lanes rescale by den/(den-num), dropped lanes zero. */
export function applyQuantizedDropout(
  q: Int32Array,
  mask: Buffer,
  pNum: number,
  pDen: number,
): Int32Array {
  if (mask.length !== q.length) {
    throw new RangeError("mask length must match element count");
  }
  if (pNum >= pDen) {
    throw new RangeError("pNum must be < pDen");
  }
  const out = new Int32Array(q.length);
  for (let j = 0; j < q.length; j++) {
    out[j] = mask[j] ? scaleRoundDiv(q[j] as number, pDen, pDen - pNum) : 0;
  }
  return out;
}

export function serializeI32LE(values: Int32Array): Buffer {
  const out = Buffer.alloc(4 * values.length);
  for (let j = 0; j < values.length; j++) {
    out.writeInt32LE(values[j] as number, 4 * j);
  }
  return out;
}

export interface Journal {
  maskHash: Buffer;
  outputHash: Buffer;
  n: number;
}

export function computeJournal(mask: Buffer, qOut: Int32Array): Journal {
  return {
    maskHash: sha256(mask),
    outputHash: sha256(serializeI32LE(qOut)),
    n: qOut.length,
  };
}

/** The domain-tagged bytes an attestation signs: tag, mask hash, output hash, le64 count. */
export function journalCommitmentBytes(journal: Journal): Buffer {
  return Buffer.concat([
    Buffer.from(JOURNAL_TAG, "ascii"),
    journal.maskHash,
    journal.outputHash,
    le64(BigInt(journal.n)),
  ]);
}

type JsonValue = string | number | boolean | null | JsonValue[] | { [key: string]: JsonValue };

/**
 * Canonical JSON: keys sorted by code point, no insignificant whitespace,
 * non-ASCII left unescaped. Matches the producer byte for byte on the
 * integer/string/array/object domain proofs live in.
 */
export function canonicalJson(value: JsonValue): string {
  if (value === null || typeof value === "boolean" || typeof value === "string") {
    return JSON.stringify(value);
  }
  if (typeof value === "number") {
    if (!Number.isInteger(value)) {
      throw new RangeError("canonical form only covers integers");
    }
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return `[${value.map(canonicalJson).join(",")}]`;
  }
  const keys = Object.keys(value).sort();
  const parts = keys.map((k) => `${JSON.stringify(k)}:${canonicalJson(value[k] as JsonValue)}`);
  return `{${parts.join(",")}}`;
}
