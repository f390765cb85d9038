/**
 * Vector-file checking: re-derive every recorded case from its inputs and
 * report any field that disagrees. The file format is the only interface
 * shared with the producer; all derivation code lives in core.ts.
 */

import { readFileSync } from "node:fs";

import {
  BACKEND_ID,
  InvocationContext,
  Journal,
  PROOF_VERSION,
  SigningKeyPair,
  applyQuantizedDropout,
  computeJournal,
  generateMask,
  journalCommitmentBytes,
  keyFromSeed,
  prgWords,
  quantize,
  serializeI32LE,
  sha256,
  signEd25519,
  vrfInput,
} from "./core.js";

export const VECTOR_FORMAT = "vdo-vectors-v1";
const PRG_WORD_SAMPLE = 16;

// The emitter derives its fixture keys from public constants, so an
// independent checker can re-create the same keys and therefore the same
// deterministic signatures.
const TRAINER_FIXTURE_SEED = sha256(Buffer.from("vdo-fixture-trainer-v1", "ascii"));
const ATTESTOR_FIXTURE_SEED = sha256(Buffer.from("vdo-fixture-attestor-v1", "ascii"));

export class VectorFormatError extends Error {}

/** Structural equality over parsed-JSON values; never throws on odd shapes. */
function jsonEqual(a: unknown, b: unknown): boolean {
  if (a === b) {
    return true;
  }
  if (Array.isArray(a) && Array.isArray(b)) {
    return a.length === b.length && a.every((v, i) => jsonEqual(v, b[i]));
  }
  if (
    typeof a === "object" &&
    typeof b === "object" &&
    a !== null &&
    b !== null &&
    !Array.isArray(a) &&
    !Array.isArray(b)
  ) {
    const ka = Object.keys(a).sort();
    const kb = Object.keys(b).sort();
    return (
      ka.length === kb.length &&
      ka.every(
        (k, i) =>
          k === kb[i] &&
          jsonEqual((a as Record<string, unknown>)[k], (b as Record<string, unknown>)[k]),
      )
    );
  }
  return false;
}

export interface VectorCheckResult {
  checked: number;
  mismatches: string[];
}

function isHex(value: unknown, bytes?: number): value is string {
  return (
    typeof value === "string" &&
    /^[0-9a-f]*$/.test(value) &&
    value.length % 2 === 0 &&
    (bytes === undefined || value.length === 2 * bytes)
  );
}

function asU64(value: unknown, what: string): bigint {
  if (typeof value !== "number" || !Number.isSafeInteger(value) || value < 0) {
    throw new VectorFormatError(`${what} must be a non-negative integer`);
  }
  return BigInt(value);
}

function parseContext(raw: unknown): InvocationContext {
  if (typeof raw !== "object" || raw === null) {
    throw new VectorFormatError("context must be an object");
  }
  const ctx = raw as Record<string, unknown>;
  if (typeof ctx.model_id !== "string" || ctx.model_id.length === 0) {
    throw new VectorFormatError("model_id must be a non-empty string");
  }
  if (typeof ctx.layer_id !== "string" || ctx.layer_id.length === 0) {
    throw new VectorFormatError("layer_id must be a non-empty string");
  }
  if (!isHex(ctx.nonce_hex, 32)) {
    throw new VectorFormatError("nonce_hex must be 64 hex characters");
  }
  return {
    modelId: ctx.model_id,
    step: asU64(ctx.step, "step"),
    batchId: asU64(ctx.batch_id, "batch_id"),
    nonce: Buffer.from(ctx.nonce_hex, "hex"),
    layerId: ctx.layer_id,
  };
}

interface ParsedCase {
  ctx: InvocationContext;
  pNum: number;
  pDen: number;
  scale: number;
  shape: number[];
  n: number;
  xIn: number[];
}

function parseCase(raw: Record<string, unknown>): ParsedCase {
  const ctx = parseContext(raw.context);
  const pNum = raw.p_num;
  const pDen = raw.p_den;
  if (
    typeof pNum !== "number" ||
    typeof pDen !== "number" ||
    !Number.isInteger(pNum) ||
    !Number.isInteger(pDen) ||
    pDen < 1 ||
    pNum < 0 ||
    pNum >= pDen
  ) {
    throw new VectorFormatError("p_num/p_den must be integers with 0 <= p_num < p_den");
  }
  const scale = raw.scale;
  if (typeof scale !== "number" || !Number.isInteger(scale) || scale < 1) {
    throw new VectorFormatError("scale must be a positive integer");
  }
  const shape = raw.shape;
  if (
    !Array.isArray(shape) ||
    shape.length === 0 ||
    !shape.every((d) => typeof d === "number" && Number.isInteger(d) && d >= 0)
  ) {
    throw new VectorFormatError("shape must be a list of non-negative integers");
  }
  const n = shape.reduce((a, b) => a * b, 1);
  const xIn = raw.x_in;
  if (!Array.isArray(xIn) || xIn.length !== n) {
    throw new VectorFormatError("x_in must be a list with product(shape) entries");
  }
  if (!xIn.every((v) => typeof v === "number" && Number.isFinite(v))) {
    throw new VectorFormatError("x_in entries must be finite numbers");
  }
  return { ctx, pNum, pDen, scale, shape: shape as number[], n, xIn: xIn as number[] };
}

interface Derived {
  x: Buffer;
  pi: Buffer;
  y: Buffer;
  mask: Buffer;
  qIn: Int32Array;
  qOut: Int32Array;
  journal: Journal;
}

function derive(parsed: ParsedCase, trainer: SigningKeyPair): Derived {
  const x = vrfInput(parsed.ctx);
  const pi = signEd25519(trainer, x);
  const y = sha256(pi);
  const mask = generateMask(y, parsed.pNum, parsed.pDen, parsed.n);
  const qIn = quantize(parsed.xIn, parsed.scale);
  const qOut = applyQuantizedDropout(qIn, mask, parsed.pNum, parsed.pDen);
  return { x, pi, y, mask, qIn, qOut, journal: computeJournal(mask, qOut) };
}

function rebuildProof(
  parsed: ParsedCase,
  derived: Derived,
  trainer: SigningKeyPair,
  attestor: SigningKeyPair,
): Record<string, unknown> {
  const journal = {
    mask_hash_hex: derived.journal.maskHash.toString("hex"),
    output_hash_hex: derived.journal.outputHash.toString("hex"),
    n: derived.journal.n,
  };
  return {
    version: PROOF_VERSION,
    statement: {
      model_id: parsed.ctx.modelId,
      step: Number(parsed.ctx.step),
      batch_id: Number(parsed.ctx.batchId),
      nonce_hex: parsed.ctx.nonce.toString("hex"),
      layer_id: parsed.ctx.layerId,
      p_num: parsed.pNum,
      p_den: parsed.pDen,
      scale: parsed.scale,
      n: parsed.n,
      shape: parsed.shape,
      mask_hash_hex: journal.mask_hash_hex,
      output_hash_hex: journal.output_hash_hex,
    },
    vrf: {
      pk_hex: trainer.publicKey.toString("hex"),
      x_hex: derived.x.toString("hex"),
      y_hex: derived.y.toString("hex"),
      pi_hex: derived.pi.toString("hex"),
    },
    receipt: {
      backend_id: BACKEND_ID,
      journal,
      attestation_hex: signEd25519(attestor, journalCommitmentBytes(derived.journal)).toString(
        "hex",
      ),
      attestor_pk_hex: attestor.publicKey.toString("hex"),
    },
  };
}

/** Compare one recorded case against a fresh derivation; returns mismatch labels. */
export function runCase(
  raw: Record<string, unknown>,
  label: string,
  trainer: SigningKeyPair,
  attestor: SigningKeyPair,
): string[] {
  let parsed: ParsedCase;
  try {
    parsed = parseCase(raw);
  } catch (err) {
    return [`${label}: malformed case (${err instanceof Error ? err.message : err})`];
  }
  const derived = derive(parsed, trainer);
  const mismatches: string[] = [];
  const expect = (field: string, actual: unknown, recorded: unknown) => {
    if (!jsonEqual(actual, recorded)) {
      mismatches.push(`${label}: ${field} mismatch`);
    }
  };

  expect("x_hex", derived.x.toString("hex"), raw.x_hex);
  expect("seed_hex", derived.y.toString("hex"), raw.seed_hex);
  expect(
    "prg_words",
    prgWords(derived.y, Math.min(PRG_WORD_SAMPLE, parsed.n)),
    raw.prg_words,
  );
  expect("mask_hex", derived.mask.toString("hex"), raw.mask_hex);
  expect("q_in", Array.from(derived.qIn), raw.q_in);
  expect("q_out", Array.from(derived.qOut), raw.q_out);
  expect(
    "journal",
    {
      mask_hash_hex: derived.journal.maskHash.toString("hex"),
      output_hash_hex: derived.journal.outputHash.toString("hex"),
      n: derived.journal.n,
    },
    raw.journal,
  );
  const recordedProof = raw.proof;
  if (
    typeof recordedProof !== "object" ||
    recordedProof === null ||
    !jsonEqual(rebuildProof(parsed, derived, trainer, attestor), recordedProof)
  ) {
    mismatches.push(`${label}: proof mismatch`);
  }
  return mismatches;
}

function loadVectorFile(path: string): Record<string, unknown> {
  const text = readFileSync(path, "utf8");
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch (err) {
    throw new VectorFormatError(`${path}: not valid JSON: ${(err as Error).message}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new VectorFormatError(`${path}: expected a top-level object`);
  }
  const file = obj as Record<string, unknown>;
  if (file.format !== VECTOR_FORMAT) {
    throw new VectorFormatError(`${path}: expected format "${VECTOR_FORMAT}"`);
  }
  for (const key of ["trainer_pk_hex", "attestor_pk_hex", "cases"]) {
    if (!(key in file)) {
      throw new VectorFormatError(`${path}: missing "${key}"`);
    }
  }
  if (!Array.isArray(file.cases)) {
    throw new VectorFormatError(`${path}: cases must be a list`);
  }
  return file;
}

/** Re-derive every case in the file and compare all recorded values. */
export function checkFile(path: string): VectorCheckResult {
  const file = loadVectorFile(path);
  const trainer = keyFromSeed(TRAINER_FIXTURE_SEED);
  const attestor = keyFromSeed(ATTESTOR_FIXTURE_SEED);
  const mismatches: string[] = [];
  if (file.trainer_pk_hex !== trainer.publicKey.toString("hex")) {
    mismatches.push("file: trainer_pk_hex does not match the fixture trainer key");
  }
  if (file.attestor_pk_hex !== attestor.publicKey.toString("hex")) {
    mismatches.push("file: attestor_pk_hex does not match the fixture attestor key");
  }
  const cases = file.cases as unknown[];
  cases.forEach((entry, position) => {
    if (typeof entry !== "object" || entry === null) {
      mismatches.push(`case[${position}]: malformed case (not an object)`);
      return;
    }
    const raw = entry as Record<string, unknown>;
    const label = typeof raw.id === "string" && raw.id ? raw.id : `case[${position}]`;
    mismatches.push(...runCase(raw, label, trainer, attestor));
  });
  return { checked: cases.length, mismatches };
}
