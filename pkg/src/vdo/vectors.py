"""Golden vector files shared with independent reimplementations.

One JSON file carries, per case: the invocation context, the derived seed,
the first PRG words, the full keep mask, the float input and its quantized
image, the dropout output, the journal, and the complete proof object.
Everything is reproducible from public constants, so emit is byte-identical
across machines; the keys involved are fixtures, not secrets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attest import ReexecutionBackend
from .context import Context, vrf_input
from .crypto import keygen, sha256
from .prg import DropoutParams, generate_mask, prg_words
from .protocol import (
    canonical_json_bytes,
    derive_seed,
    proof_to_dict,
    run_verifiable_dropout,
)
from .quant import FloatTensor, quantize
from .transform import apply_quantized_dropout, compute_journal

VECTOR_FORMAT = "vdo-vectors-v1"

TRAINER_FIXTURE_SEED = sha256(b"vdo-fixture-trainer-v1")
ATTESTOR_FIXTURE_SEED = sha256(b"vdo-fixture-attestor-v1")

FULL_GRID_COUNTS = (64, 1024, 4096, 65536)
SMALL_GRID_COUNTS = (64, 1024)
GRID_PROBABILITIES = (
    DropoutParams(0, 1),
    DropoutParams(1, 10),
    DropoutParams(1, 4),
    DropoutParams(1, 2),
    DropoutParams(9, 10),
)
_SHAPES_BY_COUNT = {64: (64,), 1024: (32, 32), 4096: (4096,), 65536: (256, 256)}
_SCALE = 65536
_PRG_WORD_SAMPLE = 16


class VectorFormatError(ValueError):
    """Raised when a vector file does not match the expected schema."""


@dataclass(frozen=True)
class VectorCheckResult:
    checked: int
    mismatches: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _case_id(n: int, params: DropoutParams) -> str:
    return f"n{n:05d}-p{params.p_num}of{params.p_den}"


def _case_input(case_id: str, n: int) -> FloatTensor:
    # Inputs come from the hash expander too (under a distinct seed), so the
    # file never depends on any library's RNG stream. Values are exact
    # multiples of 2^-29 in [-4, 4), which exercises quantization ties.
    data_seed = sha256(b"vdo-vector-data:" + case_id.encode("ascii"))
    words = prg_words(data_seed, n).astype(np.float64)
    shape = _SHAPES_BY_COUNT[n]
    return FloatTensor(shape=shape, data=(words - 2.0**31) / 2.0**29)


def _case_context(case_id: str, index: int, n: int) -> Context:
    return Context(
        model_id="vector-fixture-model",
        step=index,
        batch_id=n,
        nonce=sha256(b"vdo-vector-nonce:" + case_id.encode("ascii")),
        layer_id="fixture.dropout",
    )


def build_vector_cases(counts: tuple[int, ...] = FULL_GRID_COUNTS) -> dict:
    """Build the vector-file object for the given element-count grid."""
    trainer = keygen(TRAINER_FIXTURE_SEED)
    attestor = keygen(ATTESTOR_FIXTURE_SEED)
    backend = ReexecutionBackend()
    cases = []
    index = 0
    for n in counts:
        for params in GRID_PROBABILITIES:
            case_id = _case_id(n, params)
            ctx = _case_context(case_id, index, n)
            tensor = _case_input(case_id, n)
            _, proof = run_verifiable_dropout(
                tensor, ctx, params, _SCALE, trainer, backend, attestor
            )
            seed = proof.vrf.y
            mask = generate_mask(seed, params, n)
            q_in = quantize(tensor, _SCALE)
            q_out = apply_quantized_dropout(q_in, mask, params)
            journal = compute_journal(mask, q_out)
            cases.append(
                {
                    "id": case_id,
                    "context": {
                        "model_id": ctx.model_id,
                        "step": ctx.step,
                        "batch_id": ctx.batch_id,
                        "nonce_hex": ctx.nonce.hex(),
                        "layer_id": ctx.layer_id,
                    },
                    "p_num": params.p_num,
                    "p_den": params.p_den,
                    "scale": _SCALE,
                    "shape": list(tensor.shape),
                    "x_hex": proof.vrf.x.hex(),
                    "seed_hex": seed.hex(),
                    "x_in": tensor.data.tolist(),
                    "q_in": q_in.q.tolist(),
                    "prg_words": prg_words(seed, min(_PRG_WORD_SAMPLE, n)).tolist(),
                    "mask_hex": mask.hex(),
                    "q_out": q_out.q.tolist(),
                    "journal": {
                        "mask_hash_hex": journal.mask_hash.hex(),
                        "output_hash_hex": journal.output_hash.hex(),
                        "n": journal.element_count,
                    },
                    "proof": proof_to_dict(proof),
                }
            )
            index += 1
    return {
        "format": VECTOR_FORMAT,
        "trainer_pk_hex": trainer.public_key.hex(),
        "attestor_pk_hex": attestor.public_key.hex(),
        "cases": cases,
    }


def emit_vector_file(path: Path | str, counts: tuple[int, ...] = FULL_GRID_COUNTS) -> int:
    """Write the vector file; returns the number of cases."""
    obj = build_vector_cases(counts)
    Path(path).write_bytes(canonical_json_bytes(obj) + b"\n")
    return len(obj["cases"])


def _load_vector_file(path: Path | str) -> dict:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise VectorFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or obj.get("format") != VECTOR_FORMAT:
        raise VectorFormatError(f"{path}: expected format {VECTOR_FORMAT!r}")
    for key in ("trainer_pk_hex", "attestor_pk_hex", "cases"):
        if key not in obj:
            raise VectorFormatError(f"{path}: missing {key!r}")
    if not isinstance(obj["cases"], list):
        raise VectorFormatError(f"{path}: cases must be a list")
    return obj


def check_vector_file(path: Path | str) -> VectorCheckResult:
    """Re-derive every case from first inputs and compare all recorded values."""
    obj = _load_vector_file(path)
    trainer = keygen(TRAINER_FIXTURE_SEED)
    attestor = keygen(ATTESTOR_FIXTURE_SEED)
    backend = ReexecutionBackend()
    mismatches: list[str] = []
    if obj["trainer_pk_hex"] != trainer.public_key.hex():
        mismatches.append("file: trainer_pk_hex does not match the fixture trainer key")
    if obj["attestor_pk_hex"] != attestor.public_key.hex():
        mismatches.append("file: attestor_pk_hex does not match the fixture attestor key")

    for position, case in enumerate(obj["cases"]):
        case_id = case.get("id") if isinstance(case, dict) else None
        label = case_id or f"case[{position}]"
        try:
            ctx = Context(
                model_id=case["context"]["model_id"],
                step=case["context"]["step"],
                batch_id=case["context"]["batch_id"],
                nonce=bytes.fromhex(case["context"]["nonce_hex"]),
                layer_id=case["context"]["layer_id"],
            )
            params = DropoutParams(case["p_num"], case["p_den"])
            scale = case["scale"]
            if not isinstance(scale, int) or isinstance(scale, bool) or scale < 1:
                raise ValueError("scale must be a positive integer")
            shape = tuple(case["shape"])
            tensor = FloatTensor(shape=shape, data=np.asarray(case["x_in"], dtype=np.float64))
        except (KeyError, TypeError, ValueError) as exc:
            mismatches.append(f"{label}: malformed case ({exc})")
            continue

        def expect(field: str, actual: object, recorded: object) -> None:
            if actual != recorded:
                mismatches.append(f"{label}: {field} mismatch")

        expect("x_hex", vrf_input(ctx).hex(), case.get("x_hex"))
        packet = derive_seed(ctx, trainer)
        expect("seed_hex", packet.y.hex(), case.get("seed_hex"))
        n = tensor.n
        expect(
            "prg_words",
            prg_words(packet.y, min(_PRG_WORD_SAMPLE, n)).tolist(),
            case.get("prg_words"),
        )
        mask = generate_mask(packet.y, params, n)
        expect("mask_hex", mask.hex(), case.get("mask_hex"))
        q_in = quantize(tensor, scale)
        expect("q_in", q_in.q.tolist(), case.get("q_in"))
        q_out = apply_quantized_dropout(q_in, mask, params)
        expect("q_out", q_out.q.tolist(), case.get("q_out"))
        journal = compute_journal(mask, q_out)
        expect(
            "journal",
            {
                "mask_hash_hex": journal.mask_hash.hex(),
                "output_hash_hex": journal.output_hash.hex(),
                "n": journal.element_count,
            },
            case.get("journal"),
        )
        _, proof = run_verifiable_dropout(tensor, ctx, params, scale, trainer, backend, attestor)
        recorded_proof = case.get("proof")
        if not isinstance(recorded_proof, dict) or canonical_json_bytes(
            proof_to_dict(proof)
        ) != canonical_json_bytes(recorded_proof):
            mismatches.append(f"{label}: proof mismatch")
    return VectorCheckResult(checked=len(obj["cases"]), mismatches=tuple(mismatches))
