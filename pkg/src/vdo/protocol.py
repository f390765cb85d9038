"""End-to-end prover runner, tripartite verifier, and proof wire format.

A DropoutProof bundles the public claim (Statement), the seed-derivation
packet (VrfPacket), and the attestation (Receipt). The verifier re-derives
everything it can from data it already trusts: its own expected context, the
trainer and attestor public keys it was configured with, and the packet's
public seed. Nothing inside the proof is taken at face value.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

from .attest import AttestationBackend, ProverInput, Receipt, check_receipt
from .context import Context, vrf_input
from .crypto import (
    DIGEST_SIZE,
    PUBLIC_KEY_SIZE,
    SIGNATURE_SIZE,
    SigningKeyPair,
    sha256,
    sign_deterministic,
    verify_signature,
)
from .prg import DropoutParams, generate_mask
from .quant import FloatTensor, quantize
from .transform import Journal, apply_float_dropout

PROOF_VERSION = "vdo-proof-v1"
_U64_MAX = 2**64 - 1


class MalformedProofError(ValueError):
    """Raised by decode_proof when the bytes are not a well-formed proof."""


class RejectReason(str, Enum):
    """Stable reason codes attributing a REJECT to the first failed check."""

    MALFORMED = "MALFORMED"
    VRF_KEY = "VRF_KEY"
    VRF_SIG = "VRF_SIG"
    SEED_DERIVATION = "SEED_DERIVATION"
    RECEIPT = "RECEIPT"
    STATEMENT_MISMATCH = "STATEMENT_MISMATCH"
    CONTEXT_MISMATCH = "CONTEXT_MISMATCH"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: RejectReason | None = None
    detail: str = ""

    def __str__(self) -> str:
        if self.accepted:
            return "ACCEPT"
        tail = f" ({self.detail})" if self.detail else ""
        return f"REJECT {self.reason.value}{tail}"


def _reject(reason: RejectReason, detail: str) -> Verdict:
    return Verdict(accepted=False, reason=reason, detail=detail)


_ACCEPT = Verdict(accepted=True)


@dataclass(frozen=True)
class VrfPacket:
    """Seed-derivation packet (pk, x, y, pi).

    Construction checks only field widths; the defining relations
    (pi signs x under pk, y = sha256(pi)) are the verifier's check 1, so
    tampered packets remain representable.
    """

    pk: bytes
    x: bytes
    y: bytes
    pi: bytes

    def __post_init__(self) -> None:
        widths = (
            ("pk", self.pk, PUBLIC_KEY_SIZE),
            ("x", self.x, DIGEST_SIZE),
            ("y", self.y, DIGEST_SIZE),
            ("pi", self.pi, SIGNATURE_SIZE),
        )
        for name, value, size in widths:
            if not isinstance(value, bytes) or len(value) != size:
                raise ValueError(f"{name} must be exactly {size} bytes")


@dataclass(frozen=True)
class Statement:
    """The public claim: context, dropout params, scale, shape, commitments.

    element_count = product(shape) holds for every honestly assembled
    statement but is deliberately not a construction invariant; it is one of
    the verifier's consistency checks and must stay representable when
    violated.
    """

    context: Context
    params: DropoutParams
    scale: int
    element_count: int
    shape: tuple[int, ...]
    mask_hash: bytes
    output_hash: bytes

    def __post_init__(self) -> None:
        if not isinstance(self.scale, int) or isinstance(self.scale, bool) or self.scale < 1:
            raise ValueError("scale must be a positive integer")
        if (
            not isinstance(self.element_count, int)
            or isinstance(self.element_count, bool)
            or not 0 <= self.element_count <= _U64_MAX
        ):
            raise ValueError("element_count out of unsigned 64-bit range")
        if not isinstance(self.shape, tuple) or any(
            not isinstance(d, int) or isinstance(d, bool) or d < 0 for d in self.shape
        ):
            raise ValueError("shape must be a tuple of non-negative ints")
        for name, value in (("mask_hash", self.mask_hash), ("output_hash", self.output_hash)):
            if not isinstance(value, bytes) or len(value) != DIGEST_SIZE:
                raise ValueError(f"{name} must be exactly {DIGEST_SIZE} bytes")


@dataclass(frozen=True)
class DropoutProof:
    """Audit artifact: statement + VRF packet + receipt, versioned."""

    version: str
    statement: Statement
    vrf: VrfPacket
    receipt: Receipt

    def __post_init__(self) -> None:
        if not isinstance(self.version, str) or not self.version:
            raise ValueError("version must be a non-empty string")


def derive_seed(ctx: Context, keys: SigningKeyPair) -> VrfPacket:
    """Derive the context-bound seed packet.

    x = sha256(pack(ctx)); pi = deterministic signature over x; y =
    sha256(pi). Determinism of the signature makes y a verifiable function
    of (sk, ctx): one seed per context, and anyone holding the packet can
    check it.
    """
    x = vrf_input(ctx)
    pi = sign_deterministic(keys, x)
    return VrfPacket(pk=keys.public_key, x=x, y=sha256(pi), pi=pi)


def run_verifiable_dropout(
    x: FloatTensor,
    ctx: Context,
    params: DropoutParams,
    scale: int,
    trainer_keys: SigningKeyPair,
    backend: AttestationBackend,
    attestor_key: SigningKeyPair,
) -> tuple[FloatTensor, DropoutProof]:
    """Run one attested dropout invocation.

    Returns the float-path output (what training consumes) and the proof.
    The attested computation is the quantized path; its journal hashes are
    copied into the statement. Any component error propagates before a
    proof object exists, so there is no partial artifact to leak.
    """
    packet = derive_seed(ctx, trainer_keys)
    mask = generate_mask(packet.y, params, x.n)
    float_out = apply_float_dropout(x, mask, params)
    qt = quantize(x, scale)
    receipt = backend.prove(ProverInput(seed=packet.y, params=params, q=qt), attestor_key)
    statement = Statement(
        context=ctx,
        params=params,
        scale=scale,
        element_count=x.n,
        shape=x.shape,
        mask_hash=receipt.journal.mask_hash,
        output_hash=receipt.journal.output_hash,
    )
    proof = DropoutProof(version=PROOF_VERSION, statement=statement, vrf=packet, receipt=receipt)
    return float_out, proof


def verify_proof(
    proof: DropoutProof,
    expected: Context,
    trusted_trainer_pk: bytes,
    trusted_attestor_pk: bytes,
) -> Verdict:
    """Tripartite check; ACCEPT only if every stage passes.

    Check 1 (seed derivation): the packet's key is the trusted trainer key,
    its x matches the context the verifier expected (a mismatch means the
    proof was built under a different context or nonce), the signature
    verifies, and y re-derives from pi.

    Check 2 (receipt): the attestation verifies under a known backend and
    the receipt's authority is the trusted attestor key.

    Check 3 (statement consistency): the receipt's journal matches the
    statement's commitments and count, the statement's context matches the
    expected one, the count matches the shape, and the statement's dropout
    params actually reproduce the committed mask from the packet's public
    seed. The last step is what binds p to the receipt: the journal does
    not contain p, so without re-deriving the mask a prover could claim any
    probability alongside an honest receipt.

    The reason code names the first failed check; verification never
    raises on well-typed inputs.
    """
    if proof.version != PROOF_VERSION:
        return _reject(RejectReason.MALFORMED, f"unsupported version {proof.version!r}")

    # Check 1: VRF packet.
    if proof.vrf.pk != trusted_trainer_pk:
        return _reject(RejectReason.VRF_KEY, "packet pk is not the trusted trainer key")
    if proof.vrf.x != vrf_input(expected):
        return _reject(RejectReason.CONTEXT_MISMATCH, "packet x does not match expected context")
    if not verify_signature(proof.vrf.pk, proof.vrf.x, proof.vrf.pi):
        return _reject(RejectReason.VRF_SIG, "signature does not verify over x")
    if sha256(proof.vrf.pi) != proof.vrf.y:
        return _reject(RejectReason.SEED_DERIVATION, "y is not sha256(pi)")

    # Check 2: receipt.
    if proof.receipt.attestor_pk != trusted_attestor_pk:
        return _reject(RejectReason.RECEIPT, "receipt attestor key is not trusted")
    receipt_check = check_receipt(proof.receipt)
    if not receipt_check.ok:
        return _reject(RejectReason.RECEIPT, receipt_check.reason)

    # Check 3: statement consistency.
    statement = proof.statement
    journal = proof.receipt.journal
    if journal.mask_hash != statement.mask_hash:
        return _reject(RejectReason.STATEMENT_MISMATCH, "journal mask hash != statement")
    if journal.output_hash != statement.output_hash:
        return _reject(RejectReason.STATEMENT_MISMATCH, "journal output hash != statement")
    if journal.element_count != statement.element_count:
        return _reject(RejectReason.STATEMENT_MISMATCH, "journal element count != statement")
    if statement.context != expected:
        return _reject(RejectReason.CONTEXT_MISMATCH, "statement context != expected context")
    if statement.element_count != math.prod(statement.shape):
        return _reject(RejectReason.STATEMENT_MISMATCH, "element count != product(shape)")
    derived_mask = generate_mask(proof.vrf.y, statement.params, statement.element_count)
    if sha256(derived_mask) != statement.mask_hash:
        return _reject(
            RejectReason.STATEMENT_MISMATCH,
            "statement params do not reproduce the committed mask",
        )
    return _ACCEPT


# ---------------------------------------------------------------------------
# Wire format
# ---------------------------------------------------------------------------


def canonical_json_bytes(obj: object) -> bytes:
    """Canonical JSON: sorted keys, no insignificant whitespace, UTF-8."""
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False
    ).encode("utf-8")


def proof_to_dict(proof: DropoutProof) -> dict:
    s = proof.statement
    return {
        "version": proof.version,
        "statement": {
            "model_id": s.context.model_id,
            "step": s.context.step,
            "batch_id": s.context.batch_id,
            "nonce_hex": s.context.nonce.hex(),
            "layer_id": s.context.layer_id,
            "p_num": s.params.p_num,
            "p_den": s.params.p_den,
            "scale": s.scale,
            "n": s.element_count,
            "shape": list(s.shape),
            "mask_hash_hex": s.mask_hash.hex(),
            "output_hash_hex": s.output_hash.hex(),
        },
        "vrf": {
            "pk_hex": proof.vrf.pk.hex(),
            "x_hex": proof.vrf.x.hex(),
            "y_hex": proof.vrf.y.hex(),
            "pi_hex": proof.vrf.pi.hex(),
        },
        "receipt": {
            "backend_id": proof.receipt.backend_id,
            "journal": {
                "mask_hash_hex": proof.receipt.journal.mask_hash.hex(),
                "output_hash_hex": proof.receipt.journal.output_hash.hex(),
                "n": proof.receipt.journal.element_count,
            },
            "attestation_hex": proof.receipt.attestation.hex(),
            "attestor_pk_hex": proof.receipt.attestor_pk.hex(),
        },
    }


def encode_proof(proof: DropoutProof) -> bytes:
    """Canonical proof bytes; equal proofs encode to equal bytes."""
    return canonical_json_bytes(proof_to_dict(proof))


def _expect_keys(obj: object, where: str, keys: set[str]) -> dict:
    if not isinstance(obj, dict):
        raise MalformedProofError(f"{where}: expected an object")
    missing = keys - obj.keys()
    extra = obj.keys() - keys
    if missing:
        raise MalformedProofError(f"{where}: missing fields {sorted(missing)}")
    if extra:
        raise MalformedProofError(f"{where}: unexpected fields {sorted(extra)}")
    return obj


def _get_str(obj: dict, where: str, key: str) -> str:
    value = obj[key]
    if not isinstance(value, str):
        raise MalformedProofError(f"{where}.{key}: expected a string")
    return value


def _get_int(obj: dict, where: str, key: str) -> int:
    value = obj[key]
    if not isinstance(value, int) or isinstance(value, bool):
        raise MalformedProofError(f"{where}.{key}: expected an integer")
    return value


def _get_hex(obj: dict, where: str, key: str, size: int | None = None) -> bytes:
    text = _get_str(obj, where, key)
    try:
        raw = bytes.fromhex(text)
    except ValueError:
        raise MalformedProofError(f"{where}.{key}: invalid hex") from None
    if raw.hex() != text:
        raise MalformedProofError(f"{where}.{key}: hex must be lowercase")
    if size is not None and len(raw) != size:
        raise MalformedProofError(f"{where}.{key}: expected {size} bytes, got {len(raw)}")
    return raw


def proof_from_dict(obj: object) -> DropoutProof:
    """Strictly validate a decoded proof object; raises MalformedProofError."""
    top = _expect_keys(obj, "proof", {"version", "statement", "vrf", "receipt"})
    version = top["version"]
    if version != PROOF_VERSION:
        raise MalformedProofError(f"unsupported proof version {version!r}")

    s = _expect_keys(
        top["statement"],
        "statement",
        {
            "model_id",
            "step",
            "batch_id",
            "nonce_hex",
            "layer_id",
            "p_num",
            "p_den",
            "scale",
            "n",
            "shape",
            "mask_hash_hex",
            "output_hash_hex",
        },
    )
    shape_raw = s["shape"]
    if not isinstance(shape_raw, list) or any(
        not isinstance(d, int) or isinstance(d, bool) for d in shape_raw
    ):
        raise MalformedProofError("statement.shape: expected a list of integers")

    v = _expect_keys(top["vrf"], "vrf", {"pk_hex", "x_hex", "y_hex", "pi_hex"})
    r = _expect_keys(
        top["receipt"], "receipt", {"backend_id", "journal", "attestation_hex", "attestor_pk_hex"}
    )
    j = _expect_keys(r["journal"], "receipt.journal", {"mask_hash_hex", "output_hash_hex", "n"})

    try:
        context = Context(
            model_id=_get_str(s, "statement", "model_id"),
            step=_get_int(s, "statement", "step"),
            batch_id=_get_int(s, "statement", "batch_id"),
            nonce=_get_hex(s, "statement", "nonce_hex", 32),
            layer_id=_get_str(s, "statement", "layer_id"),
        )
        statement = Statement(
            context=context,
            params=DropoutParams(
                p_num=_get_int(s, "statement", "p_num"),
                p_den=_get_int(s, "statement", "p_den"),
            ),
            scale=_get_int(s, "statement", "scale"),
            element_count=_get_int(s, "statement", "n"),
            shape=tuple(shape_raw),
            mask_hash=_get_hex(s, "statement", "mask_hash_hex", DIGEST_SIZE),
            output_hash=_get_hex(s, "statement", "output_hash_hex", DIGEST_SIZE),
        )
        vrf = VrfPacket(
            pk=_get_hex(v, "vrf", "pk_hex", PUBLIC_KEY_SIZE),
            x=_get_hex(v, "vrf", "x_hex", DIGEST_SIZE),
            y=_get_hex(v, "vrf", "y_hex", DIGEST_SIZE),
            pi=_get_hex(v, "vrf", "pi_hex", SIGNATURE_SIZE),
        )
        receipt = Receipt(
            backend_id=_get_str(r, "receipt", "backend_id"),
            journal=Journal(
                mask_hash=_get_hex(j, "receipt.journal", "mask_hash_hex", DIGEST_SIZE),
                output_hash=_get_hex(j, "receipt.journal", "output_hash_hex", DIGEST_SIZE),
                element_count=_get_int(j, "receipt.journal", "n"),
            ),
            attestation=_get_hex(r, "receipt", "attestation_hex"),
            attestor_pk=_get_hex(r, "receipt", "attestor_pk_hex", PUBLIC_KEY_SIZE),
        )
        return DropoutProof(version=version, statement=statement, vrf=vrf, receipt=receipt)
    except MalformedProofError:
        raise
    except (ValueError, TypeError) as exc:
        raise MalformedProofError(str(exc)) from exc


def decode_proof(data: bytes) -> DropoutProof:
    """Parse canonical proof bytes; raises MalformedProofError, never crashes."""
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedProofError(f"not valid JSON: {exc}") from exc
    return proof_from_dict(obj)
