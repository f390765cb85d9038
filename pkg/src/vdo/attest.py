"""Pluggable attestation backends and receipt verification.

A backend takes the private prover inputs (seed, dropout params, quantized
activations), re-derives the dropout execution, and returns a Receipt whose
attestation binds the resulting journal to the attestor's key. The shipped
"reexec-v1" backend is a trusted re-executor: it simply reruns the
computation and signs the journal. That emulation preserves the protocol's
checks but is NOT zero-knowledge and NOT trustless; the attestor sees the
private inputs and must be honest. The interface leaves a seam for a real
proof-system backend with succinct attestations.
"""

from __future__ import annotations

import struct
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Literal

from .crypto import PUBLIC_KEY_SIZE, SigningKeyPair, sign_deterministic, verify_signature
from .prg import SEED_SIZE, DropoutParams, generate_mask
from .quant import QuantizedTensor
from .transform import Journal, apply_quantized_dropout, compute_journal

JOURNAL_TAG = b"VDO-JRN-v1"

ReceiptReason = Literal["ok", "unknown_backend", "bad_attestation", "malformed"]


@dataclass(frozen=True)
class Receipt:
    """Backend evidence that a journal was produced by the attested program."""

    backend_id: str
    journal: Journal
    attestation: bytes
    attestor_pk: bytes

    def __post_init__(self) -> None:
        if not isinstance(self.backend_id, str) or not self.backend_id:
            raise ValueError("backend_id must be a non-empty string")
        if not isinstance(self.attestation, bytes) or not self.attestation:
            raise ValueError("attestation must be non-empty bytes")
        if not isinstance(self.attestor_pk, bytes) or len(self.attestor_pk) != PUBLIC_KEY_SIZE:
            raise ValueError(f"attestor_pk must be {PUBLIC_KEY_SIZE} bytes")


@dataclass(frozen=True)
class ProverInput:
    """Private inputs handed to the attestor: seed, params, quantized tensor."""

    seed: bytes
    params: DropoutParams
    q: QuantizedTensor

    def __post_init__(self) -> None:
        if not isinstance(self.seed, bytes) or len(self.seed) != SEED_SIZE:
            raise ValueError(f"seed must be exactly {SEED_SIZE} bytes")


@dataclass(frozen=True)
class ReceiptCheck:
    """Outcome of a receipt verification with a stable reason tag."""

    ok: bool
    reason: ReceiptReason


def journal_commitment_bytes(journal: Journal) -> bytes:
    """Canonical domain-tagged encoding the attestation signs.

    Layout: ASCII tag "VDO-JRN-v1", mask hash, output hash, le64 element
    count. Fixed-width and tagged so the signature cannot be replayed in any
    other role.
    """
    return b"".join(
        (
            JOURNAL_TAG,
            journal.mask_hash,
            journal.output_hash,
            struct.pack("<Q", journal.element_count),
        )
    )


class AttestationBackend(ABC):
    """Stateless attestation strategy; instances must hold no per-call state."""

    backend_id: str

    @abstractmethod
    def prove(self, input: ProverInput, attestor_key: SigningKeyPair) -> Receipt:
        """Execute the dropout program on private inputs and attest its journal."""

    @abstractmethod
    def verify(self, receipt: Receipt) -> bool:
        """Check the attestation over the canonical journal encoding."""


class ReexecutionBackend(AttestationBackend):
    """Trusted re-execution attestor (not zero-knowledge, not trustless).

    Re-runs generate_mask, apply_quantized_dropout, and compute_journal on
    the prover's inputs, then Ed25519-signs the canonical journal encoding.
    Deterministic given (input, key).
    """

    backend_id = "reexec-v1"

    def prove(self, input: ProverInput, attestor_key: SigningKeyPair) -> Receipt:
        mask = generate_mask(input.seed, input.params, input.q.n)
        q_out = apply_quantized_dropout(input.q, mask, input.params)
        journal = compute_journal(mask, q_out)
        attestation = sign_deterministic(attestor_key, journal_commitment_bytes(journal))
        return Receipt(
            backend_id=self.backend_id,
            journal=journal,
            attestation=attestation,
            attestor_pk=attestor_key.public_key,
        )

    def verify(self, receipt: Receipt) -> bool:
        return verify_signature(
            receipt.attestor_pk,
            journal_commitment_bytes(receipt.journal),
            receipt.attestation,
        )


BACKENDS: dict[str, AttestationBackend] = {
    ReexecutionBackend.backend_id: ReexecutionBackend(),
}

DEFAULT_BACKEND_ID = ReexecutionBackend.backend_id


def get_backend(backend_id: str) -> AttestationBackend:
    try:
        return BACKENDS[backend_id]
    except KeyError:
        raise ValueError(f"unknown attestation backend {backend_id!r}") from None


def prove(
    input: ProverInput,
    attestor_key: SigningKeyPair,
    backend: AttestationBackend | None = None,
) -> Receipt:
    """Produce a Receipt for ``input`` under ``attestor_key``."""
    if backend is None:
        backend = BACKENDS[DEFAULT_BACKEND_ID]
    return backend.prove(input, attestor_key)


def check_receipt(receipt: Receipt) -> ReceiptCheck:
    """Verify ``receipt`` and say why it failed if it did.

    Reasons: "ok"; "unknown_backend" when backend_id names no registered
    backend; "bad_attestation" when the signature check fails.
    """
    backend = BACKENDS.get(receipt.backend_id)
    if backend is None:
        return ReceiptCheck(ok=False, reason="unknown_backend")
    if not backend.verify(receipt):
        return ReceiptCheck(ok=False, reason="bad_attestation")
    return ReceiptCheck(ok=True, reason="ok")


def verify_receipt(receipt: Receipt) -> bool:
    """Boolean projection of check_receipt (true iff attestation verifies)."""
    return check_receipt(receipt).ok
