"""Verifiable dropout: context-bound masks with attested integer replay.

Dropout noise becomes an auditable artifact in three steps: a deterministic
signature binds a seed to the invocation context (model, step, batch, nonce,
layer); a hash-expander PRG turns that seed into a keep mask; and an
attestation backend re-executes the dropout over quantized activations,
committing to a journal (mask hash, output hash, element count) a verifier
can check without rerunning training.
"""

from .attest import (
    BACKENDS,
    DEFAULT_BACKEND_ID,
    AttestationBackend,
    ProverInput,
    Receipt,
    ReceiptCheck,
    ReexecutionBackend,
    check_receipt,
    get_backend,
    prove,
    verify_receipt,
)
from .context import Context, pack, vrf_input
from .crypto import SigningKeyPair, keygen, sha256, sign_deterministic, verify_signature
from .prg import DropoutParams, PrgStream, generate_mask, prg_next_u32, prg_words, threshold
from .protocol import (
    PROOF_VERSION,
    DropoutProof,
    MalformedProofError,
    RejectReason,
    Statement,
    Verdict,
    VrfPacket,
    decode_proof,
    derive_seed,
    encode_proof,
    run_verifiable_dropout,
    verify_proof,
)
from .quant import (
    DEFAULT_SCALE,
    FloatTensor,
    QuantizedTensor,
    dequantize,
    quantize,
    round_half_away_from_zero,
    scale_round_div,
)
from .transform import Journal, apply_float_dropout, apply_quantized_dropout, compute_journal

__version__ = "0.1.0"

__all__ = [
    "AttestationBackend",
    "BACKENDS",
    "Context",
    "DEFAULT_BACKEND_ID",
    "DEFAULT_SCALE",
    "DropoutParams",
    "DropoutProof",
    "FloatTensor",
    "Journal",
    "MalformedProofError",
    "PROOF_VERSION",
    "PrgStream",
    "ProverInput",
    "QuantizedTensor",
    "Receipt",
    "ReceiptCheck",
    "ReexecutionBackend",
    "RejectReason",
    "SigningKeyPair",
    "Statement",
    "Verdict",
    "VrfPacket",
    "apply_float_dropout",
    "apply_quantized_dropout",
    "check_receipt",
    "compute_journal",
    "decode_proof",
    "dequantize",
    "derive_seed",
    "encode_proof",
    "generate_mask",
    "get_backend",
    "keygen",
    "pack",
    "prg_next_u32",
    "prg_words",
    "prove",
    "quantize",
    "round_half_away_from_zero",
    "run_verifiable_dropout",
    "scale_round_div",
    "sha256",
    "sign_deterministic",
    "threshold",
    "verify_proof",
    "verify_receipt",
    "verify_signature",
    "vrf_input",
]
