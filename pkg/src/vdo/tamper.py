"""Tamper harness: three attack classes replayed against honest transcripts.

Each trial builds one honest proof, mutates exactly one targeted aspect of
it (mutation isolation, so detection attribution means something), and runs
the verifier. A trial counts as detected only when the verdict is REJECT
with a reason code in the attack's expected family.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .attest import ReexecutionBackend
from .context import Context
from .crypto import SigningKeyPair, keygen, sha256, sign_deterministic
from .prg import DropoutParams
from .protocol import (
    DropoutProof,
    RejectReason,
    Verdict,
    VrfPacket,
    run_verifiable_dropout,
    verify_proof,
)
from .quant import FloatTensor

TAMPER_CLASSES = ("seed", "probability", "activation")

EXPECTED_REASONS: dict[str, frozenset[RejectReason]] = {
    "seed": frozenset(
        {RejectReason.VRF_KEY, RejectReason.VRF_SIG, RejectReason.SEED_DERIVATION}
    ),
    "probability": frozenset({RejectReason.STATEMENT_MISMATCH}),
    "activation": frozenset({RejectReason.STATEMENT_MISMATCH}),
}

# Probabilities spaced >= 0.1 apart: swapping any two changes the threshold
# by >= 0.1 * 2^32, so at n >= 1024 the induced masks collide with
# probability under 0.9^1024.
_PROBABILITIES = (
    DropoutParams(0, 1),
    DropoutParams(1, 10),
    DropoutParams(1, 4),
    DropoutParams(1, 2),
    DropoutParams(3, 4),
    DropoutParams(9, 10),
)
_SHAPES = ((1024,), (2048,), (32, 64), (4096,))

Verifier = Callable[[DropoutProof, Context, bytes, bytes], Verdict]


@dataclass(frozen=True)
class TamperTrial:
    attack: str
    mutation: str
    detected: bool
    reason_code: str


@dataclass(frozen=True)
class TamperReport:
    trials: tuple[TamperTrial, ...]

    def rate(self, attack: str) -> float:
        relevant = [t for t in self.trials if t.attack == attack]
        if not relevant:
            raise ValueError(f"no trials for attack class {attack!r}")
        return sum(t.detected for t in relevant) / len(relevant)

    @property
    def all_detected(self) -> bool:
        return all(t.detected for t in self.trials)


def _random_context(rng: np.random.Generator) -> Context:
    return Context(
        model_id=f"model-{rng.integers(1, 10**6)}",
        step=int(rng.integers(0, 2**48)),
        batch_id=int(rng.integers(0, 2**48)),
        nonce=rng.bytes(32),
        layer_id=f"block{rng.integers(0, 64)}.dropout",
    )


def _random_tensor(rng: np.random.Generator, shape: tuple[int, ...]) -> FloatTensor:
    data = rng.normal(0.0, 1.0, size=int(np.prod(shape)))
    return FloatTensor(shape=shape, data=np.clip(data, -8.0, 8.0))


def _mutate_seed(
    proof: DropoutProof, rng: np.random.Generator, rogue: SigningKeyPair
) -> tuple[DropoutProof, str]:
    packet = proof.vrf
    mode = rng.integers(0, 5)
    if mode == 0:
        tampered = dataclasses.replace(packet, y=rng.bytes(32))
        label = "replace-y"
    elif mode == 1:
        flipped = bytearray(packet.y)
        flipped[rng.integers(0, len(flipped))] ^= 1 << rng.integers(0, 8)
        tampered = dataclasses.replace(packet, y=bytes(flipped))
        label = "bitflip-y"
    elif mode == 2:
        tampered = dataclasses.replace(packet, pi=rng.bytes(64))
        label = "replace-pi"
    elif mode == 3:
        flipped = bytearray(packet.pi)
        flipped[rng.integers(0, len(flipped))] ^= 1 << rng.integers(0, 8)
        tampered = dataclasses.replace(packet, pi=bytes(flipped))
        label = "bitflip-pi"
    else:
        # Internally consistent packet under an untrusted key.
        pi = sign_deterministic(rogue, packet.x)
        tampered = VrfPacket(pk=rogue.public_key, x=packet.x, y=sha256(pi), pi=pi)
        label = "rogue-key-packet"
    return dataclasses.replace(proof, vrf=tampered), f"seed:{label}"


def _mutate_probability(
    proof: DropoutProof, rng: np.random.Generator
) -> tuple[DropoutProof, str]:
    current = Fraction(proof.statement.params.p_num, proof.statement.params.p_den)
    candidates = [p for p in _PROBABILITIES if Fraction(p.p_num, p.p_den) != current]
    claimed = candidates[rng.integers(0, len(candidates))]
    statement = dataclasses.replace(proof.statement, params=claimed)
    label = f"probability:claim-{claimed.p_num}/{claimed.p_den}"
    return dataclasses.replace(proof, statement=statement), label


def _mutate_activation(
    proof: DropoutProof, rng: np.random.Generator
) -> tuple[DropoutProof, str]:
    if rng.integers(0, 2) == 0:
        fake = rng.bytes(32)
        label = "activation:random-output-hash"
    else:
        flipped = bytearray(proof.statement.output_hash)
        flipped[rng.integers(0, len(flipped))] ^= 1 << rng.integers(0, 8)
        fake = bytes(flipped)
        label = "activation:bitflip-output-hash"
    statement = dataclasses.replace(proof.statement, output_hash=fake)
    return dataclasses.replace(proof, statement=statement), label


def run_tamper_trials(
    trials_per_class: int,
    seed: int = 0,
    classes: Sequence[str] = TAMPER_CLASSES,
    verifier: Verifier = verify_proof,
) -> TamperReport:
    """Run ``trials_per_class`` trials for each attack class.

    ``verifier`` is a test hook: substituting a deliberately weakened
    verifier must drag the detection rate below 100%, which checks that the
    harness itself can fail.
    """
    if trials_per_class < 1:
        raise ValueError("trials_per_class must be >= 1")
    unknown = set(classes) - set(TAMPER_CLASSES)
    if unknown:
        raise ValueError(f"unknown tamper classes: {sorted(unknown)}")
    rng = np.random.default_rng(seed)
    backend = ReexecutionBackend()
    trials: list[TamperTrial] = []
    for attack in classes:
        for _ in range(trials_per_class):
            trainer = keygen(rng.bytes(32))
            attestor = keygen(rng.bytes(32))
            rogue = keygen(rng.bytes(32))
            ctx = _random_context(rng)
            shape = _SHAPES[rng.integers(0, len(_SHAPES))]
            params = _PROBABILITIES[rng.integers(0, len(_PROBABILITIES))]
            tensor = _random_tensor(rng, shape)
            _, proof = run_verifiable_dropout(
                tensor, ctx, params, 65536, trainer, backend, attestor
            )
            if attack == "seed":
                tampered, mutation = _mutate_seed(proof, rng, rogue)
            elif attack == "probability":
                tampered, mutation = _mutate_probability(proof, rng)
            else:
                tampered, mutation = _mutate_activation(proof, rng)
            verdict = verifier(tampered, ctx, trainer.public_key, attestor.public_key)
            detected = (not verdict.accepted) and verdict.reason in EXPECTED_REASONS[attack]
            reason = verdict.reason.value if verdict.reason is not None else "ACCEPT"
            trials.append(
                TamperTrial(attack=attack, mutation=mutation, detected=detected, reason_code=reason)
            )
    return TamperReport(trials=tuple(trials))
