"""Benchmark runner: baseline vs hash-only vs attested forward passes.

Three variants over the same tensors:

- baseline: unverified float dropout (PRG mask + float apply), no
  commitments, no artifact;
- hash_only: seed derivation, mask, float and quantized paths, and the
  journal hashes, but no attestation;
- attested: the full run with a receipt and encoded proof artifact.

Wall times come from one timed region per (variant, rep); artifact size is
the encoded commitment each variant actually emits. Absolute numbers are
hardware-bound; the stable observables are the variant ordering, growth
with n, and insensitivity to p.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attest import ReexecutionBackend
from .context import Context
from .crypto import keygen, sha256
from .prg import DropoutParams, generate_mask
from .protocol import canonical_json_bytes, derive_seed, encode_proof, run_verifiable_dropout
from .quant import FloatTensor, quantize
from .transform import apply_float_dropout, apply_quantized_dropout, compute_journal

VARIANTS = ("baseline", "hash_only", "attested")
CSV_COLUMNS = ("variant", "shape", "p_num", "p_den", "n", "rep", "wall_time_s", "artifact_bytes")

_TRAINER_SEED = sha256(b"vdo-bench-trainer-key")
_ATTESTOR_SEED = sha256(b"vdo-bench-attestor-key")
_BASELINE_SEED = sha256(b"vdo-bench-baseline-mask-seed")


@dataclass(frozen=True)
class BenchRecord:
    variant: str
    shape: tuple[int, ...]
    p_num: int
    p_den: int
    n: int
    rep: int
    wall_time_s: float
    artifact_bytes: int

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.wall_time_s < 0:
            raise ValueError("wall_time_s must be >= 0")
        if self.variant == "baseline" and self.artifact_bytes != 0:
            raise ValueError("baseline emits no artifact")


def format_shape(shape: tuple[int, ...]) -> str:
    return "x".join(str(d) for d in shape)


def parse_shape(text: str) -> tuple[int, ...]:
    try:
        shape = tuple(int(tok) for tok in text.split("x"))
    except ValueError:
        raise ValueError(f"bad shape {text!r}: expected dims like 4096 or 32x128") from None
    if not shape or any(d < 1 for d in shape):
        raise ValueError(f"bad shape {text!r}: dims must be >= 1")
    return shape


def _journal_artifact_bytes(journal) -> int:
    blob = canonical_json_bytes(
        {
            "mask_hash_hex": journal.mask_hash.hex(),
            "output_hash_hex": journal.output_hash.hex(),
            "n": journal.element_count,
        }
    )
    return len(blob)


def run_bench(
    shapes: list[tuple[int, ...]],
    p_values: list[DropoutParams],
    reps: int = 5,
    scale: int = 65536,
    seed: int = 0,
) -> list[BenchRecord]:
    """Time every (variant, shape, p) cell ``reps`` times."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    rng = np.random.default_rng(seed)
    trainer = keygen(_TRAINER_SEED)
    attestor = keygen(_ATTESTOR_SEED)
    backend = ReexecutionBackend()
    records: list[BenchRecord] = []
    for shape in shapes:
        n = int(np.prod(shape))
        tensor = FloatTensor(shape=shape, data=np.clip(rng.normal(0.0, 1.0, n), -8.0, 8.0))
        for params in p_values:
            for rep in range(reps):
                ctx = Context(
                    model_id="bench-model",
                    step=rep,
                    batch_id=0,
                    nonce=bytes(rng.bytes(32)),
                    layer_id=f"bench.{format_shape(shape)}",
                )

                start = time.perf_counter()
                mask = generate_mask(_BASELINE_SEED, params, n)
                apply_float_dropout(tensor, mask, params)
                elapsed = time.perf_counter() - start
                records.append(
                    BenchRecord("baseline", shape, params.p_num, params.p_den, n, rep, elapsed, 0)
                )

                start = time.perf_counter()
                packet = derive_seed(ctx, trainer)
                mask = generate_mask(packet.y, params, n)
                apply_float_dropout(tensor, mask, params)
                qt = quantize(tensor, scale)
                q_out = apply_quantized_dropout(qt, mask, params)
                journal = compute_journal(mask, q_out)
                elapsed = time.perf_counter() - start
                records.append(
                    BenchRecord(
                        "hash_only",
                        shape,
                        params.p_num,
                        params.p_den,
                        n,
                        rep,
                        elapsed,
                        _journal_artifact_bytes(journal),
                    )
                )

                start = time.perf_counter()
                _, proof = run_verifiable_dropout(
                    tensor, ctx, params, scale, trainer, backend, attestor
                )
                artifact = encode_proof(proof)
                elapsed = time.perf_counter() - start
                records.append(
                    BenchRecord(
                        "attested",
                        shape,
                        params.p_num,
                        params.p_den,
                        n,
                        rep,
                        elapsed,
                        len(artifact),
                    )
                )
    return records


def write_csv(records: list[BenchRecord], path: Path | str) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        lines.append(
            ",".join(
                (
                    r.variant,
                    format_shape(r.shape),
                    str(r.p_num),
                    str(r.p_den),
                    str(r.n),
                    str(r.rep),
                    repr(r.wall_time_s),
                    str(r.artifact_bytes),
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path: Path | str) -> list[BenchRecord]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or tuple(lines[0].split(",")) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected CSV header")
    records = []
    for line in lines[1:]:
        if not line.strip():
            continue
        variant, shape, p_num, p_den, n, rep, wall, artifact = line.split(",")
        records.append(
            BenchRecord(
                variant=variant,
                shape=parse_shape(shape),
                p_num=int(p_num),
                p_den=int(p_den),
                n=int(n),
                rep=int(rep),
                wall_time_s=float(wall),
                artifact_bytes=int(artifact),
            )
        )
    return records


def median_by_config(
    records: list[BenchRecord],
) -> dict[tuple[str, tuple[int, ...], int, int], tuple[float, int]]:
    """(variant, shape, p_num, p_den) -> (median wall time, median artifact size)."""
    groups: dict[tuple[str, tuple[int, ...], int, int], list[BenchRecord]] = {}
    for r in records:
        groups.setdefault((r.variant, r.shape, r.p_num, r.p_den), []).append(r)
    out = {}
    for key, rows in groups.items():
        out[key] = (
            statistics.median(r.wall_time_s for r in rows),
            int(statistics.median(r.artifact_bytes for r in rows)),
        )
    return out
