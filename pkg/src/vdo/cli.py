"""Command-line surface: keygen, prove, verify, tamper-test, bench, vectors.

Exit codes: 0 accept/success, 2 reject (failed verification, missed
detections, vector mismatches), 3 usage or invalid content, 4 I/O.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .attest import BACKENDS, DEFAULT_BACKEND_ID, get_backend
from .bench import median_by_config, parse_shape, run_bench, write_csv
from .context import Context
from .keyfiles import generate_keypair, load_public_key, load_secret_key
from .prg import DropoutParams
from .protocol import (
    MalformedProofError,
    decode_proof,
    encode_proof,
    run_verifiable_dropout,
    verify_proof,
)
from .tamper import TAMPER_CLASSES, run_tamper_trials
from .tensor_io import read_tensor, write_tensor
from .vectors import (
    FULL_GRID_COUNTS,
    SMALL_GRID_COUNTS,
    VectorFormatError,
    check_vector_file,
    emit_vector_file,
)

EXIT_OK = 0
EXIT_REJECT = 2
EXIT_USAGE = 3
EXIT_IO = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 means REJECT here, so remap.
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _nonce(text: str) -> bytes:
    try:
        raw = bytes.fromhex(text)
    except ValueError:
        raise argparse.ArgumentTypeError("nonce must be hex") from None
    if len(raw) != 32:
        raise argparse.ArgumentTypeError("nonce must be 64 hex chars (32 bytes)")
    return raw


def _probability(text: str) -> DropoutParams:
    num, sep, den = text.partition("/")
    try:
        if sep:
            return DropoutParams(int(num), int(den))
        return DropoutParams(int(num), 1)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad probability {text!r}: {exc}") from None


def _shape_list(text: str) -> list[tuple[int, ...]]:
    try:
        return [parse_shape(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _p_list(text: str) -> list[DropoutParams]:
    return [_probability(tok) for tok in text.split(",") if tok]


def _add_context_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model-id", required=True, help="model identifier")
    parser.add_argument("--step", required=True, type=int, help="training step (u64)")
    parser.add_argument("--batch-id", required=True, type=int, help="batch identifier (u64)")
    parser.add_argument("--nonce", required=True, type=_nonce, help="verifier nonce, 64 hex chars")
    parser.add_argument("--layer-id", required=True, help="layer identifier")


def _context_from_args(args: argparse.Namespace) -> Context:
    return Context(
        model_id=args.model_id,
        step=args.step,
        batch_id=args.batch_id,
        nonce=args.nonce,
        layer_id=args.layer_id,
    )


def _backend_from_args(args: argparse.Namespace):
    backend_id = args.backend or os.environ.get("VDO_BACKEND") or DEFAULT_BACKEND_ID
    return get_backend(backend_id)


def cmd_keygen(args: argparse.Namespace) -> int:
    out = Path(args.out)
    for name in ("trainer", "attestor"):
        sk_path, pk_path = generate_keypair(out, name)
        print(f"wrote {sk_path} {pk_path}")
    return EXIT_OK


def cmd_prove(args: argparse.Namespace) -> int:
    tensor, header_scale = read_tensor(args.input)
    scale = args.scale if args.scale is not None else header_scale
    ctx = _context_from_args(args)
    params = DropoutParams(args.p_num, args.p_den)
    trainer = load_secret_key(args.trainer_key)
    attestor = load_secret_key(args.attestor_key)
    backend = _backend_from_args(args)
    output, proof = run_verifiable_dropout(tensor, ctx, params, scale, trainer, backend, attestor)
    out_path = Path(args.out)
    out_path.write_bytes(encode_proof(proof))
    tensor_path = (
        Path(args.output_tensor)
        if args.output_tensor
        else out_path.with_name(out_path.stem + ".output.txt")
    )
    write_tensor(tensor_path, output, scale)
    print(f"proof: {out_path}")
    print(f"output: {tensor_path}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    data = Path(args.proof).read_bytes()
    expected = _context_from_args(args)
    trainer_pk = load_public_key(args.trainer_key)
    attestor_pk = load_public_key(args.attestor_key)
    try:
        proof = decode_proof(data)
    except MalformedProofError as exc:
        print(f"REJECT MALFORMED ({exc})")
        return EXIT_REJECT
    verdict = verify_proof(proof, expected, trainer_pk, attestor_pk)
    print(str(verdict))
    return EXIT_OK if verdict.accepted else EXIT_REJECT


def cmd_tamper_test(args: argparse.Namespace) -> int:
    report = run_tamper_trials(args.trials, seed=args.seed)
    for attack in TAMPER_CLASSES:
        relevant = [t for t in report.trials if t.attack == attack]
        detected = sum(t.detected for t in relevant)
        print(f"{attack}: {detected}/{len(relevant)} detected ({100.0 * report.rate(attack):.1f}%)")
    if args.out:
        out = Path(args.out)
        lines = ["attack,mutation,detected,reason_code"]
        lines += [
            f"{t.attack},{t.mutation},{int(t.detected)},{t.reason_code}" for t in report.trials
        ]
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"trials: {out}")
        if not args.no_figures:
            from .report import render_tamper_figure

            figure = render_tamper_figure(report, out.with_name(out.stem + "_detection.png"))
            print(f"figure: {figure}")
    if report.all_detected:
        print("result: PASS (all attacks detected)")
        return EXIT_OK
    print("result: FAIL (missed detections)")
    return EXIT_REJECT


def cmd_bench(args: argparse.Namespace) -> int:
    records = run_bench(args.shapes, args.p, reps=args.reps, scale=args.scale, seed=args.seed)
    out = Path(args.out)
    write_csv(records, out)
    print(f"csv: {out}")
    medians = median_by_config(records)
    for (variant, shape, p_num, p_den), (wall, artifact) in sorted(medians.items()):
        shape_text = "x".join(map(str, shape))
        print(
            f"median variant={variant} shape={shape_text} p={p_num}/{p_den} "
            f"wall_time_s={wall:.6f} artifact_bytes={artifact}"
        )
    if not args.no_figures:
        from .report import render_bench_figures

        for figure in render_bench_figures(records, out.parent, stem=out.stem):
            print(f"figure: {figure}")
    return EXIT_OK


def cmd_vectors(args: argparse.Namespace) -> int:
    if args.action == "emit":
        counts = SMALL_GRID_COUNTS if args.small else FULL_GRID_COUNTS
        cases = emit_vector_file(args.out, counts)
        print(f"wrote {cases} cases to {args.out}")
        return EXIT_OK
    try:
        result = check_vector_file(args.path)
    except VectorFormatError as exc:
        print(f"vectors: FAIL ({exc})")
        return EXIT_REJECT
    for line in result.mismatches:
        print(f"mismatch: {line}")
    status = "OK" if result.ok else "FAIL"
    print(f"vectors: {status} ({result.checked} cases, {len(result.mismatches)} mismatches)")
    return EXIT_OK if result.ok else EXIT_REJECT


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vdo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("keygen", help="generate trainer and attestor key files")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("prove", help="run one attested dropout and write the proof")
    p.add_argument("--input", required=True, help="input tensor file")
    _add_context_flags(p)
    p.add_argument("--p-num", required=True, type=int, help="dropout probability numerator")
    p.add_argument("--p-den", required=True, type=int, help="dropout probability denominator")
    p.add_argument("--scale", type=int, default=None, help="quantization scale (default: header)")
    p.add_argument("--trainer-key", required=True, help="trainer secret key file (.sk)")
    p.add_argument("--attestor-key", required=True, help="attestor secret key file (.sk)")
    p.add_argument(
        "--backend",
        default=None,
        choices=sorted(BACKENDS),
        help="attestation backend (default: $VDO_BACKEND or reexec-v1)",
    )
    p.add_argument("--out", required=True, help="proof output path")
    p.add_argument(
        "--output-tensor", default=None, help="float output path (default: <out>.output.txt)"
    )
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("verify", help="verify a proof against the expected context")
    p.add_argument("--proof", required=True, help="proof file")
    _add_context_flags(p)
    p.add_argument("--trainer-key", required=True, help="trusted trainer public key file (.pk)")
    p.add_argument("--attestor-key", required=True, help="trusted attestor public key file (.pk)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tamper-test", help="run the three attack classes and report detection")
    p.add_argument("--trials", type=int, default=100, help="trials per attack class")
    p.add_argument("--seed", type=int, default=0, help="harness RNG seed")
    p.add_argument("--out", default=None, help="write per-trial CSV here")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_tamper_test)

    p = sub.add_parser("bench", help="time baseline/hash_only/attested variants")
    p.add_argument(
        "--shapes",
        type=_shape_list,
        default=[(1024,), (4096,), (16384,)],
        help="comma-separated shapes, dims joined by x (e.g. 1024,32x128)",
    )
    p.add_argument(
        "--p",
        type=_p_list,
        default=[DropoutParams(1, 10), DropoutParams(1, 2), DropoutParams(9, 10)],
        help="comma-separated probabilities as fractions (e.g. 0,1/4,9/10)",
    )
    p.add_argument("--reps", type=int, default=5, help="repetitions per cell")
    p.add_argument("--scale", type=int, default=65536, help="quantization scale")
    p.add_argument("--seed", type=int, default=0, help="tensor RNG seed")
    p.add_argument("--out", default="bench.csv", help="CSV output path")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("vectors", help="emit or check golden vector files")
    vec_sub = p.add_subparsers(dest="action", required=True, metavar="action")
    emit = vec_sub.add_parser("emit", help="write the vector file")
    emit.add_argument("--out", required=True, help="vector file path")
    emit.add_argument("--small", action="store_true", help="emit the small fixture grid")
    emit.set_defaults(func=cmd_vectors)
    check = vec_sub.add_parser("check", help="re-derive and compare a vector file")
    check.add_argument("path", help="vector file path")
    check.set_defaults(func=cmd_vectors)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileExistsError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
