"""Command-line interface.

JSON goes to stdout, human-readable messages to stderr. Exit codes:

    0  member / extreme / face dimension 1 / valid certificate / success
    1  not member / not extreme (incl. zero matrix) / face dimension > 1 / invalid certificate
    2  usage error or malformed input
    3  numerical failure or ambiguity
    4  unknown (middle block size without --oracle)
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import extreme, generators, oracle
from .certificates import DecompCertificate, verify_certificate
from .cone import ConeSpec, membership, project_dykstra
from .errors import ConsistencyError, NumericalError
from .matfile import MatrixFormatError, format_matrix, read_matrix
from .symmat import SymMatrix, Tolerances

SCHEMA_VERSION = "1"

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_NUMERIC, EXIT_UNKNOWN = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _plain(x):
    """Recursively convert numpy scalars/arrays into JSON-native values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, SymMatrix):
        return x.tolist()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def _emit(payload: dict):
    sys.stdout.write(json.dumps(_plain(payload), indent=2) + "\n")


def _tolerances(args) -> Tolerances:
    return Tolerances(eig_psd=args.tol_eig, rank_rel=args.tol_rank, det_zero=args.tol_det)


def _spec(args, M) -> ConeSpec:
    return ConeSpec(M.n, args.k, _tolerances(args))


def _spec_json(spec: ConeSpec) -> dict:
    return {"n": spec.n, "k": spec.k, "tolerances": spec.tol.as_dict()}


def _header(command: str, spec: ConeSpec) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "spec": _spec_json(spec)}


def certificate_json(cert: DecompCertificate) -> dict:
    return {"kind": cert.kind, "params": cert.params, "A": cert.A, "B": cert.B}


def certificate_from_json(obj: dict) -> DecompCertificate:
    body = obj.get("certificate", obj)
    if not isinstance(body, dict):
        raise UsageError("certificate JSON has no certificate object")
    try:
        return DecompCertificate(
            SymMatrix(body["A"]), SymMatrix(body["B"]), body["kind"], dict(body.get("params", {}))
        )
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed certificate: {exc}") from None


def _violations_json(report) -> list:
    return [{"block": list(idx), "min_eigenvalue": lam} for idx, lam in report.violations]


# --- subcommands -----------------------------------------------------------


def cmd_member(args) -> int:
    M = read_matrix(args.file)
    spec = _spec(args, M)
    report = membership(M, spec)
    out = _header("member", spec)
    out.update(
        member=report.member,
        blocks_checked=report.blocks_checked,
        violations=_violations_json(report),
    )
    _emit(out)
    return EXIT_OK if report.member else EXIT_NO


def cmd_classify(args) -> int:
    M = read_matrix(args.file)
    spec = _spec(args, M)
    verdict = extreme.classify(M, spec, use_oracle=args.oracle)
    out = _header("classify", spec)
    out["verdict"] = verdict.tag
    out["reason"] = getattr(verdict, "reason", None)
    out["certificate"] = certificate_json(verdict.cert) if verdict.tag == "NotExtreme" else None
    diagnostics = dict(verdict.diagnostics)
    if verdict.tag == "NotMember":
        diagnostics["violations"] = _violations_json(verdict.report)
    out["diagnostics"] = diagnostics
    _emit(out)
    if verdict.tag == "Extreme":
        return EXIT_OK
    if verdict.tag == "Unknown":
        return EXIT_UNKNOWN
    return EXIT_NO


def cmd_oracle(args) -> int:
    M = read_matrix(args.file)
    spec = _spec(args, M)
    report = oracle.face_dimension(M, spec)
    out = _header("oracle", spec)
    out.update(
        dimension=report.dimension,
        constraint_count=report.constraint_count,
        active_blocks=[{"block": list(idx), "kernel": kern.T} for idx, kern in report.active_blocks],
        basis=list(report.basis),
    )
    _emit(out)
    return EXIT_OK if report.dimension == 1 else EXIT_NO


def cmd_verify(args) -> int:
    M = read_matrix(args.file)
    try:
        with open(args.certificate) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read certificate: {exc}") from None
    k = args.k
    if k is None:
        k = obj.get("spec", {}).get("k") if isinstance(obj, dict) else None
    if k is None:
        raise UsageError("block size unknown: pass --k or embed spec.k in the certificate JSON")
    args.k = int(k)
    spec = _spec(args, M)
    cert = certificate_from_json(obj)
    ok, reason = verify_certificate(M, cert, spec)
    out = _header("verify", spec)
    out.update(valid=ok, reason=reason)
    _emit(out)
    return EXIT_OK if ok else EXIT_NO


def cmd_project(args) -> int:
    M = read_matrix(args.file)
    spec = _spec(args, M)
    P, residual = project_dykstra(M, spec, max_sweeps=args.max_sweeps)
    out = _header("project", spec)
    out.update(
        matrix=P,
        distance=float(np.linalg.norm(M.array - P.array)),
        residual=residual,
    )
    _emit(out)
    return EXIT_OK


def cmd_gen(args) -> int:
    kind = args.kind
    if kind == "gnk":
        _need(args, "n", "k")
        M = generators.gnk(args.n, args.k)
        note = f"G({args.n},{args.k})"
    elif kind == "nls":
        _need(args, "n", "k")
        if args.d:
            D = generators.DiagonalCongruence(tuple(args.d))
        else:
            D = generators.random_diagonal(args.n, args.seed)
        M = generators.nls(args.n, args.k, D)
        note = f"NLS n={args.n} k={args.k} d={list(D.d)}"
    elif kind == "rank1":
        if args.x:
            x = np.array(args.x)
        else:
            _need(args, "n")
            x = generators.SplitMix64(args.seed).array((args.n,))
        M = generators.rank_one(x)
        note = f"rank one x={x.tolist()}"
    else:
        _need(args, "n", "k")
        spec = ConeSpec(args.n, args.k)
        M = generators.random_member(spec, args.seed, args.style)
        note = f"random member n={args.n} k={args.k} seed={args.seed} style={args.style}"
    sys.stdout.write(format_matrix(M, note))
    return EXIT_OK


def _need(args, *names):
    missing = [f"--{name}" for name in names if getattr(args, name) is None]
    if missing:
        raise UsageError(f"gen {args.kind} requires {', '.join(missing)}")


# --- wiring ---------------------------------------------------------------


def _add_tolerance_flags(p):
    p.add_argument("--tol-eig", type=float, default=Tolerances.eig_psd, help="PSD eigenvalue slack")
    p.add_argument("--tol-rank", type=float, default=Tolerances.rank_rel, help="relative rank cut")
    p.add_argument("--tol-det", type=float, default=Tolerances.det_zero, help="determinant zero band")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kpsd", description="Membership and extreme rays of the k-PSD closure cone."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("member", help="check k x k block PSD membership")
    p.add_argument("file")
    p.add_argument("--k", type=int, required=True)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_member)

    p = sub.add_parser("classify", help="decide whether the matrix spans an extreme ray")
    p.add_argument("file")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--oracle", action="store_true", help="use the face oracle for middle k")
    p.add_argument("--seed", type=int, default=0, help="accepted for reproducible invocations")
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("oracle", help="face dimension of the matrix in the cone")
    p.add_argument("file")
    p.add_argument("--k", type=int, required=True)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="replay a decomposition certificate")
    p.add_argument("file")
    p.add_argument("certificate")
    p.add_argument("--k", type=int, default=None)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("project", help="Dykstra projection onto the cone")
    p.add_argument("file")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-sweeps", type=int, default=5000)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("gen", help="emit a generator-family matrix")
    p.add_argument("kind", choices=["gnk", "nls", "rank1", "random"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d", type=float, nargs="+", help="diagonal of the congruence (nls)")
    p.add_argument("--x", type=float, nargs="+", help="vector for rank1")
    p.add_argument("--style", choices=list(generators.STYLES), default="psd")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, MatrixFormatError) as exc:
        print(f"kpsd: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, ConsistencyError) as exc:
        print(f"kpsd: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"kpsd: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
