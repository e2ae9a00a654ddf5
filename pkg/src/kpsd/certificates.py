"""Decomposition certificates and their replay check."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cone import ConeSpec, is_member
from .symmat import SymMatrix, as_sym, entry_scale

KINDS = ("Perturbation2x2", "RankOnePerturbation", "PsdConicSplit", "FaceSplit")

SUM_TOL = 1e-10
PROPORTIONALITY_MARGIN = 1e-6


@dataclass(frozen=True)
class DecompCertificate:
    """M = A + B with A, B in the cone and A not a multiple of M."""

    A: SymMatrix
    B: SymMatrix
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown certificate kind {self.kind!r}")


def proportionality_gap(A, M) -> float:
    """Frobenius distance from A to the line spanned by M."""
    a, m = np.asarray(A, dtype=float), np.asarray(M, dtype=float)
    mm = float(np.sum(m * m))
    if mm == 0.0:
        return float(np.linalg.norm(a))
    return float(np.linalg.norm(a - (float(np.sum(a * m)) / mm) * m))


def verify_certificate(M, cert: DecompCertificate, spec: ConeSpec):
    """Replay a certificate from scratch. Returns ``(ok, reason)``."""
    M = as_sym(M)
    A, B = as_sym(cert.A), as_sym(cert.B)
    if A.n != M.n or B.n != M.n:
        return False, "dimension mismatch"
    gap = float(np.max(np.abs(A.array + B.array - M.array)))
    if gap > SUM_TOL * entry_scale(M):
        return False, "sum mismatch"
    relaxed = spec.relaxed(10.0)
    if not is_member(A, relaxed):
        return False, "A not a member"
    if not is_member(B, relaxed):
        return False, "B not a member"
    if proportionality_gap(A, M) <= PROPORTIONALITY_MARGIN * M.frobenius():
        return False, "A proportional to M"
    return True, "ok"
