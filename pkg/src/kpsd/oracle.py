"""Brute-force extremeness oracle.

A direction P keeps M + tP and M - tP inside the cone for small t exactly
when every singular k x k block M_I satisfies ker(M_I) in ker(P_I). Those
conditions are linear in P, so the span of the minimal face of M is the
null space of one linear system and M is extreme iff that null space is
one-dimensional.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .certificates import DecompCertificate, verify_certificate
from .cone import ConeSpec, is_member
from .errors import NumericalError
from .generators import SplitMix64
from .symmat import SymMatrix, as_sym, eigen_sym

LINE_SEARCH_STEPS = 60
MIN_STEP = 1e-10


@dataclass(frozen=True)
class FaceReport:
    dimension: int
    basis: tuple  # SymMatrix elements spanning the face
    active_blocks: tuple  # ((index_set, kernel basis as columns), ...)
    constraint_count: int


def coordinate_pairs(n: int) -> list:
    """Row-major lower-triangle ordering of the symmetric unknowns."""
    return [(i, j) for i in range(n) for j in range(i + 1)]


def _coord(i: int, j: int) -> int:
    if i < j:
        i, j = j, i
    return i * (i + 1) // 2 + j


def to_coords(P) -> np.ndarray:
    a = np.asarray(P, dtype=float)
    return np.array([a[i, j] for i, j in coordinate_pairs(a.shape[0])])


def from_coords(x, n: int) -> SymMatrix:
    a = np.zeros((n, n))
    for c, (i, j) in enumerate(coordinate_pairs(n)):
        a[i, j] = a[j, i] = x[c]
    return SymMatrix(a)


def _kernel_basis(block: np.ndarray, rank_rel: float) -> np.ndarray:
    lam, vec = eigen_sym(block)
    cut = rank_rel * max(1.0, float(np.max(np.abs(lam))))
    return vec[:, np.abs(lam) <= cut]


def constraint_system(M, spec: ConeSpec):
    """Rows encode (P_I v)_a = 0 for each block I, kernel vector v and a in I."""
    M = as_sym(M)
    n, k = spec.n, spec.k
    a = M.array
    rows, active = [], []
    width = n * (n + 1) // 2
    for idx in itertools.combinations(range(n), k):
        kern = _kernel_basis(a[np.ix_(idx, idx)], spec.tol.rank_rel)
        if kern.shape[1] == 0:
            continue
        active.append((idx, kern))
        for v in kern.T:
            for ia in idx:
                row = np.zeros(width)
                for ib, vb in zip(idx, v):
                    row[_coord(ia, ib)] += vb
                rows.append(row)
    C = np.array(rows) if rows else np.zeros((0, width))
    return C, tuple(active)


def _null_space(C: np.ndarray, width: int, rank_rel: float) -> np.ndarray:
    if C.shape[0] == 0:
        return np.eye(width)
    _, s, vt = np.linalg.svd(C)
    cut = rank_rel * max(1.0, float(s[0]))
    r = int(np.count_nonzero(s > cut))
    return vt[r:]


def _require_nonzero_member(M: SymMatrix, spec: ConeSpec):
    if M.n != spec.n:
        raise ValueError(f"matrix is {M.n}x{M.n} but cone spec has n={spec.n}")
    if M.is_zero():
        raise ValueError("the zero matrix has no face direction to test")
    if not is_member(M, spec):
        raise ValueError("matrix is not a member of the cone")


def face_dimension(M, spec: ConeSpec) -> FaceReport:
    M = as_sym(M)
    _require_nonzero_member(M, spec)
    C, active = constraint_system(M, spec)
    null = _null_space(C, C.shape[1], spec.tol.rank_rel)
    basis = tuple(from_coords(x, spec.n) for x in null)
    return FaceReport(len(basis), basis, active, C.shape[0])


def _line_search(M: SymMatrix, Q: np.ndarray, spec: ConeSpec) -> float:
    """Largest t <= 1 (to bisection accuracy) with M +- tQ both members."""
    m = M.array

    def feasible(t):
        return is_member(SymMatrix(m + t * Q), spec) and is_member(SymMatrix(m - t * Q), spec)

    if feasible(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(LINE_SEARCH_STEPS):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _split_along(M: SymMatrix, Q: np.ndarray, spec: ConeSpec, params: dict):
    """Certificate from a direction Q orthogonal to M, or None if it fails replay."""
    t = _line_search(M, Q, spec)
    if t < MIN_STEP:
        return None
    m = M.array
    half = 0.5 * t
    A = SymMatrix(0.5 * (m + half * Q))
    B = SymMatrix(m - A.array)
    cert = DecompCertificate(A, B, "FaceSplit", dict(params, t=t))
    ok, _ = verify_certificate(M, cert, spec)
    return cert if ok else None


def _orthogonal_to(M: np.ndarray, P: np.ndarray) -> np.ndarray:
    mm = float(np.sum(M * M))
    return P - (float(np.sum(P * M)) / mm) * M


def decomposition_from_face(M, spec: ConeSpec, report: FaceReport) -> DecompCertificate:
    """Turn a face of dimension >= 2 into an explicit split M = A + B."""
    M = as_sym(M)
    if report.dimension < 2:
        raise ValueError("face dimension must be at least 2 to split M")
    m = M.array
    norm_m = M.frobenius()
    stacked = np.array([_orthogonal_to(m, P.array).ravel() for P in report.basis])
    # orthonormal directions spanning the face's complement of M
    _, s, vt = np.linalg.svd(stacked, full_matrices=False)
    for t, direction in enumerate(vt):
        if s[t] <= 1e-8 * max(1.0, float(s[0])):
            break
        Q = direction.reshape(m.shape)
        Q = 0.5 * (Q + Q.T)
        Q *= norm_m / float(np.linalg.norm(Q))
        cert = _split_along(M, Q, spec, {"direction": t})
        if cert is not None:
            return cert
    raise NumericalError("every face direction collapsed in the line search")


def decomposition_search(M, spec: ConeSpec, trials: int, seed: int):
    """Randomized second opinion: returns a replay-verified certificate or None."""
    M = as_sym(M)
    _require_nonzero_member(M, spec)
    C, _ = constraint_system(M, spec)
    width = C.shape[1]
    null = _null_space(C, width, spec.tol.rank_rel)
    m = M.array
    norm_m = M.frobenius()
    rng = SplitMix64(seed)
    for trial in range(trials):
        x = rng.array((width,))
        x = null.T @ (null @ x)
        P = _orthogonal_to(m, from_coords(x, spec.n).array)
        size = float(np.linalg.norm(P))
        if size <= 1e-8 * norm_m:
            continue
        cert = _split_along(M, P * (norm_m / size), spec, {"trial": trial, "seed": seed})
        if cert is not None:
            return cert
    return None
