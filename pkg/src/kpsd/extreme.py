"""Extreme-ray classification with replayable certificates.

Exact tests exist for block size 2 and block size n-1. For other block
sizes only the sufficient "every block rank <= 1" test is available; past
that the caller can opt into the face oracle, otherwise the verdict is
Unknown.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import oracle
from .certificates import DecompCertificate
from .cone import ConeSpec, MembershipReport, membership
from .errors import AmbiguityError, ConsistencyError
from .symmat import (
    DEFAULT_TOL,
    SymMatrix,
    Tolerances,
    adjugate_cofactor,
    as_sym,
    complement,
    det,
    det_sign,
    eigen_sym,
    entry_scale,
    psd_from_values,
    rank_from_values,
)

REASONS = ("AllBlocksRank1", "Kn1RankCondition", "OracleFaceDim1")


@dataclass(frozen=True)
class NotMember:
    report: MembershipReport
    diagnostics: dict = field(default_factory=dict)
    tag = "NotMember"


@dataclass(frozen=True)
class ZeroMatrix:
    diagnostics: dict = field(default_factory=dict)
    tag = "ZeroMatrix"


@dataclass(frozen=True)
class Extreme:
    reason: str
    diagnostics: dict = field(default_factory=dict)
    tag = "Extreme"


@dataclass(frozen=True)
class NotExtreme:
    cert: DecompCertificate
    diagnostics: dict = field(default_factory=dict)
    tag = "NotExtreme"


@dataclass(frozen=True)
class Unknown:
    face_dim_hint: Optional[int] = None
    diagnostics: dict = field(default_factory=dict)
    tag = "Unknown"


ExtremeVerdict = Union[NotMember, ZeroMatrix, Extreme, NotExtreme, Unknown]


@dataclass(frozen=True)
class KernelFamily:
    vectors: tuple  # v^i as length-n arrays, v^i[i] == 0
    V: np.ndarray  # rows are the v^i
    full_rank: bool


@dataclass(frozen=True)
class SupportGraph:
    n: int
    edges: frozenset  # pairs (i, j) with i < j


def _block_values(a: np.ndarray, idx) -> np.ndarray:
    return eigen_sym(a[np.ix_(idx, idx)]).values


# --- block size 2 ---------------------------------------------------------


def _eps_max_2x2(a: np.ndarray, i: int, j: int) -> float:
    # largest eps with a_ii a_jj - (a_ij +- eps)^2 >= 0; the (i, j) entry
    # lives in no other 2x2 block
    return math.sqrt(a[i, i] * a[j, j]) - abs(a[i, j])


def certify_k2(M, i: int, j: int, tol: Tolerances = DEFAULT_TOL) -> DecompCertificate:
    """Split M by moving the (i, j) entry by +-eps, eps half the feasible bound."""
    M = as_sym(M)
    if i == j or not (0 <= i < M.n and 0 <= j < M.n):
        raise ValueError(f"need two distinct indices below n={M.n}, got ({i}, {j})")
    i, j = min(i, j), max(i, j)
    a = M.array
    if rank_from_values(_block_values(a, (i, j)), tol) != 2:
        raise ValueError(f"block ({i}, {j}) is not rank 2")
    eps = 0.5 * _eps_max_2x2(a, i, j)
    F = np.zeros_like(a)
    F[i, j] = F[j, i] = eps
    A = SymMatrix(0.5 * (a - F))
    B = SymMatrix(a - A.array)
    return DecompCertificate(A, B, "Perturbation2x2", {"i": i, "j": j, "eps": float(eps)})


def classify_k2(M, tol: Tolerances = DEFAULT_TOL) -> ExtremeVerdict:
    """Exact test for block size 2: extreme iff no 2x2 block has rank 2.

    Caller guarantees M is a nonzero member. Identically zero blocks count
    as rank <= 1.
    """
    M = as_sym(M)
    a = M.array
    ranks = {}
    for i, j in itertools.combinations(range(M.n), 2):
        ranks[(i, j)] = rank_from_values(_block_values(a, (i, j)), tol)
    full = [p for p, r in ranks.items() if r == 2]
    diag = {"rank2_blocks": [list(p) for p in full]}
    if not full:
        return Extreme("AllBlocksRank1", diag)
    i, j = full[0]
    return NotExtreme(certify_k2(M, i, j, tol), diag)


# --- block size n - 1 -------------------------------------------------------


def _is_zero_column(a: np.ndarray, i: int, tol: Tolerances) -> bool:
    return bool(np.all(np.abs(a[:, i]) <= tol.rank_rel * entry_scale(a)))


def certify_psd_split(M, tol: Tolerances = DEFAULT_TOL) -> DecompCertificate:
    """Peel the top eigen-pair off a PSD matrix of rank >= 2."""
    M = as_sym(M)
    lam, vec = eigen_sym(M)
    if not psd_from_values(lam, tol):
        raise ValueError("matrix is not PSD")
    if rank_from_values(lam, tol) < 2:
        raise ValueError("PSD split needs rank >= 2")
    top = int(np.flatnonzero(lam == lam[-1])[0])
    q = vec[:, top]
    A = SymMatrix(lam[top] * np.outer(q, q))
    B = SymMatrix(M.array - A.array)
    return DecompCertificate(A, B, "PsdConicSplit", {"eigenvalue": float(lam[top])})


def certify_rank_one_perturbation(M, tol: Tolerances = DEFAULT_TOL) -> DecompCertificate:
    """M = eps uu^T + (M - eps uu^T) for a member with a full-rank (n-1)-block.

    u is the column of M at an index shared by every rank-deficient
    (n-1)-block, which makes adj(M_H) u_H vanish on every singular principal
    block H. eps is half the smallest det(M_H) / (u_H^T adj(M_H) u_H) over
    the nonsingular H, so every principal minor of size <= n-1 stays >= 0.
    """
    M = as_sym(M)
    n = M.n
    a = M.array
    if n < 3:
        raise ValueError("needs n >= 3")
    ranks = [rank_from_values(_block_values(a, complement(i, n)), tol) for i in range(n)]
    if min(ranks) < n - 2 or max(ranks) < n - 1:
        raise ValueError(f"(n-1)-block ranks {ranks} violate the precondition")
    if any(_is_zero_column(a, i, tol) for i in range(n)):
        raise ValueError("matrix has a zero column")
    omitted = {i for i, r in enumerate(ranks) if r == n - 2}
    pivot = min(set(range(n)) - omitted)
    u = a[:, pivot].copy()
    scale = entry_scale(a)

    ratios = []
    residual = 0.0
    for size in range(1, n):
        for H in itertools.combinations(range(n), size):
            sub = a[np.ix_(H, H)]
            uH = u[list(H)]
            lam, vec = eigen_sym(sub)
            if rank_from_values(lam, tol) == size:
                others = np.array([np.prod(np.delete(lam, t)) for t in range(size)])
                denom = float(np.sum(others * (vec.T @ uH) ** 2))
                if denom > tol.det_zero * scale ** (size - 1) * max(1.0, float(uH @ uH)):
                    ratios.append(det(sub) / denom)
            else:
                res = float(np.linalg.norm(adjugate_cofactor(sub).array @ uH))
                residual = max(residual, res / scale**size)
    if residual > 1e-8:
        raise ConsistencyError(
            f"adj(M_H) u_H residual {residual:.3e} on a singular block; block ranks misclassified"
        )
    if not ratios:
        raise ValueError("no nonsingular principal block gives a finite bound")
    eps = 0.5 * min(ratios)
    A = SymMatrix(eps * np.outer(u, u))
    B = SymMatrix(a - A.array)
    params = {"u": u.tolist(), "eps": float(eps), "pivot": int(pivot), "adj_residual": residual}
    return DecompCertificate(A, B, "RankOnePerturbation", params)


def classify_kn1(M, tol: Tolerances = DEFAULT_TOL) -> ExtremeVerdict:
    """Exact test for block size n-1 on a nonzero member, n >= 3.

    Branches: (a) all blocks rank 1; (b) a block of rank < n-2, so M is PSD;
    (c) a full-rank block; (d) all blocks rank n-2 with det(M) >= 0, so M is
    PSD of rank n-2; (e) all blocks rank n-2 with det(M) < 0, extreme.
    """
    M = as_sym(M)
    n = M.n
    if n < 3:
        raise ValueError("block size n-1 classification needs n >= 3")
    a = M.array
    ranks = [rank_from_values(_block_values(a, complement(i, n)), tol) for i in range(n)]
    d = det(M)
    diag = {"block_ranks": ranks, "det": d, "det_sign": det_sign(M, tol, d)}

    if all(r == 1 for r in ranks):
        return Extreme("AllBlocksRank1", dict(diag, branch="a"))

    if min(ranks) < n - 2:
        diag["branch"] = "b"
        lam = eigen_sym(M).values
        if not psd_from_values(lam, tol):
            raise AmbiguityError(
                "a block has rank < n-2 but M is not PSD", quantity="block_rank", value=min(ranks)
            )
        if rank_from_values(lam, tol) <= 1:
            return Extreme("AllBlocksRank1", diag)
        return NotExtreme(certify_psd_split(M, tol), diag)

    if max(ranks) == n - 1:
        diag["branch"] = "c"
        if any(_is_zero_column(a, i, tol) for i in range(n)):
            return NotExtreme(certify_psd_split(M, tol), diag)
        return NotExtreme(certify_rank_one_perturbation(M, tol), diag)

    # every (n-1)-block has rank exactly n-2
    sign = diag["det_sign"]
    if sign == 0:
        # det is in the zero band; the spectrum settles it: a PSD matrix of
        # rank n-2 or a clearly negative eigenvalue (det < 0 means exactly one)
        lam = eigen_sym(M).values
        r = rank_from_values(lam, tol)
        if psd_from_values(lam, tol) and r == n - 2:
            sign = 0
        elif r == n and not psd_from_values(lam, tol):
            sign = -1
        else:
            raise AmbiguityError(
                f"det(M) = {d:.3e} is inside the zero band and the spectrum does not decide it",
                quantity="det",
                value=d,
            )
    elif sign > 0:
        raise AmbiguityError(
            f"det(M) = {d:.3e} > 0 with every (n-1)-block singular", quantity="det", value=d
        )
    if sign < 0:
        return Extreme("Kn1RankCondition", dict(diag, branch="e"))
    diag["branch"] = "d"
    return NotExtreme(certify_psd_split(M, tol), diag)


# --- kernel family and support graph ---------------------------------------


def kernel_family(M, tol: Tolerances = DEFAULT_TOL) -> KernelFamily:
    """Unit kernel vectors of every (n-1)-block, zero-padded at the omitted index."""
    M = as_sym(M)
    n = M.n
    a = M.array
    scale = entry_scale(a)
    vectors = []
    for i in range(n):
        J = complement(i, n)
        sub = a[np.ix_(J, J)]
        lam, vec = eigen_sym(sub)
        if rank_from_values(lam, tol) != n - 2:
            raise ValueError(f"block omitting {i} does not have rank n-2")
        w = vec[:, int(np.argmin(np.abs(lam)))]
        lead = np.flatnonzero(np.abs(w) > 1e-8)[0]
        if w[lead] < 0:
            w = -w
        if np.linalg.norm(sub @ w) > 1e-8 * scale:
            raise ConsistencyError(f"kernel residual too large on block omitting {i}")
        v = np.zeros(n)
        v[list(J)] = w
        vectors.append(v)
    V = np.array(vectors)
    s = np.linalg.svd(V, compute_uv=False)
    full = bool(np.count_nonzero(s > tol.rank_rel * max(1.0, float(s[0]))) == n)
    if det_sign(M, tol) < 0:
        if not full:
            raise ConsistencyError("det(M) < 0 but the kernel family is rank deficient")
        if np.any(np.abs(np.diag(a)) <= tol.det_zero * scale):
            raise ConsistencyError("det(M) < 0 but M has a zero diagonal entry")
    return KernelFamily(tuple(vectors), V, full)


def support_graph(M, tol: Tolerances = DEFAULT_TOL) -> SupportGraph:
    M = as_sym(M)
    a = M.array
    cut = tol.det_zero * entry_scale(a)
    edges = frozenset(
        (i, j) for i, j in itertools.combinations(range(M.n), 2) if abs(a[i, j]) > cut
    )
    return SupportGraph(M.n, edges)


def is_connected(g: SupportGraph) -> bool:
    adj = {v: [] for v in range(g.n)}
    for i, j in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == g.n


# --- dispatch -------------------------------------------------------------


def classify(M, spec: ConeSpec, use_oracle: bool = False) -> ExtremeVerdict:
    M = as_sym(M)
    if M.n != spec.n:
        raise ValueError(f"matrix is {M.n}x{M.n} but cone spec has n={spec.n}")
    if spec.k < 2:
        raise ValueError("classification needs k >= 2")
    report = membership(M, spec)
    if not report.member:
        return NotMember(report)
    if M.is_zero():
        return ZeroMatrix()
    if spec.k == 2:
        return classify_k2(M, spec.tol)
    if spec.k == spec.n - 1:
        return classify_kn1(M, spec.tol)

    a = M.array
    ranks = [
        rank_from_values(_block_values(a, idx), spec.tol)
        for idx in itertools.combinations(range(spec.n), spec.k)
    ]
    diag = {"max_block_rank": max(ranks)}
    if max(ranks) <= 1:
        return Extreme("AllBlocksRank1", diag)
    if not use_oracle:
        return Unknown(None, diag)
    report = oracle.face_dimension(M, spec)
    diag["face_dimension"] = report.dimension
    if report.dimension == 1:
        return Extreme("OracleFaceDim1", diag)
    return NotExtreme(oracle.decomposition_from_face(M, spec, report), diag)
