"""The k-PSD closure cone: block enumeration, membership, projection."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError
from .symmat import (
    DEFAULT_TOL,
    SymMatrix,
    Tolerances,
    as_sym,
    eigen_sym,
    psd_from_values,
)


@dataclass(frozen=True)
class ConeSpec:
    """Identifies the cone of n x n matrices whose k x k principal blocks are PSD."""

    n: int
    k: int
    tol: Tolerances = field(default=DEFAULT_TOL)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"k must satisfy 1 <= k <= n={self.n}, got {self.k}")

    def relaxed(self, factor: float = 10.0) -> "ConeSpec":
        return ConeSpec(self.n, self.k, self.tol.relaxed(factor))

    def with_k(self, k: int) -> "ConeSpec":
        return ConeSpec(self.n, k, self.tol)


@dataclass(frozen=True)
class MembershipReport:
    member: bool
    violations: tuple  # ((index_set, min_eigenvalue), ...) in lexicographic block order
    blocks_checked: int


def enumerate_index_sets(n: int, k: int) -> list:
    """All k-subsets of range(n) in lexicographic order."""
    if n < 1 or not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    return list(itertools.combinations(range(n), k))


def _check_dims(M: SymMatrix, spec: ConeSpec):
    if M.n != spec.n:
        raise ValueError(f"matrix is {M.n}x{M.n} but cone spec has n={spec.n}")


def membership(M, spec: ConeSpec) -> MembershipReport:
    M = as_sym(M)
    _check_dims(M, spec)
    a = M.array
    violations = []
    blocks = enumerate_index_sets(spec.n, spec.k)
    for idx in blocks:
        values = eigen_sym(a[np.ix_(idx, idx)]).values
        if not psd_from_values(values, spec.tol):
            violations.append((idx, float(values[0])))
    return MembershipReport(not violations, tuple(violations), len(blocks))


def is_member(M, spec: ConeSpec) -> bool:
    M = as_sym(M)
    _check_dims(M, spec)
    a = M.array
    for idx in itertools.combinations(range(spec.n), spec.k):
        if not psd_from_values(eigen_sym(a[np.ix_(idx, idx)]).values, spec.tol):
            return False
    return True


def _project_block_psd(block: np.ndarray) -> np.ndarray:
    lam, vec = eigen_sym(block)
    if lam[0] >= 0.0:
        return block
    clipped = np.clip(lam, 0.0, None)
    out = (vec * clipped) @ vec.T
    return 0.5 * (out + out.T)


def project_dykstra(M, spec: ConeSpec, max_sweeps: int = 5000, stop_rel: float = 1e-12):
    """Frobenius-nearest point of the cone via Dykstra's cyclic projections.

    Each elementary step clips the negative eigenvalues of one k x k block;
    the per-block correction terms are what make the limit the true nearest
    point rather than just some point of the intersection.

    Returns ``(P, residual)`` where ``residual`` is the Frobenius change over
    the final sweep.
    """
    M = as_sym(M)
    _check_dims(M, spec)
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    if is_member(M, spec):
        return M, 0.0

    blocks = [np.array(idx) for idx in enumerate_index_sets(spec.n, spec.k)]
    x = np.array(M.array)
    corrections = [np.zeros((spec.k, spec.k)) for _ in blocks]
    m_norm = M.frobenius()
    stop = stop_rel * max(1.0, m_norm)
    accept = 1e-7 * m_norm
    relaxed = spec.relaxed(10.0)
    residual = math.inf
    for _ in range(max_sweeps):
        start = x.copy()
        for idx, y in zip(blocks, corrections):
            sel = np.ix_(idx, idx)
            z = x[sel] + y
            p = _project_block_psd(z)
            y[...] = z - p
            x[sel] = p
        residual = float(np.linalg.norm(x - start))
        if residual <= stop and is_member(SymMatrix(x), relaxed):
            return SymMatrix(x), residual
    best = SymMatrix(x)
    if residual > accept or not is_member(best, relaxed):
        raise ConvergenceError(
            f"Dykstra projection stalled after {max_sweeps} sweeps (residual {residual:.3e})",
            best=best,
            residual=residual,
        )
    return best, residual
