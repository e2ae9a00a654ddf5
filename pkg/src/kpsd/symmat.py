"""Dense symmetric matrix kernel.

Everything downstream (cone membership, extreme-ray classification, the
face oracle) goes through the handful of routines here, so tolerances are
explicit arguments and no routine keeps state.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import NumericalError

IndexSet = tuple  # strictly increasing tuple of ints, see index_set()


@dataclass(frozen=True)
class Tolerances:
    eig_psd: float = 1e-9
    rank_rel: float = 1e-9
    det_zero: float = 1e-9

    def __post_init__(self):
        for name in ("eig_psd", "rank_rel", "det_zero"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ValueError(f"tolerance {name}={value!r} must lie in (0, 1)")

    def relaxed(self, factor: float = 10.0) -> "Tolerances":
        """Same tolerances loosened by ``factor`` (capped below 1)."""
        cap = 0.5
        return Tolerances(
            eig_psd=min(self.eig_psd * factor, cap),
            rank_rel=min(self.rank_rel * factor, cap),
            det_zero=min(self.det_zero * factor, cap),
        )

    def as_dict(self) -> dict:
        return {"eig_psd": self.eig_psd, "rank_rel": self.rank_rel, "det_zero": self.det_zero}


DEFAULT_TOL = Tolerances()


class SymMatrix:
    """Immutable real symmetric matrix.

    Only the lower triangle of the input is read; the upper triangle is a
    mirror of it, so ``entry(i, j) == entry(j, i)`` holds bit for bit.
    """

    __slots__ = ("_a",)

    def __init__(self, data):
        a = np.array(data, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"expected a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        lower = np.tril(a)
        full = lower + np.tril(lower, -1).T
        full.setflags(write=False)
        self._a = full

    @classmethod
    def _wrap(cls, a: np.ndarray) -> "SymMatrix":
        # caller guarantees exact symmetry
        obj = cls.__new__(cls)
        a = np.array(a, dtype=float)
        a.setflags(write=False)
        obj._a = a
        return obj

    @classmethod
    def identity(cls, n: int) -> "SymMatrix":
        return cls._wrap(np.eye(n))

    @classmethod
    def zeros(cls, n: int) -> "SymMatrix":
        return cls._wrap(np.zeros((n, n)))

    @classmethod
    def diag(cls, values) -> "SymMatrix":
        return cls._wrap(np.diag(np.asarray(values, dtype=float)))

    @property
    def n(self) -> int:
        return self._a.shape[0]

    @property
    def array(self) -> np.ndarray:
        """Read-only ``n x n`` view of the entries."""
        return self._a

    def entry(self, i: int, j: int) -> float:
        return float(self._a[i, j])

    def tolist(self) -> list:
        return self._a.tolist()

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._a)))

    def frobenius(self) -> float:
        return float(np.linalg.norm(self._a))

    def is_zero(self) -> bool:
        return not np.any(self._a)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return np.array(self._a)
        return np.array(self._a, dtype=dtype)

    def __add__(self, other):
        return SymMatrix(self._a + _raw(other))

    def __sub__(self, other):
        return SymMatrix(self._a - _raw(other))

    def __neg__(self):
        return SymMatrix._wrap(-self._a)

    def __mul__(self, c):
        if isinstance(c, (SymMatrix, np.ndarray)):
            return NotImplemented
        return SymMatrix._wrap(float(c) * self._a)

    __rmul__ = __mul__

    def __repr__(self):
        return f"SymMatrix({self._a.tolist()!r})"


def _raw(M) -> np.ndarray:
    return M.array if isinstance(M, SymMatrix) else np.asarray(M, dtype=float)


def as_sym(M) -> SymMatrix:
    return M if isinstance(M, SymMatrix) else SymMatrix(M)


def entry_scale(M) -> float:
    """``max(1, max |entry|)``, the reference magnitude for relative checks."""
    a = _raw(M)
    return max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0


def det_scale(M) -> float:
    """Hadamard-style bound ``prod_i max_j |m_ij|`` clamped to at least 1."""
    a = _raw(M)
    return max(1.0, float(np.prod(np.max(np.abs(a), axis=1))))


def index_set(indices, n: int) -> IndexSet:
    idx = tuple(int(i) for i in indices)
    if not idx:
        raise ValueError("index set must be nonempty")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError(f"index set {idx} is not strictly increasing")
    if idx[0] < 0 or idx[-1] >= n:
        raise ValueError(f"index set {idx} out of range for n={n}")
    return idx


def complement(i: int, n: int) -> IndexSet:
    return tuple(j for j in range(n) if j != i)


def principal_submatrix(M, indices) -> SymMatrix:
    M = as_sym(M)
    idx = index_set(indices, M.n)
    return SymMatrix._wrap(M.array[np.ix_(idx, idx)])


class EigenDecomp(NamedTuple):
    values: np.ndarray  # ascending
    vectors: np.ndarray  # column t pairs with values[t]


def _off_norm(a: list) -> float:
    n = len(a)
    return math.sqrt(sum(a[p][q] * a[p][q] for p in range(n) for q in range(n) if p != q))


def eigen_sym(M, max_sweeps: int = 100, rel_tol: float = 1e-12) -> EigenDecomp:
    """Cyclic Jacobi eigendecomposition.

    Rotations visit pairs (p, q) in row order each sweep, which makes the
    result a deterministic function of the input. Iteration stops once the
    off-diagonal Frobenius mass drops below ``rel_tol * ||M||_F``.
    """
    src = _raw(M)
    n = src.shape[0]
    # plain lists: at these sizes numpy call overhead dominates the flops
    a = src.tolist()
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    threshold = rel_tol * math.sqrt(sum(x * x for row in a for x in row))
    off = _off_norm(a)
    sweeps = 0
    while off > threshold:
        if sweeps >= max_sweeps:
            raise NumericalError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal residual {off:.3e})"
            )
        for p in range(n - 1):
            ap = a[p]
            for q in range(p + 1, n):
                apq = ap[q]
                if apq == 0.0:
                    continue
                aq = a[q]
                tau = (aq[q] - ap[p]) / (2.0 * apq)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                app, aqq = ap[p], aq[q]
                for r in range(n):
                    x, y = ap[r], aq[r]
                    ap[r] = c * x - s * y
                    aq[r] = s * x + c * y
                for r in range(n):
                    row = a[r]
                    x, y = row[p], row[q]
                    row[p] = c * x - s * y
                    row[q] = s * x + c * y
                ap[p] = app - t * apq
                aq[q] = aqq + t * apq
                ap[q] = aq[p] = 0.0
                for row in v:
                    x, y = row[p], row[q]
                    row[p] = c * x - s * y
                    row[q] = s * x + c * y
        sweeps += 1
        off = _off_norm(a)
    values = np.array([a[i][i] for i in range(n)])
    order = np.argsort(values, kind="stable")
    return EigenDecomp(values[order], np.array(v)[:, order])


def eigvals_sym(M) -> np.ndarray:
    return eigen_sym(M).values


def det(M) -> float:
    """Determinant by LU elimination with partial pivoting (LAPACK getrf)."""
    a = _raw(M)
    if a.shape[0] == 1:
        return float(a[0, 0])
    return float(np.linalg.det(a))


def det_sign(M, tol: Tolerances = DEFAULT_TOL, value: float | None = None) -> int:
    """Tri-state sign of det(M): -1, 0 (inside the zero band) or +1."""
    d = det(M) if value is None else value
    if abs(d) <= tol.det_zero * det_scale(M):
        return 0
    return 1 if d > 0 else -1


def adjugate_cofactor(M) -> SymMatrix:
    """Reference adjugate from explicit (n-1)x(n-1) cofactor determinants."""
    a = _raw(M)
    n = a.shape[0]
    if n == 1:
        return SymMatrix._wrap(np.ones((1, 1)))
    minors = np.empty((n, n, n - 1, n - 1))
    for i in range(n):
        rows = np.delete(a, i, axis=0)
        for j in range(n):
            minors[i, j] = np.delete(rows, j, axis=1)
    cof = np.linalg.det(minors)
    signs = (-1.0) ** np.add.outer(np.arange(n), np.arange(n))
    return SymMatrix((signs * cof).T)


def adjugate_eigen(M) -> SymMatrix:
    """adj(M) = V diag(prod_{j != i} lambda_j) V^T, valid for any symmetric M."""
    a = _raw(M)
    n = a.shape[0]
    if n == 1:
        return SymMatrix._wrap(np.ones((1, 1)))
    lam, vec = eigen_sym(a)
    others = np.array([np.prod(np.delete(lam, i)) for i in range(n)])
    return SymMatrix((vec * others) @ vec.T)


def adjugate(M, tol: Tolerances = DEFAULT_TOL) -> SymMatrix:
    """Adjugate; eigen route when det is clear of the zero band, cofactors otherwise."""
    if det_sign(M, tol) != 0:
        return adjugate_eigen(M)
    return adjugate_cofactor(M)


def rank_from_values(values: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> int:
    mags = np.abs(values)
    cut = tol.rank_rel * max(1.0, float(np.max(mags)))
    return int(np.count_nonzero(mags > cut))


def psd_from_values(values: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> bool:
    cut = tol.eig_psd * max(1.0, float(np.max(np.abs(values))))
    return bool(values[0] >= -cut)


def rank(M, tol: Tolerances = DEFAULT_TOL) -> int:
    return rank_from_values(eigvals_sym(M), tol)


def is_psd(M, tol: Tolerances = DEFAULT_TOL) -> bool:
    return psd_from_values(eigvals_sym(M), tol)


def bordered_det(M, i: int) -> float:
    """m_ii det(M_J) - m_J^T adj(M_J) m_J with J the complement of {i}.

    Equal to det(M) for every i; kept separate so the identity can be
    tested against :func:`det`.
    """
    M = as_sym(M)
    n = M.n
    if n < 2:
        raise ValueError("bordered_det needs n >= 2")
    if not 0 <= i < n:
        raise ValueError(f"index {i} out of range for n={n}")
    J = complement(i, n)
    sub = M.array[np.ix_(J, J)]
    col = M.array[J, i]
    adj = adjugate_cofactor(sub).array
    return M.array[i, i] * det(sub) - float(col @ adj @ col)


def all_subsets(n: int, sizes: Sequence[int]):
    for size in sizes:
        yield from itertools.combinations(range(n), size)
