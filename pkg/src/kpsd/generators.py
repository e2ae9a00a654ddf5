"""Generator families of the k-PSD closure and seeded samplers for tests."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .cone import ConeSpec, is_member, membership, project_dykstra
from .errors import NumericalError
from .symmat import DEFAULT_TOL, SymMatrix, det, det_sign, eigen_sym, entry_scale

MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 stream (Steele, Lea & Flood).

    Chosen over numpy's generators because the full algorithm is five lines,
    so seeded suites can be reproduced bit for bit from any language. Test
    vectors live in tests/test_generators.py.
    """

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * self.random()

    def integer(self, n: int) -> int:
        """Uniform integer in range(n); slight modulo bias is irrelevant here."""
        return self.next_u64() % n

    def array(self, shape, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
        size = int(np.prod(shape))
        return np.array([self.uniform(lo, hi) for _ in range(size)]).reshape(shape)

    def signed(self, shape, lo: float = 0.1, hi: float = 1.0) -> np.ndarray:
        """Entries with magnitude uniform on [lo, hi] and a random sign."""
        size = int(np.prod(shape))
        out = [self.uniform(lo, hi) * (1.0 if self.random() < 0.5 else -1.0) for _ in range(size)]
        return np.array(out).reshape(shape)

    def choice(self, n: int, size: int) -> tuple:
        """Sorted sample of ``size`` distinct indices from range(n)."""
        pool = list(range(n))
        for i in range(size):
            j = i + self.integer(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return tuple(sorted(pool[:size]))


@dataclass(frozen=True)
class DiagonalCongruence:
    d: tuple

    def __post_init__(self):
        d = tuple(float(x) for x in self.d)
        if not d:
            raise ValueError("diagonal congruence needs at least one entry")
        if any(abs(x) <= 1e-12 for x in d):
            raise ValueError(f"diagonal congruence entries must be nonzero, got {d}")
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return len(self.d)

    def apply(self, M) -> SymMatrix:
        dv = np.array(self.d)
        return SymMatrix(dv[:, None] * np.asarray(M) * dv[None, :])


def random_diagonal(n: int, seed: int) -> DiagonalCongruence:
    """Entries uniform on [-2, -0.5] U [0.5, 2]."""
    rng = SplitMix64(seed)
    d = []
    for _ in range(n):
        mag = rng.uniform(0.5, 2.0)
        d.append(mag if rng.random() < 0.5 else -mag)
    return DiagonalCongruence(tuple(d))


def gnk(n: int, k: int) -> SymMatrix:
    """k/(k-1) I - 1/(k-1) 11^T: unit diagonal, off-diagonal -1/(k-1)."""
    if n < 3 or not 2 <= k <= n - 1:
        raise ValueError(f"G(n,k) needs n >= 3 and 2 <= k <= n-1, got n={n}, k={k}")
    a = np.full((n, n), -1.0 / (k - 1))
    np.fill_diagonal(a, 1.0)
    return SymMatrix(a)


def nls(n: int, k: int, D) -> SymMatrix:
    """D G(n,k) D, checked to have vanishing k x k minors and nonzero det."""
    if n < 5 or not 3 <= k <= n - 2:
        raise ValueError(f"NLS matrices need n >= 5 and 3 <= k <= n-2, got n={n}, k={k}")
    if not isinstance(D, DiagonalCongruence):
        D = DiagonalCongruence(tuple(D))
    if D.n != n:
        raise ValueError(f"diagonal has length {D.n}, expected {n}")
    M = D.apply(gnk(n, k))
    a = M.array
    for idx in itertools.combinations(range(n), k):
        block = a[np.ix_(idx, idx)]
        if det_sign(block) != 0:
            raise NumericalError(f"k x k minor on {idx} is {det(block):.3e}, outside zero band")
    if det_sign(M) == 0:
        raise NumericalError(f"det {det(M):.3e} fell inside the zero band")
    if not is_member(M, ConeSpec(n, k)):
        raise NumericalError("congruent matrix failed the membership check")
    return M


def rank_one(x) -> SymMatrix:
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0 or not np.any(x):
        raise ValueError("rank_one needs a nonzero vector")
    return SymMatrix(np.outer(x, x))


STYLES = ("psd", "boundary", "signed")
SIGNED_SHIFT = 1e-3
# block eigenvalues in (rank threshold, GREY_BAND * scale] are rejected
GREY_BAND = 1e-4
MAX_DRAWS = 200


def in_grey_band(M: SymMatrix, k: int) -> bool:
    """True if some k x k block has an eigenvalue just above the rank cut."""
    a = M.array
    scale = entry_scale(a)
    lo, hi = DEFAULT_TOL.rank_rel * scale, GREY_BAND * scale
    for idx in itertools.combinations(range(M.n), k):
        lam = np.abs(eigen_sym(a[np.ix_(idx, idx)]).values)
        if np.any((lam > lo) & (lam <= hi)):
            return True
    return False


def _draw(spec: ConeSpec, rng: SplitMix64, style: str) -> SymMatrix:
    n, k = spec.n, spec.k
    # factor entries stay away from zero: a tiny row would put diagonal
    # entries right on the rank threshold
    if style == "psd":
        r = 1 + rng.integer(n)
        X = rng.signed((n, r))
        return SymMatrix(X @ X.T)
    if style == "boundary":
        r = 1 + rng.integer(n)
        X = rng.signed((n, r))
        S = list(rng.choice(n, k))
        if k == 1:
            X[S] = 0.0
        else:
            X[S] = rng.signed((k, k - 1)) @ rng.signed((k - 1, r))
        if rng.random() < 0.25:
            X[rng.integer(n)] = 0.0
        return SymMatrix(X @ X.T)
    A = rng.array((n, n))
    P, _ = project_dykstra(SymMatrix(A), spec)
    return P + SIGNED_SHIFT * entry_scale(P) * np.eye(n)


def random_member(spec: ConeSpec, seed: int, style: str = "psd") -> SymMatrix:
    """Deterministic cone member for a given (spec, seed, style).

    psd       Gram matrix of 1..n random vectors.
    boundary  Gram matrix where the rows of one random k-subset are forced
              into a (k-1)-dimensional span, so that block is singular; a
              row is sometimes zeroed as well.
    signed    random symmetric matrix projected onto the cone, then shifted
              by SIGNED_SHIFT * max|entry| times the identity. The shift keeps
              membership strict and keeps blocks far enough from singular
              that splitting certificates clear their margins.

    Draws with a k x k block eigenvalue strictly between the rank threshold
    and GREY_BAND * max|entry| are discarded and redrawn from the same
    stream, so every block is either exactly singular or clearly not.
    """
    if style not in STYLES:
        raise ValueError(f"unknown style {style!r}; expected one of {STYLES}")
    rng = SplitMix64(seed)
    for _ in range(MAX_DRAWS):
        M = _draw(spec, rng, style)
        if not in_grey_band(M, spec.k):
            break
    else:
        raise NumericalError(f"no well-separated sample in {MAX_DRAWS} draws (seed={seed})")
    if not membership(M, spec).member:
        raise NumericalError(f"sampler produced a non-member (style={style}, seed={seed})")
    return M
