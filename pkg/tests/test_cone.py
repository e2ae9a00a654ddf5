from math import comb

import numpy as np
import pytest

from kpsd import ConeSpec, SymMatrix, enumerate_index_sets, gnk, membership, project_dykstra
from kpsd.cone import is_member
from kpsd.errors import ConvergenceError
from kpsd.symmat import eigen_sym, is_psd


def random_sym(seed, n):
    return SymMatrix(np.random.default_rng(seed).uniform(-1, 1, (n, n)))


def test_conespec_range():
    with pytest.raises(ValueError):
        ConeSpec(3, 0)
    with pytest.raises(ValueError):
        ConeSpec(3, 4)
    ConeSpec(1, 1)


# --- enumerate_index_sets ----------------------------------------------------


def test_enumerate_examples():
    assert enumerate_index_sets(3, 2) == [(0, 1), (0, 2), (1, 2)]
    assert enumerate_index_sets(4, 4) == [(0, 1, 2, 3)]
    sets = enumerate_index_sets(5, 3)
    assert len(sets) == 10 and sets[0] == (0, 1, 2) and sets[-1] == (2, 3, 4)
    assert sets == sorted(sets)


@pytest.mark.parametrize("n,k", [(3, 0), (3, 4)])
def test_enumerate_range(n, k):
    with pytest.raises(ValueError):
        enumerate_index_sets(n, k)


# --- membership --------------------------------------------------------------


def test_membership_g43():
    rep = membership(gnk(4, 3), ConeSpec(4, 3))
    assert rep.member and rep.blocks_checked == 4 and rep.violations == ()


def test_membership_g43_full_block():
    rep = membership(gnk(4, 3), ConeSpec(4, 4))
    assert not rep.member
    (idx, lam), = rep.violations
    assert idx == (0, 1, 2, 3)
    assert lam == pytest.approx(-0.5, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_zero_is_member(k):
    assert membership(SymMatrix.zeros(3), ConeSpec(3, k)).member


def test_membership_lists_every_violation():
    # every 2x2 block of -I is negative
    rep = membership(-SymMatrix.identity(4), ConeSpec(4, 2))
    assert len(rep.violations) == comb(4, 2)


def test_membership_dimension_mismatch():
    with pytest.raises(ValueError):
        membership(SymMatrix.identity(3), ConeSpec(4, 2))


@pytest.mark.parametrize("seed", range(40))
def test_nesting_and_full_block(seed):
    n = 2 + seed % 5
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, n))
    # a mild negative shift so some samples sit between the cones
    M = SymMatrix(X @ X.T - rng.uniform(0, 1.5) * np.eye(n))
    flags = [membership(M, ConeSpec(n, k)).member for k in range(1, n + 1)]
    for k1 in range(n):
        for k2 in range(k1 + 1, n):
            assert not flags[k2] or flags[k1]
    assert flags[-1] == is_psd(M)
    assert all(is_member(M, ConeSpec(n, k)) == f for k, f in zip(range(1, n + 1), flags))


@pytest.mark.parametrize("n", range(3, 9))
def test_gnk_member_at_k_not_at_k_plus_one(n):
    for k in range(2, n):
        G = gnk(n, k)
        assert is_member(G, ConeSpec(n, k))
        assert not is_member(G, ConeSpec(n, k + 1))


# --- project_dykstra ---------------------------------------------------------


def test_project_member_is_fixed_point():
    G = gnk(5, 3)
    P, res = project_dykstra(G, ConeSpec(5, 3))
    assert res == 0.0 and np.array_equal(P.array, G.array)


def test_project_g43_onto_psd():
    P, _ = project_dykstra(gnk(4, 3), ConeSpec(4, 4))
    assert np.linalg.norm(gnk(4, 3).array - P.array) == pytest.approx(0.5, abs=1e-9)
    assert is_psd(P)


def test_project_k1_clips_diagonal():
    P, _ = project_dykstra(-SymMatrix.identity(2), ConeSpec(2, 1))
    assert np.allclose(P.array, 0.0)


@pytest.mark.parametrize("seed", range(8))
def test_project_matches_eigen_clip_for_full_block(seed):
    # with one block Dykstra is a single exact projection
    n = 3 + seed % 4
    M = random_sym(seed, n)
    lam, V = eigen_sym(M)
    want = V @ np.diag(np.maximum(lam, 0)) @ V.T
    P, _ = project_dykstra(M, ConeSpec(n, n))
    assert np.allclose(P.array, want, atol=1e-10)


@pytest.mark.parametrize("seed", range(8))
def test_project_output_member_and_idempotent(seed):
    n = 4 + seed % 2
    spec = ConeSpec(n, 2 + seed % 2)
    M = random_sym(100 + seed, n)
    P, res = project_dykstra(M, spec)
    assert is_member(P, spec.relaxed(10))
    Q, _ = project_dykstra(P, spec)
    assert np.allclose(Q.array, P.array, atol=1e-7)


@pytest.mark.parametrize("seed", range(5))
def test_project_is_nearest_among_members(seed):
    # the projection beats random members nearby (variational check)
    n, spec = 4, ConeSpec(4, 3)
    M = random_sym(200 + seed, n)
    P, _ = project_dykstra(M, spec)
    d = np.linalg.norm(M.array - P.array)
    rng = np.random.default_rng(seed)
    for _ in range(50):
        E = rng.normal(scale=0.05, size=(n, n))
        Q = SymMatrix(P.array + E + E.T)
        if is_member(Q, spec):
            assert np.linalg.norm(M.array - Q.array) >= d - 1e-7


def test_project_sweep_cap():
    with pytest.raises(ConvergenceError) as info:
        project_dykstra(random_sym(7, 6), ConeSpec(6, 3), max_sweeps=1)
    assert info.value.best is not None and info.value.residual > 0
    with pytest.raises(ValueError):
        project_dykstra(SymMatrix.identity(2), ConeSpec(2, 1), max_sweeps=0)
