import numpy as np
import pytest

from families import KN1_BRANCHES, extreme_kn1, k2_instance, kn1_instance
from kpsd import (
    ConeSpec,
    SplitMix64,
    SymMatrix,
    certify_k2,
    certify_psd_split,
    certify_rank_one_perturbation,
    classify,
    classify_k2,
    classify_kn1,
    face_dimension,
    gnk,
    is_connected,
    kernel_family,
    rank_one,
    support_graph,
    verify_certificate,
)
from kpsd.cone import is_member
from kpsd.generators import random_member
from kpsd.symmat import det

EYE3 = SymMatrix.identity(3)
M_C = SymMatrix([[1, 1, 0], [1, 1, 0], [0, 0, 1]])


def replay(M, verdict, spec):
    ok, reason = verify_certificate(M, verdict.cert, spec)
    assert ok, reason


# --- classify dispatch -------------------------------------------------------


def test_classify_all_ones_k2():
    v = classify(SymMatrix(np.ones((4, 4))), ConeSpec(4, 2))
    assert v.tag == "Extreme" and v.reason == "AllBlocksRank1"


def test_classify_identity_k2():
    v = classify(EYE3, ConeSpec(3, 2))
    assert v.tag == "NotExtreme" and v.cert.kind == "Perturbation2x2"
    assert (v.cert.params["i"], v.cert.params["j"]) == (0, 1)
    replay(EYE3, v, ConeSpec(3, 2))


def test_classify_g43():
    v = classify(gnk(4, 3), ConeSpec(4, 3))
    assert v.tag == "Extreme" and v.reason == "Kn1RankCondition"
    assert v.diagnostics["block_ranks"] == [2, 2, 2, 2]
    assert v.diagnostics["det"] == pytest.approx(-27 / 16)


def test_classify_non_member_and_zero():
    v = classify(gnk(4, 3), ConeSpec(4, 4))
    assert v.tag == "NotMember" and v.report.violations[0][0] == (0, 1, 2, 3)
    assert classify(SymMatrix.zeros(4), ConeSpec(4, 2)).tag == "ZeroMatrix"


def test_classify_argument_errors():
    with pytest.raises(ValueError):
        classify(EYE3, ConeSpec(4, 2))
    with pytest.raises(ValueError):
        classify(EYE3, ConeSpec(3, 1))


def test_classify_middle_k():
    spec = ConeSpec(6, 3)
    M = random_member(spec, 0, "psd")
    v = classify(M, spec)
    assert v.tag == "Unknown" and v.face_dim_hint is None
    v = classify(M, spec, use_oracle=True)
    assert v.tag == "NotExtreme" and v.cert.kind == "FaceSplit"
    assert v.diagnostics["face_dimension"] > 1
    replay(M, v, spec)
    # rank-1 needs no oracle
    assert classify(rank_one(np.arange(1.0, 7.0)), spec).reason == "AllBlocksRank1"
    v = classify(gnk(6, 3), spec, use_oracle=True)
    assert v.tag == "Extreme" and v.reason == "OracleFaceDim1"


# --- block size 2 ------------------------------------------------------------


def test_k2_examples():
    assert classify_k2(rank_one((1, -2, 3))).tag == "Extreme"
    v = classify_k2(SymMatrix.diag([1, 1, 0]))
    assert v.tag == "NotExtreme" and (v.cert.params["i"], v.cert.params["j"]) == (0, 1)
    replay(SymMatrix.diag([1, 1, 0]), v, ConeSpec(3, 2))
    assert classify_k2(gnk(3, 2)).tag == "Extreme"


def test_k2_zero_blocks_do_not_block_extremeness():
    # x has a zero entry, so blocks touching it are identically zero
    assert classify_k2(rank_one((1, 0, 2))).tag == "Extreme"


def test_k2_picks_first_rank2_block():
    M = SymMatrix([[1, 1, 0], [1, 1, 0], [0, 0, 1]])
    v = classify_k2(M)
    assert v.diagnostics["rank2_blocks"] == [[0, 2], [1, 2]]
    assert (v.cert.params["i"], v.cert.params["j"]) == (0, 2)


def test_certify_k2_identity():
    c = certify_k2(SymMatrix.identity(2), 0, 1)
    assert c.params["eps"] == pytest.approx(0.5)
    assert np.allclose(c.A.array, 0.5 * np.array([[1, -0.5], [-0.5, 1]]))
    assert np.allclose(c.B.array, 0.5 * np.array([[1, 0.5], [0.5, 1]]))


def test_certify_k2_leaves_other_blocks():
    M = SymMatrix([[2, 1, 0], [1, 2, 0], [0, 0, 1]])
    c = certify_k2(M, 0, 1)
    # eps_max solves 4 - (1 + eps)^2 = 0
    assert c.params["eps"] == pytest.approx(0.5)
    assert verify_certificate(M, c, ConeSpec(3, 2))[0]
    assert c.A.entry(0, 2) == 0 and c.A.entry(2, 2) == 0.5


def test_certify_k2_diag_4_9():
    c = certify_k2(SymMatrix.diag([4, 9]), 0, 1)
    assert c.params["eps"] == pytest.approx(3.0)


def test_certify_k2_rejects_rank1_block():
    with pytest.raises(ValueError):
        certify_k2(SymMatrix(np.ones((2, 2))), 0, 1)
    with pytest.raises(ValueError):
        certify_k2(EYE3, 1, 1)


# --- block size n-1 ----------------------------------------------------------


def test_kn1_examples():
    v = classify_kn1(gnk(4, 3))
    assert v.tag == "Extreme" and v.diagnostics["branch"] == "e"
    v = classify_kn1(SymMatrix.identity(4))
    assert v.tag == "NotExtreme" and v.diagnostics["branch"] == "c"
    replay(SymMatrix.identity(4), v, ConeSpec(4, 3))


def test_kn1_worked_rank_one_perturbation():
    v = classify_kn1(M_C)
    assert v.diagnostics["branch"] == "c" and v.cert.kind == "RankOnePerturbation"
    assert v.cert.params["u"] == [1, 1, 0]
    assert v.cert.params["eps"] == pytest.approx(0.5)


def test_rank_one_perturbation_examples():
    c = certify_rank_one_perturbation(M_C)
    u = np.array([1.0, 1.0, 0.0])
    assert c.params["pivot"] == 0
    assert np.allclose(c.A.array, 0.5 * np.outer(u, u))
    assert np.allclose(c.B.array, M_C.array - 0.5 * np.outer(u, u))
    assert verify_certificate(M_C, c, ConeSpec(3, 2))[0]
    c = certify_rank_one_perturbation(EYE3)
    assert c.params["u"] == [1, 0, 0] and c.params["eps"] == pytest.approx(0.5)


def test_rank_one_perturbation_preconditions():
    with pytest.raises(ValueError):
        certify_rank_one_perturbation(gnk(4, 3))  # no full-rank block
    with pytest.raises(ValueError):
        certify_rank_one_perturbation(SymMatrix.diag([1, 1, 1, 0]))  # zero column


def test_kn1_zero_column_branch_c_uses_psd_split():
    M = SymMatrix.diag([1, 2, 3, 0])
    v = classify_kn1(M)
    assert v.diagnostics["branch"] == "c" and v.cert.kind == "PsdConicSplit"


def test_psd_split_examples():
    c = certify_psd_split(SymMatrix.identity(2))
    assert np.allclose(c.A.array, np.diag([1, 0])) and np.allclose(c.B.array, np.diag([0, 1]))
    c = certify_psd_split(SymMatrix.diag([3, 2, 0]))
    assert np.allclose(c.A.array, np.diag([3, 0, 0])) and np.allclose(c.B.array, np.diag([0, 2, 0]))
    X = SplitMix64(5).signed((5, 3))
    M = SymMatrix(X @ X.T)
    assert verify_certificate(M, certify_psd_split(M), ConeSpec(5, 4))[0]
    with pytest.raises(ValueError):
        certify_psd_split(rank_one((1, 2)))
    with pytest.raises(ValueError):
        certify_psd_split(gnk(3, 2))


@pytest.mark.parametrize("branch", KN1_BRANCHES)
@pytest.mark.parametrize("n", [4, 5])
def test_kn1_branch_targets(n, branch):
    for seed in range(5):
        M = kn1_instance(n, branch, seed)
        v = classify_kn1(M)
        assert v.diagnostics["branch"] == branch
        # branch (b) also holds rank-1 matrices, so the oracle decides
        assert (v.tag == "Extreme") == (face_dimension(M, ConeSpec(n, n - 1)).dimension == 1)
        if branch in "cde":
            assert v.tag == ("Extreme" if branch == "e" else "NotExtreme")
        if v.tag == "NotExtreme":
            replay(M, v, ConeSpec(n, n - 1))


def test_branch_d_and_e_collapse_at_n3():
    # at n = 3 a rank n-2 block is rank 1, so the targets land in branch (a)
    for branch in "de":
        assert classify_kn1(kn1_instance(3, branch, 0)).diagnostics["branch"] == "a"


# --- kernel family and support graph ----------------------------------------


def test_kernel_family_g32():
    fam = kernel_family(gnk(3, 2))
    s = 1 / np.sqrt(2)
    assert np.allclose(fam.V, [[0, s, s], [s, 0, s], [s, s, 0]])
    assert fam.full_rank


def test_kernel_family_g43():
    fam = kernel_family(gnk(4, 3))
    want = (np.ones((4, 4)) - np.eye(4)) / np.sqrt(3)
    assert np.allclose(fam.V, want) and fam.full_rank


def test_kernel_family_psd_det_zero():
    X = SplitMix64(3).signed((4, 2))
    fam = kernel_family(SymMatrix(X @ X.T))
    assert fam.V.shape == (4, 4)
    assert np.allclose([v[i] for i, v in enumerate(fam.vectors)], 0)


def test_kernel_family_wrong_rank():
    with pytest.raises(ValueError):
        kernel_family(SymMatrix.identity(4))


def test_support_graph_examples():
    g = support_graph(gnk(4, 3))
    assert len(g.edges) == 6 and is_connected(g)
    assert not is_connected(support_graph(SymMatrix.identity(2)))
    bd = np.zeros((4, 4))
    bd[:3, :3] = gnk(3, 2).array
    bd[3, 3] = 1.0
    M = SymMatrix(bd)
    assert not is_connected(support_graph(M))
    assert det(M) == pytest.approx(-4.0)
    assert not is_member(M, ConeSpec(4, 3))


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_negative_det_members_connected_and_full_rank(n):
    rng = SplitMix64(n)
    for _ in range(10):
        M = extreme_kn1(n, rng)
        assert is_connected(support_graph(M))
        assert kernel_family(M).full_rank
        assert np.all(np.abs(np.diag(M.array)) > 0)


# --- scaling equivariance ----------------------------------------------------


@pytest.mark.parametrize("c", [1e-3, 1.0, 1e3])
def test_verdicts_scale_invariant(c):
    cases = [(4, 3, gnk(4, 3)), (3, 2, EYE3), (4, 3, SymMatrix.identity(4))]
    cases += [(n, n - 1, kn1_instance(n, b, 1)) for n in (4, 5) for b in KN1_BRANCHES]
    cases += [(n, 2, k2_instance(n, s)[1]) for n in (3, 5) for s in range(6)]
    for n, k, M in cases:
        spec = ConeSpec(n, k)
        base = classify(M, spec)
        scaled = classify(M * c, spec)
        assert scaled.tag == base.tag
        if base.tag == "NotExtreme":
            assert scaled.cert.kind == base.cert.kind
            replay(M * c, scaled, spec)
