"""Extreme rays of the k-PSD closure cone, with replayable certificates."""

from .certificates import DecompCertificate, verify_certificate
from .cone import ConeSpec, MembershipReport, enumerate_index_sets, membership, project_dykstra
from .errors import AmbiguityError, ConsistencyError, ConvergenceError, NumericalError
from .extreme import (
    Extreme,
    NotExtreme,
    NotMember,
    Unknown,
    ZeroMatrix,
    certify_k2,
    certify_psd_split,
    certify_rank_one_perturbation,
    classify,
    classify_k2,
    classify_kn1,
    is_connected,
    kernel_family,
    support_graph,
)
from .generators import DiagonalCongruence, SplitMix64, gnk, nls, random_member, rank_one
from .oracle import FaceReport, decomposition_from_face, decomposition_search, face_dimension
from .symmat import SymMatrix, Tolerances

__version__ = "0.1.0"
