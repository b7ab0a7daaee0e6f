"""Hybrid quantum/classical secret sharing: compression, inflation, twin thresholds and homogenization."""

__version__ = "0.1.0"

from .access_structure import AccessStructure, PlayerRoster, min_hitting_set, minimize
from .errors import CapacityError, HybridQssError, InsufficientShares, SchemeError
from .homogenizer import (
    HomogenizerRun,
    build_scheme3,
    eta_for_delta,
    homogenize,
    partial_swap,
    scheme3_deal,
    scheme3_reconstruct,
    unwind,
    verify_scheme3,
)
from .hybrid_protocols import (
    SchemePlan,
    TwinThresholdDescriptor,
    build_q2ts,
    build_q2ts_c,
    compress_general,
    compress_threshold,
    deal,
    inflate,
    inflate_qts,
    inflate_qts_conformal,
    plain_qts,
    reconstruct,
)
from .qts_codes import QotpKey, QtsCode, qotp_decrypt, qotp_encrypt, qts_encode, qts_reconstruct
from .quantum_sim import QuditState, UnitaryOp, fidelity, partial_trace, trace_distance
from .verifier import VerificationReport, verify_access_structure, verify_subset_exact

__all__ = [
    "__version__",
    "AccessStructure",
    "PlayerRoster",
    "min_hitting_set",
    "minimize",
    "CapacityError",
    "HybridQssError",
    "InsufficientShares",
    "SchemeError",
    "HomogenizerRun",
    "build_scheme3",
    "eta_for_delta",
    "homogenize",
    "partial_swap",
    "scheme3_deal",
    "scheme3_reconstruct",
    "unwind",
    "verify_scheme3",
    "SchemePlan",
    "TwinThresholdDescriptor",
    "build_q2ts",
    "build_q2ts_c",
    "compress_general",
    "compress_threshold",
    "deal",
    "inflate",
    "inflate_qts",
    "inflate_qts_conformal",
    "plain_qts",
    "reconstruct",
    "QotpKey",
    "QtsCode",
    "qotp_decrypt",
    "qotp_encrypt",
    "qts_encode",
    "qts_reconstruct",
    "QuditState",
    "UnitaryOp",
    "fidelity",
    "partial_trace",
    "trace_distance",
    "VerificationReport",
    "verify_access_structure",
    "verify_subset_exact",
]
