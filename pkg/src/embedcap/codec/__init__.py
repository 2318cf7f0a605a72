"""Executable random-coding schemes and their Monte Carlo simulation."""

from .bc import (BcBinnedCodebook, BcSuperpositionCodebook, bc_caseB_decode1, bc_caseB_decode2,
                 bc_caseB_encode, bc_caseC_decode1, bc_caseC_decode2, bc_caseC_encode, cloud_from_input,
                 fallback_input)
from .common import DecodeResult, message_count, sample_channel
from .mac import MacCodebook, mac_caseC_decode, mac_caseC_encode
from .rng import Role, draw_rows, stream
from .simulate import (ERROR_CLASSES, SCHEMES, SimConfig, SimReport, TrialRecord, build_runner,
                       normalize_scheme, scheme_for, simulate)

__all__ = [
    "BcBinnedCodebook", "BcSuperpositionCodebook", "DecodeResult", "ERROR_CLASSES", "MacCodebook",
    "Role", "SCHEMES", "SimConfig", "SimReport", "TrialRecord", "bc_caseB_decode1",
    "bc_caseB_decode2", "bc_caseB_encode", "bc_caseC_decode1", "bc_caseC_decode2", "bc_caseC_encode",
    "build_runner", "cloud_from_input", "draw_rows", "fallback_input", "mac_caseC_decode", "mac_caseC_encode",
    "message_count", "normalize_scheme", "sample_channel", "scheme_for", "simulate", "stream",
]
