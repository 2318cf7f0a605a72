"""Bound evaluators, feasible-tuple search, and rate-region geometry."""

from .bounds import (eval_bc_caseA_inner, eval_bc_caseA_outer, eval_bc_caseB_inner,
                     eval_bc_caseB_outer, eval_bc_caseC, eval_bc_caseD, eval_mac_caseA,
                     eval_mac_caseB, eval_mac_caseC)
from .problems import (BC_CASES, MAC_CASES, BcFeasibleTuple, BcProblem, MacFeasibleTuple,
                       MacProblem, bc_full_joint, check_bc_feasible, check_mac_feasible,
                       mac_full_joint, normalize_case)
from .region import (RatePoint, RateRegion, contains, containment_violation, convex_hull, max_violation,
                     support_function)
from .search import SearchConfig, build_family, compute_region, simplex_grid
from .single_user import irreversible_capacity, reversible_capacity

__all__ = [
    "BC_CASES", "MAC_CASES", "BcFeasibleTuple", "BcProblem", "MacFeasibleTuple", "MacProblem",
    "RatePoint", "RateRegion", "SearchConfig", "bc_full_joint", "build_family",
    "check_bc_feasible", "check_mac_feasible", "compute_region", "contains", "containment_violation", "convex_hull",
    "eval_bc_caseA_inner", "eval_bc_caseA_outer", "eval_bc_caseB_inner", "eval_bc_caseB_outer",
    "eval_bc_caseC", "eval_bc_caseD", "eval_mac_caseA", "eval_mac_caseB", "eval_mac_caseC",
    "irreversible_capacity", "mac_full_joint", "max_violation", "normalize_case",
    "reversible_capacity", "simplex_grid", "support_function",
]
