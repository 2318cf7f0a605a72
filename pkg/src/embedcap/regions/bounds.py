"""Rate-bound expressions for every MAC and BC case.

Each formula is written once against a small information backend exposing
``mi(a, b, given)`` and ``h(a, given)``.  The public ``eval_*`` functions run
them on an exact :class:`~embedcap.prob.JointPmf`; the region search runs the
same formulas on a batched numpy backend (see ``search.py``).

Every evaluator returns ``(b1, b2, b12)``; ``b12`` is ``inf`` for regions
without a sum-rate constraint.  Bounds may be negative.
"""

from __future__ import annotations

import math

from .. import prob
from .problems import (BcFeasibleTuple, BcProblem, MacFeasibleTuple, MacProblem, bc_full_joint,
                       check_bc_feasible, check_mac_feasible, mac_full_joint)

INF = math.inf


class ExactInfo:
    """Information backend over a single joint pmf."""

    def __init__(self, joint: prob.JointPmf):
        self.joint = joint
        self._h = {}

    def h(self, a, given=()):
        return self._entropy(tuple(a) + tuple(given)) - self._entropy(tuple(given))

    def _entropy(self, names):
        key = frozenset(names)
        if not key:
            return 0.0
        if key not in self._h:
            self._h[key] = prob.entropy(self.joint, sorted(key))
        return self._h[key]

    def mi(self, a, b, given=()):
        if given:
            return prob.conditional_mutual_information(self.joint, a, b, given)
        return prob.mutual_information(self.joint, a, b)


# -- MAC ---------------------------------------------------------------------
# ``q`` is the conditioning tuple for time sharing: ("Q",) or ().

def mac_caseA_terms(info, q=("Q",)):
    b1 = info.mi(("U1",), ("U2", "Y"), q) - info.mi(("U1",), ("S1",), q)
    b2 = info.mi(("U2",), ("U1", "Y"), q) - info.mi(("U2",), ("S2",), q)
    b12 = info.mi(("U1", "U2"), ("Y",), q) - info.mi(("U1", "U2"), ("S1", "S2"), q)
    return b1, b2, b12


def mac_caseB_terms(info, q=("Q",)):
    x2s2q = ("X2", "S2") + tuple(q)
    leak1 = info.mi(("U1",), ("S1",), x2s2q)
    b1 = info.mi(("U1",), ("Y",), x2s2q) - leak1
    b2 = info.mi(("X2", "S2"), ("Y",), ("U1",) + tuple(q)) - info.h(("S2",), ("U1",) + tuple(q))
    b12 = info.mi(("U1", "X2", "S2"), ("Y",), q) - info.h(("S2",)) - leak1
    return b1, b2, b12


def mac_caseC_terms(info, q=("Q",)):
    b1 = info.mi(("X1", "S1"), ("Y",), ("X2", "S2") + tuple(q)) - info.h(("S1",), ("S2",))
    b2 = info.mi(("X2", "S2"), ("Y",), ("X1", "S1") + tuple(q)) - info.h(("S2",), ("S1",))
    b12 = info.mi(("X1", "S1", "X2", "S2"), ("Y",), q) - info.h(("S1", "S2"))
    return b1, b2, b12


# -- BC ----------------------------------------------------------------------

def bc_caseA_inner_terms(info):
    b1 = info.mi(("V",), ("Y",), ("U",)) - info.mi(("V",), ("S",), ("U",))
    b2 = info.mi(("U",), ("Z",)) - info.mi(("U",), ("S",))
    return b1, b2, INF


def bc_caseA_outer_terms(info):
    b1 = info.mi(("V",), ("Y",), ("U", "W")) - info.mi(("V",), ("S",), ("U", "W"))
    b2 = info.mi(("U",), ("Z",)) - info.mi(("U",), ("S",))
    b12 = info.mi(("U", "V", "W"), ("Y",)) - info.mi(("U", "V", "W"), ("S",))
    return b1, b2, b12


def bc_caseB_inner_terms(info):
    b1 = info.mi(("X", "S"), ("Y",), ("U",)) - info.h(("S",), ("U",))
    b2 = info.mi(("U",), ("Z",)) - info.mi(("U",), ("S",))
    return b1, b2, INF


def bc_caseB_outer_terms(info):
    b1 = info.mi(("X", "S"), ("Y",), ("U",)) - info.h(("S",), ("U",))
    b2 = info.mi(("U", "V"), ("Z",)) - info.mi(("U", "V"), ("S",))
    return b1, b2, INF


def bc_caseC_terms(info):
    b1 = info.mi(("X",), ("Y",), ("U", "S"))
    b2 = info.mi(("X", "S"), ("Z",)) - info.h(("S",))
    return b1, b2, INF


# -- public evaluators ---------------------------------------------------------

def _mac_info(problem: MacProblem, tup: MacFeasibleTuple, check: bool):
    joint = mac_full_joint(problem, tup)
    if check:
        check_mac_feasible(problem, joint)
    return ExactInfo(joint)


def _bc_info(problem: BcProblem, tup: BcFeasibleTuple, check: bool):
    joint = bc_full_joint(problem, tup)
    if check:
        check_bc_feasible(problem, joint)
    return ExactInfo(joint)


def eval_mac_caseA(tup: MacFeasibleTuple, problem: MacProblem, check: bool = True):
    """Bounds of the no-host-recovery inner region (binned auxiliaries U1, U2)."""
    if tup.is_outer:
        raise ValueError("case A bounds need separate encoders (an inner-set tuple)")
    return mac_caseA_terms(_mac_info(problem, tup, check))


def eval_mac_caseB(tup: MacFeasibleTuple, problem: MacProblem, check: bool = True):
    """Bounds when host 2 must be recovered; encoder 2's auxiliary is (X2, S2) itself."""
    if tup.is_outer:
        raise ValueError("case B bounds need separate encoders (an inner-set tuple)")
    return mac_caseB_terms(_mac_info(problem, tup, check))


def eval_mac_caseC(tup: MacFeasibleTuple, problem: MacProblem, check: bool = True):
    """Bounds when both hosts are recovered.  Accepts inner- or outer-set tuples."""
    return mac_caseC_terms(_mac_info(problem, tup, check))


def eval_bc_caseA_inner(tup: BcFeasibleTuple, problem: BcProblem, check: bool = True):
    return bc_caseA_inner_terms(_bc_info(problem, tup, check))


def eval_bc_caseA_outer(tup: BcFeasibleTuple, problem: BcProblem, check: bool = True):
    return bc_caseA_outer_terms(_bc_info(problem, tup, check))


def eval_bc_caseB_inner(tup: BcFeasibleTuple, problem: BcProblem, check: bool = True):
    return bc_caseB_inner_terms(_bc_info(problem, tup, check))


def eval_bc_caseB_outer(tup: BcFeasibleTuple, problem: BcProblem, check: bool = True):
    return bc_caseB_outer_terms(_bc_info(problem, tup, check))


def eval_bc_caseC(tup: BcFeasibleTuple, problem: BcProblem, check: bool = True):
    """Capacity-region bounds with host recovery at both decoders (also serves D')."""
    return bc_caseC_terms(_bc_info(problem, tup, check))


eval_bc_caseD = eval_bc_caseC
