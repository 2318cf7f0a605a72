"""Structural checks on computed regions: containments, budget nesting, C'/D' identity."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InfeasibleProblem
from .output import region_csv
from .regions import BcProblem, MacProblem, RateRegion, SearchConfig, compute_region
from .regions.region import containment_violation

VERIFY_TOL = 1e-6


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    max_violation: float
    detail: str = ""


@dataclass(frozen=True)
class VerifyReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _contain(name, inner: RateRegion, outer: RateRegion, tol, detail=""):
    v = containment_violation(inner, outer)
    return Check(name, v <= tol, v, detail)


def _region_or_empty(problem, cfg, **kw):
    try:
        return compute_region(problem, cfg, **kw)
    except InfeasibleProblem:
        return RateRegion((), (), True)


def check_inner_outer(problem, cfg: SearchConfig, tol: float = VERIFY_TOL) -> Check:
    inner = compute_region(problem, cfg, bound="inner")
    outer = compute_region(problem, cfg, bound="outer")
    return _contain("inner_in_outer", inner, outer, tol)


def check_delta_nesting(problem, cfg: SearchConfig, factor: float = 0.5, tol: float = VERIFY_TOL,
                        bound: str = "inner") -> Check:
    """Region at the budget scaled by ``factor`` must sit inside the region at the full budget."""
    if isinstance(problem, MacProblem):
        small = problem.with_budget(problem.delta1 * factor, problem.delta2 * factor)
        budgets = f"({small.delta1:g}, {small.delta2:g}) vs ({problem.delta1:g}, {problem.delta2:g})"
    else:
        small = problem.with_budget(problem.delta * factor)
        budgets = f"{small.delta:g} vs {problem.delta:g}"
    r_small = _region_or_empty(small, cfg, bound=bound)
    r_big = compute_region(problem, cfg, bound=bound, warm_start=None if r_small.empty else r_small)
    return _contain("delta_nesting", r_small, r_big, tol, budgets)


def check_b_in_a(problem: MacProblem, cfg: SearchConfig, tol: float = VERIFY_TOL) -> Check:
    r_b = compute_region(problem.with_case("B"), cfg)
    r_a = compute_region(problem.with_case("A"), cfg)
    return _contain("caseB_in_caseA", r_b, r_a, tol)


def check_cd_identity(problem: BcProblem, cfg: SearchConfig) -> Check:
    c = region_csv(compute_region(problem.with_case("C'"), cfg))
    d = region_csv(compute_region(problem.with_case("D'"), cfg))
    return Check("Cp_equals_Dp", c == d, 0.0 if c == d else float("inf"), "byte comparison of region CSV")


def verify(problem, config: SearchConfig | None = None, factor: float = 0.5,
           tol: float = VERIFY_TOL) -> VerifyReport:
    """Run every check that applies to the problem's case."""
    cfg = config or SearchConfig()
    checks = []
    if isinstance(problem, MacProblem):
        if problem.case == "C":
            checks.append(check_inner_outer(problem, cfg, tol))
        if problem.case == "A":
            checks.append(check_b_in_a(problem, cfg, tol))
    else:
        if problem.case in ("A'", "B'"):
            checks.append(check_inner_outer(problem, cfg, tol))
        else:
            checks.append(check_cd_identity(problem, cfg))
    checks.append(check_delta_nesting(problem, cfg, factor, tol))
    return VerifyReport(tuple(checks))
