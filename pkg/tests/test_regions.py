import numpy as np
import pytest

import oracles as O
from embedcap.errors import BudgetExceeded, InfeasibleProblem, ValidationError
from embedcap.prob import Alphabet, DistortionMeasure, Kernel, Pmf
from embedcap.regions import (BcProblem, RatePoint, RateRegion, SearchConfig, build_family,
                              compute_region, contains, containment_violation, convex_hull,
                              eval_bc_caseA_inner, eval_bc_caseA_outer, eval_bc_caseB_inner,
                              eval_bc_caseB_outer, eval_bc_caseC, eval_mac_caseA, eval_mac_caseB,
                              eval_mac_caseC, simplex_grid, support_function)
from embedcap.regions.region import polytope_vertices
from embedcap.specfile import parse_spec


def random_theta(family, rng, count):
    parts = [rng.dirichlet(np.ones(k), size=count) for k in family.rows]
    return np.concatenate(parts, axis=1)


def binary_bc(rng, case, delta=1.0):
    s, x, y, z = (Alphabet(n, 2) for n in "SXYZ")
    fw = Kernel([x, s], [y], rng.dirichlet(np.ones(2), size=4).reshape(2, 2, 2))
    dg = Kernel([y], [z], rng.dirichlet(np.ones(2), size=2))
    return BcProblem(Pmf(s, rng.dirichlet(np.ones(2))), fw, dg, DistortionMeasure.hamming(s, x), delta, case)


MAC_CASES = [("C", "inner", eval_mac_caseC), ("C", "outer", eval_mac_caseC),
             ("B", "inner", eval_mac_caseB), ("A", "inner", eval_mac_caseA)]
BC_CASES = [("A'", "inner", eval_bc_caseA_inner), ("A'", "outer", eval_bc_caseA_outer),
            ("B'", "inner", eval_bc_caseB_inner), ("B'", "outer", eval_bc_caseB_outer),
            ("C'", "capacity", eval_bc_caseC)]


@pytest.mark.parametrize("case,bound,fn", MAC_CASES)
def test_batched_mac_bounds_match_exact_evaluators(case, bound, fn):
    rng = np.random.default_rng(7)
    problem = O.binary_mac_problem(rng, case, y_size=3)
    fam = build_family(problem, bound)
    theta = random_theta(fam, rng, 6)
    batch, feas = fam.evaluate(theta, 4)
    assert feas.all()
    for th, row in zip(theta, batch):
        np.testing.assert_allclose(row, fn(fam.to_tuple(th), problem), atol=1e-9)


@pytest.mark.parametrize("case,bound,fn", BC_CASES)
def test_batched_bc_bounds_match_exact_evaluators(case, bound, fn):
    rng = np.random.default_rng(11)
    problem = binary_bc(rng, case)
    fam = build_family(problem, bound)
    theta = random_theta(fam, rng, 5)
    batch, _ = fam.evaluate(theta, 3)
    for th, row in zip(theta, batch):
        np.testing.assert_allclose(row, fn(fam.to_tuple(th), problem), atol=1e-9)


def test_distortion_feasibility_flag():
    rng = np.random.default_rng(3)
    problem = O.binary_mac_problem(rng, "C", delta=0.0)
    fam = build_family(problem)
    identity = np.array([1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0])   # x = s, zero distortion
    flipped = 1.0 - identity                                          # x = 1 - s
    _, feas = fam.evaluate(np.stack([identity, flipped]), 8)
    assert feas.tolist() == [True, False]


# -- geometry -----------------------------------------------------------------------

def test_simplex_grid_counts():
    g = simplex_grid(3, 4)
    assert g.shape == (15, 3)
    np.testing.assert_allclose(g.sum(axis=1), 1.0)


def test_polytope_vertices_with_negative_bounds():
    pts = polytope_vertices([[1.0, 2.0, 2.5], [-1.0, 0.5, 1.0], [-1.0, -1.0, 3.0], [1.0, 1.0, -0.1]])
    hull = {tuple(p) for p in convex_hull(pts)}
    # first row is a pentagon; second pins r1 = 0; the last two contribute nothing
    assert hull == {(0.0, 0.0), (1.0, 0.0), (1.0, 1.5), (0.5, 2.0), (0.0, 2.0)}


def test_rectangle_without_sum_bound():
    r = RateRegion.from_bounds([[0.3, 0.7, np.inf]], lambdas=[0.5])
    assert set(r.hull_vertices) == {(0.0, 0.0), (0.3, 0.0), (0.3, 0.7), (0.0, 0.7)}
    assert r.support_samples == ((0.5, 0.5),)


def test_empty_region():
    r = RateRegion.from_bounds([[-1.0, -1.0, 1.0]])
    assert r.empty and not contains(r, (0, 0))
    with pytest.raises(ValidationError):
        support_function(r, 0.5)


def test_contains_and_containment_violation():
    big = RateRegion.from_bounds([[1.0, 1.0, 1.5]])
    small = RateRegion.from_bounds([[0.5, 0.5, np.inf]])
    assert contains(big, (0.75, 0.75)) and not contains(big, (0.8, 0.8))
    assert containment_violation(small, big) == 0.0
    # along (1/2, 1/2) the unit square reaches 1.0 and big only 0.75
    square = RateRegion.from_bounds([[1.0, 1.0, np.inf]])
    assert containment_violation(square, big) == pytest.approx(0.25)


def test_support_function_rejects_bad_lambda():
    with pytest.raises(ValidationError):
        support_function(RateRegion.from_bounds([[1, 1, 1]]), 1.5)


# -- search -------------------------------------------------------------------------------

def fixture(name):
    return parse_spec(O.FIXTURES / f"{name}.toml").problem


def test_unit_square_is_exact():
    r = compute_region(fixture("mac_clean_square"))
    assert set(r.hull_vertices) == {RatePoint(0, 0), RatePoint(1, 0), RatePoint(1, 1), RatePoint(0, 1)}


def test_adder_pentagon():
    r = compute_region(fixture("mac_adder"))
    assert support_function(r, 0.5) == pytest.approx(0.75, abs=1e-6)     # sum rate 1.5
    assert support_function(r, 1.0) == pytest.approx(1.0, abs=1e-6)


def test_region_is_deterministic_and_stores_tuples():
    p = fixture("mac_xor_host")
    a, b = compute_region(p), compute_region(p)
    assert a == b
    fam = build_family(p)
    for v, th in zip(a.hull_vertices, a.info["vertex_params"]):
        if th is None or v == (0.0, 0.0):
            continue
        b1, b2, b12 = eval_mac_caseC(fam.to_tuple(th), p)
        assert v.r1 <= max(b1, 0) + 1e-9 and v.r2 <= max(b2, 0) + 1e-9 and sum(v) <= b12 + 1e-9


def test_infeasible_budget():
    rng = np.random.default_rng(0)
    p = binary_bc(rng, "C'")
    # host with mass on both symbols and a distortion table with no zero entry
    s, x = p.s, p.x
    bad = BcProblem(p.host, p.forward, p.degrade, DistortionMeasure(s, x, [[1, 1], [1, 1]]), 0.5, "C'")
    with pytest.raises(InfeasibleProblem):
        compute_region(bad)


def test_explicit_grid_step_over_budget_is_refused():
    p = binary_bc(np.random.default_rng(1), "B'")
    with pytest.raises(BudgetExceeded):
        compute_region(p, SearchConfig(grid_step=1 / 16), bound="outer")


def test_caseB_has_no_outer_bound():
    p = O.binary_mac_problem(np.random.default_rng(2), "B")
    with pytest.raises(ValidationError):
        compute_region(p, bound="outer")


def test_budget_nesting_on_fixture():
    p = fixture("bc_adder")
    small = compute_region(p.with_budget(0.1))
    big = compute_region(p, warm_start=None)
    assert containment_violation(small, big) <= 1e-9
    assert support_function(small, 0.0) < support_function(big, 0.0)


def test_single_user_deterministic_host_gives_bsc_capacity():
    from embedcap.regions import irreversible_capacity
    s, x, y = Alphabet("S", 1), Alphabet("X", 2), Alphabet("Y", 2)
    ch = Kernel([x, s], [y], np.array([[[0.89, 0.11]], [[0.11, 0.89]]]))
    cap = irreversible_capacity(Pmf.point(s, 0), ch, DistortionMeasure(s, x, [[0, 0]]), 0.0)
    h = -0.11 * np.log2(0.11) - 0.89 * np.log2(0.89)
    assert cap == pytest.approx(1 - h, abs=0.01)


def test_irreversible_capacity_is_at_least_reversible():
    from embedcap.regions import irreversible_capacity, reversible_capacity
    p = fixture("bc_adder").with_budget(0.2)
    rev = reversible_capacity(p.host, p.forward, p.d, p.delta)
    assert irreversible_capacity(p.host, p.forward, p.d, p.delta) >= rev > 0
