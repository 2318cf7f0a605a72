"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (the summary lines are
repeated at the end of the session) or ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles as O  # noqa: E402
from embedcap.codec import SimConfig, build_runner, cloud_from_input, simulate  # noqa: E402
from embedcap.output import region_csv  # noqa: E402
from embedcap.prob import Alphabet, DistortionMeasure, Kernel, Pmf  # noqa: E402
from embedcap.regions import (BcFeasibleTuple, BcProblem, MacFeasibleTuple, MacProblem,  # noqa: E402
                              SearchConfig, compute_region, eval_mac_caseA, eval_mac_caseB,
                              eval_mac_caseC, irreversible_capacity, reversible_capacity,
                              support_function)
from embedcap.specfile import parse_spec  # noqa: E402
from embedcap.typicality import cardinality_sandwich, typical_fraction  # noqa: E402
from embedcap.verify import (VERIFY_TOL, check_b_in_a, check_cd_identity, check_delta_nesting,  # noqa: E402
                             check_inner_outer)

RESULTS: dict[int, str] = {}

# Light search settings for the 20-instance structural sweep (containment holds by construction
# for any settings, so coarser search only saves time).
LIGHT = SearchConfig(directions=(0.0, 0.25, 0.5, 0.75, 1.0), sweeps=2, refine_iters=100)


def report(num: int, title: str, passed: bool, detail: str):
    line = f"criterion {num} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    RESULTS[num] = line
    print(line)
    return passed


def spec(name):
    return parse_spec(O.FIXTURES / f"{name}.toml")


def binary_bc(rng, case):
    s, x, y, z = (Alphabet(n, 2) for n in "SXYZ")
    fw = Kernel([x, s], [y], rng.dirichlet(np.full(2, 0.5), size=4).reshape(2, 2, 2))
    dg = Kernel([y], [z], rng.dirichlet(np.full(2, 0.5), size=2))
    return BcProblem(Pmf(s, rng.dirichlet(np.ones(2))), fw, dg, DistortionMeasure.hamming(s, x),
                     float(rng.uniform(0.2, 0.6)), case)


# 1 ---------------------------------------------------------------------------------

def test_bound_evaluators_match_naive_assembly():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        problem = O.binary_mac_problem(rng, y_size=2, delta=1.0)
        tup = O.binary_mac_tuple(rng)
        cells = O.naive_mac_cells(problem, tup)
        for case, fn in (("A", eval_mac_caseA), ("B", eval_mac_caseB), ("C", eval_mac_caseC)):
            got = np.array(fn(tup, problem))
            want = np.array(O.naive_mac_bounds(cells, case))
            worst = max(worst, float(np.max(np.abs(got - want))))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 10
    report(1, "bound evaluators vs naive joint", ok, f"max |diff| {worst:.2e} bits, {dt:.1f} s")
    assert ok


# 2 ---------------------------------------------------------------------------------

BRUTE_FIXTURES = ("mac_clean_square", "mac_adder", "mac_xor_host", "bc_adder", "bc_minimal")


def test_region_matches_brute_force_sweep():
    t0 = time.perf_counter()
    worst = 0.0
    for name in BRUTE_FIXTURES:
        problem = spec(name).problem
        region = compute_region(problem, SearchConfig(grid_step=1 / 8))
        ref = (O.brute_force_mac_caseC(problem) if isinstance(problem, MacProblem)
               else O.brute_force_bc_caseC(problem))
        for lam in O.LAMBDAS:
            worst = max(worst, abs(support_function(region, lam) - ref[lam]))
    dt = time.perf_counter() - t0
    ok = worst <= 0.02 and dt < 300
    report(2, "region vs 1/16 brute force", ok, f"max support gap {worst:.4f} bits, {dt:.1f} s")
    assert ok


# 3 ---------------------------------------------------------------------------------

def binary_entropy(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_closed_forms():
    region = compute_region(spec("mac_clean_square").problem)
    square = set(region.hull_vertices) == {(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)}

    s, x, y = Alphabet("S", 1), Alphabet("X", 2), Alphabet("Y", 2)
    bsc = Kernel([x, s], [y], np.array([[[0.9, 0.1]], [[0.1, 0.9]]]))
    d = DistortionMeasure(s, x, [[0.0, 0.0]])
    target = 1 - binary_entropy(0.1)
    irr = irreversible_capacity(Pmf.point(s, 0), bsc, d, 0.0)
    rev = reversible_capacity(Pmf.point(s, 0), bsc, d, 0.0)
    gap = max(abs(irr - target), abs(rev - target))
    ok = square and gap <= 0.01
    report(3, "closed forms", ok,
           f"unit square {'exact' if square else region.hull_vertices}; BSC(0.1) {irr:.4f}/{rev:.4f} "
           f"vs {target:.4f}")
    assert ok


# 4 ---------------------------------------------------------------------------------

def test_structural_properties():
    t0 = time.perf_counter()
    checks = []
    for i in range(20):
        rng = np.random.default_rng(1000 + i)
        mac = O.binary_mac_problem(rng, "C", y_size=3, delta=float(rng.uniform(0.2, 0.6)))
        bc = binary_bc(rng, "C'")
        checks += [check_inner_outer(mac, LIGHT), check_delta_nesting(mac, LIGHT),
                   check_b_in_a(mac.with_case("A"), LIGHT), check_cd_identity(bc, LIGHT),
                   check_delta_nesting(bc, LIGHT), check_inner_outer(bc.with_case("B'"), LIGHT)]
    failed = [c for c in checks if not c.passed]
    worst = max(c.max_violation for c in checks)
    ok = not failed and worst <= VERIFY_TOL
    report(4, "structural containments", ok,
           f"{len(checks)} checks on 20 instances, {len(failed)} failed, max violation {worst:.1e}, "
           f"{time.perf_counter() - t0:.0f} s")
    assert ok


# 5 ---------------------------------------------------------------------------------

def test_typicality_coverage_and_cardinality():
    s = Alphabet("S", 2)
    cover = typical_fraction(Pmf(s, [0.9, 0.1]), 200, 0.1, 10_000, seed=5)
    sandwiches = []
    for p in (0.1, 0.3, 0.5):
        pmf = Pmf(s, [1 - p, p])
        c = cardinality_sandwich(pmf, 12, 0.1)
        brute = sum(O.is_typ([seq], pmf.probs, 0.1) for seq in O.all_sequences(2, 12))
        sandwiches.append(c.holds and c.size == brute and c.size > 0)
    ok = cover >= 0.95 and all(sandwiches)
    report(5, "typicality coverage and cardinality", ok,
           f"coverage {cover:.4f}; sandwich at n=12 {sandwiches}")
    assert ok


# 6 ---------------------------------------------------------------------------------

def _decoder_instances():
    """n = 4 instances with binary hosts and inputs, tuned so outcomes are mixed."""
    mac = spec("mac_xor_host").problem
    mac_tup = MacFeasibleTuple.from_conditionals([[0.8, 0.2], [0.2, 0.8]], [[0.7, 0.3], [0.3, 0.7]])
    s, x, z = Alphabet("S", 2), Alphabet("X", 2), Alphabet("Z", 2)
    y = Alphabet("Y", 4)
    bc = BcProblem(Pmf(s, [0.8, 0.2]), Kernel.deterministic([x, s], [y], lambda a, b: 2 * a + b),
                   Kernel.deterministic([y], [z], lambda v: v // 2), DistortionMeasure.hamming(s, x), 0.5, "B'")
    table = np.zeros((2, 2, 2))
    table[:, 0, 0] = table[:, 1, 1] = 0.5          # U = X, uniform, independent of S
    b_tup = BcFeasibleTuple.from_table(table, s, x, {"U": 2})
    c_tup = cloud_from_input(BcFeasibleTuple.from_table(np.full((2, 2), 0.5), s, x))
    return [
        ("mac-C", mac, mac_tup, SimConfig(n=4, r1=0.5, r2=0.5, eps=30.0, eps1=1.0, trials=500, seed=1, record=True)),
        ("bc-B'", bc, b_tup, SimConfig(n=4, r1=0.0, r2=0.25, eps=0.75, trials=500, seed=2, record=True)),
        ("bc-C'", bc.with_case("C'"), c_tup,
         SimConfig(n=4, r1=0.0, r2=0.5, eps=6.0, eps1=0.5, trials=500, seed=4, record=True)),
    ]


def _oracle_keys(scheme, cb, rec, cfg):
    if scheme == "mac-C":
        return [O.oracle_mac_decode(cb, rec.outputs[0], cfg.eps, cfg.eps1)]
    if scheme == "bc-B'":
        first, stage = O.oracle_bcB_decode1(cb, rec.outputs[0], cfg.eps)
        return [first, stage, O.oracle_bcB_decode2(cb, rec.outputs[1], cfg.eps)]
    first, stage = O.oracle_bcC_decode1(cb, rec.outputs[0], cfg.eps, cfg.eps1)
    return [first, stage, O.oracle_bcC_decode2(cb, rec.outputs[1], cfg.eps, cfg.eps1)]


def test_decoders_match_exhaustive_oracle():
    t0 = time.perf_counter()
    parts, total_bad = [], 0
    for scheme, problem, tup, cfg in _decoder_instances():
        runner = build_runner(problem, scheme, tup, cfg)
        bad, statuses = 0, set()
        for t in range(cfg.trials):
            rec = runner.trial(t)
            got = [O.result_key(rec.decoded[0])]
            if scheme != "mac-C":
                got += [rec.decoded[0].stage, O.result_key(rec.decoded[1])]
            bad += got != _oracle_keys(scheme, runner.cb, rec, cfg)
            statuses.update(f"{i}:{d.status}" for i, d in enumerate(rec.decoded))
        total_bad += bad
        parts.append(f"{scheme} {bad}/{cfg.trials} mismatches ({','.join(sorted(statuses))})")
    dt = time.perf_counter() - t0
    ok = total_bad == 0 and dt < 120
    report(6, "decoders vs exhaustive oracle", ok, "; ".join(parts) + f"; {dt:.0f} s")
    assert ok


# 7 ---------------------------------------------------------------------------------

def _ordering_rates(name, problem, cfg, lam):
    region, point, tup = O.tuple_for_direction(problem, cfg, lam)
    if isinstance(problem, BcProblem):
        # The superposition scheme runs with U = X, which carries no message 1; move along r2.
        return cloud_from_input(tup), (0.0, max(point.r2 - 0.15, 0.0)), (0.0, point.r2 + 0.15)
    inside = (max(point.r1 - 0.15, 0.0), max(point.r2 - 0.15, 0.0))
    return tup, inside, (point.r1 + 0.15, point.r2 + 0.15)


def test_rate_ordering():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name in ("mac_adder", "mac_xor_host", "bc_adder"):
        sf = spec(name)
        sim = {k: v for k, v in sf.sim.items() if k != "lambda"}
        sim.update(n=10, trials=300)
        tup, inside, outside = _ordering_rates(name, sf.problem, sf.search_config(), sf.sim["lambda"])
        errs = []
        for r1, r2 in (inside, outside):
            rep = simulate(sf.problem, "mac-C" if isinstance(sf.problem, MacProblem) else "bc-C'", tup,
                           SimConfig(r1=r1, r2=r2, workers=4, **sim))
            errs.append(rep.empirical_error)
        ok &= errs[0] < errs[1]
        parts.append(f"{name} {errs[0]:.3f} < {errs[1]:.3f}")
    report(7, "rate ordering inside vs outside", ok, "; ".join(parts) + f"; {time.perf_counter() - t0:.0f} s")
    assert ok


# 8 ---------------------------------------------------------------------------------

def test_determinism_across_workers():
    same = []
    for name in ("mac_xor_host", "bc_adder"):
        sf = spec(name)
        csvs = {region_csv(compute_region(sf.problem, sf.search_config(workers=w))) for w in (1, 2, 8)}
        same.append(len(csvs) == 1)
    scheme_cases = [
        (spec("mac_adder"), "mac-C", dict(r1=0.5, r2=0.5, eps=4.0, eps1=2.0)),
        (spec("bc_adder"), "bc-C'", dict(r1=0.0, r2=0.6, eps=6.0, eps1=2.0)),
    ]
    for sf, scheme, kw in scheme_cases:
        _, _, tup = O.tuple_for_direction(sf.problem, sf.search_config(), 0.5)
        if scheme == "bc-C'":
            tup = cloud_from_input(tup)
        reps = [simulate(sf.problem, scheme, tup, SimConfig(n=10, trials=60, seed=9, workers=w, record=True, **kw))
                for w in (1, 2, 8)]
        outcomes = [[(r.error, r.decoded[0].key()) for r in rep.records] for rep in reps]
        same.append(reps[0] == reps[1] == reps[2] and outcomes[0] == outcomes[1] == outcomes[2])
    ok = all(same)
    report(8, "determinism over 1/2/8 workers", ok, f"region CSVs and SimReports identical: {same}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
