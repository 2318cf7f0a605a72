import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from embedcap.errors import BudgetExceeded, ValidationError
from embedcap.prob import Alphabet, JointPmf, Pmf, marginalize
from embedcap.typicality import (Sequence, TypicalityParams, cardinality_sandwich,
                                 conditional_typical_candidates, empirical_counts, enumerate_typical,
                                 is_jointly_typical, is_strongly_typical, typical_fraction, typical_rows,
                                 typical_set_size)

X, Y = Alphabet("X", 2), Alphabet("Y", 3)
# dyadic probabilities keep the test arithmetic exact
PXY = JointPmf([X, Y], [[0.25, 0.125, 0.0], [0.125, 0.25, 0.25]])


def seqs(draw, n):
    return draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), \
        draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))


@st.composite
def pair(draw):
    n = draw(st.integers(1, 16))
    return seqs(draw, n)


def test_sequence_validation():
    with pytest.raises(ValidationError):
        Sequence(X, [0, 2])
    with pytest.raises(ValidationError):
        Sequence(X, [])
    assert Sequence.from_string(X, "0110").n == 4


def test_params_require_ordered_epsilons():
    with pytest.raises(ValidationError):
        TypicalityParams(epsilon=0.1, epsilon1=0.2)


def test_counts_match_counter():
    a, b = Sequence(X, [0, 1, 1, 0, 1]), Sequence(Y, [2, 0, 0, 1, 0])
    c = empirical_counts([a, b])
    assert c.sum() == 5 and c[1, 0] == 3 and c[0, 2] == 1 and c[0, 1] == 1


@given(pair(), st.sampled_from([0.25, 0.5, 1.0, 2.0, 3.0]))
@settings(max_examples=200)
def test_joint_typicality_matches_definition(xy, eps):
    x, y = xy
    got = is_jointly_typical([Sequence(X, x), Sequence(Y, y)], PXY, eps)
    assert got == O.is_typ([x, y], PXY.probs, eps)
    cells = np.array(x) * 3 + np.array(y)
    assert bool(typical_rows(cells[None, :], PXY.probs.ravel(), eps)[0]) == got


@given(pair(), st.sampled_from([0.5, 1.0, 2.0]))
def test_typicality_is_monotone_in_eps(xy, eps):
    x, y = xy
    s = [Sequence(X, x), Sequence(Y, y)]
    if is_jointly_typical(s, PXY, eps):
        assert is_jointly_typical(s, PXY, 2 * eps)


@given(pair(), st.sampled_from([0.5, 1.0, 2.0, 4.0]))
@settings(max_examples=200)
def test_joint_typicality_implies_marginal(xy, eps):
    x, y = xy
    if is_jointly_typical([Sequence(X, x), Sequence(Y, y)], PXY, eps):
        assert is_strongly_typical(Sequence(X, x), Pmf(X, marginalize(PXY, ["X"]).probs), eps)
        assert is_strongly_typical(Sequence(Y, y), Pmf(Y, marginalize(PXY, ["Y"]).probs), eps)


def test_zero_probability_cell_breaks_typicality():
    # (0, 2) has probability zero; a single occurrence disqualifies even at huge eps
    assert not is_jointly_typical([Sequence(X, [0, 1]), Sequence(Y, [2, 2])], PXY, 100.0)


@pytest.mark.parametrize("n,eps", [(3, 1.0), (5, 2.0), (6, 3.0)])
def test_enumeration_matches_brute_force(n, eps):
    got = enumerate_typical(PXY, n, eps)
    want = [c for c in itertools.product(range(6), repeat=n)
            if O.is_typ([[v // 3 for v in c], [v % 3 for v in c]], PXY.probs, eps)]
    assert typical_set_size(PXY, n, eps) == len(want)
    flat = [tuple(int(a) * 3 + int(b) for a, b in row) for row in got]
    assert flat == sorted(want)


def test_enumeration_respects_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_typical(Pmf.uniform(Alphabet("Z", 4)), 12, 4.0, budget=1000)


def test_conditional_candidates_are_exactly_the_jointly_typical_completions():
    y = Sequence(Y, [0, 1, 2, 1])
    got = {tuple(s.symbols) for s in conditional_typical_candidates(PXY.transpose(["Y", "X"]), y, 3.0)}
    want = {x for x in itertools.product(range(2), repeat=4) if O.is_typ([x, y.symbols], PXY.probs, 3.0)}
    assert got == want


def test_coverage_grows_with_length():
    p = Pmf(X, [0.9, 0.1])
    short, long = typical_fraction(p, 20, 0.1, 4000, 1), typical_fraction(p, 400, 0.1, 4000, 1)
    assert short < long and long > 0.99


@pytest.mark.parametrize("p", [0.1, 0.25, 0.5])
def test_cardinality_sandwich_exact(p):
    pmf = Pmf(X, [1 - p, p])
    c = cardinality_sandwich(pmf, 12, 0.2)
    brute = sum(O.is_typ([s], pmf.probs, 0.2) for s in itertools.product(range(2), repeat=12))
    assert c.size == brute and c.holds
    assert 0 < c.prob_typical <= 1
