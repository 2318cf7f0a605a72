"""Strong typicality: counting, membership tests, and exhaustive enumeration.

Deviation tests use strict inequality and compare integers scaled by the
alphabet size against ``n * eps``, so no tolerance is involved: a sequence of
length n with count N of symbol a is typical when
``|N*K - n*K*p(a)| < n*eps`` for every a with p(a) > 0 and N = 0 wherever
p(a) = 0 (K is the product of the alphabet sizes).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import AxisError, BudgetExceeded, ValidationError
from .prob import Alphabet, JointPmf, Pmf

DEFAULT_ENUM_BUDGET = 2**20
# enumerate_typical scans the whole space directly when it has at most this many sequences.
FULL_SCAN_LIMIT = 2**21
# Relative slack when comparing the cardinality bounds, which can be attained exactly.
SANDWICH_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class Sequence:
    alphabet: Alphabet
    symbols: np.ndarray

    def __post_init__(self):
        sym = np.array(self.symbols, dtype=np.int64).ravel()
        if sym.size < 1:
            raise ValidationError("sequence must have length >= 1")
        if sym.min() < 0 or sym.max() >= self.alphabet.size:
            raise ValidationError(f"symbols out of range for alphabet {self.alphabet}")
        sym.flags.writeable = False
        object.__setattr__(self, "symbols", sym)

    @property
    def n(self) -> int:
        return int(self.symbols.size)

    @classmethod
    def from_string(cls, alphabet: Alphabet, text: str) -> "Sequence":
        return cls(alphabet, [int(c) for c in text])

    def __eq__(self, other):
        return (isinstance(other, Sequence) and self.alphabet == other.alphabet
                and np.array_equal(self.symbols, other.symbols))

    def __hash__(self):
        return hash((self.alphabet, self.symbols.tobytes()))

    def __repr__(self):
        body = "".join(map(str, self.symbols)) if self.alphabet.size <= 10 else list(self.symbols)
        return f"Sequence({self.alphabet.name}: {body})"


@dataclass(frozen=True)
class TypicalityParams:
    epsilon: float = 0.1
    epsilon1: float = 0.05

    def __post_init__(self):
        if not 0 < self.epsilon1 < self.epsilon:
            raise ValidationError(
                f"need 0 < epsilon1 < epsilon, got epsilon={self.epsilon}, epsilon1={self.epsilon1}")


def _check_lengths(seqs):
    if not seqs:
        raise ValidationError("need at least one sequence")
    n = seqs[0].n
    if any(s.n != n for s in seqs):
        raise ValidationError(f"sequence lengths differ: {[s.n for s in seqs]}")
    return n


def flat_index(symbol_arrays, sizes) -> np.ndarray:
    """Row-major cell index of aligned symbol arrays (broadcasting allowed)."""
    idx = np.zeros(np.broadcast_shapes(*(np.shape(a) for a in symbol_arrays)), dtype=np.int64)
    for arr, size in zip(symbol_arrays, sizes):
        idx = idx * size + arr
    return idx


def empirical_counts(seqs) -> np.ndarray:
    """Counts N(a_1, ..., a_k | x_1^n, ..., x_k^n) as an integer table."""
    seqs = tuple(seqs)
    _check_lengths(seqs)
    sizes = [s.alphabet.size for s in seqs]
    idx = flat_index([s.symbols for s in seqs], sizes)
    return np.bincount(idx, minlength=int(np.prod(sizes))).reshape(sizes)


def _typical_counts(counts, probs, n, eps) -> np.ndarray:
    """Vectorised test on count rows.  ``counts`` is (..., K), ``probs`` is (K,)."""
    k = probs.size
    counts = np.asarray(counts)
    support = probs > 0
    dev = np.abs(counts * k - (n * k) * probs)
    ok_pos = np.where(support, dev < n * eps, True)
    ok_zero = np.where(support, True, counts == 0)
    return np.all(ok_pos & ok_zero, axis=-1)


def is_strongly_typical(x: Sequence, p: Pmf, eps: float) -> bool:
    if p.probs.ndim != 1 or p.probs.size != x.alphabet.size:
        raise AxisError(f"pmf over {p.names} does not match alphabet {x.alphabet}")
    counts = np.bincount(x.symbols, minlength=x.alphabet.size)
    return bool(_typical_counts(counts, p.probs, x.n, eps))


def is_jointly_typical(seqs, joint: JointPmf, eps: float) -> bool:
    seqs = tuple(seqs)
    if len(seqs) != len(joint.axes):
        raise AxisError(f"{len(seqs)} sequences for a joint over {joint.names}")
    for s, a in zip(seqs, joint.axes):
        if s.alphabet.size != a.size:
            raise AxisError(f"sequence alphabet {s.alphabet} does not match axis {a}")
    n = _check_lengths(seqs)
    counts = empirical_counts(seqs).ravel()
    return bool(_typical_counts(counts, joint.probs.ravel(), n, eps))


def typical_rows(cells: np.ndarray, probs_flat: np.ndarray, eps: float) -> np.ndarray:
    """Joint-typicality of many candidates at once.

    ``cells`` is an integer array (B, n) of flat cell indices into
    ``probs_flat``; returns a boolean mask of length B.
    """
    cells = np.asarray(cells, dtype=np.int64)
    b, n = cells.shape
    probs_flat = np.asarray(probs_flat, dtype=float).ravel()
    k = probs_flat.size
    # Count only support cells; every zero-probability cell maps to one sink column.
    support = np.flatnonzero(probs_flat > 0)
    width = support.size + 1
    remap = np.full(k, support.size, dtype=np.int64)
    remap[support] = np.arange(support.size)
    offsets = (np.arange(b, dtype=np.int64) * width)[:, None]
    counts = np.bincount((remap[cells] + offsets).ravel(), minlength=b * width).reshape(b, width)
    dev = np.abs(counts[:, :-1] * k - (n * k) * probs_flat[support])
    return (counts[:, -1] == 0) & np.all(dev < n * eps, axis=1)


def conditional_typical_candidates(joint: JointPmf, fixed: Sequence, eps: float,
                                   n_limit: int = DEFAULT_ENUM_BUDGET) -> list[Sequence]:
    """All B-sequences jointly typical with ``fixed`` under a joint over (A, B).

    Enumeration is exhaustive; only the guard ``|B|^n <= n_limit`` bounds it.
    Symbols b with p(a_j, b) = 0 at some position can never be part of a
    typical pair, so those branches are skipped without changing the result.
    """
    if len(joint.axes) != 2:
        raise AxisError("conditional candidates need a joint over exactly two axes")
    a_ax, b_ax = joint.axes
    if fixed.alphabet.size != a_ax.size:
        raise AxisError(f"fixed sequence alphabet {fixed.alphabet} does not match {a_ax}")
    n = fixed.n
    if b_ax.size ** n > n_limit:
        raise BudgetExceeded(f"|{b_ax.name}|^n = {b_ax.size}^{n} exceeds budget {n_limit}")
    cands = conditional_candidate_array(joint.probs, fixed.symbols, eps)
    return [Sequence(b_ax, row) for row in cands]


def conditional_candidate_array(probs2d: np.ndarray, fixed: np.ndarray, eps: float) -> np.ndarray:
    """Array form of :func:`conditional_typical_candidates` (rows are B-sequences)."""
    probs2d = np.asarray(probs2d)
    nb = probs2d.shape[1]
    allowed = [np.flatnonzero(probs2d[a] > 0) for a in fixed]
    if any(len(x) == 0 for x in allowed):
        return np.zeros((0, fixed.size), dtype=np.int64)
    grids = np.array(list(itertools.product(*allowed)), dtype=np.int64).reshape(-1, fixed.size)
    cells = fixed[None, :] * nb + grids
    mask = typical_rows(cells, probs2d.ravel(), eps)
    return grids[mask]


# ---------------------------------------------------------------------------
# Type-class machinery: exact counting and enumeration of typical sets.

def _compositions(n, k):
    """All k-tuples of non-negative integers summing to n."""
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(n + k - 1 - prev - 1)
        yield tuple(out)


def typical_types(probs_flat, n: int, eps: float) -> list[tuple[int, ...]]:
    """Count vectors (types) whose sequences are eps-typical for ``probs_flat``."""
    probs_flat = np.asarray(probs_flat, dtype=float).ravel()
    support = np.flatnonzero(probs_flat > 0)
    k = probs_flat.size
    out = []
    for comp in _compositions(n, support.size):
        counts = np.zeros(k, dtype=np.int64)
        counts[support] = comp
        if _typical_counts(counts, probs_flat, n, eps):
            out.append(tuple(int(c) for c in counts))
    return out


def multinomial(n: int, counts) -> int:
    out, rest = 1, n
    for c in counts:
        out *= math.comb(rest, c)
        rest -= c
    return out


def typical_set_size(p: JointPmf, n: int, eps: float) -> int:
    return sum(multinomial(n, c) for c in typical_types(p.probs.ravel(), n, eps))


def _sequences_of_type(counts, n):
    """All length-n index sequences with the given symbol counts."""
    rows = [np.full(n, -1, dtype=np.int64)]
    free_sets = [tuple(range(n))]
    for sym, c in enumerate(counts):
        if c == 0:
            continue
        new_rows, new_free = [], []
        for row, free in zip(rows, free_sets):
            for chosen in itertools.combinations(free, c):
                r = row.copy()
                r[list(chosen)] = sym
                new_rows.append(r)
                chosen_set = set(chosen)
                new_free.append(tuple(i for i in free if i not in chosen_set))
        rows, free_sets = new_rows, new_free
    return np.array(rows, dtype=np.int64).reshape(-1, n)


def enumerate_typical(p: JointPmf, n: int, eps: float, budget: int = DEFAULT_ENUM_BUDGET) -> np.ndarray:
    """Every eps-typical sequence of length n, as an array (T, n, len(axes)).

    Built type class by type class; refuses when the typical set is larger
    than ``budget``.  Rows are sorted lexicographically so the order does not
    depend on how the enumeration proceeds.
    """
    probs = p.probs.ravel()
    types = typical_types(probs, n, eps)
    total = sum(multinomial(n, c) for c in types)
    if total > budget:
        raise BudgetExceeded(f"typical set has {total} sequences, budget is {budget}")
    sizes = p.shape
    if not types:
        return np.zeros((0, n, len(sizes)), dtype=np.int64)
    if probs.size ** n <= FULL_SCAN_LIMIT:
        # Small spaces: list every sequence in lexicographic order and filter.
        codes = np.arange(probs.size ** n, dtype=np.int64)
        powers = probs.size ** np.arange(n - 1, -1, -1, dtype=np.int64)
        flat = (codes[:, None] // powers) % probs.size
        flat = flat[typical_rows(flat, probs, eps)]
    else:
        flat = np.concatenate([_sequences_of_type(c, n) for c in types])
        flat = flat[np.lexsort(flat.T[::-1])]
    return np.stack(np.unravel_index(flat, sizes), axis=-1)


# ---------------------------------------------------------------------------
# Empirical checks of typical-set coverage and size.

def typical_fraction(p: JointPmf, n: int, eps: float, samples: int, seed: int) -> float:
    """Monte Carlo estimate of Pr[X^n in T_eps] for i.i.d. draws from ``p``."""
    rng = np.random.default_rng(seed)
    probs = p.probs.ravel()
    draws = rng.choice(probs.size, size=(samples, n), p=probs)
    return float(typical_rows(draws, probs, eps).mean())


@dataclass(frozen=True)
class CardinalityCheck:
    n: int
    eps: float
    entropy: float
    size: int
    prob_typical: float
    eps1: float
    lower: float
    upper: float

    @property
    def holds(self) -> bool:
        # With one typical type the lower bound equals |T| exactly; allow for rounding.
        slack = 1.0 + SANDWICH_RTOL
        return self.lower <= self.size * slack and self.size <= self.upper * slack


def cardinality_sandwich(p: JointPmf, n: int, eps: float) -> CardinalityCheck:
    """Exact check of (1 - eps2) 2^{n(H - eps1)} <= |T| <= 2^{n(H + eps1)}.

    eps1 is the largest deviation of -(1/n) log2 P(x^n) from H over typical
    sequences (the tightest window for which the per-sequence probability
    bounds hold) and eps2 = Pr[X^n not typical], both computed exactly from
    the type classes.
    """
    probs = p.probs.ravel()
    support = probs > 0
    h = float(-np.sum(probs[support] * np.log2(probs[support])))
    logp = np.zeros_like(probs)
    logp[support] = np.log2(probs[support])
    size, mass, spread = 0, 0.0, 0.0
    for c in typical_types(probs, n, eps):
        c = np.array(c)
        cnt = multinomial(n, c)
        lp = float(np.dot(c[support], logp[support]))
        size += cnt
        mass += cnt * 2.0**lp
        spread = max(spread, abs(-lp / n - h))
    eps2 = max(0.0, 1.0 - mass)
    return CardinalityCheck(
        n=n, eps=eps, entropy=h, size=size, prob_typical=min(mass, 1.0), eps1=spread,
        lower=(1.0 - eps2) * 2.0 ** (n * (h - spread)),
        upper=2.0 ** (n * (h + spread)),
    )
