"""Independent reference implementations used by the tests.

Everything here is written with plain loops or direct formulas and avoids the
package's internal fast paths (batched backends, pruning, type classes), so
agreement with the package is evidence rather than tautology.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from pathlib import Path

import numpy as np

from embedcap.prob import Alphabet, DistortionMeasure, JointPmf, Kernel, Pmf
from embedcap.regions import (BcFeasibleTuple, BcProblem, MacFeasibleTuple, MacProblem, SearchConfig,
                              build_family, compute_region)

FIXTURES = Path(__file__).parent / "fixtures"
LAMBDAS = (0.0, 0.25, 0.5, 0.75, 1.0)


# -- naive information quantities ---------------------------------------------

def naive_entropy(cells: dict, positions) -> float:
    """Entropy in bits of the marginal on ``positions`` of a dict {cell tuple: prob}."""
    marg = defaultdict(float)
    for cell, p in cells.items():
        marg[tuple(cell[i] for i in positions)] += p
    return -sum(p * math.log2(p) for p in marg.values() if p > 0)


def naive_cmi(cells, a, b, c=()):
    """I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C)."""
    h = lambda pos: naive_entropy(cells, pos) if pos else 0.0
    a, b, c = list(a), list(b), list(c)
    return h(a + c) + h(b + c) - h(a + b + c) - h(c)


# -- random binary MAC instances -------------------------------------------------

def binary_mac_problem(rng, case="C", y_size=2, delta=1.0):
    s1, s2, x1, x2, y = (Alphabet(n, k) for n, k in (("S1", 2), ("S2", 2), ("X1", 2), ("X2", 2), ("Y", y_size)))
    host = JointPmf([s1, s2], rng.dirichlet(np.ones(4)).reshape(2, 2))
    ch = Kernel([x1, s1, x2, s2], [y], rng.dirichlet(np.ones(y_size), size=16).reshape(2, 2, 2, 2, y_size))
    return MacProblem(host, ch, DistortionMeasure.hamming(s1, x1), DistortionMeasure.hamming(s2, x2),
                      delta, delta, case)


def binary_mac_tuple(rng, nq=2, nu=2):
    q, s1, s2, x1, x2 = Alphabet("Q", nq), Alphabet("S1", 2), Alphabet("S2", 2), Alphabet("X1", 2), Alphabet("X2", 2)
    u1, u2 = Alphabet("U1", nu), Alphabet("U2", nu)
    e1 = rng.dirichlet(np.ones(nu * 2), size=2 * nq).reshape(2, nq, nu, 2)
    e2 = rng.dirichlet(np.ones(nu * 2), size=2 * nq).reshape(2, nq, nu, 2)
    return MacFeasibleTuple(q=Pmf(q, rng.dirichlet(np.ones(nq))),
                            enc1=Kernel([s1, q], [u1, x1], e1), enc2=Kernel([s2, q], [u2, x2], e2))


def naive_mac_cells(problem: MacProblem, tup: MacFeasibleTuple) -> dict:
    """{(q, s1, s2, u1, x1, u2, x2, y): prob} built cell by cell."""
    Q = tup.q.probs
    H = problem.host_joint.probs
    E1, E2 = tup.enc1.probs, tup.enc2.probs  # [s, q, u, x]
    W = problem.channel.probs                # [x1, s1, x2, s2, y]
    out = {}
    ranges = [range(k) for k in (Q.shape[0], H.shape[0], H.shape[1], E1.shape[2], E1.shape[3],
                                 E2.shape[2], E2.shape[3], W.shape[4])]
    for q, a, b, u1, x1, u2, x2, y in itertools.product(*ranges):
        p = Q[q] * H[a, b] * E1[a, q, u1, x1] * E2[b, q, u2, x2] * W[x1, a, x2, b, y]
        if p > 0:
            out[(q, a, b, u1, x1, u2, x2, y)] = p
    return out


# positions inside the naive MAC cell tuple
Q_, S1_, S2_, U1_, X1_, U2_, X2_, Y_ = range(8)


def naive_mac_bounds(cells, case):
    q = [Q_]
    if case == "A":
        b1 = naive_cmi(cells, [U1_], [U2_, Y_], q) - naive_cmi(cells, [U1_], [S1_], q)
        b2 = naive_cmi(cells, [U2_], [U1_, Y_], q) - naive_cmi(cells, [U2_], [S2_], q)
        b12 = naive_cmi(cells, [U1_, U2_], [Y_], q) - naive_cmi(cells, [U1_, U2_], [S1_, S2_], q)
    elif case == "B":
        c = [X2_, S2_, Q_]
        leak = naive_cmi(cells, [U1_], [S1_], c)
        b1 = naive_cmi(cells, [U1_], [Y_], c) - leak
        b2 = (naive_cmi(cells, [X2_, S2_], [Y_], [U1_, Q_])
              - (naive_entropy(cells, [S2_, U1_, Q_]) - naive_entropy(cells, [U1_, Q_])))
        b12 = naive_cmi(cells, [U1_, X2_, S2_], [Y_], q) - naive_entropy(cells, [S2_]) - leak
    else:
        h_s1_s2 = naive_entropy(cells, [S1_, S2_]) - naive_entropy(cells, [S2_])
        h_s2_s1 = naive_entropy(cells, [S1_, S2_]) - naive_entropy(cells, [S1_])
        b1 = naive_cmi(cells, [X1_, S1_], [Y_], [X2_, S2_, Q_]) - h_s1_s2
        b2 = naive_cmi(cells, [X2_, S2_], [Y_], [X1_, S1_, Q_]) - h_s2_s1
        b12 = naive_cmi(cells, [X1_, S1_, X2_, S2_], [Y_], q) - naive_entropy(cells, [S1_, S2_])
    return b1, b2, b12


# -- brute-force region sweep ---------------------------------------------------

def _grid_rows(k, m):
    """All points of the k-simplex with coordinates in multiples of 1/m."""
    pts = [c for c in itertools.product(range(m + 1), repeat=k) if sum(c) == m]
    return np.array(pts, dtype=float) / m


def _h(p, axes):
    """Entropy (bits) of the batch joint ``p`` summed down to the kept ``axes`` (axis 0 is the batch)."""
    drop = tuple(i for i in range(1, p.ndim) if i not in axes)
    m = p.sum(axis=drop).reshape(p.shape[0], -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(m > 0, -m * np.log2(np.where(m > 0, m, 1.0)), 0.0)
    return t.sum(axis=1)


def _polytope_support(b1, b2, b12, lam):
    """Support of {r >= 0: r1 <= b1, r2 <= b2, r1 + r2 <= b12}; -inf for rows giving no point.

    A negative single-user bound pins that rate to 0; a negative sum bound (or
    both single-user bounds negative) leaves nothing.
    """
    usable = ~((b12 < -1e-12) | ((b1 < -1e-12) & (b2 < -1e-12)))
    c1 = np.clip(np.minimum(b1, b12), 0, None)
    c2 = np.clip(np.minimum(b2, b12), 0, None)
    s = np.clip(b12, 0, None)
    cands = [np.zeros_like(c1), c1 * lam, c2 * (1 - lam),
             lam * c1 + (1 - lam) * np.clip(np.minimum(c2, s - c1), 0, None),
             (1 - lam) * c2 + lam * np.clip(np.minimum(c1, s - c2), 0, None)]
    return np.where(usable, np.max(cands, axis=0), -np.inf)


def _sweep(thetas_rows, batch_fn, m, chunk=4096):
    grids = [_grid_rows(k, m) for k in thetas_rows]
    best = np.full(len(LAMBDAS), -np.inf)
    combos = itertools.product(*[range(len(g)) for g in grids])
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        idx = np.array(block)
        rows = [g[idx[:, i]] for i, g in enumerate(grids)]
        b1, b2, b12, ok = batch_fn(rows)
        for j, lam in enumerate(LAMBDAS):
            v = _polytope_support(b1, b2, b12, lam)
            v = np.where(ok, v, -np.inf)
            best[j] = max(best[j], v.max())
    return dict(zip(LAMBDAS, best))


def brute_force_mac_caseC(problem: MacProblem, m=16):
    """Support values of the product-encoder (inner) region by a full 1/m grid sweep."""
    H, W = problem.host_joint.probs, problem.channel.probs
    ns1, ns2, nx1, nx2 = problem.s1.size, problem.s2.size, problem.x1.size, problem.x2.size
    t1, t2 = problem.d1.table, problem.d2.table

    def batch(rows):
        e1 = np.stack(rows[:ns1], axis=1)          # [b, s1, x1]
        e2 = np.stack(rows[ns1:], axis=1)          # [b, s2, x2]
        # joint axes: batch, s1, s2, x1, x2, y
        p = (H[None, :, :, None, None, None] * e1[:, :, None, :, None, None]
             * e2[:, None, :, None, :, None] * np.transpose(W, (1, 3, 0, 2, 4))[None])
        d1 = np.einsum("bsx,s,sx->b", e1, H.sum(axis=1), t1)
        d2 = np.einsum("bsx,s,sx->b", e2, H.sum(axis=0), t2)
        ok = (d1 <= problem.delta1 + 1e-9) & (d2 <= problem.delta2 + 1e-9)
        S1, S2, X1, X2, Y = 1, 2, 3, 4, 5
        hs = _h(p, (S1, S2))
        hall = _h(p, (S1, S2, X1, X2, Y))
        hxs = _h(p, (S1, S2, X1, X2))
        b1 = hxs + _h(p, (X2, S2, Y)) - hall - _h(p, (X2, S2)) - (hs - _h(p, (S2,)))
        b2 = hxs + _h(p, (X1, S1, Y)) - hall - _h(p, (X1, S1)) - (hs - _h(p, (S1,)))
        b12 = _h(p, (Y,)) + hxs - hall - hs
        return b1, b2, b12, ok

    return _sweep([nx1] * ns1 + [nx2] * ns2, batch, m)


def brute_force_bc_caseC(problem: BcProblem, m=16):
    """Support values of the host-recovering BC region (constant U) by a full 1/m sweep."""
    P, W, D = problem.host.probs, problem.forward.probs, problem.degrade.probs
    ns, nx = problem.s.size, problem.x.size
    t = problem.d.table

    def batch(rows):
        e = np.stack(rows, axis=1)                 # [b, s, x]
        p = np.einsum("s,bsx,xsy,yz->bsxyz", P, e, W, D)
        ok = np.einsum("bsx,s,sx->b", e, P, t) <= problem.delta + 1e-9
        S, X, Y, Z = 1, 2, 3, 4
        hs, hsx = _h(p, (S,)), _h(p, (S, X))
        b1 = hsx + _h(p, (S, Y)) - _h(p, (S, X, Y)) - hs
        b2 = _h(p, (Z,)) + hsx - _h(p, (S, X, Z)) - hs
        return b1, b2, np.full_like(b1, np.inf), ok

    return _sweep([nx] * ns, batch, m)


# -- tuple at a support direction -------------------------------------------------

def tuple_for_direction(problem, cfg: SearchConfig, lam: float):
    """Region, the support point at ``lam`` and the searched tuple attaining it."""
    region = compute_region(problem, cfg)
    point = region.support_point(lam)
    theta = region.info["vertex_params"][region.hull_vertices.index(point)]
    return region, point, build_family(problem, "inner", cfg).to_tuple(theta)


# -- exhaustive typicality and decoders ---------------------------------------------

def typical(seqs, probs, eps) -> bool:
    """Definition-level joint typicality of aligned integer sequences against a joint table."""
    probs = np.asarray(probs, dtype=float)
    n = len(seqs[0])
    k = probs.size
    counts = Counter(zip(*seqs))
    for cell in itertools.product(*[range(d) for d in probs.shape]):
        p = float(probs[cell])
        c = counts.get(cell, 0)
        if p == 0.0:
            if c:
                return False
        elif not abs(c * k - (n * k) * p) < n * eps:
            return False
    return True


def is_typ(seqs, probs, eps) -> bool:
    return typical([list(map(int, s)) for s in seqs], probs, eps)


def all_sequences(size, n):
    return [np.array(c) for c in itertools.product(range(size), repeat=n)]


def _verdict(found):
    if not found:
        return ("none",)
    if len(found) > 1:
        return ("ambiguous",)
    return ("ok",) + found[0]


def oracle_mac_decode(cb, y, eps, eps1):
    """Exhaustive search over host pairs and message pairs, no pruning."""
    p = cb.problem
    host = p.host_joint.probs
    joint = cb.joint.probs   # (Q, S1, S2, X1, X2, Y)
    found = []
    for s1 in all_sequences(p.s1.size, cb.n):
        for s2 in all_sequences(p.s2.size, cb.n):
            if not is_typ([s1, s2], host, eps1):
                continue
            c1, c2 = cb.codewords(1, s1), cb.codewords(2, s2)
            for m1 in range(cb.sizes[0]):
                for m2 in range(cb.sizes[1]):
                    if is_typ([cb.q, s1, s2, c1[m1], c2[m2], y], joint, eps):
                        found.append(((m1, m2), tuple(s1), tuple(s2)))
    return _verdict(found)


def oracle_bcB_decode1(cb, y, eps):
    t = cb.t
    nu, ny = cb.nu, cb.ny
    entries = {(int(cb.bin_of[i]), cb.pool[i].tobytes()): i
               for i in range(len(cb.pool)) if is_typ([cb.pool[i], y], t["uy"].reshape(nu, ny), eps)}
    if len(entries) != 1:
        return ("none",) if not entries else ("ambiguous",), 1
    (w2, _), idx = next(iter(entries.items()))
    u = cb.pool[idx]
    found = []
    for s in all_sequences(cb.ns, cb.n):
        if not is_typ([s, u], t["su"], eps):
            continue
        x = cb.satellites(s, u)
        for m1 in range(cb.sizes[0]):
            if is_typ([s, u, x[m1], y], t["suxy"].reshape(cb.ns, nu, cb.nx, ny), eps):
                found.append(((m1, w2), tuple(s)))
    return _verdict(found), 2


def oracle_bcB_decode2(cb, z, eps):
    entries = {(int(cb.bin_of[i]), cb.pool[i].tobytes())
               for i in range(len(cb.pool)) if is_typ([cb.pool[i], z], cb.t["uz"].reshape(cb.nu, cb.nz), eps)}
    if len(entries) != 1:
        return ("none",) if not entries else ("ambiguous",)
    return ("ok", (next(iter(entries))[0],))


def _oracle_clouds(cb, obs, n_obs, psuo, eps, eps1):
    found = []
    for s in all_sequences(cb.ns, cb.n):
        if not is_typ([s], cb.problem.host.probs, eps1):
            continue
        clouds = cb.clouds(s)
        for m2 in range(cb.sizes[1]):
            if is_typ([s, clouds[m2], obs], psuo.reshape(cb.ns, cb.nu, n_obs), eps):
                found.append(((m2,), tuple(s)))
    return _verdict(found)


def oracle_bcC_decode1(cb, y, eps, eps1):
    first = _oracle_clouds(cb, y, cb.ny, cb.t["suy"], eps, eps1)
    if first[0] != "ok":
        return first, 1
    (m2,), s = first[1], np.array(first[2])
    u = cb.clouds(s)[m2]
    x = cb.satellites(s, m2)
    hits = [m1 for m1 in range(cb.sizes[0])
            if is_typ([s, u, x[m1], y], cb.t["suxy"].reshape(cb.ns, cb.nu, cb.nx, cb.ny), eps)]
    if len(hits) != 1:
        return (("none",) if not hits else ("ambiguous",)), 2
    return ("ok", (hits[0], m2), tuple(s)), 2


def oracle_bcC_decode2(cb, z, eps, eps1):
    return _oracle_clouds(cb, z, cb.nz, cb.t["suz"], eps, eps1)


def result_key(res):
    """DecodeResult in the oracle's verdict format."""
    if res.status != "ok":
        return (res.status,)
    out = ("ok", tuple(res.messages))
    if res.host is not None:
        out += tuple(tuple(int(v) for v in h) for h in res.host)
    return out
