"""Feasible-tuple search and region assembly.

A *family* parameterises the encoder kernels of one case as a list of
conditional-pmf rows, each row a point of a probability simplex.  The search
runs the bound formulas of ``bounds.py`` on a batched backend over many
parameter vectors at once:

* when the product of per-row simplex grids is small enough, every grid
  point is evaluated (exhaustive mode);
* otherwise, for each support direction, block-coordinate ascent sweeps one
  row at a time over that row's full grid (ascent mode).

Both modes finish with a pattern search that moves probability mass between
pairs of cells of a row, halving the step until it drops below
``refine_tol``.  Every evaluated feasible tuple contributes its rate
polytope to a pool of candidate points, and the region is the convex hull of
the pool.  The pool keeps only Pareto-maximal points; for down-closed unions
this loses nothing.

Families nest where the theory says regions nest (Case B tuples are Case A
tuples with U2 = (X2, S2); product encoders are joint encoders; B' inner
tuples are B' outer tuples with constant V), and the larger family's search
starts from the smaller family's result, so those containments hold for the
computed regions as well.
"""

from __future__ import annotations

import functools
import itertools
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import entr

from ..errors import BudgetExceeded, InfeasibleProblem, ValidationError
from ..prob import Alphabet, Kernel, Pmf, marginalize
from . import bounds as B
from .problems import (DISTORTION_SLACK, BcFeasibleTuple, BcProblem, MacFeasibleTuple,
                       MacProblem)
from .region import RateRegion, normalize_bounds, polytope_support, polytope_vertices, snap

LN2 = math.log(2.0)
TIE_TOL = 1e-12
SEED_STARTS = 2
DEFAULT_DIRECTIONS = tuple(float(x) for x in np.linspace(0.0, 1.0, 9))


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the feasible-tuple search.

    ``grid_step`` of None picks 1/8 when a tuple's full joint has at most 256
    cells and 1/4 otherwise; an automatic step is coarsened further when a
    single row grid would exceed ``row_budget``, an explicit one raises
    :class:`BudgetExceeded` instead.  ``aux_sizes`` overrides auxiliary
    alphabet sizes by name (U1, U2, U, V, W).
    """

    grid_step: float | None = None
    directions: tuple = DEFAULT_DIRECTIONS
    max_grid: int = 200_000
    coarse_grid: int = 20_000
    row_budget: int = 2_000
    chunk_size: int = 4096
    restarts: int = 1
    sweeps: int = 4
    refine: bool = True
    refine_tol: float = 1e-3
    refine_iters: int = 400
    aux_sizes: tuple = ()
    seed: int = 0
    workers: int | None = None
    shuffle_seed: int | None = None

    def __post_init__(self):
        if isinstance(self.aux_sizes, dict):
            object.__setattr__(self, "aux_sizes", tuple(sorted(self.aux_sizes.items())))
        dirs = tuple(float(x) for x in self.directions)
        if not dirs or any(not 0.0 <= x <= 1.0 for x in dirs):
            raise ValidationError("directions must be a non-empty list of values in [0, 1]")
        object.__setattr__(self, "directions", tuple(sorted(set(dirs))))
        if self.grid_step is not None:
            step_denominator(self.grid_step)
        for name in ("max_grid", "coarse_grid", "row_budget", "chunk_size", "sweeps", "refine_iters"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if self.restarts < 0:
            raise ValidationError("restarts must be >= 0")
        if self.workers is not None and self.workers < 1:
            raise ValidationError("workers must be >= 1")

    def aux(self, name, default):
        size = dict(self.aux_sizes).get(name, default)
        if int(size) < 1:
            raise ValidationError(f"auxiliary size for {name} must be >= 1")
        return int(size)

    def worker_count(self) -> int:
        if self.workers is not None:
            return self.workers
        env = os.environ.get("EMBEDCAP_THREADS")
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                raise ValidationError(f"EMBEDCAP_THREADS must be an integer, got {env!r}") from None
        return 1


def step_denominator(step: float) -> int:
    """The integer m with step == 1/m."""
    step = float(step)
    if not 0 < step <= 1:
        raise ValidationError(f"grid step must lie in (0, 1], got {step}")
    m = int(round(1.0 / step))
    if abs(1.0 / m - step) > 1e-9:
        raise ValidationError(f"grid step must be 1/m for an integer m, got {step}")
    return m


def simplex_grid(k: int, m: int) -> np.ndarray:
    """All points of the k-simplex with coordinates in {0, 1/m, ..., 1}, lexicographically sorted."""
    rows = []
    for bars in itertools.combinations(range(m + k - 1), k - 1):
        edges = (-1,) + bars + (m + k - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(k)])
    arr = np.array(rows, dtype=float).reshape(-1, k)
    arr = arr[np.lexsort(arr.T[::-1])]
    return arr / m


# -- batched information backend ---------------------------------------------

@functools.lru_cache(maxsize=256)
def _indicator(dims: tuple, keep: tuple) -> np.ndarray:
    """0/1 matrix mapping a flattened table over ``dims`` to its marginal over ``keep``.

    Marginalising by a matrix product is far faster than ``ndarray.sum`` over
    several short strided axes.
    """
    idx = np.indices(dims).reshape(len(dims), -1)
    kept = [dims[i] for i in keep]
    target = np.ravel_multi_index([idx[i] for i in keep], kept) if keep else np.zeros(idx.shape[1], int)
    mat = np.zeros((idx.shape[1], int(np.prod(kept))))
    mat[np.arange(idx.shape[1]), target] = 1.0
    mat.flags.writeable = False
    return mat


class BatchInfo:
    """Information backend over a batch of joints shaped (B, *dims)."""

    def __init__(self, joint: np.ndarray, names):
        self.joint = joint
        self.names = tuple(names)
        self._h = {}
        self._m = {frozenset(self.names): joint}

    def _marginal(self, key: frozenset):
        if key not in self._m:
            # Sum down from the smallest cached superset rather than the full joint.
            src = min((k for k in self._m if key < k), key=lambda k: self._m[k].size)
            arr = self._m[src]
            src_names = [n for n in self.names if n in src]
            keep = tuple(i for i, n in enumerate(src_names) if n in key)
            dims = arr.shape[1:]
            out = arr.reshape(arr.shape[0], -1) @ _indicator(dims, keep)
            self._m[key] = out.reshape((arr.shape[0],) + tuple(dims[i] for i in keep))
        return self._m[key]

    def marginal(self, order) -> np.ndarray:
        """Batch marginal over the named axes, in the given order."""
        m = self._marginal(frozenset(order))
        present = [n for n in self.names if n in order]
        return np.transpose(m, [0] + [1 + present.index(n) for n in order])

    def _entropy(self, names):
        key = frozenset(names)
        if not key:
            return 0.0
        if key not in self._h:
            m = self._marginal(key)
            self._h[key] = entr(m.reshape(m.shape[0], -1)).sum(axis=1) / LN2
        return self._h[key]

    def h(self, a, given=()):
        return self._entropy(tuple(a) + tuple(given)) - self._entropy(tuple(given))

    def mi(self, a, b, given=()):
        a, b, g = tuple(a), tuple(b), tuple(given)
        value = self._entropy(a + g) + self._entropy(b + g) - self._entropy(a + b + g) - self._entropy(g)
        return np.maximum(value, 0.0)


# -- families ------------------------------------------------------------------

@dataclass
class Family:
    """Parameterisation of one case's encoders as simplex rows.

    ``rows`` lists the simplex dimension of every row in parameter order.
    ``build`` maps parameters (B, D) to a batch joint and its axis names;
    ``distortions`` maps that joint to per-encoder expected distortions
    (B, k); ``terms`` is a formula from ``bounds.py``.
    """

    name: str
    rows: list
    build: Callable
    distortions: Callable
    budgets: tuple
    terms: Callable
    to_tuple: Callable
    min_distortion: np.ndarray
    cells: int

    @property
    def dim(self) -> int:
        return int(sum(self.rows))

    def row_slices(self):
        out, off = [], 0
        for k in self.rows:
            out.append(slice(off, off + k))
            off += k
        return out

    def evaluate(self, theta: np.ndarray, chunk: int):
        """Bounds (B, 3) and feasibility mask (B,) for parameter rows ``theta``."""
        theta = np.atleast_2d(theta)
        outs_b, outs_f = [], []
        for start in range(0, len(theta), chunk):
            part = theta[start:start + chunk]
            joint, names = self.build(part)
            info = BatchInfo(joint, names)
            dist = self.distortions(info)
            feas = np.all(dist <= np.asarray(self.budgets) + DISTORTION_SLACK, axis=1)
            b1, b2, b12 = self.terms(info)
            b = np.empty((len(part), 3))
            b[:, 0], b[:, 1], b[:, 2] = b1, b2, b12
            outs_b.append(b)
            outs_f.append(feas)
        return np.concatenate(outs_b), np.concatenate(outs_f)


def _sx_distortion(info: BatchInfo, s, x, table):
    m = info.marginal((s, x))
    return m.reshape(m.shape[0], -1) @ table.ravel()


def _argmin_rows(table):
    return np.argmin(table, axis=1)


def _mac_family(problem: MacProblem, kind: str, cfg: SearchConfig) -> Family:
    H = problem.host_joint.probs
    W = problem.channel.probs
    ns1, ns2, nx1, nx2 = problem.s1.size, problem.s2.size, problem.x1.size, problem.x2.size
    ny = problem.y.size
    t1, t2 = problem.d1.table, problem.d2.table
    budgets = (problem.delta1, problem.delta2)
    a1, a2 = _argmin_rows(t1), _argmin_rows(t2)
    q = ()

    def dists(names):
        return lambda info: np.stack([_sx_distortion(info, "S1", "X1", t1),
                                      _sx_distortion(info, "S2", "X2", t2)], axis=1)

    if kind == "C_inner":
        names = ("S1", "S2", "X1", "X2", "Y")
        rows = [nx1] * ns1 + [nx2] * ns2

        def build(th):
            e1 = th[:, :ns1 * nx1].reshape(-1, ns1, nx1)
            e2 = th[:, ns1 * nx1:].reshape(-1, ns2, nx2)
            return np.einsum("ac,bax,bcw,xawcy->bacxwy", H, e1, e2, W), names

        def to_tuple(th):
            th = np.asarray(th, float)
            return MacFeasibleTuple(enc1=Kernel([problem.s1], [problem.x1], th[:ns1 * nx1].reshape(ns1, nx1)),
                                    enc2=Kernel([problem.s2], [problem.x2], th[ns1 * nx1:].reshape(ns2, nx2)))

        start = np.concatenate([np.eye(nx1)[a1].ravel(), np.eye(nx2)[a2].ravel()])
        terms = lambda info: B.mac_caseC_terms(info, q)
        cells = ns1 * ns2 * nx1 * nx2 * ny
    elif kind == "C_outer":
        names = ("S1", "S2", "X1", "X2", "Y")
        rows = [nx1 * nx2] * (ns1 * ns2)

        def build(th):
            e = th.reshape(-1, ns1, ns2, nx1, nx2)
            return np.einsum("ac,bacxw,xawcy->bacxwy", H, e, W), names

        def to_tuple(th):
            arr = np.asarray(th, float).reshape(ns1, ns2, nx1, nx2)
            return MacFeasibleTuple(joint_enc=Kernel([problem.s1, problem.s2], [problem.x1, problem.x2], arr))

        start = np.einsum("ax,cw->acxw", np.eye(nx1)[a1], np.eye(nx2)[a2]).ravel()
        terms = lambda info: B.mac_caseC_terms(info, q)
        cells = ns1 * ns2 * nx1 * nx2 * ny
    elif kind == "B":
        nu1 = cfg.aux("U1", nx1 * ns1)
        names = ("S1", "S2", "U1", "X1", "X2", "Y")
        rows = [nu1 * nx1] * ns1 + [nx2] * ns2
        u1ax = Alphabet("U1", nu1)

        def build(th):
            e1 = th[:, :ns1 * nu1 * nx1].reshape(-1, ns1, nu1, nx1)
            e2 = th[:, ns1 * nu1 * nx1:].reshape(-1, ns2, nx2)
            return np.einsum("ac,baux,bcw,xawcy->bacuxwy", H, e1, e2, W), names

        def to_tuple(th):
            th = np.asarray(th, float)
            e1 = th[:ns1 * nu1 * nx1].reshape(ns1, nu1, nx1)
            e2 = th[ns1 * nu1 * nx1:].reshape(ns2, nx2)
            return MacFeasibleTuple(enc1=Kernel([problem.s1], [u1ax, problem.x1], e1),
                                    enc2=Kernel([problem.s2], [problem.x2], e2))

        s1 = np.zeros((ns1, nu1, nx1))
        s1[np.arange(ns1), 0, a1] = 1.0
        start = np.concatenate([s1.ravel(), np.eye(nx2)[a2].ravel()])
        terms = lambda info: B.mac_caseB_terms(info, q)
        cells = ns1 * ns2 * nu1 * nx1 * nx2 * ny
    elif kind == "A":
        nu1 = cfg.aux("U1", nx1 * ns1)
        nu2 = cfg.aux("U2", nx2 * ns2)
        names = ("S1", "S2", "U1", "X1", "U2", "X2", "Y")
        rows = [nu1 * nx1] * ns1 + [nu2 * nx2] * ns2
        u1ax, u2ax = Alphabet("U1", nu1), Alphabet("U2", nu2)

        def build(th):
            e1 = th[:, :ns1 * nu1 * nx1].reshape(-1, ns1, nu1, nx1)
            e2 = th[:, ns1 * nu1 * nx1:].reshape(-1, ns2, nu2, nx2)
            return np.einsum("ac,baux,bcvw,xawcy->bacuxvwy", H, e1, e2, W), names

        def to_tuple(th):
            th = np.asarray(th, float)
            e1 = th[:ns1 * nu1 * nx1].reshape(ns1, nu1, nx1)
            e2 = th[ns1 * nu1 * nx1:].reshape(ns2, nu2, nx2)
            return MacFeasibleTuple(enc1=Kernel([problem.s1], [u1ax, problem.x1], e1),
                                    enc2=Kernel([problem.s2], [u2ax, problem.x2], e2))

        s1 = np.zeros((ns1, nu1, nx1))
        s1[np.arange(ns1), 0, a1] = 1.0
        s2 = np.zeros((ns2, nu2, nx2))
        s2[np.arange(ns2), 0, a2] = 1.0
        start = np.concatenate([s1.ravel(), s2.ravel()])
        terms = lambda info: B.mac_caseA_terms(info, q)
        cells = ns1 * ns2 * nu1 * nx1 * nu2 * nx2 * ny
    else:
        raise ValueError(kind)
    return Family(f"mac_{kind}", rows, build, dists(names), budgets, terms, to_tuple, start, cells)


_BC_TERMS = {
    ("A'", "inner"): (B.bc_caseA_inner_terms, ("U", "V")),
    ("A'", "outer"): (B.bc_caseA_outer_terms, ("U", "V", "W")),
    ("B'", "inner"): (B.bc_caseB_inner_terms, ("U",)),
    ("B'", "outer"): (B.bc_caseB_outer_terms, ("U", "V")),
    ("C'", "capacity"): (B.bc_caseC_terms, ("U",)),
}


def default_bc_aux(problem: BcProblem, case: str, bound: str) -> dict:
    """Default auxiliary sizes for a BC family (see the README for the rationale)."""
    xs = problem.x.size * problem.s.size
    if case == "C'":
        # U does not enter the C' bounds beyond I(X;Y|U,S) <= I(X;Y|S): a constant is optimal.
        return {"U": 1, "V": 1, "W": 1}
    if case == "B'":
        return {"U": xs + 1, "V": 2 if bound == "outer" else 1, "W": 1}
    # A': the stated cardinality caps on V and W are far beyond a grid search.
    return {"U": 2, "V": xs, "W": 2 if bound == "outer" else 1}


def _bc_family(problem: BcProblem, case: str, bound: str, cfg: SearchConfig) -> tuple[Family, dict]:
    terms_fn, used = _BC_TERMS[(case, bound)]
    defaults = default_bc_aux(problem, case, bound)
    sizes = {n: (cfg.aux(n, defaults[n]) if n in used else 1) for n in ("U", "V", "W")}
    ns, nx = problem.s.size, problem.x.size
    nu, nv, nw = sizes["U"], sizes["V"], sizes["W"]
    P = problem.host.probs
    W = problem.forward.probs
    D = problem.degrade.probs
    names = ("S", "U", "V", "W", "X", "Y", "Z")
    k = nu * nv * nw * nx
    a = _argmin_rows(problem.d.table)
    table = problem.d.table
    axes = {"U": Alphabet("U", nu), "V": Alphabet("V", nv), "W": Alphabet("W", nw)}

    def build(th):
        e = th.reshape(-1, ns, nu, nv, nw, nx)
        return np.einsum("s,bsuvwx,xsy,yz->bsuvwxyz", P, e, W, D), names

    def dists(info):
        return _sx_distortion(info, "S", "X", table)[:, None]

    def to_tuple(th):
        arr = np.asarray(th, float).reshape(ns, nu, nv, nw, nx)
        return BcFeasibleTuple(Kernel([problem.s], [axes["U"], axes["V"], axes["W"], problem.x], arr))

    start = np.zeros((ns, nu, nv, nw, nx))
    start[np.arange(ns), 0, 0, 0, a] = 1.0
    cells = ns * k * problem.y.size * problem.z.size
    return Family(f"bc_{case}_{bound}", [k] * ns, build, dists, (problem.delta,), terms_fn, to_tuple,
                  start.ravel(), cells), sizes


# -- search engine -------------------------------------------------------------

class _Pool:
    """Pareto-maximal candidate rate points with the parameters that produced them."""

    def __init__(self, dim):
        self.pts = np.zeros((0, 2))
        self.params = np.zeros((0, dim))

    def add(self, bounds, feasible, theta):
        bounds, theta = bounds[feasible], theta[feasible]
        if len(bounds) == 0:
            return
        pts = snap(polytope_vertices(bounds))
        keep = normalize_bounds(bounds)[1]
        if not keep.any():
            return
        params = np.repeat(theta[keep], 5, axis=0)
        self._merge(pts, params)

    def add_points(self, pts, params):
        if len(pts):
            self._merge(snap(pts), np.asarray(params, float))

    def _merge(self, pts, params):
        pts = np.concatenate([self.pts, pts])
        params = np.concatenate([self.params, params])
        keys = tuple(params.T[::-1]) + (-pts[:, 1], -pts[:, 0])
        order = np.lexsort(keys)
        pts, params = pts[order], params[order]
        prev = np.concatenate([[-np.inf], np.maximum.accumulate(pts[:, 1])[:-1]])
        keep = pts[:, 1] > prev
        self.pts, self.params = pts[keep], params[keep]

    def merge(self, other: "_Pool"):
        self._merge(other.pts, other.params)


def _better(val, theta, best_val, best_theta):
    """Deterministic tie-break: larger value, then the lexicographically smaller parameters."""
    if best_theta is None or val > best_val + TIE_TOL:
        return True
    if val >= best_val - TIE_TOL:
        diff = np.flatnonzero(theta != best_theta)
        return bool(diff.size) and theta[diff[0]] < best_theta[diff[0]]
    return False


def _best_index(vals, thetas):
    top = vals.max()
    if not np.isfinite(top):
        return None
    cand = np.flatnonzero(vals >= top - TIE_TOL)
    if cand.size == 1:
        return int(cand[0])
    sub = thetas[cand]
    return int(cand[np.lexsort(sub.T[::-1])[0]])


class _Search:
    def __init__(self, family: Family, cfg: SearchConfig, step: int):
        self.f = family
        self.cfg = cfg
        self.m = step
        self.grids = {}
        for k in sorted(set(family.rows)):
            self.grids[k] = simplex_grid(k, step)
        self.row_grids = [self.grids[k] for k in family.rows]
        self.slices = family.row_slices()
        self.evaluated = 0
        self._lock = threading.Lock()

    @property
    def grid_size(self) -> int:
        return math.prod(len(g) for g in self.row_grids)

    def evaluate(self, theta):
        with self._lock:
            self.evaluated += len(theta)
        return self.f.evaluate(theta, self.cfg.chunk_size)

    def _map(self, fn, items):
        workers = self.cfg.worker_count()
        if workers <= 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))

    def _theta_from_index(self, idx):
        digits = np.unravel_index(idx, [len(g) for g in self.row_grids])
        return np.concatenate([g[d] for g, d in zip(self.row_grids, digits)], axis=1)

    # exhaustive ----------------------------------------------------------

    def exhaustive(self, pool: _Pool, best: dict):
        total = self.grid_size
        idx = np.arange(total, dtype=np.int64)
        if self.cfg.shuffle_seed is not None:
            idx = np.random.default_rng(self.cfg.shuffle_seed).permutation(idx)
        chunks = [idx[i:i + self.cfg.chunk_size] for i in range(0, total, self.cfg.chunk_size)]

        def run(chunk):
            theta = self._theta_from_index(chunk)
            b, feas = self.f.evaluate(theta, self.cfg.chunk_size)
            local = _Pool(self.f.dim)
            local.add(b, feas, theta)
            picks = {}
            for lam in self.cfg.directions:
                vals = np.where(feas, polytope_support(b, lam), -np.inf)
                i = _best_index(vals, theta)
                if i is not None:
                    picks[lam] = (vals[i], theta[i])
            return local, picks

        for local, picks in self._map(run, chunks):
            pool.merge(local)
            for lam, (v, th) in picks.items():
                self._offer(best, lam, v, th)
        self.evaluated += total

    def _offer(self, best, lam, val, theta):
        cur = best.get(lam)
        if cur is None or _better(val, theta, cur[0], cur[1]):
            best[lam] = (float(val), np.array(theta))

    # ascent --------------------------------------------------------------

    def _value(self, theta, lam, pool):
        b, feas = self.evaluate(theta[None, :])
        pool.add(b, feas, theta[None, :])
        return float(polytope_support(b, lam)[0]) if feas[0] else -np.inf

    def ascend(self, lam, starts, pool: _Pool):
        best_val, best_theta = -np.inf, None
        for theta in starts:
            theta = np.array(theta, float)
            cur = self._value(theta, lam, pool)
            for _ in range(self.cfg.sweeps):
                changed = False
                for r, sl in enumerate(self.slices):
                    grid = self.row_grids[r]
                    cand = np.repeat(theta[None, :], len(grid), axis=0)
                    cand[:, sl] = grid
                    b, feas = self.evaluate(cand)
                    pool.add(b, feas, cand)
                    vals = np.where(feas, polytope_support(b, lam), -np.inf)
                    i = _best_index(vals, cand)
                    if i is not None and vals[i] > cur + TIE_TOL:
                        cur, theta, changed = float(vals[i]), cand[i].copy(), True
                if not changed:
                    break
            if _better(cur, theta, best_val, best_theta) and np.isfinite(cur):
                best_val, best_theta = cur, theta
        return best_val, best_theta

    # refinement ----------------------------------------------------------

    def refine(self, lam, theta, pool: _Pool):
        theta = np.array(theta, float)
        cur = self._value(theta, lam, pool)
        if not np.isfinite(cur):
            return cur, theta
        delta = 0.5 / self.m
        pairs = [(sl.start + i, sl.start + j) for sl in self.slices
                 for i in range(sl.stop - sl.start) for j in range(sl.stop - sl.start) if i != j]
        src = np.array([p[0] for p in pairs], dtype=np.int64)
        dst = np.array([p[1] for p in pairs], dtype=np.int64)
        it = 0
        while delta >= self.cfg.refine_tol and it < self.cfg.refine_iters:
            it += 1
            ok = theta[src] >= delta - 1e-15
            if not ok.any():
                delta /= 2
                continue
            s, d = src[ok], dst[ok]
            cand = np.repeat(theta[None, :], len(s), axis=0)
            rows = np.arange(len(s))
            cand[rows, s] = np.maximum(cand[rows, s] - delta, 0.0)
            cand[rows, d] += delta
            b, feas = self.evaluate(cand)
            pool.add(b, feas, cand)
            vals = np.where(feas, polytope_support(b, lam), -np.inf)
            i = _best_index(vals, cand)
            if i is not None and vals[i] > cur + TIE_TOL:
                cur, theta = float(vals[i]), cand[i].copy()
            else:
                delta /= 2
        return cur, theta

    # driver --------------------------------------------------------------

    def run(self, seeds=()) -> tuple[_Pool, dict, str]:
        pool = _Pool(self.f.dim)
        best: dict = {}
        base = np.array([self.f.min_distortion] + [np.asarray(s, float) for s in seeds])
        b, feas = self.evaluate(base)
        pool.add(b, feas, base)
        base_vals = {lam: np.where(feas, polytope_support(b, lam), -np.inf) for lam in self.cfg.directions}
        if self.grid_size <= self.cfg.max_grid:
            mode = "exhaustive"
            self.exhaustive(pool, best)
            for lam, vals in base_vals.items():
                for v, th in zip(vals, base):
                    if np.isfinite(v):
                        self._offer(best, lam, v, th)
            finals = {lam: best[lam] for lam in self.cfg.directions if lam in best}
        else:
            mode = "ascent"
            coarse_best: dict = {}
            mc = self.m // 2
            while mc >= 1:
                coarse = _Search(self.f, self.cfg, mc)
                if coarse.grid_size <= self.cfg.coarse_grid:
                    # A coarse exhaustive pass supplies starting points that a
                    # purely local ascent from the min-distortion tuple would miss.
                    coarse.exhaustive(pool, coarse_best)
                    with self._lock:
                        self.evaluated += coarse.evaluated
                    mode = f"ascent+coarse(1/{mc})"
                    break
                mc //= 2
            rng = np.random.default_rng([self.cfg.seed, 0xA5CE])
            randoms = [np.concatenate([rng.dirichlet(np.ones(k)) for k in self.f.rows])
                       for _ in range(self.cfg.restarts)]

            def per_dir(lam):
                # The best few of {coarse-grid best, min-distortion tuple, seeds}
                # for this direction, plus the random starts.
                cands = [(v, i) for i, v in enumerate(base_vals[lam]) if np.isfinite(v)]
                if lam in coarse_best:
                    cands.append((coarse_best[lam][0], -1))
                cands.sort(key=lambda t: (-t[0], t[1]))
                starts = [coarse_best[lam][1] if i < 0 else base[i] for _, i in cands[:SEED_STARTS]]
                local = _Pool(self.f.dim)
                v, th = self.ascend(lam, starts + randoms, local)
                return lam, v, th, local

            finals = {}
            for lam, v, th, local in self._map(per_dir, list(self.cfg.directions)):
                pool.merge(local)
                if th is not None:
                    finals[lam] = (v, th)
        if self.cfg.refine:
            def per_dir_refine(item):
                lam, (v, th) = item
                local = _Pool(self.f.dim)
                v2, th2 = self.refine(lam, th, local)
                return lam, v2, th2, local

            refined = {}
            for lam, v, th, local in self._map(per_dir_refine, sorted(finals.items())):
                pool.merge(local)
                refined[lam] = (v, th)
            finals = refined
        return pool, finals, mode


def _choose_step(family: Family, cfg: SearchConfig) -> tuple[int, bool]:
    if cfg.grid_step is not None:
        m = step_denominator(cfg.grid_step)
        explicit = True
    else:
        m = 8 if family.cells <= 256 else 4
        explicit = False
    while True:
        biggest = max(math.comb(m + k - 1, k - 1) for k in family.rows)
        if biggest <= cfg.row_budget:
            return m, explicit
        if explicit or m == 1:
            raise BudgetExceeded(
                f"a row grid of {biggest} points at step 1/{m} exceeds the row budget {cfg.row_budget}")
        m //= 2


def _region_from_pool(pool: _Pool, family: Family, cfg: SearchConfig, info: dict) -> RateRegion:
    if len(pool.pts) == 0:
        info["vertex_params"] = ()
        return RateRegion((), (), True, info)
    pts = [pool.pts, np.zeros((1, 2))]
    i1 = int(np.argmax(pool.pts[:, 0]))
    i2 = int(np.argmax(pool.pts[:, 1]))
    extra = np.array([[pool.pts[i1, 0], 0.0], [0.0, pool.pts[i2, 1]]])
    region = RateRegion.from_points(np.concatenate(pts + [extra]), cfg.directions, info)
    lookup = {tuple(p): th for p, th in zip(map(tuple, pool.pts), pool.params)}
    lookup.setdefault((float(extra[0, 0]), 0.0), pool.params[i1])
    lookup.setdefault((0.0, float(extra[1, 1])), pool.params[i2])
    region.info["vertex_params"] = tuple(lookup.get(tuple(v)) for v in region.hull_vertices)
    return region


def _run_family(family: Family, cfg: SearchConfig, seeds=(), extra_pool: _Pool | None = None,
                info=None) -> RateRegion:
    m, explicit = _choose_step(family, cfg)
    search = _Search(family, cfg, m)
    pool, finals, mode = search.run(seeds)
    if extra_pool is not None:
        pool.merge(extra_pool)
    info = dict(info or {})
    info.update(family=family.name, grid_step=f"1/{m}", mode=mode, evaluated=search.evaluated,
                grid_size=search.grid_size,
                best_params={lam: th for lam, (v, th) in finals.items()},
                _pool=pool)
    return _region_from_pool(pool, family, cfg, info)


def _warm(region: RateRegion | None, family: Family):
    """Parameter vectors stored in a previous region of the same family."""
    if region is None:
        return []
    if region.info.get("family") != family.name:
        raise ValidationError(
            f"warm start from family {region.info.get('family')!r} does not fit {family.name!r}")
    out = [th for th in region.info.get("vertex_params", ()) if th is not None]
    out += list(region.info.get("best_params", {}).values())
    return _dedup(out)


def _dedup(thetas):
    seen, out = set(), []
    for th in thetas:
        key = np.asarray(th, float).tobytes()
        if key not in seen:
            seen.add(key)
            out.append(np.asarray(th, float))
    return out


def _stored(region: RateRegion):
    return _dedup([th for th in region.info.get("vertex_params", ()) if th is not None]
                  + list(region.info.get("best_params", {}).values()))


# embeddings between nested families

def _embed_mac_B_in_A(theta, problem: MacProblem, cfg: SearchConfig):
    ns1, ns2, nx1, nx2 = problem.s1.size, problem.s2.size, problem.x1.size, problem.x2.size
    nu1 = cfg.aux("U1", nx1 * ns1)
    nu2 = cfg.aux("U2", nx2 * ns2)
    cut = ns1 * nu1 * nx1
    e2 = np.asarray(theta[cut:]).reshape(ns2, nx2)
    full = np.zeros((ns2, nu2, nx2))
    for s in range(ns2):
        for x in range(nx2):
            full[s, x * ns2 + s, x] = e2[s, x]
    return np.concatenate([theta[:cut], full.ravel()])


def _embed_mac_inner_in_outer(theta, problem: MacProblem):
    ns1, ns2, nx1, nx2 = problem.s1.size, problem.s2.size, problem.x1.size, problem.x2.size
    e1 = np.asarray(theta[:ns1 * nx1]).reshape(ns1, nx1)
    e2 = np.asarray(theta[ns1 * nx1:]).reshape(ns2, nx2)
    return np.einsum("ax,cw->acxw", e1, e2).ravel()


def _embed_bc(theta, problem: BcProblem, src_sizes, dst_sizes):
    ns, nx = problem.s.size, problem.x.size
    arr = np.asarray(theta).reshape(ns, src_sizes["U"], src_sizes["V"], src_sizes["W"], nx)
    out = np.zeros((ns, dst_sizes["U"], dst_sizes["V"], dst_sizes["W"], nx))
    out[:, :src_sizes["U"], :src_sizes["V"], :src_sizes["W"], :] = arr
    return out.ravel()


def _collapse_v(theta, problem: BcProblem, sizes):
    """Same tuple with V merged into its first symbol (a constant V)."""
    ns, nx = problem.s.size, problem.x.size
    arr = np.asarray(theta).reshape(ns, sizes["U"], sizes["V"], sizes["W"], nx)
    out = np.zeros_like(arr)
    out[:, :, 0] = arr.sum(axis=2)
    return out.ravel()


def _check_feasible_problem(problem):
    if isinstance(problem, MacProblem):
        h = problem.host_joint
        m1 = problem.d1.min_expected(_marg(h, "S1"))
        m2 = problem.d2.min_expected(_marg(h, "S2"))
        if m1 > problem.delta1 + DISTORTION_SLACK or m2 > problem.delta2 + DISTORTION_SLACK:
            raise InfeasibleProblem(
                f"minimum achievable distortions ({m1:.6g}, {m2:.6g}) exceed budgets "
                f"({problem.delta1}, {problem.delta2})")
    else:
        m = problem.d.min_expected(problem.host)
        if m > problem.delta + DISTORTION_SLACK:
            raise InfeasibleProblem(f"minimum achievable distortion {m:.6g} exceeds budget {problem.delta}")


def _marg(joint, name):
    return Pmf(joint.axis_alphabet(name), marginalize(joint, [name]).probs)


def resolve_bound(problem, bound: str) -> str:
    if isinstance(problem, MacProblem):
        if bound not in ("inner", "outer"):
            raise ValidationError(f"MAC bound must be 'inner' or 'outer', got {bound!r}")
        if bound == "outer" and problem.case != "C":
            raise ValidationError(f"case {problem.case} has only an inner bound")
        return bound
    if problem.case in ("C'", "D'"):
        if bound not in ("inner", "outer", "capacity"):
            raise ValidationError(f"unknown bound {bound!r}")
        return "capacity"
    if bound not in ("inner", "outer"):
        raise ValidationError(f"case {problem.case} bound must be 'inner' or 'outer', got {bound!r}")
    return bound


def build_family(problem, bound: str = "inner", config: SearchConfig | None = None) -> Family:
    """The search family used for ``problem``/``bound`` (exposed for testing)."""
    cfg = config or SearchConfig()
    bound = resolve_bound(problem, bound)
    if isinstance(problem, MacProblem):
        kind = {"A": "A", "B": "B"}.get(problem.case, "C_outer" if bound == "outer" else "C_inner")
        return _mac_family(problem, kind, cfg)
    case = "C'" if problem.case == "D'" else problem.case
    return _bc_family(problem, case, bound, cfg)[0]


def compute_region(problem, config: SearchConfig | None = None, *, bound: str = "inner",
                   warm_start: RateRegion | None = None) -> RateRegion:
    """Rate region of ``problem`` as the hull of all searched tuples' polytopes.

    ``bound`` selects the inner or outer bound where a case has both (C' and
    D' have a single capacity region).  ``warm_start`` is a region previously
    computed for the same case and bound, e.g. at a smaller distortion budget;
    its stored tuples are re-evaluated and seed the search.
    """
    cfg = config or SearchConfig()
    bound = resolve_bound(problem, bound)
    _check_feasible_problem(problem)
    info = {"case": problem.case, "bound": bound}
    if isinstance(problem, MacProblem):
        return _compute_mac(problem, cfg, bound, warm_start, info)
    return _compute_bc(problem, cfg, bound, warm_start, info)


def _compute_mac(problem, cfg, bound, warm_start, info):
    case = problem.case
    if case == "C" and bound == "inner":
        fam = _mac_family(problem, "C_inner", cfg)
        return _run_family(fam, cfg, _warm(warm_start, fam), info=info)
    if case == "C":
        inner = _compute_mac(problem, cfg, "inner", None, {"case": "C", "bound": "inner"})
        fam = _mac_family(problem, "C_outer", cfg)
        pool = _embed_pool(inner, lambda th: _embed_mac_inner_in_outer(th, problem), fam.dim)
        seeds = [_embed_mac_inner_in_outer(th, problem) for th in _stored(inner)]
        return _run_family(fam, cfg, seeds + _warm(warm_start, fam), pool, info)
    if case == "B":
        fam = _mac_family(problem, "B", cfg)
        return _run_family(fam, cfg, _warm(warm_start, fam), info=info)
    fam = _mac_family(problem, "A", cfg)
    nx2, ns2 = problem.x2.size, problem.s2.size
    if cfg.aux("U2", nx2 * ns2) < nx2 * ns2:
        info["includes_case_B"] = False
        return _run_family(fam, cfg, _warm(warm_start, fam), info=info)
    sub = _compute_mac(problem.with_case("B"), cfg, "inner", None, {"case": "B", "bound": "inner"})
    embed = lambda th: _embed_mac_B_in_A(th, problem, cfg)
    pool = _embed_pool(sub, embed, fam.dim)
    seeds = [embed(th) for th in _stored(sub)]
    info["includes_case_B"] = True
    return _run_family(fam, cfg, seeds + _warm(warm_start, fam), pool, info)


def _embed_pool(region: RateRegion, embed, dim: int) -> _Pool:
    """Carry a sub-family's candidate points (with embedded parameters) into a larger family."""
    src = region.info["_pool"]
    dst = _Pool(dim)
    if len(src.params):
        dst.add_points(src.pts, np.array([embed(th) for th in src.params]))
    return dst


def _compute_bc(problem, cfg, bound, warm_start, info):
    case = "C'" if problem.case == "D'" else problem.case
    fam, sizes = _bc_family(problem, case, bound, cfg)
    info["aux_sizes"] = sizes
    if case in ("A'", "B'") and bound == "outer":
        inner = _compute_bc(problem, cfg, "inner", None, {"case": problem.case, "bound": "inner"})
        src = inner.info["aux_sizes"]
        if all(src[n] <= sizes[n] for n in src):
            embed = lambda th: _embed_bc(th, problem, src, sizes)
            seeds = [embed(th) for th in _stored(inner)]
            if case == "A'":
                # With constant W the A' outer sum bound is b1 + I(U;Y) - I(U;S) >= b1 + b2
                # (degradedness), so an inner rectangle fits its outer polytope when both
                # bounds are >= 0.  Collapsing V covers b1 < 0 (b1 becomes 0, b2 unchanged).
                # A pinned b2 < 0 has no such cover; see the README on negative bounds.
                seeds += [_collapse_v(th, problem, sizes) for th in seeds]
            # B' inner and outer share b1, and with constant V the outer b2 equals
            # the inner one, so inner candidates carry over unchanged.  A' outer
            # has a sum bound, so its inner tuples are only re-evaluated as seeds.
            pool = _embed_pool(inner, embed, fam.dim) if case == "B'" else None
            info["includes_inner"] = case == "B'"
            return _run_family(fam, cfg, seeds + _warm(warm_start, fam), pool, info)
        info["includes_inner"] = False
    return _run_family(fam, cfg, _warm(warm_start, fam), info=info)
