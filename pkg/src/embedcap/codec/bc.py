"""Random-coding schemes for degraded-BC embedding.

Binned scheme (host recovered by the strong receiver only): a pool of
auxiliary sequences drawn from p(u) is split at random into equal bins, one
per weak-receiver message.  The encoder picks the first pool sequence in the
message's bin that is typical with the host, then superimposes x^n.

Superposition scheme (host recovered by both receivers): cloud centres
u^n(s^n, m2) are drawn from p(u|s) and satellites x^n(s^n, m2, m1) from
p(x|u,s).  Both decoders search host candidates and messages by typicality.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ValidationError
from ..prob import Alphabet, Kernel, marginalize, mutual_information
from ..regions.problems import BcFeasibleTuple, BcProblem, bc_full_joint
from ..typicality import (DEFAULT_ENUM_BUDGET, conditional_candidate_array, enumerate_typical,
                          flat_index, typical_rows)
from .common import (AMBIGUOUS, NONE, OK, RATE_SLACK, DecodeResult, as_array, check_budget,
                     conditional_rows)
from .rng import Role, draw_rows, stream


def _tables(problem: BcProblem, tup: BcFeasibleTuple):
    joint = bc_full_joint(problem, tup)
    return joint, {
        "su": marginalize(joint, ("S", "U")).probs,
        "sux": marginalize(joint, ("S", "U", "X")).probs,
        "uy": marginalize(joint, ("U", "Y")).probs.ravel(),
        "uz": marginalize(joint, ("U", "Z")).probs.ravel(),
        "sy": marginalize(joint, ("S", "Y")).probs.ravel(),
        "sz": marginalize(joint, ("S", "Z")).probs.ravel(),
        "suy": marginalize(joint, ("S", "U", "Y")).probs.ravel(),
        "suz": marginalize(joint, ("S", "U", "Z")).probs.ravel(),
        "suxy": marginalize(joint, ("S", "U", "X", "Y")).probs.ravel(),
        "sx": marginalize(joint, ("S", "X")).probs.ravel(),
    }


class _BcBase:
    def __init__(self, problem: BcProblem, tup: BcFeasibleTuple, n: int, m1: int, m2: int, seed: int):
        self.problem, self.tup = problem, tup
        self.n, self.sizes, self.seed = n, (m1, m2), seed
        self.joint, self.t = _tables(problem, tup)
        self.ns, self.nu = self.t["su"].shape
        self.nx, self.ny, self.nz = problem.x.size, problem.y.size, problem.z.size
        # p(x | s, u), indexed [s, u, x].
        self.px = conditional_rows(self.t["sux"])
        self._cache = {}

    def _satellites(self, context, s, u) -> np.ndarray:
        key = ("x",) + tuple(c.tobytes() if isinstance(c, np.ndarray) else c for c in context)
        block = self._cache.get(key)
        if block is None:
            block = draw_rows(stream(self.seed, Role.CODEWORD, *context), self.px[s, u], self.sizes[0])
            block.flags.writeable = False
            self._cache[key] = block
        return block


class BcBinnedCodebook(_BcBase):
    """Binned auxiliary pool plus lazily drawn satellites x^n(s^n, u^n, m1)."""

    def __init__(self, problem, tup, n, m1, m2, seed, eps: float, pool_budget: int = DEFAULT_ENUM_BUDGET):
        super().__init__(problem, tup, n, m1, m2, seed)
        self.eps = eps
        self.info_us = mutual_information(self.joint, ("U",), ("S",))
        self.bin_size = max(1, math.ceil(2.0 ** (n * (self.info_us + eps)) - RATE_SLACK))
        total = m2 * self.bin_size
        check_budget(total, pool_budget, "auxiliary pool")
        pu = self.t["su"].sum(axis=0)
        self.pool = draw_rows(stream(seed, Role.AUX_POOL), np.broadcast_to(pu, (n, self.nu)), total)
        perm = stream(seed, Role.BINNING).permutation(total)
        self.bin_of = np.empty(total, dtype=np.int64)
        self.bin_of[perm] = np.arange(total) // self.bin_size
        self.members = [np.flatnonzero(self.bin_of == w) for w in range(m2)]

    def satellites(self, s, u) -> np.ndarray:
        s, u = as_array(s), as_array(u)
        return self._satellites((s, u), s, u)


class BcSuperpositionCodebook(_BcBase):
    """Cloud centres u^n(s^n, m2) and satellites x^n(s^n, m2, m1), drawn lazily."""

    def __init__(self, problem, tup, n, m1, m2, seed):
        super().__init__(problem, tup, n, m1, m2, seed)
        self.pu = conditional_rows(self.t["su"])

    def clouds(self, s) -> np.ndarray:
        s = as_array(s)
        key = ("u", s.tobytes())
        block = self._cache.get(key)
        if block is None:
            block = draw_rows(stream(self.seed, Role.CLOUD, s), self.pu[s], self.sizes[1])
            block.flags.writeable = False
            self._cache[key] = block
        return block

    def satellites(self, s, m2: int) -> np.ndarray:
        s = as_array(s)
        return self._satellites((s, int(m2)), s, self.clouds(s)[m2])


def _check_message(w, m):
    if not 0 <= w < m:
        raise ValidationError(f"message {w} outside 0..{m - 1}")


def fallback_input(problem: BcProblem, s) -> np.ndarray:
    """Per-letter cheapest input, sent when the encoder cannot find a codeword."""
    return problem.d.table.argmin(axis=1)[as_array(s)]


# -- binned scheme ------------------------------------------------------------

def bc_caseB_encode(cb: BcBinnedCodebook, s, w1: int, w2: int, eps: float):
    """Return ``(x, u)``; ``u`` is None on encoding failure (x is then the fallback)."""
    _check_message(w1, cb.sizes[0])
    _check_message(w2, cb.sizes[1])
    s = as_array(s)
    ps = cb.t["su"].sum(axis=1)
    if not typical_rows(s[None, :], ps, eps)[0]:
        return fallback_input(cb.problem, s), None
    members = cb.members[w2]
    cells = s[None, :] * cb.nu + cb.pool[members]
    hits = np.flatnonzero(typical_rows(cells, cb.t["su"].ravel(), eps))
    if hits.size == 0:
        return fallback_input(cb.problem, s), None
    u = cb.pool[members[hits[0]]]
    return cb.satellites(s, u)[w1], u


def _unique_pool_match(cb: BcBinnedCodebook, obs, probs, n_obs, eps):
    """Distinct (bin, sequence) pool entries typical with the observation."""
    cells = cb.pool * n_obs + obs[None, :]
    hits = np.flatnonzero(typical_rows(cells, probs, eps))
    seen = {}
    for h in hits:
        seen.setdefault((int(cb.bin_of[h]), cb.pool[h].tobytes()), h)
    return list(seen.items())


def bc_caseB_decode1(cb: BcBinnedCodebook, y, eps: float, budget: int = DEFAULT_ENUM_BUDGET) -> DecodeResult:
    """Stage 1: unique u^n typical with y^n.  Stage 2: unique (s^n, m1) given u^n."""
    y = as_array(y)
    matches = _unique_pool_match(cb, y, cb.t["uy"], cb.ny, eps)
    if len(matches) != 1:
        return DecodeResult(NONE if not matches else AMBIGUOUS, stage=1)
    (w2, _), idx = matches[0]
    u = cb.pool[idx]
    check_budget(cb.ns ** cb.n, budget, "host enumeration")
    hosts = conditional_candidate_array(cb.t["su"].T, u, eps)
    hit = None
    for s in hosts:
        x = cb.satellites(s, u)
        cells = flat_index([s, u, x, y], (cb.ns, cb.nu, cb.nx, cb.ny))
        for m1 in np.flatnonzero(typical_rows(cells, cb.t["suxy"], eps)):
            if hit is not None:
                return DecodeResult(AMBIGUOUS, aux=u, stage=2)
            hit = (int(m1), s.copy())
    if hit is None:
        return DecodeResult(NONE, aux=u, stage=2)
    return DecodeResult(OK, (hit[0], w2), (hit[1],), aux=u, stage=2)


def bc_caseB_decode2(cb: BcBinnedCodebook, z, eps: float) -> DecodeResult:
    """Unique u^n typical with z^n; its bin index is the message."""
    matches = _unique_pool_match(cb, as_array(z), cb.t["uz"], cb.nz, eps)
    if len(matches) != 1:
        return DecodeResult(NONE if not matches else AMBIGUOUS)
    (w2, _), idx = matches[0]
    return DecodeResult(OK, (w2,), aux=cb.pool[idx])


# -- superposition scheme -----------------------------------------------------

def bc_caseC_encode(cb: BcSuperpositionCodebook, s, w1: int, w2: int) -> np.ndarray:
    _check_message(w1, cb.sizes[0])
    _check_message(w2, cb.sizes[1])
    return cb.satellites(s, w2)[w1]


def _host_candidates(cb, eps1, budget):
    check_budget(cb.ns ** cb.n, budget, "host enumeration")
    cands = getattr(cb, "_hosts", None)
    if cands is None or cands[0] != eps1:
        cands = (eps1, enumerate_typical(cb.problem.host, cb.n, eps1, budget)[:, :, 0])
        cb._hosts = cands
    return cands[1]


def _cloud_search(cb, obs, n_obs, pso, psuo, eps, eps1, budget):
    """Unique (s^n, m2) with (s, u(s, m2), obs) typical; returns a DecodeResult."""
    hosts = _host_candidates(cb, eps1, budget)
    if len(hosts) == 0:
        return DecodeResult(NONE)
    keep = np.flatnonzero(typical_rows(hosts * n_obs + obs[None, :], pso, eps))
    hit = None
    for t in keep:
        s = hosts[t]
        cells = (s[None, :] * cb.nu + cb.clouds(s)) * n_obs + obs[None, :]
        for m2 in np.flatnonzero(typical_rows(cells, psuo, eps)):
            if hit is not None:
                return DecodeResult(AMBIGUOUS)
            hit = (int(m2), s.copy())
    if hit is None:
        return DecodeResult(NONE)
    return DecodeResult(OK, (hit[0],), (hit[1],), aux=cb.clouds(hit[1])[hit[0]])


def bc_caseC_decode1(cb: BcSuperpositionCodebook, y, eps: float, eps1: float,
                     budget: int = DEFAULT_ENUM_BUDGET) -> DecodeResult:
    y = as_array(y)
    first = _cloud_search(cb, y, cb.ny, cb.t["sy"], cb.t["suy"], eps, eps1, budget)
    if not first.ok:
        return first
    m2, s, u = first.messages[0], first.host[0], first.aux
    cells = flat_index([s, u, cb.satellites(s, m2), y], (cb.ns, cb.nu, cb.nx, cb.ny))
    hits = np.flatnonzero(typical_rows(cells, cb.t["suxy"], eps))
    if hits.size != 1:
        return DecodeResult(NONE if hits.size == 0 else AMBIGUOUS, aux=u, stage=2)
    return DecodeResult(OK, (int(hits[0]), m2), (s,), aux=u, stage=2)


def bc_caseC_decode2(cb: BcSuperpositionCodebook, z, eps: float, eps1: float,
                     budget: int = DEFAULT_ENUM_BUDGET) -> DecodeResult:
    return _cloud_search(cb, as_array(z), cb.nz, cb.t["sz"], cb.t["suz"], eps, eps1, budget)


def cloud_from_input(tup: BcFeasibleTuple) -> BcFeasibleTuple:
    """Copy of ``tup`` whose cloud variable U is a copy of X.

    The superposition scheme carries the weak receiver's message in U and
    reaches R2 < I(U,S;Z) - H(S); with U = X this is the capacity bound
    I(X,S;Z) - H(S), whereas a constant U leaves no room for that message.
    """
    enc = tup.aux_enc
    p = enc.probs.sum(axis=(1, 2, 3))  # p(x|s)
    ns, nx = p.shape
    table = np.zeros((ns, nx, nx))
    table[:, np.arange(nx), np.arange(nx)] = p
    s_ax, x_ax = enc.input_axes[0], enc.output_axes[-1]
    return BcFeasibleTuple(Kernel([s_ax], [Alphabet("U", nx), x_ax], table))
