"""Random-coding scheme for MAC embedding with recovery of both hosts.

Each encoder i owns, for every host sequence and message, a codeword drawn
letter by letter from p(x_i | s_i, q) given a shared time-sharing sequence.
The decoder searches every host pair typical at eps1 and every message pair
for the unique tuple jointly typical (at eps) with the channel output.
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from ..prob import marginalize
from ..regions.problems import MacFeasibleTuple, MacProblem, mac_full_joint
from ..typicality import DEFAULT_ENUM_BUDGET, enumerate_typical, flat_index, typical_rows
from .common import AMBIGUOUS, NONE, OK, DecodeResult, as_array, check_budget, conditional_rows
from .rng import Role, draw_rows, stream

# Largest number of (m1, m2, position) cells tested in one typical_rows call.
CHUNK_CELLS = 1 << 22


class MacCodebook:
    """Lazily generated codebooks of both encoders.

    Codeword blocks (all messages for one host sequence) are drawn from a
    stream keyed by (seed, encoder, host sequence) and cached, so the same
    request always returns the same codewords.
    """

    def __init__(self, problem: MacProblem, tup: MacFeasibleTuple, n: int, m1: int, m2: int, seed: int):
        if tup.is_outer:
            raise ValidationError("the coding scheme needs separate encoders (an inner-set tuple)")
        self.problem, self.tup = problem, tup
        self.n, self.sizes, self.seed = n, (m1, m2), seed
        joint = mac_full_joint(problem, tup)
        self.joint = marginalize(joint, ("Q", "S1", "S2", "X1", "X2", "Y"))
        self.shape = self.joint.shape
        self.probs = self.joint.probs.ravel()
        # Necessary condition used to prune host pairs before touching codewords.
        self.qssy = marginalize(joint, ("Q", "S1", "S2", "Y")).probs.ravel()
        self.qssxy = (marginalize(joint, ("Q", "S1", "S2", "X1", "Y")).probs.ravel(),
                      marginalize(joint, ("Q", "S1", "S2", "X2", "Y")).probs.ravel())
        # p(x_i | s_i, q), indexed [s_i, q, x_i].
        self.px = (
            conditional_rows(marginalize(joint, ("S1", "Q", "X1")).probs),
            conditional_rows(marginalize(joint, ("S2", "Q", "X2")).probs),
        )
        q_rows = np.broadcast_to(tup.q.probs, (n, tup.q.probs.size))
        self.q = draw_rows(stream(seed, Role.TIMESHARE), q_rows, 1)[0]
        self._cache = {}

    def codewords(self, i: int, s) -> np.ndarray:
        """All codewords (M_i, n) of encoder i (1 or 2) for host sequence ``s``."""
        s = as_array(s)
        key = (i, s.tobytes())
        block = self._cache.get(key)
        if block is None:
            rows = self.px[i - 1][s, self.q]
            block = draw_rows(stream(self.seed, Role.CODEWORD, i, s), rows, self.sizes[i - 1])
            block.flags.writeable = False
            self._cache[key] = block
        return block


def mac_caseC_encode(cb: MacCodebook, i: int, s, w: int) -> np.ndarray:
    """Codeword x_i^n(q^n, s_i^n, w) of encoder i; w is 0-based."""
    if not 0 <= w < cb.sizes[i - 1]:
        raise ValidationError(f"message {w} outside 0..{cb.sizes[i - 1] - 1}")
    return cb.codewords(i, s)[w]


def _host_candidates(cb: MacCodebook, eps1: float, budget: int) -> np.ndarray:
    p = cb.problem
    check_budget(p.s1.size ** cb.n * p.s2.size ** cb.n, budget, "host-pair enumeration")
    cands = getattr(cb, "_hosts", None)
    if cands is None or cands[0] != eps1:
        cands = (eps1, enumerate_typical(p.host_joint, cb.n, eps1, budget))
        cb._hosts = cands
    return cands[1]


def _marginal_masks(cb: MacCodebook, hosts, y, eps):
    """Per host candidate, the messages of each encoder passing the marginal test.

    Joint typicality of the full tuple implies typicality of each encoder's
    marginal tuple (q, s1, s2, x_i, y), so messages failing it cannot be part
    of a match.  Returns two boolean arrays (T, M1) and (T, M2).
    """
    n = cb.n
    base = flat_index([cb.q, hosts[:, :, 0], hosts[:, :, 1]], cb.shape[:3])
    ny = cb.shape[5]
    masks = []
    for i in (1, 2):
        nx, m = cb.shape[2 + i], cb.sizes[i - 1]
        out = np.zeros((len(hosts), m), dtype=bool)
        step = max(1, CHUNK_CELLS // (m * n))
        for lo in range(0, len(hosts), step):
            block = np.stack([cb.codewords(i, h[:, i - 1]) for h in hosts[lo:lo + step]])
            cells = (base[lo:lo + step, None, :] * nx + block) * ny + y
            out[lo:lo + step] = typical_rows(cells.reshape(-1, n), cb.qssxy[i - 1], eps).reshape(-1, m)
        masks.append(out)
    return masks


def _pair_matches(cb: MacCodebook, s1, s2, y, eps, keep1, keep2, limit):
    """(m1, m2) pairs among the surviving messages whose codewords are typical with (q, s1, s2, y)."""
    n = cb.n
    base = flat_index([cb.q, s1, s2], cb.shape[:3])
    nx1, nx2, ny = cb.shape[3:]
    x1, x2 = cb.codewords(1, s1)[keep1], cb.codewords(2, s2)[keep2]
    m2 = len(keep2)
    found = []
    step = max(1, CHUNK_CELLS // (m2 * n))
    for lo in range(0, len(x1), step):
        a = x1[lo:lo + step]
        cells = ((base * nx1 + a[:, None, :]) * nx2 + x2[None, :, :]) * ny + y
        mask = typical_rows(cells.reshape(-1, n), cb.probs, eps)
        for k in np.flatnonzero(mask):
            found.append((int(keep1[lo + int(k) // m2]), int(keep2[int(k) % m2])))
            if len(found) >= limit:
                return found
    return found


def mac_caseC_decode(cb: MacCodebook, y, eps: float, eps1: float,
                     budget: int = DEFAULT_ENUM_BUDGET) -> DecodeResult:
    """Unique (w1, w2, s1^n, s2^n) jointly typical with y^n, searched exhaustively."""
    y = as_array(y)
    hosts = _host_candidates(cb, eps1, budget)
    if len(hosts) == 0:
        return DecodeResult(NONE)
    cells = flat_index([cb.q, hosts[:, :, 0], hosts[:, :, 1], y], cb.shape[:3] + cb.shape[5:])
    hosts = hosts[typical_rows(cells, cb.qssy, eps)]
    mask1, mask2 = _marginal_masks(cb, hosts, y, eps)
    hit = None
    for t in np.flatnonzero(mask1.any(axis=1) & mask2.any(axis=1)):
        s1, s2 = hosts[t, :, 0], hosts[t, :, 1]
        found = _pair_matches(cb, s1, s2, y, eps, np.flatnonzero(mask1[t]), np.flatnonzero(mask2[t]),
                              2 if hit is None else 1)
        if len(found) + (hit is not None) > 1:
            return DecodeResult(AMBIGUOUS)
        if found:
            hit = (found[0], (s1.copy(), s2.copy()))
    if hit is None:
        return DecodeResult(NONE)
    return DecodeResult(OK, hit[0], hit[1])
