"""Monte Carlo driver: fresh hosts, messages and noise per trial, fixed codebooks."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from ..regions.problems import BcFeasibleTuple, BcProblem, MacFeasibleTuple, MacProblem
from ..typicality import DEFAULT_ENUM_BUDGET, flat_index, typical_rows
from .bc import (BcBinnedCodebook, BcSuperpositionCodebook, bc_caseB_decode1, bc_caseB_decode2,
                 bc_caseB_encode, bc_caseC_decode1, bc_caseC_decode2, bc_caseC_encode)
from .common import DecodeResult, check_budget, message_count, sample_channel
from .mac import MacCodebook, mac_caseC_decode, mac_caseC_encode
from .rng import Role, draw_rows, stream

ERROR_CLASSES = ("encoding_failure", "decode_failure", "ambiguity", "message_error", "host_error")
SCHEMES = ("mac-C", "bc-B'", "bc-C'")
_SCHEME_ALIASES = {"mac-c": "mac-C", "mac_c": "mac-C", "c": "mac-C",
                   "bc-b'": "bc-B'", "bc-bp": "bc-B'", "bc_b": "bc-B'", "b'": "bc-B'", "bp": "bc-B'",
                   "bc-c'": "bc-C'", "bc-cp": "bc-C'", "bc_c": "bc-C'", "c'": "bc-C'", "cp": "bc-C'",
                   "bc-d'": "bc-C'", "bc-dp": "bc-C'", "d'": "bc-C'", "dp": "bc-C'"}
TRIAL_BLOCK = 8


@dataclass(frozen=True)
class SimConfig:
    n: int
    r1: float
    r2: float
    eps: float = 0.1
    eps1: float = 0.05
    trials: int = 100
    seed: int = 0
    decode_budget: int = DEFAULT_ENUM_BUDGET
    workers: int | None = None
    record: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("blocklength n must be >= 1")
        if self.trials < 1:
            raise ValidationError("need at least one trial")
        if not 0 < self.eps1 < self.eps:
            raise ValidationError(f"need 0 < eps1 < eps, got eps={self.eps}, eps1={self.eps1}")
        message_count(self.n, self.r1)
        message_count(self.n, self.r2)

    @property
    def m1(self) -> int:
        return message_count(self.n, self.r1)

    @property
    def m2(self) -> int:
        return message_count(self.n, self.r2)

    def worker_count(self) -> int:
        if self.workers is not None:
            return max(1, int(self.workers))
        return max(1, int(os.environ.get("EMBEDCAP_THREADS", "1") or 1))


@dataclass(frozen=True, eq=False)
class TrialRecord:
    """Everything one trial saw; kept only when ``SimConfig.record`` is set."""

    index: int
    hosts: tuple
    messages: tuple
    inputs: tuple
    outputs: tuple
    decoded: tuple
    error: str | None
    distortion: tuple
    typical_encoding: tuple


@dataclass(frozen=True)
class SimReport:
    scheme: str
    n: int
    m1: int
    m2: int
    seed: int
    eps: float
    eps1: float
    trials_run: int
    errors: int
    empirical_error: float
    error_breakdown: dict
    avg_distortion: tuple
    records: tuple = field(default=(), compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme, "n": self.n, "M1": self.m1, "M2": self.m2, "seed": self.seed,
            "eps": self.eps, "eps1": self.eps1, "trials_run": self.trials_run, "errors": self.errors,
            "empirical_error": self.empirical_error, "error_breakdown": dict(self.error_breakdown),
            "avg_distortion": list(self.avg_distortion),
        }


def normalize_scheme(tag: str) -> str:
    if tag in SCHEMES:
        return tag
    out = _SCHEME_ALIASES.get(str(tag).strip().lower().replace("′", "'"))
    if out is None:
        raise ValidationError(f"unknown scheme {tag!r}; expected one of {SCHEMES}")
    return out


def scheme_for(problem) -> str:
    """Scheme that matches the problem's case; MAC cases A and B have none."""
    if isinstance(problem, MacProblem):
        if problem.case != "C":
            raise ValidationError(f"no coding scheme for MAC case {problem.case} (only case C)")
        return "mac-C"
    if problem.case == "B'":
        return "bc-B'"
    if problem.case in ("C'", "D'"):
        return "bc-C'"
    raise ValidationError(f"no coding scheme for BC case {problem.case}")


def _classify(checks) -> str | None:
    """First error class in priority order; ``checks`` is a list of (result, messages, host)."""
    statuses = [r.status for r, _, _ in checks]
    if "ambiguous" in statuses:
        return "ambiguity"
    if "none" in statuses:
        return "decode_failure"
    for r, msgs, _ in checks:
        if r.messages != msgs:
            return "message_error"
    for r, _, host in checks:
        if host is not None and not all(np.array_equal(a, b) for a, b in zip(r.host, host)):
            return "host_error"
    return None


def _typical_pair(s, x, table, eps) -> bool:
    cells = flat_index([s, x], table.shape)
    return bool(typical_rows(cells[None, :], table.ravel(), eps)[0])


def _draw_host(rng, probs, n):
    return draw_rows(rng, np.broadcast_to(probs.ravel(), (n, probs.size)), 1)[0]


class _MacRunner:
    def __init__(self, problem: MacProblem, tup: MacFeasibleTuple, cfg: SimConfig):
        check_budget(problem.s1.size ** cfg.n * problem.s2.size ** cfg.n, cfg.decode_budget,
                     "host-pair enumeration")
        self.p, self.cfg = problem, cfg
        self.cb = MacCodebook(problem, tup, cfg.n, cfg.m1, cfg.m2, cfg.seed)
        j = self.cb.joint
        self.psx = (j.marginal(("S1", "X1")).probs, j.marginal(("S2", "X2")).probs)

    def trial(self, t: int) -> TrialRecord:
        cfg, p, cb = self.cfg, self.p, self.cb
        rng = stream(cfg.seed, Role.TRIAL, t)
        flat = _draw_host(rng, p.host_joint.probs, cfg.n)
        s1, s2 = np.unravel_index(flat, p.host_joint.shape)
        w1, w2 = int(rng.integers(cfg.m1)), int(rng.integers(cfg.m2))
        x1, x2 = mac_caseC_encode(cb, 1, s1, w1), mac_caseC_encode(cb, 2, s2, w2)
        y = sample_channel(p.channel, (x1, s1, x2, s2), rng).symbols
        dec = mac_caseC_decode(cb, y, cfg.eps, cfg.eps1, cfg.decode_budget)
        err = _classify([(dec, (w1, w2), (s1, s2))])
        dist = (float(p.d1.table[s1, x1].mean()), float(p.d2.table[s2, x2].mean()))
        typ = (_typical_pair(s1, x1, self.psx[0], cfg.eps), _typical_pair(s2, x2, self.psx[1], cfg.eps))
        return TrialRecord(t, (s1, s2), (w1, w2), (x1, x2), (y,), (dec,), err, dist, typ)


class _BcRunner:
    def __init__(self, problem: BcProblem, tup: BcFeasibleTuple, cfg: SimConfig, scheme: str):
        check_budget(problem.s.size ** cfg.n, cfg.decode_budget, "host enumeration")
        self.p, self.cfg, self.scheme = problem, cfg, scheme
        if scheme == "bc-B'":
            self.cb = BcBinnedCodebook(problem, tup, cfg.n, cfg.m1, cfg.m2, cfg.seed, cfg.eps,
                                       cfg.decode_budget)
        else:
            self.cb = BcSuperpositionCodebook(problem, tup, cfg.n, cfg.m1, cfg.m2, cfg.seed)
        self.psx = self.cb.t["sx"].reshape(self.cb.ns, self.cb.nx)

    def trial(self, t: int) -> TrialRecord:
        cfg, p, cb = self.cfg, self.p, self.cb
        rng = stream(cfg.seed, Role.TRIAL, t)
        s = _draw_host(rng, p.host.probs, cfg.n)
        w1, w2 = int(rng.integers(cfg.m1)), int(rng.integers(cfg.m2))
        failed = False
        if self.scheme == "bc-B'":
            x, u = bc_caseB_encode(cb, s, w1, w2, cfg.eps)
            failed = u is None
        else:
            x = bc_caseC_encode(cb, s, w1, w2)
        y = sample_channel(p.forward, (x, s), rng).symbols
        z = sample_channel(p.degrade, (y,), rng).symbols
        if self.scheme == "bc-B'":
            d1 = bc_caseB_decode1(cb, y, cfg.eps, cfg.decode_budget)
            d2 = bc_caseB_decode2(cb, z, cfg.eps)
            checks = [(d1, (w1, w2), (s,)), (d2, (w2,), None)]
        else:
            d1 = bc_caseC_decode1(cb, y, cfg.eps, cfg.eps1, cfg.decode_budget)
            d2 = bc_caseC_decode2(cb, z, cfg.eps, cfg.eps1, cfg.decode_budget)
            checks = [(d1, (w1, w2), (s,)), (d2, (w2,), (s,))]
        err = "encoding_failure" if failed else _classify(checks)
        dist = (float(p.d.table[s, x].mean()),)
        typ = (not failed and _typical_pair(s, x, self.psx, cfg.eps),)
        return TrialRecord(t, (s,), (w1, w2), (x,), (y, z), (d1, d2), err, dist, typ)


def build_runner(problem, scheme: str, tup, cfg: SimConfig):
    """The codebook-holding object that runs single trials (exposed for oracle tests)."""
    scheme = normalize_scheme(scheme)
    expected = scheme_for(problem)
    if scheme != expected:
        raise ValidationError(f"scheme {scheme} does not match problem case {problem.case} ({expected})")
    if scheme == "mac-C":
        if not isinstance(tup, MacFeasibleTuple):
            raise ValidationError("the MAC scheme needs a MacFeasibleTuple")
        return _MacRunner(problem, tup, cfg)
    if not isinstance(tup, BcFeasibleTuple):
        raise ValidationError("BC schemes need a BcFeasibleTuple")
    return _BcRunner(problem, tup, cfg, scheme)


def simulate(problem, scheme: str, tup, cfg: SimConfig) -> SimReport:
    """Run ``cfg.trials`` independent trials; the result does not depend on thread count."""
    runner = build_runner(problem, scheme, tup, cfg)
    blocks = [range(lo, min(lo + TRIAL_BLOCK, cfg.trials)) for lo in range(0, cfg.trials, TRIAL_BLOCK)]

    def run(block):
        return [runner.trial(t) for t in block]

    workers = min(cfg.worker_count(), len(blocks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run, blocks))
    else:
        chunks = [run(b) for b in blocks]
    records = [r for chunk in chunks for r in chunk]
    breakdown = {c: 0 for c in ERROR_CLASSES}
    for r in records:
        if r.error is not None:
            breakdown[r.error] += 1
    errors = sum(breakdown.values())
    dist = np.array([r.distortion for r in records]).mean(axis=0)
    return SimReport(
        scheme=normalize_scheme(scheme), n=cfg.n, m1=cfg.m1, m2=cfg.m2, seed=cfg.seed,
        eps=cfg.eps, eps1=cfg.eps1, trials_run=len(records), errors=errors,
        empirical_error=errors / len(records), error_breakdown=breakdown,
        avg_distortion=tuple(float(v) for v in dist),
        records=tuple(records) if cfg.record else (),
    )
