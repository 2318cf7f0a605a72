"""Problem instances and feasible auxiliary tuples for MAC and degraded-BC embedding.

Axis names are fixed by role: a MAC instance lives on S1, S2, X1, X2, Y (plus
Q, U1, U2 in tuples); a BC instance on S, X, Y, Z (plus the auxiliaries U, V,
W).  Tables passed in with another axis order are transposed on construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import AxisError, InfeasibleTuple, ValidationError
from ..prob import (Alphabet, DistortionMeasure, JointPmf, Kernel, Pmf, chain,
                    expected_distortion, product)

DISTORTION_SLACK = 1e-9

MAC_CASES = ("A", "B", "C")
BC_CASES = ("A'", "B'", "C'", "D'")
BC_AUX = ("U", "V", "W")

_CASE_ALIASES = {"Ap": "A'", "Bp": "B'", "Cp": "C'", "Dp": "D'",
                 "A′": "A'", "B′": "B'", "C′": "C'", "D′": "D'"}


def normalize_case(case: str) -> str:
    case = str(case).strip()
    return _CASE_ALIASES.get(case, case)


def _reorder_kernel(kernel: Kernel, inputs, outputs) -> Kernel:
    """Return ``kernel`` with axes in the given name order."""
    if kernel.input_names == tuple(inputs) and kernel.output_names == tuple(outputs):
        return kernel
    if sorted(kernel.input_names) != sorted(inputs) or sorted(kernel.output_names) != sorted(outputs):
        raise AxisError(f"kernel {kernel.input_names}->{kernel.output_names} does not have axes "
                        f"{tuple(inputs)}->{tuple(outputs)}")
    names = kernel.input_names + kernel.output_names
    perm = [names.index(n) for n in tuple(inputs) + tuple(outputs)]
    axes = kernel.input_axes + kernel.output_axes
    return Kernel([axes[names.index(n)] for n in inputs], [axes[names.index(n)] for n in outputs],
                  np.transpose(kernel.probs, perm))


def _trivial(name):
    return Alphabet(name, 1)


@dataclass(frozen=True, eq=False)
class MacProblem:
    host_joint: JointPmf
    channel: Kernel
    d1: DistortionMeasure
    d2: DistortionMeasure
    delta1: float
    delta2: float
    case: str = "C"

    def __post_init__(self):
        case = normalize_case(self.case)
        if case not in MAC_CASES:
            raise ValidationError(f"unknown MAC case {self.case!r}; expected one of {MAC_CASES}")
        object.__setattr__(self, "case", case)
        host = self.host_joint
        if sorted(host.names) != ["S1", "S2"]:
            raise AxisError(f"MAC host joint must be over (S1, S2), got {host.names}")
        host = host.transpose(("S1", "S2"))
        object.__setattr__(self, "host_joint", host)
        ch = _reorder_kernel(self.channel, ("X1", "S1", "X2", "S2"), ("Y",))
        object.__setattr__(self, "channel", ch)
        for i, d in ((1, self.d1), (2, self.d2)):
            if d.host_alphabet != ch.input_axes[2 * i - 1] or d.embed_alphabet != ch.input_axes[2 * i - 2]:
                raise AxisError(f"distortion d{i} alphabets do not match S{i}, X{i}")
        if host.axis_alphabet("S1") != ch.input_axes[1] or host.axis_alphabet("S2") != ch.input_axes[3]:
            raise AxisError("host alphabets differ from channel host inputs")
        for name in ("delta1", "delta2"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be a finite non-negative number")
            object.__setattr__(self, name, v)

    def alphabet(self, name) -> Alphabet:
        return {a.name: a for a in self.channel.input_axes + self.channel.output_axes}[name]

    @property
    def s1(self):
        return self.alphabet("S1")

    @property
    def s2(self):
        return self.alphabet("S2")

    @property
    def x1(self):
        return self.alphabet("X1")

    @property
    def x2(self):
        return self.alphabet("X2")

    @property
    def y(self):
        return self.alphabet("Y")

    def with_budget(self, delta1, delta2) -> "MacProblem":
        return MacProblem(self.host_joint, self.channel, self.d1, self.d2, delta1, delta2, self.case)

    def with_case(self, case) -> "MacProblem":
        return MacProblem(self.host_joint, self.channel, self.d1, self.d2, self.delta1, self.delta2, case)


@dataclass(frozen=True, eq=False)
class BcProblem:
    host: Pmf
    forward: Kernel
    degrade: Kernel
    d: DistortionMeasure
    delta: float
    case: str = "C'"

    def __post_init__(self):
        case = normalize_case(self.case)
        if case not in BC_CASES:
            raise ValidationError(f"unknown BC case {self.case!r}; expected one of {BC_CASES}")
        object.__setattr__(self, "case", case)
        if self.host.names != ("S",):
            raise AxisError(f"BC host must be a pmf over S, got {self.host.names}")
        fw = _reorder_kernel(self.forward, ("X", "S"), ("Y",))
        dg = _reorder_kernel(self.degrade, ("Y",), ("Z",))
        object.__setattr__(self, "forward", fw)
        object.__setattr__(self, "degrade", dg)
        if fw.input_axes[1] != self.host.alphabet:
            raise AxisError("host alphabet differs from the channel's S input")
        if dg.input_axes[0] != fw.output_axes[0]:
            raise AxisError("degrading kernel input must be the forward channel output Y")
        if self.d.host_alphabet != self.host.alphabet or self.d.embed_alphabet != fw.input_axes[0]:
            raise AxisError("distortion alphabets do not match S, X")
        v = float(self.delta)
        if not np.isfinite(v) or v < 0:
            raise ValidationError("delta must be a finite non-negative number")
        object.__setattr__(self, "delta", v)

    @property
    def s(self):
        return self.host.alphabet

    @property
    def x(self):
        return self.forward.input_axes[0]

    @property
    def y(self):
        return self.forward.output_axes[0]

    @property
    def z(self):
        return self.degrade.output_axes[0]

    def with_budget(self, delta) -> "BcProblem":
        return BcProblem(self.host, self.forward, self.degrade, self.d, delta, self.case)

    def with_case(self, case) -> "BcProblem":
        return BcProblem(self.host, self.forward, self.degrade, self.d, self.delta, case)


@dataclass(frozen=True, eq=False)
class MacFeasibleTuple:
    """Time-sharing pmf plus either two separate encoders or one joint encoder.

    ``enc1``/``enc2`` are kernels (S_i, Q) -> (U_i, X_i) for the inner sets;
    ``joint_enc`` is (S1, S2, Q) -> (X1, X2) for the outer set.  Missing Q or
    U axes are filled in as size-one alphabets.
    """

    q: Pmf | None = None
    enc1: Kernel | None = None
    enc2: Kernel | None = None
    joint_enc: Kernel | None = None

    def __post_init__(self):
        q = self.q if self.q is not None else Pmf.point(_trivial("Q"), 0)
        if q.names != ("Q",):
            raise AxisError("time-sharing pmf must be over an axis named Q")
        object.__setattr__(self, "q", q)
        if self.joint_enc is not None:
            if self.enc1 is not None or self.enc2 is not None:
                raise ValidationError("give either enc1/enc2 or joint_enc, not both")
            object.__setattr__(self, "joint_enc", _with_q(self.joint_enc, ("S1", "S2"), ("X1", "X2"), q))
        else:
            if self.enc1 is None or self.enc2 is None:
                raise ValidationError("inner tuples need both enc1 and enc2")
            object.__setattr__(self, "enc1", _with_q(self.enc1, ("S1",), ("U1", "X1"), q))
            object.__setattr__(self, "enc2", _with_q(self.enc2, ("S2",), ("U2", "X2"), q))

    @property
    def is_outer(self) -> bool:
        return self.joint_enc is not None

    @classmethod
    def from_conditionals(cls, px1_s1, px2_s2, s1=None, s2=None, x1=None, x2=None):
        """Case C style tuple from plain tables p(x1|s1), p(x2|s2) (no Q, no U)."""
        px1_s1, px2_s2 = np.asarray(px1_s1, float), np.asarray(px2_s2, float)
        s1 = s1 or Alphabet("S1", px1_s1.shape[0])
        x1 = x1 or Alphabet("X1", px1_s1.shape[1])
        s2 = s2 or Alphabet("S2", px2_s2.shape[0])
        x2 = x2 or Alphabet("X2", px2_s2.shape[1])
        return cls(enc1=Kernel([s1], [x1], px1_s1), enc2=Kernel([s2], [x2], px2_s2))


def _with_q(kernel: Kernel, hosts, outs, q: Pmf) -> Kernel:
    """Canonicalise an encoder to inputs (*hosts, Q) and outputs ``outs``."""
    in_names = kernel.input_names
    out_names = kernel.output_names
    if not set(hosts) <= set(in_names) or not set(in_names) <= set(hosts) | {"Q"}:
        raise AxisError(f"encoder inputs {in_names} must be {hosts} plus optionally Q")
    if not set(out_names) <= set(outs) or outs[-1] not in out_names:
        raise AxisError(f"encoder outputs {out_names} must be among {outs} and include {outs[-1]}")
    axes = {a.name: a for a in kernel.input_axes + kernel.output_axes}
    arr = kernel.probs
    names = list(in_names + out_names)
    if "Q" not in in_names:
        arr = arr[..., None]
        names.append("Q")
        axes["Q"] = _trivial("Q")
    for o in outs:
        if o not in names:
            arr = arr[..., None]
            names.append(o)
            axes[o] = _trivial(o)
    target = list(hosts) + ["Q"] + list(outs)
    arr = np.transpose(arr, [names.index(n) for n in target])
    if axes["Q"].size == 1 and q.alphabet.size > 1:
        arr = np.repeat(arr, q.alphabet.size, axis=len(hosts))
        axes["Q"] = q.alphabet
    if axes["Q"] != q.alphabet:
        raise AxisError(f"encoder Q axis {axes['Q']} does not match time-sharing alphabet {q.alphabet}")
    return Kernel([axes[n] for n in list(hosts) + ["Q"]], [axes[n] for n in outs], arr)


@dataclass(frozen=True, eq=False)
class BcFeasibleTuple:
    """A single encoder kernel S -> (auxiliaries..., X).

    Auxiliary axes are any subset of U, V, W; missing ones are treated as
    size-one (constant) variables by the evaluators.
    """

    aux_enc: Kernel

    def __post_init__(self):
        k = self.aux_enc
        if k.input_names != ("S",):
            raise AxisError(f"aux encoder must be conditioned on S alone, got {k.input_names}")
        outs = k.output_names
        if "X" not in outs or not set(outs) <= set(BC_AUX) | {"X"}:
            raise AxisError(f"aux encoder outputs {outs} must be X plus a subset of {BC_AUX}")
        axes = {a.name: a for a in k.output_axes}
        arr = k.probs
        names = list(outs)
        for aux in BC_AUX:
            if aux not in names:
                arr = arr[..., None]
                names.append(aux)
                axes[aux] = _trivial(aux)
        order = list(BC_AUX) + ["X"]
        arr = np.transpose(arr, [0] + [1 + names.index(n) for n in order])
        object.__setattr__(self, "aux_enc", Kernel(k.input_axes, [axes[n] for n in order], arr))

    @classmethod
    def from_table(cls, table, s: Alphabet, x: Alphabet, aux: dict | None = None):
        """Build from an array indexed [s, *aux (in U, V, W order), x]."""
        aux = aux or {}
        outs = [Alphabet(n, aux[n]) for n in BC_AUX if n in aux] + [x]
        return cls(Kernel([s], outs, table))


def mac_full_joint(problem: MacProblem, tup: MacFeasibleTuple) -> JointPmf:
    """The joint of (Q, S1, S2, U1, X1, U2, X2, Y), or (Q, S1, S2, X1, X2, Y) for outer tuples."""
    base = product(tup.q, problem.host_joint)
    if tup.is_outer:
        joint = chain(base, tup.joint_enc)
    else:
        joint = chain(chain(base, tup.enc1), tup.enc2)
    return chain(joint, problem.channel)


def bc_full_joint(problem: BcProblem, tup: BcFeasibleTuple) -> JointPmf:
    """The joint of (S, U, V, W, X, Y, Z)."""
    return chain(chain(chain(problem.host, tup.aux_enc), problem.forward), problem.degrade)


def mac_distortions(problem: MacProblem, joint: JointPmf) -> tuple[float, float]:
    return (expected_distortion(joint, problem.d1, "S1", "X1"),
            expected_distortion(joint, problem.d2, "S2", "X2"))


def check_mac_feasible(problem: MacProblem, joint: JointPmf) -> tuple[float, float]:
    e1, e2 = mac_distortions(problem, joint)
    if e1 > problem.delta1 + DISTORTION_SLACK or e2 > problem.delta2 + DISTORTION_SLACK:
        raise InfeasibleTuple(
            f"distortions ({e1:.6g}, {e2:.6g}) exceed budgets ({problem.delta1}, {problem.delta2})")
    return e1, e2


def check_bc_feasible(problem: BcProblem, joint: JointPmf) -> float:
    e = expected_distortion(joint, problem.d, "S", "X")
    if e > problem.delta + DISTORTION_SLACK:
        raise InfeasibleTuple(f"distortion {e:.6g} exceeds budget {problem.delta}")
    return e
