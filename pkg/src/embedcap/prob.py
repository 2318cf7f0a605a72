"""Finite-alphabet probability tables and information measures.

Every quantity is in bits.  Tables are dense numpy arrays, one array axis per
named alphabet, and are frozen after construction so instances can be shared
freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import AxisError, ValidationError

NORM_TOL = 1e-9
MAX_CELLS = 10**7


@dataclass(frozen=True)
class Alphabet:
    name: str
    size: int

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ValidationError("alphabet name must be a non-empty string")
        if int(self.size) != self.size or self.size < 1:
            raise ValidationError(f"alphabet {self.name!r}: size must be a positive integer")
        object.__setattr__(self, "size", int(self.size))


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


def _names(axes):
    return tuple(a.name for a in axes)


def _as_names(spec) -> tuple[str, ...]:
    if spec is None:
        return ()
    if isinstance(spec, str):
        return (spec,)
    if isinstance(spec, Alphabet):
        return (spec.name,)
    return tuple(a.name if isinstance(a, Alphabet) else a for a in spec)


def _check_axes(axes):
    names = _names(axes)
    if len(set(names)) != len(names):
        raise AxisError(f"duplicate axis names in {names}")
    cells = int(np.prod([a.size for a in axes], dtype=object)) if axes else 1
    if cells > MAX_CELLS:
        raise ValidationError(f"table over {names} has {cells} cells, above the limit of {MAX_CELLS}")


def _h(p):
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


class JointPmf:
    """Joint pmf over an ordered tuple of named alphabets."""

    __slots__ = ("axes", "probs")

    def __init__(self, axes: Sequence[Alphabet], probs, *, normalize: bool = False):
        axes = tuple(axes)
        _check_axes(axes)
        shape = tuple(a.size for a in axes)
        arr = np.array(probs, dtype=float)
        if arr.size != int(np.prod(shape, dtype=np.int64)):
            raise ValidationError(f"table has {arr.size} entries, axes {_names(axes)} need {shape}")
        arr = arr.reshape(shape)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValidationError(f"pmf over {_names(axes)} has negative or non-finite entries")
        total = arr.sum()
        if normalize:
            if total <= 0:
                raise ValidationError("cannot normalize a table with zero mass")
            arr = arr / total
        elif abs(total - 1.0) > NORM_TOL:
            raise ValidationError(f"pmf over {_names(axes)} sums to {float(total):.12g}, not 1")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", _frozen(arr))

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __repr__(self):
        return f"{type(self).__name__}(axes={self.names}, shape={self.probs.shape})"

    def __eq__(self, other):
        return (
            isinstance(other, JointPmf)
            and self.axes == other.axes
            and np.array_equal(self.probs, other.probs)
        )

    __hash__ = None

    @property
    def names(self) -> tuple[str, ...]:
        return _names(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.probs.shape

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise AxisError(f"unknown axis {name!r}; have {self.names}") from None

    def axis_alphabet(self, name: str) -> Alphabet:
        return self.axes[self.axis(name)]

    def marginal(self, keep) -> "JointPmf":
        return marginalize(self, keep)

    def transpose(self, order) -> "JointPmf":
        order = _as_names(order)
        if sorted(order) != sorted(self.names):
            raise AxisError(f"{order} is not a permutation of {self.names}")
        idx = [self.axis(n) for n in order]
        return JointPmf([self.axes[i] for i in idx], np.transpose(self.probs, idx))

    def allclose(self, other: "JointPmf", atol: float = 1e-12) -> bool:
        if sorted(self.names) != sorted(other.names):
            return False
        other = other.transpose(self.names)
        return self.axes == other.axes and np.allclose(self.probs, other.probs, rtol=0, atol=atol)


class Pmf(JointPmf):
    """Pmf over a single alphabet."""

    __slots__ = ()

    def __init__(self, alphabet: Alphabet, probs, *, normalize: bool = False):
        super().__init__((alphabet,), np.ravel(probs), normalize=normalize)

    @property
    def alphabet(self) -> Alphabet:
        return self.axes[0]

    @classmethod
    def uniform(cls, alphabet: Alphabet) -> "Pmf":
        return cls(alphabet, np.full(alphabet.size, 1.0 / alphabet.size))

    @classmethod
    def point(cls, alphabet: Alphabet, symbol: int) -> "Pmf":
        p = np.zeros(alphabet.size)
        p[symbol] = 1.0
        return cls(alphabet, p)


class Kernel:
    """Conditional pmf p(outputs | inputs).

    The table is indexed ``probs[*inputs, *outputs]``; every slice obtained by
    fixing the inputs is a pmf.
    """

    __slots__ = ("input_axes", "output_axes", "probs")

    def __init__(self, input_axes: Sequence[Alphabet], output_axes: Sequence[Alphabet], probs,
                 *, normalize: bool = False):
        input_axes, output_axes = tuple(input_axes), tuple(output_axes)
        if not output_axes:
            raise AxisError("kernel needs at least one output axis")
        _check_axes(input_axes + output_axes)
        in_shape = tuple(a.size for a in input_axes)
        out_shape = tuple(a.size for a in output_axes)
        arr = np.array(probs, dtype=float)
        if arr.size != int(np.prod(in_shape + out_shape, dtype=np.int64)):
            raise ValidationError(
                f"kernel table has {arr.size} entries, expected shape {in_shape + out_shape}")
        arr = arr.reshape(in_shape + out_shape)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValidationError("kernel has negative or non-finite entries")
        out_dims = tuple(range(len(in_shape), arr.ndim))
        rows = arr.sum(axis=out_dims)
        if normalize:
            if np.any(rows <= 0):
                raise ValidationError("cannot normalize a kernel row with zero mass")
            arr = arr / np.expand_dims(rows, out_dims)
        elif np.any(np.abs(rows - 1.0) > NORM_TOL):
            worst = float(np.max(np.abs(rows - 1.0)))
            raise ValidationError(
                f"kernel {_names(input_axes)} -> {_names(output_axes)} has a row off by {worst:.3g}")
        object.__setattr__(self, "input_axes", input_axes)
        object.__setattr__(self, "output_axes", output_axes)
        object.__setattr__(self, "probs", _frozen(arr))

    def __setattr__(self, name, value):
        raise AttributeError("Kernel is immutable")

    def __repr__(self):
        return f"Kernel({self.input_names} -> {self.output_names})"

    def __eq__(self, other):
        return (
            isinstance(other, Kernel)
            and self.input_axes == other.input_axes
            and self.output_axes == other.output_axes
            and np.array_equal(self.probs, other.probs)
        )

    __hash__ = None

    @property
    def input_names(self) -> tuple[str, ...]:
        return _names(self.input_axes)

    @property
    def output_names(self) -> tuple[str, ...]:
        return _names(self.output_axes)

    @classmethod
    def deterministic(cls, input_axes, output_axes, fn) -> "Kernel":
        """Kernel putting all mass on ``fn(*inputs)`` (a tuple of output symbols)."""
        input_axes, output_axes = tuple(input_axes), tuple(output_axes)
        shape = tuple(a.size for a in input_axes) + tuple(a.size for a in output_axes)
        arr = np.zeros(shape)
        for idx in np.ndindex(*(a.size for a in input_axes)):
            out = fn(*idx)
            if not isinstance(out, tuple):
                out = (out,)
            arr[idx + out] = 1.0
        return cls(input_axes, output_axes, arr)

    def rows(self) -> np.ndarray:
        """Conditional table flattened to ``(prod inputs, prod outputs)``."""
        n_in = int(np.prod([a.size for a in self.input_axes], dtype=np.int64))
        return self.probs.reshape(n_in, -1)


@dataclass(frozen=True, eq=False)
class DistortionMeasure:
    host_alphabet: Alphabet
    embed_alphabet: Alphabet
    table: np.ndarray

    def __post_init__(self):
        shape = (self.host_alphabet.size, self.embed_alphabet.size)
        arr = np.array(self.table, dtype=float)
        if arr.size != shape[0] * shape[1]:
            raise ValidationError(f"distortion table needs shape {shape}, got {arr.size} entries")
        arr = arr.reshape(shape)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValidationError("distortion entries must be finite and non-negative")
        object.__setattr__(self, "table", _frozen(arr))

    @property
    def d_max(self) -> float:
        return float(self.table.max())

    @classmethod
    def hamming(cls, host: Alphabet, embed: Alphabet) -> "DistortionMeasure":
        s, x = np.indices((host.size, embed.size))
        return cls(host, embed, (s != x).astype(float))

    def min_expected(self, host: Pmf) -> float:
        """Smallest achievable E d(S, X): pick the cheapest symbol for every host value."""
        return float(np.dot(host.probs, self.table.min(axis=1)))

    def __eq__(self, other):
        return (
            isinstance(other, DistortionMeasure)
            and self.host_alphabet == other.host_alphabet
            and self.embed_alphabet == other.embed_alphabet
            and np.array_equal(self.table, other.table)
        )


def product(*pmfs: JointPmf) -> JointPmf:
    """Joint of independent components."""
    axes = tuple(a for p in pmfs for a in p.axes)
    arr = np.ones(())
    for p in pmfs:
        arr = np.multiply.outer(arr, p.probs)
    return JointPmf(axes, arr)


def marginalize(joint: JointPmf, keep) -> JointPmf:
    """Sum out every axis not in ``keep``; the result follows the order of ``keep``."""
    keep = _as_names(keep)
    if len(set(keep)) != len(keep):
        raise AxisError(f"duplicate axes in {keep}")
    idx = [joint.axis(n) for n in keep]
    drop = tuple(i for i in range(len(joint.axes)) if i not in idx)
    arr = joint.probs.sum(axis=drop) if drop else joint.probs
    remaining = [i for i in range(len(joint.axes)) if i in idx]
    order = [remaining.index(i) for i in idx]
    arr = np.transpose(arr, order)
    return JointPmf([joint.axes[i] for i in idx], arr)


def chain(joint: JointPmf, kernel: Kernel) -> JointPmf:
    """Extend ``joint`` by the kernel outputs: p(a, o) = p(a) p(o | a_in)."""
    for a in kernel.input_axes:
        if joint.axis_alphabet(a.name) != a:
            raise AxisError(f"kernel input {a} does not match joint axis {joint.axis_alphabet(a.name)}")
    clash = set(kernel.output_names) & set(joint.names)
    if clash:
        raise AxisError(f"kernel outputs {sorted(clash)} already present in joint")
    in_pos = [joint.axis(n) for n in kernel.input_names]
    order = sorted(range(len(in_pos)), key=lambda k: in_pos[k])
    k_arr = np.transpose(kernel.probs, order + list(range(len(in_pos), kernel.probs.ndim)))
    present = sorted(in_pos)
    shape = [joint.shape[i] if i in present else 1 for i in range(len(joint.axes))]
    shape += [a.size for a in kernel.output_axes]
    k_arr = k_arr.reshape(shape)
    arr = joint.probs.reshape(joint.shape + (1,) * len(kernel.output_axes)) * k_arr
    return JointPmf(joint.axes + kernel.output_axes, arr)


def entropy(p: JointPmf, axes=None) -> float:
    """Entropy of ``p`` (or of its marginal over ``axes``), in bits."""
    if axes is not None:
        p = marginalize(p, axes)
    return _h(p.probs)


def conditional_entropy(joint: JointPmf, a, given=None) -> float:
    a, given = _as_names(a), _as_names(given)
    _disjoint(joint, a, given)
    return entropy(joint, a + given) - (entropy(joint, given) if given else 0.0)


def _disjoint(joint, *groups):
    seen = set()
    for g in groups:
        for n in g:
            joint.axis(n)
            if n in seen:
                raise AxisError(f"axis {n!r} appears in more than one group")
            seen.add(n)


def _default_groups(joint, groups, count):
    if all(g is None for g in groups):
        if len(joint.axes) != count:
            raise AxisError(
                f"joint has {len(joint.axes)} axes; designate the {count} groups explicitly")
        return tuple((n,) for n in joint.names)
    if any(g is None for g in groups):
        raise AxisError("either designate every axis group or none")
    out = tuple(_as_names(g) for g in groups)
    if any(not g for g in out):
        raise AxisError("axis groups must be non-empty")
    return out


def mutual_information(joint: JointPmf, a=None, b=None) -> float:
    """I(A;B) = H(A) + H(B) - H(A,B), clamped at zero.

    ``a`` and ``b`` name one axis or a sequence of axes.  When both are omitted
    the joint must have exactly two axes.
    """
    a, b = _default_groups(joint, (a, b), 2)
    _disjoint(joint, a, b)
    value = entropy(joint, a) + entropy(joint, b) - entropy(joint, a + b)
    return max(value, 0.0)


def conditional_mutual_information(joint: JointPmf, a=None, b=None, c=None) -> float:
    """I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C), clamped at zero."""
    a, b, c = _default_groups(joint, (a, b, c), 3)
    _disjoint(joint, a, b, c)
    value = (entropy(joint, a + c) + entropy(joint, b + c)
             - entropy(joint, a + b + c) - entropy(joint, c))
    return max(value, 0.0)


def expected_distortion(joint: JointPmf, d: DistortionMeasure, host=None, embed=None) -> float:
    """E d(S, X) under the (S, X) marginal of ``joint``."""
    host = host or d.host_alphabet.name
    embed = embed or d.embed_alphabet.name
    if joint.axis_alphabet(host).size != d.host_alphabet.size or \
            joint.axis_alphabet(embed).size != d.embed_alphabet.size:
        raise AxisError(f"distortion table {d.table.shape} does not fit axes ({host}, {embed})")
    sx = marginalize(joint, (host, embed)).probs
    return float(np.sum(sx * d.table))


def iter_cells(axes: Iterable[Alphabet]):
    return np.ndindex(*(a.size for a in axes))
