"""Pieces shared by the MAC and BC schemes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import AxisError, BudgetExceeded, ValidationError
from ..prob import Kernel
from ..typicality import Sequence, flat_index
from .rng import draw_rows

# 2^{nR} is rounded up after this slack so that e.g. n=10, R=0.3 gives 8, not 9.
RATE_SLACK = 1e-9

OK, NONE, AMBIGUOUS = "ok", "none", "ambiguous"


def message_count(n: int, rate: float) -> int:
    if rate < 0:
        raise ValidationError(f"rates must be non-negative, got {rate}")
    return max(1, math.ceil(2.0 ** (n * rate) - RATE_SLACK))


def check_budget(count: int, budget: int, what: str):
    if count > budget:
        raise BudgetExceeded(f"{what} needs {count} candidates, budget is {budget}")


def as_array(seq) -> np.ndarray:
    if isinstance(seq, Sequence):
        return seq.symbols
    return np.asarray(seq, dtype=np.int64).ravel()


def conditional_rows(table: np.ndarray) -> np.ndarray:
    """Normalise the last axis of a joint table; rows with no mass become uniform.

    Uniform rows belong to input letters of probability zero; they are only
    reached by codeword blocks that no typical candidate will ever use.
    """
    table = np.asarray(table, dtype=float)
    tot = table.sum(axis=-1, keepdims=True)
    uniform = np.full_like(table, 1.0 / table.shape[-1])
    return np.where(tot > 0, table / np.where(tot > 0, tot, 1.0), uniform)


@dataclass(frozen=True)
class DecodeResult:
    """Outcome of one decoder.

    ``status`` is ``"ok"``, ``"none"`` (no typical candidate) or
    ``"ambiguous"`` (more than one); ``stage`` says where a two-stage decoder
    stopped.  ``messages`` are 0-based; ``host`` is the recovered host array
    and ``aux`` the decoded auxiliary codeword, when the scheme has them.
    """

    status: str
    messages: tuple | None = None
    host: tuple | None = None
    aux: np.ndarray | None = None
    stage: int = 1

    @property
    def ok(self) -> bool:
        return self.status == OK

    def key(self):
        """Hashable summary used to compare decoders."""
        host = None if self.host is None else tuple(tuple(int(v) for v in h) for h in self.host)
        return (self.status, self.messages, host, self.stage)


def sample_channel(kernel: Kernel, inputs, rng: np.random.Generator) -> Sequence:
    """Pass aligned input sequences through a memoryless kernel with one output axis."""
    if len(kernel.output_axes) != 1:
        raise AxisError("sample_channel needs a kernel with a single output axis")
    arrays = [as_array(s) for s in inputs]
    if len(arrays) != len(kernel.input_axes):
        raise AxisError(f"{len(arrays)} inputs for a kernel over {kernel.input_names}")
    if len({a.size for a in arrays}) != 1:
        raise ValidationError("input sequences must have equal length")
    idx = flat_index(arrays, [a.size for a in kernel.input_axes])
    out = draw_rows(rng, kernel.rows()[idx], 1)[0]
    return Sequence(kernel.output_axes[0], out)
