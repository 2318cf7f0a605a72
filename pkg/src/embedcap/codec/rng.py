"""Keyed pseudorandom streams.

Every random object in a simulation (a codebook block, the time-sharing
sequence, one trial's host, messages and channel noise) comes from its own
Philox stream whose key is a hash of ``(seed, role, context...)``.  Draws are
therefore reproducible no matter which thread asks first or how many
codewords have been materialised elsewhere.
"""

from __future__ import annotations

import hashlib
from enum import IntEnum

import numpy as np


class Role(IntEnum):
    TIMESHARE = 1
    CODEWORD = 2
    AUX_POOL = 3
    BINNING = 4
    CLOUD = 5
    TRIAL = 6


def _encode(part) -> bytes:
    if isinstance(part, np.ndarray):
        arr = np.ascontiguousarray(part, dtype=np.int64)
        return b"A" + len(arr.shape).to_bytes(1, "little") + np.array(arr.shape, np.int64).tobytes() \
            + arr.tobytes()
    value = int(part)
    return b"I" + value.to_bytes(16, "little", signed=True)


def stream_key(seed: int, role: Role, *context) -> int:
    h = hashlib.blake2b(digest_size=32)
    for part in (seed, int(role)) + context:
        h.update(_encode(part))
    return int.from_bytes(h.digest(), "little")


def stream(seed: int, role: Role, *context) -> np.random.Generator:
    """Generator for one (seed, role, context) key; context items are ints or int arrays."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(stream_key(seed, role, *context))))


def draw_rows(rng: np.random.Generator, rows: np.ndarray, count: int) -> np.ndarray:
    """``count`` independent sequences whose j-th letter is drawn from ``rows[j]``.

    ``rows`` is (n, k) with each row a pmf; returns an int array (count, n).
    Inverse-CDF sampling never selects a zero-probability symbol.
    """
    rows = np.asarray(rows, dtype=float)
    cum = np.cumsum(rows, axis=1)
    cum[:, -1] = np.inf
    u = rng.random((count, rows.shape[0]))
    return (u[:, :, None] >= cum[None, :, :]).sum(axis=2).astype(np.int64)
