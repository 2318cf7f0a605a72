"""Fixed-format serialisation of regions and reports."""

from __future__ import annotations

import csv
import io
import math
from decimal import ROUND_HALF_EVEN, Decimal

import numpy as np

from .regions.region import RateRegion

CSV_HEADER = ("kind", "lambda", "r1", "r2")
_QUANT = Decimal("0.000001")


def fmt6(x: float) -> str:
    """Six decimals, round half to even on the exact binary value, no negative zero."""
    if not math.isfinite(x):
        raise ValueError(f"cannot format non-finite value {x}")
    out = Decimal(float(x)).quantize(_QUANT, rounding=ROUND_HALF_EVEN)
    if out == 0:
        out = abs(out)
    return f"{out:.6f}"


def region_rows(region: RateRegion):
    """Vertex rows counterclockwise from the origin, then support rows by lambda."""
    rows = [("vertex", "", fmt6(v.r1), fmt6(v.r2)) for v in region.hull_vertices]
    if not region.empty:
        for lam, _ in sorted(region.support_samples):
            p = region.support_point(lam)
            rows.append(("support", fmt6(lam), fmt6(p.r1), fmt6(p.r2)))
    return rows


def region_csv(region: RateRegion) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(region_rows(region))
    return buf.getvalue()


def jsonable(obj):
    """Plain JSON types from numpy scalars/arrays, tuples and dicts (keys become strings)."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items() if not str(k).startswith("_")}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj
