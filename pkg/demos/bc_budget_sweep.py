"""Weak-receiver capacity of the degraded-BC adder as the distortion budget grows.

For each budget the script reports the largest r2 (support value at
lambda = 0) of the host-recovering region, next to the single-user
capacities with and without host recovery over the strong channel.

    python3 demos/bc_budget_sweep.py
"""

from pathlib import Path

import numpy as np

from embedcap.errors import InfeasibleProblem
from embedcap.regions import compute_region, irreversible_capacity, reversible_capacity, support_function
from embedcap.specfile import parse_spec

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main():
    sf = parse_spec(FIXTURES / "bc_adder.toml")
    p, cfg = sf.problem, sf.search_config()
    print(f"{'delta':>6} {'max r2':>8} {'rev cap':>8} {'irrev cap':>9}")
    for delta in np.linspace(0.0, 0.5, 6):
        q = p.with_budget(float(delta))
        try:
            region = compute_region(q, cfg)
            r2 = 0.0 if region.empty else support_function(region, 0.0)
        except InfeasibleProblem:
            print(f"{delta:6.2f}  infeasible")
            continue
        rev = reversible_capacity(q.host, q.forward, q.d, q.delta, cfg)
        irr = irreversible_capacity(q.host, q.forward, q.d, q.delta, cfg)
        print(f"{delta:6.2f} {r2:8.4f} {rev:8.4f} {irr:9.4f}")


if __name__ == "__main__":
    main()
