"""Monte Carlo runs of the MAC scheme at rates inside and outside the region.

Takes the tuple attaining the inner region's support point at lambda = 1/2,
backs off (or pushes out) both rates by 0.15 bit and simulates n = 10 codes.

    python3 demos/simulate_inside_outside.py
"""

from pathlib import Path

from embedcap.codec import SimConfig, simulate
from embedcap.regions import build_family, compute_region
from embedcap.specfile import parse_spec

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main():
    sf = parse_spec(FIXTURES / "mac_adder.toml")
    p, cfg = sf.problem, sf.search_config()
    region = compute_region(p, cfg)
    point = region.support_point(0.5)
    theta = region.info["vertex_params"][region.hull_vertices.index(point)]
    tup = build_family(p, "inner", cfg).to_tuple(theta)
    print(f"support point at lambda=1/2: ({point.r1:.3f}, {point.r2:.3f})")
    sim = {k: v for k, v in sf.sim.items() if k != "lambda"}
    sim.update(n=10, trials=200, workers=4)
    for label, shift in (("inside", -0.15), ("outside", 0.15)):
        r1, r2 = max(point.r1 + shift, 0.0), max(point.r2 + shift, 0.0)
        rep = simulate(p, "mac-C", tup, SimConfig(r1=r1, r2=r2, **sim))
        print(f"{label:8s} rates ({r1:.3f}, {r2:.3f}) M=({rep.m1}, {rep.m2}) "
              f"error {rep.empirical_error:.3f} {rep.error_breakdown}")


if __name__ == "__main__":
    main()
