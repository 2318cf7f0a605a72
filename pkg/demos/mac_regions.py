"""Inner and outer rate regions of the correlated-host MAC fixture.

Prints the inner-region CSV, then the support values of inner and outer
regions side by side, and the Case B region for comparison.

    python3 demos/mac_regions.py
"""

from pathlib import Path

from embedcap.output import region_csv
from embedcap.regions import compute_region, support_function
from embedcap.specfile import parse_spec

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main():
    sf = parse_spec(FIXTURES / "mac_xor_host.toml")
    cfg = sf.search_config()
    inner = compute_region(sf.problem, cfg, bound="inner")
    outer = compute_region(sf.problem, cfg, bound="outer")
    case_b = compute_region(sf.problem.with_case("B"), cfg)
    print(region_csv(inner))
    print(f"{'lambda':>7} {'inner':>9} {'outer':>9} {'case B':>9}")
    for lam in (0.0, 0.25, 0.5, 0.75, 1.0):
        vals = [support_function(r, lam) for r in (inner, outer, case_b)]
        print(f"{lam:7.2f} " + " ".join(f"{v:9.4f}" for v in vals))


if __name__ == "__main__":
    main()
