"""Command-line entry point: region | simulate | verify | typicality-check.

Exit codes: 0 success, 2 spec or validation error, 3 budget refusal,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .codec import SimConfig, cloud_from_input, scheme_for, simulate
from .errors import BudgetExceeded, EmbedcapError, InfeasibleProblem, SpecError, ValidationError
from .output import jsonable, region_csv
from .regions import BcProblem, RateRegion, build_family, compute_region
from .specfile import SpecFile, parse_spec
from .typicality import cardinality_sandwich, typical_fraction
from .verify import verify

EXIT_OK, EXIT_SPEC, EXIT_BUDGET, EXIT_VERIFY = 0, 2, 3, 4
# Exhaustive cardinality check is skipped above this many type classes' worth of length.
SANDWICH_MAX_N = 24


def _report(command, args, spec: SpecFile | None, results, t0):
    echo = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {
        "tool": "embedcap",
        "version": __version__,
        "command": command,
        "seed": args.seed,
        "args": echo,
        "spec": spec.doc if spec is not None else None,
        "results": results,
        "wall_time": round(time.perf_counter() - t0, 3),
    }


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(report, path):
    _emit(json.dumps(jsonable(report), indent=2, sort_keys=True) + "\n", path)


def _search_config(spec: SpecFile, args):
    over = {"grid_step": args.grid_step, "workers": args.workers}
    if args.seed is not None:
        over["seed"] = args.seed
    return spec.search_config(**over)


def cmd_region(args) -> int:
    t0 = time.perf_counter()
    spec = parse_spec(args.spec)
    cfg = _search_config(spec, args)
    try:
        region = compute_region(spec.problem, cfg, bound=args.bound)
        feasible = True
    except InfeasibleProblem as exc:
        region, feasible = RateRegion((), (), True, {"reason": str(exc)}), False
    csv_text = region_csv(region)
    _emit(csv_text, args.out)
    if args.report:
        info = {k: v for k, v in region.info.items() if k not in ("vertex_params", "best_params")}
        results = {"feasible": feasible, "empty": region.empty, "csv": csv_text, "info": info}
        _emit_json(_report("region", args, spec, results, t0), args.report)
    return EXIT_OK


def _auto_tuple(spec: SpecFile, args, cfg):
    """Tuple attaining the region's support point in direction ``lambda``."""
    problem = spec.problem
    lam = args.lam if args.lam is not None else float(spec.sim.get("lambda", 0.5))
    region = compute_region(problem, cfg)
    point = region.support_point(lam)
    theta = region.info["vertex_params"][region.hull_vertices.index(point)]
    tup = build_family(problem, "inner", cfg).to_tuple(theta)
    if isinstance(problem, BcProblem) and problem.case in ("C'", "D'"):
        tup = cloud_from_input(tup)
    return tup, {"lambda": lam, "point": [point.r1, point.r2]}


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    spec = parse_spec(args.spec)
    sim = dict(spec.sim)
    sim.pop("lambda", None)
    for key in ("n", "r1", "r2", "eps", "eps1", "trials", "seed", "workers"):
        v = getattr(args, key, None)
        if v is not None:
            sim[key] = v
    if "n" not in sim:
        raise SpecError("blocklength n missing (give --n or [sim] n)", section="sim")
    sim.setdefault("r1", 0.0)
    sim.setdefault("r2", 0.0)
    cfg = SimConfig(**sim)
    scheme = scheme_for(spec.problem)
    source = {"from": "spec"}
    tup = spec.tuple
    if tup is None:
        tup, source = _auto_tuple(spec, args, _search_config(spec, args))
        source["from"] = "region"
    rep = simulate(spec.problem, scheme, tup, cfg)
    results = rep.to_dict()
    results["tuple"] = source
    _emit_json(_report("simulate", args, spec, results, t0), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    spec = parse_spec(args.spec)
    rep = verify(spec.problem, _search_config(spec, args), factor=args.factor)
    results = {"passed": rep.passed,
               "checks": [{"name": c.name, "passed": c.passed, "max_violation": c.max_violation,
                           "detail": c.detail} for c in rep.checks]}
    _emit_json(_report("verify", args, spec, results, t0), args.out)
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_typicality(args) -> int:
    t0 = time.perf_counter()
    spec = parse_spec(args.spec)
    problem = spec.problem
    host = problem.host if isinstance(problem, BcProblem) else problem.host_joint
    n = args.n if args.n is not None else 200
    eps = args.eps if args.eps is not None else 0.1
    seed = args.seed if args.seed is not None else 0
    results = {"n": n, "eps": eps, "samples": args.samples,
               "coverage": typical_fraction(host, n, eps, args.samples, seed)}
    sn = args.sandwich_n
    if sn is not None:
        if sn > SANDWICH_MAX_N:
            raise BudgetExceeded(f"exhaustive cardinality check limited to n <= {SANDWICH_MAX_N}")
        c = cardinality_sandwich(host, sn, eps)
        results["sandwich"] = {"n": sn, "size": c.size, "lower": c.lower, "upper": c.upper,
                               "eps1": c.eps1, "prob_typical": c.prob_typical, "holds": c.holds}
    _emit_json(_report("typicality-check", args, spec, results, t0), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="embedcap", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"embedcap {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--spec", required=True, metavar="PATH", help="problem spec (TOML)")
        p.add_argument("--seed", type=int, default=None, metavar="N")
        p.add_argument("--out", default=None, metavar="PATH", help="output file (default stdout)")
        p.add_argument("--workers", type=int, default=None, metavar="N",
                       help="worker threads (default: EMBEDCAP_THREADS or 1)")
        p.add_argument("--grid-step", dest="grid_step", default=None, metavar="Q", help="e.g. 1/8")

    p = sub.add_parser("region", help="compute a rate region; CSV kind,lambda,r1,r2")
    common(p)
    p.add_argument("--bound", default="inner", choices=("inner", "outer", "capacity"))
    p.add_argument("--report", default=None, metavar="PATH", help="also write a JSON run report")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("simulate", help="Monte Carlo run of the coding scheme")
    common(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--r1", type=float, default=None)
    p.add_argument("--r2", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--eps1", type=float, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="support direction choosing the tuple when the spec has none")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="structural checks (containments, budget nesting, C'=D')")
    common(p)
    p.add_argument("--factor", type=float, default=0.5, help="smaller budget = factor * budget")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("typicality-check", help="coverage and cardinality checks on the host pmf")
    common(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--sandwich-n", dest="sandwich_n", type=int, default=None)
    p.set_defaults(func=cmd_typicality)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"embedcap: budget refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (SpecError, ValidationError) as exc:
        print(f"embedcap: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except EmbedcapError as exc:
        print(f"embedcap: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
