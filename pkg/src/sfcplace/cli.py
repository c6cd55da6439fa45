"""Command-line front end: solve, validate, gen, sweep.

Exit codes are stable: 0 success/feasible, 1 infeasible proven (or
validation found violations), 2 timeout, 3 input error, 4 internal
invariant breach.  stdout carries the human summary; machine output goes
to files (or to stdout as a single JSON document with --json).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .ilp import BuildOptions, build_model
from .model import (DEFAULT_S_MAX, ScenarioError, load_bundle, load_scenario_files,
                    normalize_types, save_scenario)
from .oracle import Placement, PlacementError, validate_solution
from .result import Budget, INFEASIBLE, OPTIMAL, TIMED_OUT
from .scenarios import GenConfig, generate, run_sweep, write_rows_csv, write_summary_csv
from .solver import greedy_first_fit, solve

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_TIMEOUT = 2
EXIT_INPUT = 3
EXIT_INTERNAL = 4

ENV_SEED = "SFC_PLACER_SEED"


def _num(q):
    if q is None:
        return None
    q = Fraction(q)
    return int(q) if q.denominator == 1 else float(q)


def _add_scenario_args(parser):
    parser.add_argument("--topology", help="topology.json path")
    parser.add_argument("--sfcs", help="sfcs.json path")
    parser.add_argument("--flavors", help="flavors.json path")
    parser.add_argument("--bundle", help="single-file bundle with topology/sfcs/flavors")
    parser.add_argument("--s-max", type=int, default=DEFAULT_S_MAX,
                        help="number of security levels (default 15)")


def _load_from_args(args):
    if args.bundle:
        return load_bundle(args.bundle, s_max=args.s_max)
    if not (args.topology and args.sfcs and args.flavors):
        raise ScenarioError("cli", "provide --bundle or all of --topology/--sfcs/--flavors")
    return load_scenario_files(args.topology, args.sfcs, args.flavors, s_max=args.s_max)


def _build_options(args):
    return BuildOptions(symmetry_breaking=not args.no_symmetry_breaking,
                        bandwidth=args.bandwidth_ext, endpoints=args.endpoints_ext)


def _default_seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(ENV_SEED)
    return int(env) if env else 0


def cmd_solve(args) -> int:
    scenario = normalize_types(_load_from_args(args))
    model = build_model(scenario, _build_options(args))
    if args.dump_lp:
        Path(args.dump_lp).write_text(model.to_lp())
    budget = Budget(max_nodes=args.max_nodes, max_wall_ms=args.max_wall_ms)
    warm = greedy_first_fit(scenario, model) if args.backend == "bnb" else None
    result = solve(model, budget, backend=args.backend, warm_start=warm)

    placement = None
    if result.assignment and result.objective is not None:
        from .ilp import decode_placement
        placement = decode_placement(scenario, model, result.assignment)

    doc = {
        "status": result.status,
        "objective": _num(result.objective),
        "bound": _num(result.bound),
        "placement": placement.to_doc() if placement else None,
        "stats": {"nodes_explored": result.stats.nodes_explored,
                  "propagations": result.stats.propagations},
    }
    if args.timing:
        doc["stats"]["wall_ms"] = result.stats.wall_ms
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)

    if args.json:
        sys.stdout.write(text)
    else:
        _print_solve_summary(scenario, result, placement)
    if result.status == INFEASIBLE:
        return EXIT_INFEASIBLE
    if result.status == TIMED_OUT:
        return EXIT_TIMEOUT
    return EXIT_OK


def _print_solve_summary(scenario, result, placement):
    print(f"status: {result.status}")
    if result.status == INFEASIBLE:
        tags = sorted(set(result.root_tags) | ({result.conflict_tag} if result.conflict_tag else set()))
        if tags:
            print("infeasibility involves constraint families: " + ", ".join(tags))
        return
    print(f"objective: {_num(result.objective)}")
    if result.status == TIMED_OUT and result.bound is not None:
        print(f"lower bound: {_num(result.bound)} (gap not closed within budget)")
    if placement is None:
        return
    for metric in placement.sfcs:
        print(f"  sfc {metric.sfc_id}: delay {_num(metric.total_delay)} ms, "
              f"min link security {metric.min_link_security}")
    used = {}
    flavor_by_id = {f.id: f for f in scenario.flavors.flavors}
    seen_vnfi = set()
    for row in placement.vnfs:
        if row.vnfi_id in seen_vnfi:
            continue
        seen_vnfi.add(row.vnfi_id)
        demand = flavor_by_id[row.flavor_id].demand
        for kind, units in demand.items():
            used[(row.cloud_id, kind)] = used.get((row.cloud_id, kind), 0) + units
    for cloud in scenario.topology.clouds:
        residual = {kind: cloud.capacity[kind] - used.get((cloud.id, kind), 0)
                    for kind in cloud.capacity}
        print(f"  cloud {cloud.id}: residual {residual}")


def cmd_validate(args) -> int:
    scenario = _load_from_args(args)
    with open(args.solution) as fh:
        doc = json.load(fh)
    if isinstance(doc, dict) and "placement" in doc:
        doc = doc["placement"]
    if doc is None:
        print("solution file contains no placement")
        return EXIT_INPUT
    placement = Placement.from_doc(doc)
    violations = validate_solution(scenario, placement)
    if not violations:
        print("placement is valid: 0 violations")
        return EXIT_OK
    print(f"{len(violations)} violation(s):")
    for violation in violations:
        print(f"  {violation}")
    return 1


def cmd_gen(args) -> int:
    config = GenConfig(n_clouds=args.clouds, n_sfcs=args.sfcs_count,
                       n_types=args.types, n_flavors=args.flavors_count,
                       security_levels=args.security_levels,
                       conflict_prob=args.conflict_prob, seed=_default_seed(args))
    scenario = generate(config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_scenario(scenario, out / "topology.json", out / "sfcs.json", out / "flavors.json")
    print(f"wrote topology.json, sfcs.json, flavors.json to {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    points = [int(p) for p in args.points.split(",") if p]
    if not points:
        raise ScenarioError("cli", "--points must list at least one integer")
    config = GenConfig(n_clouds=args.clouds, n_sfcs=args.sfcs_count,
                       n_types=args.types, n_flavors=args.flavors_count,
                       seed=_default_seed(args))
    budget = Budget(max_nodes=args.max_nodes)
    sweep = run_sweep(args.axis, points, args.reps, config, budget=budget,
                      nested=args.nested, jobs=args.jobs)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_rows_csv(sweep.rows, out / "sweep_reps.csv", timing=args.timing)
    write_summary_csv(sweep.summary, out / "sweep_summary.csv")
    print(f"axis={args.axis} points={points} reps={args.reps}")
    for s in sweep.summary:
        print(f"  {args.axis}={s.axis_value}: mean cost {s.mean_cost:.2f} "
              f"(±{s.ci95_cost:.2f}), mean delay {s.mean_delay_ms:.2f} ms "
              f"(±{s.ci95_delay_ms:.2f}), infeasible {s.infeasible_count}, "
              f"timeout {s.timeout_count}")
    print(f"wrote sweep_reps.csv, sweep_summary.csv to {out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="sfc-placer",
                                     description="Cost-minimal SFC placement with delay and "
                                                 "link-security constraints.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one scenario to proven optimality")
    _add_scenario_args(p)
    p.add_argument("--out", help="write the solution JSON here")
    p.add_argument("--dump-lp", help="serialize the model in LP text format")
    p.add_argument("--backend", default="bnb", help="bnb or external:<command>")
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("--max-wall-ms", type=int, default=None)
    p.add_argument("--json", action="store_true", help="machine-parsable stdout (one document)")
    p.add_argument("--timing", action="store_true",
                   help="include wall-clock times in machine output (breaks rerun byte-identity)")
    p.add_argument("--bandwidth-ext", action="store_true")
    p.add_argument("--endpoints-ext", action="store_true")
    p.add_argument("--no-symmetry-breaking", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check a solution JSON against a scenario")
    _add_scenario_args(p)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen", help="generate a random scenario")
    p.add_argument("--clouds", type=int, default=4)
    p.add_argument("--sfcs-count", type=int, default=4)
    p.add_argument("--types", type=int, default=3)
    p.add_argument("--flavors-count", type=int, default=3)
    p.add_argument("--security-levels", type=int, default=15)
    p.add_argument("--conflict-prob", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=None, help=f"falls back to ${ENV_SEED}, then 0")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sweep", help="run an experiment sweep and write CSVs")
    p.add_argument("--axis", choices=["edges", "sfcs"], required=True)
    p.add_argument("--points", required=True, help="comma-separated axis values")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--clouds", type=int, default=10, help="fixed cloud count for the sfcs axis")
    p.add_argument("--sfcs-count", type=int, default=4, help="fixed SFC count for the edges axis")
    p.add_argument("--types", type=int, default=3)
    p.add_argument("--flavors-count", type=int, default=3)
    p.add_argument("--seed", type=int, default=None, help=f"falls back to ${ENV_SEED}, then 0")
    p.add_argument("--nested", action="store_true",
                   help="larger topologies extend smaller ones (exact cost monotonicity)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-nodes", type=int, default=500_000)
    p.add_argument("--timing", action="store_true")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, PlacementError, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # invariant breach
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
