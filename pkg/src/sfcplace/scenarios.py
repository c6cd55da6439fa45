"""Random scenario generation and the two experiment sweeps.

Generation is deterministic per seed and prefix-stable in the number of
clouds: the topology with n+k clouds extends the topology with n clouds
(same capacities and link properties on the shared prefix).  That turns the
"more edges never raise the optimal cost" trend into an exact, per-seed
monotonicity statement in nested mode.
"""

from __future__ import annotations

import csv
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
from scipy import stats as scipy_stats

from .ilp import BuildOptions
from .model import Scenario, load_scenario, normalize_types
from .result import Budget, INFEASIBLE, OPTIMAL, TIMED_OUT
from .solver import solve_scenario

AXIS_EDGES = "edges"
AXIS_SFCS = "sfcs"

DEFAULT_SWEEP_BUDGET = Budget(max_nodes=500_000)


@dataclass
class GenConfig:
    """Knobs for random scenario generation.

    Capacity/price/delay ranges are inclusive integer ranges.  The defaults
    are calibrated so that well over 80% of generated instances are feasible
    at the default sizes (see README, "generator calibration").
    """

    n_clouds: int = 4
    n_sfcs: int = 4
    chain_len: tuple = (2, 3)
    n_types: int = 3
    n_flavors: int = 3
    security_levels: int = 15
    conflict_prob: float = 0.15
    seed: int = 0
    capacity_range: tuple = (8, 14)
    flavor_demand_range: tuple = (1, 4)
    price_range: tuple = (1, 10)
    link_delay_range: tuple = (1, 10)
    link_bandwidth_range: tuple = (100, 1000)
    traffic_range: tuple = (1, 10)
    max_delay_range: tuple = (20, 60)
    min_security_range: tuple = (1, 8)


def _stream(config: GenConfig, tag: str) -> random.Random:
    # string seeds hash via sha512 in CPython: stable across runs and platforms
    return random.Random(f"{config.seed}/{tag}")


def generate(config: GenConfig) -> Scenario:
    """Deterministic random scenario.  Link security levels are drawn
    uniformly from [1, security_levels]."""
    rng = _stream(config, "topology")
    clouds = []
    links = []
    for i in range(config.n_clouds):
        cid = f"c{i:02d}"
        capacity = {kind: rng.randint(*config.capacity_range) for kind in ("cpu", "ram", "storage")}
        for j in range(i):
            links.append({
                "a": f"c{j:02d}", "b": cid,
                "delay_ms": rng.randint(*config.link_delay_range),
                "bandwidth_mbps": rng.randint(*config.link_bandwidth_range),
                "security_level": rng.randint(1, config.security_levels),
            })
        clouds.append({"id": cid, "capacity": capacity})
    topology = {"clouds": clouds, "access_nodes": ["an0", "an1"], "iot_domains": ["iot0"],
                "links": links}

    rng = _stream(config, "sfcs")
    sfcs = []
    all_vnfs = []  # (sfc index, vnf index, type)
    for s in range(config.n_sfcs):
        length = rng.randint(*config.chain_len)
        vnfs = []
        for j in range(length):
            vtype = rng.randint(1, config.n_types)
            vnfs.append({"id": f"s{s}v{j}", "type": vtype, "conflicts": []})
            all_vnfs.append((s, j, vtype))
        hi_sec = min(config.min_security_range[1], config.security_levels)
        sfcs.append({
            "id": f"s{s}",
            "traffic_mbps": rng.randint(*config.traffic_range),
            "max_delay_ms": rng.randint(*config.max_delay_range),
            "min_security": rng.randint(config.min_security_range[0], hi_sec),
            "users": [rng.choice(topology["access_nodes"])],
            "vnfs": vnfs,
        })
    # conflicts only matter between same-type VNFs of different SFCs
    for i, (s1, j1, t1) in enumerate(all_vnfs):
        for s2, j2, t2 in all_vnfs[i + 1:]:
            if s1 != s2 and t1 == t2 and rng.random() < config.conflict_prob:
                sfcs[s1]["vnfs"][j1]["conflicts"].append(f"s{s2}v{j2}")

    rng = _stream(config, "flavors")
    flavors = [{
        "id": f"f{k}",
        "price": rng.randint(*config.price_range),
        "demand": {kind: rng.randint(*config.flavor_demand_range)
                   for kind in ("cpu", "ram", "storage")},
    } for k in range(config.n_flavors)]

    return load_scenario(topology, sfcs, flavors, s_max=config.security_levels)


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepRow:
    axis_value: int
    rep: int
    seed: int
    status: str
    cost: object  # Fraction, or None when not optimal
    mean_delay_ms: object  # Fraction, or None when not optimal
    nodes_explored: int
    wall_ms: int


@dataclass
class SweepSummary:
    axis_value: int
    n_repetitions: int
    infeasible_count: int
    timeout_count: int
    mean_cost: float
    ci95_cost: float
    mean_delay_ms: float
    ci95_delay_ms: float


@dataclass
class SweepResult:
    axis: str
    rows: list
    summary: list


def rep_seed(base_seed: int, axis_value: int, rep: int, nested: bool) -> int:
    """Per-repetition scenario seed.  Nested mode reuses the same seed
    across axis points so larger topologies extend smaller ones."""
    if nested:
        return base_seed + 1_000_003 * rep
    return base_seed + 1_000_003 * rep + 7919 * axis_value


def _solve_task(args):
    axis, value, rep, config_dict, budget, options = args
    nested = config_dict["_nested"]
    config = GenConfig(**{k: v for k, v in config_dict.items() if k != "_nested"})
    seed = rep_seed(config.seed, value, rep, nested)
    config = replace(config, seed=seed)
    if axis == AXIS_EDGES:
        config = replace(config, n_clouds=value)
    else:
        config = replace(config, n_sfcs=value)
    scenario = normalize_types(generate(config))
    _, result, placement = solve_scenario(scenario, options=options, budget=budget)
    cost = mean_delay = None
    if result.status == OPTIMAL and placement is not None:
        # every sweep solution is re-checked semantically, so delay and
        # security guarantees hold for everything that enters the means
        from .oracle import validate_solution
        violations = validate_solution(scenario, placement)
        if violations:
            raise AssertionError(f"sweep produced an invalid optimum (seed {seed}): {violations}")
        cost = result.objective
        delays = [m.total_delay for m in placement.sfcs]
        mean_delay = sum(delays, Fraction(0)) / len(delays) if delays else Fraction(0)
    return SweepRow(axis_value=value, rep=rep, seed=seed, status=result.status,
                    cost=cost, mean_delay_ms=mean_delay,
                    nodes_explored=result.stats.nodes_explored,
                    wall_ms=result.stats.wall_ms)


def ci95_halfwidth(values) -> float:
    """Half-width of the t-based 95% confidence interval of the mean."""
    n = len(values)
    if n < 2:
        return 0.0
    arr = np.asarray([float(v) for v in values])
    sem = arr.std(ddof=1) / math.sqrt(n)
    if sem == 0:
        return 0.0
    return float(scipy_stats.t.ppf(0.975, n - 1) * sem)


def run_sweep(axis: str, points, repetitions: int, config: GenConfig,
              budget: Budget | None = None, nested: bool = False,
              options: BuildOptions | None = None, jobs: int = 1) -> SweepResult:
    """Solve ``repetitions`` generated instances per sweep point and
    aggregate mean / 95% CI of cost and of average per-SFC delay.
    Infeasible and timed-out repetitions are excluded from means and
    counted separately."""
    if axis not in (AXIS_EDGES, AXIS_SFCS):
        raise ValueError(f"unknown sweep axis {axis!r}")
    if repetitions < 2:
        raise ValueError("repetitions must be >= 2")
    budget = budget if budget is not None else DEFAULT_SWEEP_BUDGET
    config_dict = {**config.__dict__, "_nested": nested}
    tasks = [(axis, value, rep, config_dict, budget, options)
             for value in points for rep in range(repetitions)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_solve_task, tasks))
    else:
        rows = [_solve_task(task) for task in tasks]
    rows.sort(key=lambda r: (points.index(r.axis_value), r.rep))

    summary = []
    for value in points:
        here = [r for r in rows if r.axis_value == value]
        solved = [r for r in here if r.status == OPTIMAL]
        costs = [r.cost for r in solved]
        delays = [r.mean_delay_ms for r in solved]
        summary.append(SweepSummary(
            axis_value=value,
            n_repetitions=len(here),
            infeasible_count=sum(1 for r in here if r.status == INFEASIBLE),
            timeout_count=sum(1 for r in here if r.status == TIMED_OUT),
            mean_cost=float(np.mean([float(c) for c in costs])) if costs else float("nan"),
            ci95_cost=ci95_halfwidth(costs),
            mean_delay_ms=float(np.mean([float(d) for d in delays])) if delays else float("nan"),
            ci95_delay_ms=ci95_halfwidth(delays),
        ))
    return SweepResult(axis=axis, rows=rows, summary=summary)


def trend_rho(xs, ys) -> float:
    """Spearman rank correlation; a flat series counts as 0 (no trend)."""
    if len(set(xs)) < 2 or len(set(ys)) < 2:
        return 0.0
    rho = scipy_stats.spearmanr(xs, ys).statistic
    return 0.0 if math.isnan(rho) else float(rho)


# ---------------------------------------------------------------------------
# CSV output


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else repr(float(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows_csv(rows, path, timing: bool = False) -> None:
    """Per-repetition CSV.  Wall-clock times are machine-dependent, so the
    wall_ms column is left empty unless timing output is requested."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis_value", "rep", "seed", "status", "cost",
                         "mean_delay_ms", "nodes_explored", "wall_ms"])
        for r in rows:
            writer.writerow([r.axis_value, r.rep, r.seed, r.status, _fmt(r.cost),
                             _fmt(r.mean_delay_ms), r.nodes_explored,
                             r.wall_ms if timing else ""])


def write_summary_csv(summary, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis_value", "n_repetitions", "infeasible_count", "timeout_count",
                         "mean_cost", "ci95_cost", "mean_delay_ms", "ci95_delay_ms"])
        for s in summary:
            writer.writerow([s.axis_value, s.n_repetitions, s.infeasible_count, s.timeout_count,
                             _fmt(s.mean_cost), _fmt(s.ci95_cost),
                             _fmt(s.mean_delay_ms), _fmt(s.ci95_delay_ms)])
