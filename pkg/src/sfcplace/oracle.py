"""Ground truth: a semantic validator for placements and an exhaustive
enumerator for tiny instances.

This module deliberately re-derives every rule from the scenario data and
never shares constraint code with the linear-program builder, so it can
arbitrate any solver's output.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .model import Scenario
from .result import OPTIMAL, INFEASIBLE, SolveResult, SolveStats, SpaceTooLarge

DEFAULT_MAX_POINTS = 10_000_000


class PlacementError(ValueError):
    """A placement references ids that do not exist in the scenario."""


@dataclass(frozen=True)
class VnfAssignment:
    vnf_id: str
    vnfi_id: str
    cloud_id: str
    flavor_id: str
    vnf_type: object


@dataclass(frozen=True)
class SfcMetrics:
    sfc_id: str
    total_delay: Fraction  # ms, sum over consecutive-pair hops
    min_link_security: int


@dataclass(frozen=True)
class Placement:
    vnfs: tuple  # VnfAssignment per VNF, each VNF exactly once
    sfcs: tuple  # SfcMetrics per SFC
    total_cost: Fraction

    def to_doc(self):
        def num(q):
            q = Fraction(q)
            return int(q) if q.denominator == 1 else float(q)
        return {
            "vnfs": [{"vnf_id": r.vnf_id, "vnfi_id": r.vnfi_id, "cloud_id": r.cloud_id,
                      "flavor_id": r.flavor_id, "type": r.vnf_type} for r in self.vnfs],
            "sfcs": [{"id": m.sfc_id, "total_delay_ms": num(m.total_delay),
                      "min_link_security": m.min_link_security} for m in self.sfcs],
            "total_cost": num(self.total_cost),
        }

    @classmethod
    def from_doc(cls, doc):
        vnfs = tuple(VnfAssignment(vnf_id=r["vnf_id"], vnfi_id=r["vnfi_id"],
                                   cloud_id=r["cloud_id"], flavor_id=r["flavor_id"],
                                   vnf_type=r.get("type")) for r in doc["vnfs"])
        sfcs = tuple(SfcMetrics(sfc_id=m["id"],
                                total_delay=Fraction(str(m["total_delay_ms"])),
                                min_link_security=int(m["min_link_security"]))
                     for m in doc["sfcs"])
        return cls(vnfs=vnfs, sfcs=sfcs, total_cost=Fraction(str(doc["total_cost"])))


@dataclass(frozen=True)
class Violation:
    kind: str  # assignment | sfc-loop | type | conflict | deployment |
               # capacity | delay | security | unreachable | cost | metrics
    message: str

    def __str__(self):
        return f"[{self.kind}] {self.message}"


def validate_solution(scenario: Scenario, placement: Placement) -> list:
    """Semantic re-check of a placement against the scenario.

    Returns an empty list iff the placement is feasible and its recorded
    cost/delay metrics match recomputation.  Dangling ids raise
    PlacementError instead of producing violations.
    """
    cloud_by_id = {c.id: c for c in scenario.topology.clouds}
    flavor_by_id = {f.id: f for f in scenario.flavors.flavors}
    spec_by_id = {}
    sfc_of_vnf = {}
    for sfc in scenario.sfcs:
        for vnf in sfc.vnfs:
            spec_by_id[vnf.vnf_id] = vnf
            sfc_of_vnf[vnf.vnf_id] = sfc.id
    for row in placement.vnfs:
        if row.vnf_id not in spec_by_id:
            raise PlacementError(f"unknown vnf id {row.vnf_id!r}")
        if row.cloud_id not in cloud_by_id:
            raise PlacementError(f"unknown cloud id {row.cloud_id!r}")
        if row.flavor_id not in flavor_by_id:
            raise PlacementError(f"unknown flavor id {row.flavor_id!r}")

    violations = []
    seen = {}
    for row in placement.vnfs:
        seen[row.vnf_id] = seen.get(row.vnf_id, 0) + 1
    for vnf_id, count in seen.items():
        if count != 1:
            violations.append(Violation("assignment", f"vnf {vnf_id} placed {count} times"))
    for vnf_id in spec_by_id:
        if vnf_id not in seen:
            violations.append(Violation("assignment", f"vnf {vnf_id} is not placed"))

    by_vnfi = {}
    row_of = {}
    for row in placement.vnfs:
        by_vnfi.setdefault(row.vnfi_id, []).append(row)
        row_of[row.vnf_id] = row

    for vnfi_id, rows in by_vnfi.items():
        types = {spec_by_id[r.vnf_id].vnf_type for r in rows}
        if len(types) > 1:
            violations.append(Violation("type", f"VNFI {vnfi_id} mixes types {sorted(map(str, types))}"))
        clouds = {r.cloud_id for r in rows}
        flavors = {r.flavor_id for r in rows}
        if len(clouds) > 1 or len(flavors) > 1:
            violations.append(Violation("deployment", f"VNFI {vnfi_id} has inconsistent cloud/flavor"))
        sfc_ids = [sfc_of_vnf[r.vnf_id] for r in rows]
        for sfc_id in set(sfc_ids):
            if sfc_ids.count(sfc_id) > 1:
                violations.append(Violation("sfc-loop", f"sfc {sfc_id} uses VNFI {vnfi_id} more than once"))
        for r1, r2 in itertools.combinations(rows, 2):
            if r2.vnf_id in spec_by_id[r1.vnf_id].conflicts:
                violations.append(Violation("conflict", f"conflicting vnfs {r1.vnf_id},{r2.vnf_id} share VNFI {vnfi_id}"))

    load = {}
    for vnfi_id, rows in by_vnfi.items():
        flavor = flavor_by_id[rows[0].flavor_id]
        cloud = rows[0].cloud_id
        for kind, units in flavor.demand.items():
            load[(cloud, kind)] = load.get((cloud, kind), 0) + units
    for (cloud, kind), used in sorted(load.items()):
        cap = cloud_by_id[cloud].capacity.get(kind, 0)
        if used > cap:
            violations.append(Violation("capacity", f"cloud {cloud} resource {kind}: {used} > {cap}"))

    recorded = {m.sfc_id: m for m in placement.sfcs}
    for sfc in scenario.sfcs:
        if any(v.vnf_id not in row_of for v in sfc.vnfs):
            continue  # already reported as assignment violations
        total = Fraction(0)
        min_sec = scenario.s_max
        reachable = True
        for a, b in zip(sfc.vnfs, sfc.vnfs[1:]):
            ca, cb = row_of[a.vnf_id].cloud_id, row_of[b.vnf_id].cloud_id
            delay = scenario.hop_delay(ca, cb)
            sec = scenario.hop_security(ca, cb)
            if delay is None or sec is None:
                violations.append(Violation("unreachable", f"sfc {sfc.id}: no link between {ca} and {cb}"))
                reachable = False
                continue
            total += delay
            min_sec = min(min_sec, sec)
            if sec < sfc.min_security:
                violations.append(Violation(
                    "security", f"sfc {sfc.id}: hop {ca}->{cb} has level {sec} < required {sfc.min_security}"))
        if not reachable:
            continue
        if total > sfc.max_delay:
            violations.append(Violation("delay", f"sfc {sfc.id}: delay {total} ms exceeds {sfc.max_delay} ms"))
        metric = recorded.get(sfc.id)
        if metric is not None and (metric.total_delay != total or metric.min_link_security != min_sec):
            violations.append(Violation("metrics", f"sfc {sfc.id}: recorded metrics disagree with recomputation"))

    true_cost = sum((flavor_by_id[rows[0].flavor_id].price for rows in by_vnfi.values()), Fraction(0))
    if placement.total_cost != true_cost:
        violations.append(Violation("cost", f"recorded cost {placement.total_cost} != deployed flavor prices {true_cost}"))
    return violations


# ---------------------------------------------------------------------------
# exhaustive enumeration


def _grouped_partitions(records):
    """All ways to group compatible records into shared VNFIs.

    records share one type; a block may not contain a conflicting pair or
    two VNFs of the same SFC.  Blocks grow in first-seen order (restricted
    growth), so symmetric relabelings are enumerated once.
    """
    out = []
    blocks = []

    def compatible(rec, block):
        return all(rec["sfc"] != other["sfc"] and rec["id"] not in other["conflicts"]
                   for other in block)

    def rec_fill(i):
        if i == len(records):
            out.append([list(b) for b in blocks])
            return
        record = records[i]
        for block in blocks:
            if compatible(record, block):
                block.append(record)
                rec_fill(i + 1)
                block.pop()
        blocks.append([record])
        rec_fill(i + 1)
        blocks.pop()

    rec_fill(0)
    return out


def brute_force(scenario: Scenario, max_points: int = DEFAULT_MAX_POINTS) -> SolveResult:
    """Exact minimum deployment cost by enumerating every placement:
    VNF groupings x cloud choices x flavor choices, feasibility-checked
    against the scenario.  Raises SpaceTooLarge beyond ``max_points``."""
    records = []
    for sfc in scenario.sfcs:
        for vnf in sfc.vnfs:
            records.append({"id": vnf.vnf_id, "sfc": sfc.id, "type": vnf.vnf_type,
                            "conflicts": vnf.conflicts})
    if not records:
        return SolveResult(status=OPTIMAL, objective=Fraction(0),
                           placement=Placement(vnfs=(), sfcs=tuple(
                               SfcMetrics(sfc_id=s.id, total_delay=Fraction(0),
                                          min_link_security=scenario.s_max)
                               for s in scenario.sfcs), total_cost=Fraction(0)))

    classes = {}
    for record in records:
        classes.setdefault(record["type"], []).append(record)
    class_partitions = [_grouped_partitions(recs) for recs in classes.values()]

    clouds = scenario.topology.clouds
    flavors = scenario.flavors.flavors
    choices = len(clouds) * len(flavors)
    total_points = 0
    for combo in itertools.product(*class_partitions):
        n_blocks = sum(len(part) for part in combo)
        total_points += choices ** n_blocks
        if total_points > max_points:
            raise SpaceTooLarge(f"enumeration needs > {max_points} points")

    best_cost = None
    best_placement = None
    stats = SolveStats()
    sfc_by_id = {s.id: s for s in scenario.sfcs}

    for combo in itertools.product(*class_partitions):
        blocks = [block for part in combo for block in part]
        for deployment in itertools.product(range(len(clouds)), range(len(flavors)), repeat=len(blocks)):
            stats.nodes_explored += 1
            cost = Fraction(0)
            load = {}
            feasible = True
            cloud_of = {}
            for k, block in enumerate(blocks):
                c, f = deployment[2 * k], deployment[2 * k + 1]
                flavor = flavors[f]
                cost += flavor.price
                for kind, units in flavor.demand.items():
                    key = (c, kind)
                    load[key] = load.get(key, 0) + units
                    if load[key] > clouds[c].capacity[kind]:
                        feasible = False
                for record in block:
                    cloud_of[record["id"]] = clouds[c].id
            if not feasible or (best_cost is not None and cost >= best_cost):
                continue
            for sfc in scenario.sfcs:
                total = Fraction(0)
                for a, b in zip(sfc.vnfs, sfc.vnfs[1:]):
                    ca, cb = cloud_of[a.vnf_id], cloud_of[b.vnf_id]
                    delay = scenario.hop_delay(ca, cb)
                    sec = scenario.hop_security(ca, cb)
                    if delay is None or sec is None or sec < sfc.min_security:
                        feasible = False
                        break
                    total += delay
                if not feasible or total > sfc.max_delay:
                    feasible = False
                    break
            if not feasible:
                continue
            best_cost = cost
            best_placement = _build_placement(scenario, blocks, deployment, clouds, flavors, sfc_by_id)

    if best_cost is None:
        return SolveResult(status=INFEASIBLE, stats=stats)
    leftover = validate_solution(scenario, best_placement)
    if leftover:
        raise AssertionError(f"oracle produced an invalid optimum: {leftover}")
    return SolveResult(status=OPTIMAL, objective=best_cost, stats=stats, placement=best_placement)


def _build_placement(scenario, blocks, deployment, clouds, flavors, sfc_by_id):
    rows = []
    cloud_of = {}
    for k, block in enumerate(blocks):
        c, f = deployment[2 * k], deployment[2 * k + 1]
        for record in block:
            rows.append(VnfAssignment(vnf_id=record["id"], vnfi_id=f"bf{k}",
                                      cloud_id=clouds[c].id, flavor_id=flavors[f].id,
                                      vnf_type=record["type"]))
            cloud_of[record["id"]] = clouds[c].id
    order = {vnf.vnf_id: i for i, (_, vnf) in enumerate(scenario.vnf_list())}
    rows.sort(key=lambda r: order[r.vnf_id])
    metrics = []
    for sfc in scenario.sfcs:
        total = Fraction(0)
        min_sec = scenario.s_max
        for a, b in zip(sfc.vnfs, sfc.vnfs[1:]):
            ca, cb = cloud_of[a.vnf_id], cloud_of[b.vnf_id]
            total += scenario.hop_delay(ca, cb)
            min_sec = min(min_sec, scenario.hop_security(ca, cb))
        metrics.append(SfcMetrics(sfc_id=sfc.id, total_delay=total, min_link_security=min_sec))
    cost = Fraction(0)
    for k, block in enumerate(blocks):
        cost += flavors[deployment[2 * k + 1]].price
    return Placement(vnfs=tuple(rows), sfcs=tuple(metrics), total_cost=cost)
