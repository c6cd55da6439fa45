import ast
import copy
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import pytest

from sfcplace.model import load_scenario, normalize_types
from sfcplace.oracle import (Placement, PlacementError, SfcMetrics, VnfAssignment,
                             brute_force, validate_solution)
from sfcplace.result import INFEASIBLE, OPTIMAL, SpaceTooLarge
from tests.conftest import BASIC_FLAVORS, CHAIN_SFCS, TWO_CLOUD_TOPOLOGY, make_scenario


def chain3_scenario(max_delay=30, min_security=3):
    """Three-VNF chain over two clouds joined by one 5 ms level-9 link."""
    sfcs = copy.deepcopy(CHAIN_SFCS)
    sfcs[0]["vnfs"].append({"id": "v2", "type": "fw", "conflicts": []})
    sfcs[0]["max_delay_ms"] = max_delay
    sfcs[0]["min_security"] = min_security
    return make_scenario(sfcs=sfcs)


def solo_placement(scenario, cloud_of, flavor_id="small"):
    """One VNFI per VNF, all on the given clouds, correct recorded metrics."""
    rows = []
    for k, (_, vnf) in enumerate(scenario.vnf_list()):
        rows.append(VnfAssignment(vnf_id=vnf.vnf_id, vnfi_id=f"i{k}",
                                  cloud_id=cloud_of[vnf.vnf_id], flavor_id=flavor_id,
                                  vnf_type=vnf.vnf_type))
    metrics = []
    for sfc in scenario.sfcs:
        total = Fraction(0)
        min_sec = scenario.s_max
        for a, b in zip(sfc.vnfs, sfc.vnfs[1:]):
            delay = scenario.hop_delay(cloud_of[a.vnf_id], cloud_of[b.vnf_id])
            sec = scenario.hop_security(cloud_of[a.vnf_id], cloud_of[b.vnf_id])
            if delay is None:  # unreachable hop; leave metrics partial
                continue
            total += delay
            min_sec = min(min_sec, sec)
        metrics.append(SfcMetrics(sfc_id=sfc.id, total_delay=total, min_link_security=min_sec))
    price = scenario.flavors.by_id(flavor_id).price
    return Placement(vnfs=tuple(rows), sfcs=tuple(metrics),
                     total_cost=price * len(rows))


def test_valid_placement_passes(two_cloud_scenario):
    placement = solo_placement(two_cloud_scenario, {"v0": "ca", "v1": "ca"})
    assert validate_solution(two_cloud_scenario, placement) == []


def test_dangling_ids_raise(two_cloud_scenario):
    placement = solo_placement(two_cloud_scenario, {"v0": "ca", "v1": "ca"})
    broken = replace(placement, vnfs=(replace(placement.vnfs[0], cloud_id="zz"),) + placement.vnfs[1:])
    with pytest.raises(PlacementError):
        validate_solution(two_cloud_scenario, broken)


def test_missing_and_duplicate_assignment(two_cloud_scenario):
    placement = solo_placement(two_cloud_scenario, {"v0": "ca", "v1": "ca"})
    missing = replace(placement, vnfs=placement.vnfs[:1])
    kinds = {v.kind for v in validate_solution(two_cloud_scenario, missing)}
    assert "assignment" in kinds
    doubled = replace(placement, vnfs=placement.vnfs + placement.vnfs[:1])
    kinds = {v.kind for v in validate_solution(two_cloud_scenario, doubled)}
    assert "assignment" in kinds


def test_type_mixing_detected(two_cloud_scenario):
    placement = solo_placement(two_cloud_scenario, {"v0": "ca", "v1": "ca"})
    # v0 and v1 have different types; force them onto one VNFI
    shared = tuple(replace(r, vnfi_id="i0") for r in placement.vnfs)
    kinds = {v.kind for v in validate_solution(two_cloud_scenario, replace(placement, vnfs=shared))}
    assert "type" in kinds


def test_conflict_and_sfc_loop_detected():
    sfcs = copy.deepcopy(CHAIN_SFCS)
    sfcs[0]["vnfs"][1]["type"] = "fw"  # same type so sharing is type-legal
    sfcs.append({"id": "s1", "traffic_mbps": 1, "max_delay_ms": 30, "min_security": 1,
                 "users": [], "vnfs": [{"id": "w0", "type": "fw", "conflicts": ["v0"]}]})
    sc = make_scenario(sfcs=sfcs)
    base = solo_placement(sc, {"v0": "ca", "v1": "ca", "w0": "ca"})
    loop = tuple(replace(r, vnfi_id="i0") if r.vnf_id in ("v0", "v1") else r for r in base.vnfs)
    kinds = {v.kind for v in validate_solution(sc, replace(base, vnfs=loop))}
    assert "sfc-loop" in kinds
    conflict = tuple(replace(r, vnfi_id="i0") if r.vnf_id in ("v0", "w0") else r for r in base.vnfs)
    kinds = {v.kind for v in validate_solution(sc, replace(base, vnfs=conflict))}
    assert "conflict" in kinds


def test_capacity_violation_detected(two_cloud_scenario):
    placement = solo_placement(two_cloud_scenario, {"v0": "ca", "v1": "ca"}, flavor_id="large")
    # two large flavors need 4 cpu total: fits; three do not, so shrink capacity instead
    small_cap = copy.deepcopy(TWO_CLOUD_TOPOLOGY)
    small_cap["clouds"][0]["capacity"] = {"cpu": 3, "ram": 3, "storage": 3}
    sc = make_scenario(topology=small_cap)
    fixed = replace(placement, total_cost=Fraction(10))
    kinds = {v.kind for v in validate_solution(sc, fixed)}
    assert "capacity" in kinds


def test_delay_and_security_violations():
    sc = chain3_scenario(max_delay=4, min_security=3)
    placement = solo_placement(sc, {"v0": "ca", "v1": "cb", "v2": "ca"})
    kinds = {v.kind for v in validate_solution(sc, placement)}
    assert "delay" in kinds  # 5 + 5 = 10 ms > 4 ms
    sc2 = chain3_scenario(max_delay=30, min_security=10)
    placement2 = solo_placement(sc2, {"v0": "ca", "v1": "cb", "v2": "ca"})
    kinds2 = {v.kind for v in validate_solution(sc2, placement2)}
    assert "security" in kinds2  # link level 9 < 10


def test_unreachable_hop_detected():
    topology = copy.deepcopy(TWO_CLOUD_TOPOLOGY)
    topology["links"] = []
    sc = make_scenario(topology=topology)
    placement = solo_placement(sc, {"v0": "ca", "v1": "cb"})
    kinds = {v.kind for v in validate_solution(sc, placement)}
    assert "unreachable" in kinds


def test_metrics_and_cost_mismatch_detected(two_cloud_scenario):
    placement = solo_placement(two_cloud_scenario, {"v0": "ca", "v1": "cb"})
    lied = replace(placement, sfcs=(replace(placement.sfcs[0], total_delay=Fraction(0)),))
    kinds = {v.kind for v in validate_solution(two_cloud_scenario, lied)}
    assert "metrics" in kinds
    cheap = replace(placement, total_cost=Fraction(1))
    kinds = {v.kind for v in validate_solution(two_cloud_scenario, cheap)}
    assert "cost" in kinds


# ---------------------------------------------------------------------------
# brute force


def test_brute_force_shares_when_possible():
    # two SFCs with one compatible fw VNF each: optimum shares one small VNFI
    sfcs = [
        {"id": "s0", "traffic_mbps": 1, "max_delay_ms": 30, "min_security": 1,
         "users": [], "vnfs": [{"id": "v0", "type": "fw", "conflicts": []}]},
        {"id": "s1", "traffic_mbps": 1, "max_delay_ms": 30, "min_security": 1,
         "users": [], "vnfs": [{"id": "w0", "type": "fw", "conflicts": []}]},
    ]
    sc = make_scenario(sfcs=sfcs)
    result = brute_force(sc)
    assert result.status == OPTIMAL
    assert result.objective == 2  # one "small" flavor
    vnfis = {r.vnfi_id for r in result.placement.vnfs}
    assert len(vnfis) == 1


def test_brute_force_conflict_forces_split():
    sfcs = [
        {"id": "s0", "traffic_mbps": 1, "max_delay_ms": 30, "min_security": 1,
         "users": [], "vnfs": [{"id": "v0", "type": "fw", "conflicts": ["w0"]}]},
        {"id": "s1", "traffic_mbps": 1, "max_delay_ms": 30, "min_security": 1,
         "users": [], "vnfs": [{"id": "w0", "type": "fw", "conflicts": []}]},
    ]
    sc = make_scenario(sfcs=sfcs)
    result = brute_force(sc)
    assert result.objective == 4  # two small VNFIs


def test_brute_force_delay_threshold_flips_feasibility():
    # chain of 3 distinct types; neither cloud can host all three VNFIs,
    # so some 5 ms hop is unavoidable
    topology = copy.deepcopy(TWO_CLOUD_TOPOLOGY)
    topology["clouds"][0]["capacity"] = {"cpu": 2, "ram": 2, "storage": 2}
    topology["clouds"][1]["capacity"] = {"cpu": 2, "ram": 2, "storage": 2}
    sfcs = copy.deepcopy(CHAIN_SFCS)
    sfcs[0]["vnfs"].append({"id": "v2", "type": "mx", "conflicts": []})
    sfcs[0]["max_delay_ms"] = 4
    flavors = [{"id": "only", "price": 1, "demand": {"cpu": 1, "ram": 1, "storage": 1}}]
    sc = make_scenario(topology=topology, sfcs=sfcs, flavors=flavors)
    assert brute_force(sc).status == INFEASIBLE  # any split needs >= 5 ms
    sfcs[0]["max_delay_ms"] = 5
    sc = make_scenario(topology=topology, sfcs=sfcs, flavors=flavors)
    result = brute_force(sc)
    assert result.status == OPTIMAL
    assert result.placement.sfcs[0].total_delay == 5


def test_brute_force_empty_sfcs():
    sc = make_scenario(sfcs=[])
    result = brute_force(sc)
    assert result.status == OPTIMAL and result.objective == 0


def test_space_guard():
    sfcs = []
    for s in range(4):
        sfcs.append({"id": f"s{s}", "traffic_mbps": 1, "max_delay_ms": 30, "min_security": 1,
                     "users": [], "vnfs": [{"id": f"x{s}{j}", "type": f"t{j}", "conflicts": []}
                                           for j in range(4)]})
    sc = make_scenario(sfcs=sfcs)
    with pytest.raises(SpaceTooLarge):
        brute_force(sc, max_points=1000)


def test_placement_doc_roundtrip(two_cloud_scenario):
    placement = solo_placement(two_cloud_scenario, {"v0": "ca", "v1": "cb"})
    back = Placement.from_doc(placement.to_doc())
    assert back.total_cost == placement.total_cost
    assert validate_solution(two_cloud_scenario, back) == []


def test_oracle_is_independent_of_the_model_builder():
    # the arbiter must not share constraint code with what it checks
    tree = ast.parse(Path("src/sfcplace/oracle.py").read_text())
    imported = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom) and node.module:
            imported.add(node.module)
        elif isinstance(node, ast.Import):
            imported.update(a.name for a in node.names)
    assert not any("ilp" in m or "solver" in m for m in imported), imported
