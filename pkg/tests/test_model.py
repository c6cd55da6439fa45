import copy
import json
from fractions import Fraction

import pytest

from sfcplace.model import (DEFAULT_S_MAX, Scenario, ScenarioError, load_bundle,
                            load_scenario, normalize_types, save_scenario,
                            scenario_to_docs)
from tests.conftest import BASIC_FLAVORS, CHAIN_SFCS, TWO_CLOUD_TOPOLOGY, make_scenario


def test_load_roundtrip_basics(two_cloud_scenario):
    sc = two_cloud_scenario
    assert [c.id for c in sc.topology.clouds] == ["ca", "cb"]
    assert sc.topology.link_between("cb", "ca").delay == 5
    assert sc.sfcs[0].max_delay == 30
    assert sc.flavors.by_id("small").price == 2
    assert sc.s_max == DEFAULT_S_MAX


def test_fractional_numbers_parse_exactly():
    topology = copy.deepcopy(TWO_CLOUD_TOPOLOGY)
    topology["links"][0]["delay_ms"] = 0.1
    sc = load_scenario(json.dumps(topology), json.dumps(CHAIN_SFCS), json.dumps(BASIC_FLAVORS))
    # 0.1 must survive as the rational 1/10, not as the nearest double
    assert sc.topology.link_between("ca", "cb").delay == Fraction(1, 10)


def test_conflicts_symmetric_closure():
    sfcs = copy.deepcopy(CHAIN_SFCS)
    sfcs.append({
        "id": "s1", "traffic_mbps": 1, "max_delay_ms": 30, "min_security": 1,
        "users": [], "vnfs": [{"id": "w0", "type": "fw", "conflicts": ["v0"]}],
    })
    sc = make_scenario(sfcs=sfcs)
    by_id = {v.vnf_id: v for _, v in sc.vnf_list()}
    assert "v0" in by_id["w0"].conflicts
    assert "w0" in by_id["v0"].conflicts  # closure adds the reverse edge


def test_intra_cloud_hop_synthesized(two_cloud_scenario):
    assert two_cloud_scenario.hop_delay("ca", "ca") == 0
    assert two_cloud_scenario.hop_security("ca", "ca") == DEFAULT_S_MAX
    with pytest.raises(ValueError):
        two_cloud_scenario.topology.link_between("ca", "ca")


def test_unreachable_pair_is_none():
    topology = copy.deepcopy(TWO_CLOUD_TOPOLOGY)
    topology["links"] = []
    sc = make_scenario(topology=topology)
    assert sc.hop_delay("ca", "cb") is None
    assert sc.hop_security("ca", "cb") is None


@pytest.mark.parametrize("mutate,path_fragment", [
    (lambda t, s, f: t["clouds"].append({"id": "ca", "capacity": {"cpu": 1, "ram": 1, "storage": 1}}),
     "clouds[2].id"),
    (lambda t, s, f: t["links"].append({"a": "ca", "b": "zz", "delay_ms": 1,
                                        "bandwidth_mbps": 1, "security_level": 1}),
     "links[1]"),
    (lambda t, s, f: t["links"][0].update(security_level=99), "security_level"),
    (lambda t, s, f: t["clouds"][0]["capacity"].pop("ram"), "capacity"),
    (lambda t, s, f: s[0].update(max_delay_ms=0), "max_delay_ms"),
    (lambda t, s, f: s[0].update(min_security=0), "min_security"),
    (lambda t, s, f: s[0].update(vnfs=[]), "vnfs"),
    (lambda t, s, f: s[0]["vnfs"][0].update(conflicts=["nope"]), "conflicts[0]"),
    (lambda t, s, f: s[0]["vnfs"][0].update(conflicts=["v0"]), "conflicts[0]"),
    (lambda t, s, f: s[0]["vnfs"][1].update(id="v0"), "vnfs[1].id"),
    (lambda t, s, f: s[0].update(users=["ghost"]), "users[0]"),
    (lambda t, s, f: f.clear(), "flavors"),
    (lambda t, s, f: f[0].update(price=-1), "price"),
    (lambda t, s, f: f[0]["demand"].update(extra=1), "demand"),
])
def test_validation_rejects_with_path(mutate, path_fragment):
    topology = copy.deepcopy(TWO_CLOUD_TOPOLOGY)
    sfcs = copy.deepcopy(CHAIN_SFCS)
    flavors = copy.deepcopy(BASIC_FLAVORS)
    mutate(topology, sfcs, flavors)
    with pytest.raises(ScenarioError) as err:
        load_scenario(topology, sfcs, flavors)
    assert path_fragment in err.value.path


def test_duplicate_link_rejected():
    topology = copy.deepcopy(TWO_CLOUD_TOPOLOGY)
    topology["links"].append({"a": "cb", "b": "ca", "delay_ms": 2,
                              "bandwidth_mbps": 10, "security_level": 2})
    with pytest.raises(ScenarioError):
        make_scenario(topology=topology)


def test_normalize_types_dense_and_idempotent():
    sc = make_scenario(normalized=False)
    assert not sc.is_normalized
    norm = normalize_types(sc)
    assert norm.is_normalized
    types = [v.vnf_type for _, v in norm.vnf_list()]
    assert types == [1, 2]  # first-appearance order
    assert norm.n_types == 2
    again = normalize_types(norm)
    assert [v.vnf_type for _, v in again.vnf_list()] == types


def test_save_load_roundtrip(tmp_path, two_cloud_scenario):
    paths = [tmp_path / n for n in ("topology.json", "sfcs.json", "flavors.json")]
    save_scenario(two_cloud_scenario, *paths)
    from sfcplace.model import load_scenario_files
    back = normalize_types(load_scenario_files(*paths))
    assert scenario_to_docs(back) == scenario_to_docs(two_cloud_scenario)
    # and saving again is byte-identical (canonical field order)
    save_scenario(back, tmp_path / "t2.json", tmp_path / "s2.json", tmp_path / "f2.json")
    assert (tmp_path / "t2.json").read_bytes() == paths[0].read_bytes()


def test_bundle_loading(tmp_path):
    bundle = {"topology": TWO_CLOUD_TOPOLOGY, "sfcs": CHAIN_SFCS, "flavors": BASIC_FLAVORS}
    path = tmp_path / "bundle.json"
    path.write_text(json.dumps(bundle))
    sc = load_bundle(path)
    assert [s.id for s in sc.sfcs] == ["s0"]


def test_s_max_bounds_enforced():
    with pytest.raises(ScenarioError):
        make_scenario(s_max=5)  # link security 9 now out of range
    sfcs = copy.deepcopy(CHAIN_SFCS)
    sfcs[0]["min_security"] = 6
    topology = copy.deepcopy(TWO_CLOUD_TOPOLOGY)
    topology["links"][0]["security_level"] = 5
    with pytest.raises(ScenarioError):
        make_scenario(topology=topology, sfcs=sfcs, s_max=5)
