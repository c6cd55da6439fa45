"""Shared builders for hand-written scenarios used across the test suite."""

import copy

import pytest

from sfcplace.model import load_scenario, normalize_types

TWO_CLOUD_TOPOLOGY = {
    "clouds": [
        {"id": "ca", "capacity": {"cpu": 4, "ram": 4, "storage": 4}},
        {"id": "cb", "capacity": {"cpu": 4, "ram": 4, "storage": 4}},
    ],
    "access_nodes": ["an0"],
    "iot_domains": ["iot0"],
    "links": [
        {"a": "ca", "b": "cb", "delay_ms": 5, "bandwidth_mbps": 100, "security_level": 9},
    ],
}

CHAIN_SFCS = [
    {
        "id": "s0",
        "traffic_mbps": 1,
        "max_delay_ms": 30,
        "min_security": 3,
        "users": ["an0"],
        "vnfs": [
            {"id": "v0", "type": "fw", "conflicts": []},
            {"id": "v1", "type": "lb", "conflicts": []},
        ],
    },
]

BASIC_FLAVORS = [
    {"id": "small", "price": 2, "demand": {"cpu": 1, "ram": 1, "storage": 1}},
    {"id": "large", "price": 5, "demand": {"cpu": 2, "ram": 2, "storage": 2}},
]


def make_scenario(topology=None, sfcs=None, flavors=None, s_max=15, normalized=True):
    topology = copy.deepcopy(topology if topology is not None else TWO_CLOUD_TOPOLOGY)
    sfcs = copy.deepcopy(sfcs if sfcs is not None else CHAIN_SFCS)
    flavors = copy.deepcopy(flavors if flavors is not None else BASIC_FLAVORS)
    scenario = load_scenario(topology, sfcs, flavors, s_max=s_max)
    return normalize_types(scenario) if normalized else scenario


@pytest.fixture
def two_cloud_scenario():
    return make_scenario()
