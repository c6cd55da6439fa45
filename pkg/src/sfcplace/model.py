"""Domain model: clouds, links, SFC requests, flavors, and scenario I/O.

Numbers that may be fractional (delays, bandwidth, traffic, prices) are
held as exact ``Fraction``s so downstream arithmetic stays exact; the JSON
documents carry plain decimal numbers.  Every type here is immutable after
load and safe to share between threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any

RESOURCE_KINDS = ("cpu", "ram", "storage")
DEFAULT_S_MAX = 15


class ScenarioError(ValueError):
    """A scenario document failed schema validation or an invariant.

    ``path`` locates the offending field, e.g. ``sfcs[1].vnfs[0].conflicts``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class LinkProps:
    """Properties of an inter-node link: delay (ms), bandwidth (Mbps),
    integer security level in [1, s_max]."""

    delay: Fraction
    bandwidth: Fraction
    security_level: int


@dataclass(frozen=True)
class CloudNode:
    id: str
    capacity: dict  # resource kind -> non-negative integer units


@dataclass(frozen=True)
class VnfSpec:
    vnf_id: str
    vnf_type: Any  # raw label on load; dense int code after normalize_types
    conflicts: frozenset


@dataclass(frozen=True)
class SfcRequest:
    id: str
    vnfs: tuple  # ordered VnfSpec chain
    traffic: Fraction  # Mbps
    max_delay: Fraction  # ms, end-to-end threshold
    min_security: int
    users: tuple
    bandwidth_demand: Fraction  # stored; unused unless the bandwidth extension is on


@dataclass(frozen=True)
class Flavor:
    id: str
    demand: dict  # resource kind -> integer units
    price: Fraction


@dataclass(frozen=True)
class FlavorCatalog:
    flavors: tuple

    def by_id(self, flavor_id: str) -> Flavor:
        for f in self.flavors:
            if f.id == flavor_id:
                return f
        raise KeyError(flavor_id)

    def min_price(self) -> Fraction:
        return min(f.price for f in self.flavors)


@dataclass(frozen=True)
class Topology:
    clouds: tuple  # CloudNode
    access_nodes: tuple
    iot_domains: tuple
    links: dict  # sorted (a, b) id pair -> LinkProps

    def cloud_ids(self):
        return [c.id for c in self.clouds]

    def node_ids(self):
        return set(self.cloud_ids()) | set(self.access_nodes) | set(self.iot_domains)

    def link_between(self, a: str, b: str):
        """Link properties between two distinct nodes, or None if unreachable."""
        if a == b:
            raise ValueError("no self link; intra-cloud hops are synthesized")
        return self.links.get((a, b) if a <= b else (b, a))


@dataclass(frozen=True)
class Scenario:
    """Validated bundle of a topology, the SFC requests, and the flavor catalog."""

    topology: Topology
    sfcs: tuple
    flavors: FlavorCatalog
    s_max: int = DEFAULT_S_MAX
    n_types: int | None = None  # set by normalize_types

    @property
    def is_normalized(self) -> bool:
        return self.n_types is not None

    def vnf_list(self):
        """All (sfc, vnf) pairs in deterministic chain order."""
        return [(sfc, vnf) for sfc in self.sfcs for vnf in sfc.vnfs]

    def hop_delay(self, a: str, b: str):
        """Propagation delay of the hop a->b; 0 within a cloud, None if unreachable."""
        if a == b:
            return Fraction(0)
        link = self.topology.link_between(a, b)
        return None if link is None else link.delay

    def hop_security(self, a: str, b: str):
        """Security level of the hop a->b; s_max within a cloud, None if unreachable."""
        if a == b:
            return self.s_max
        link = self.topology.link_between(a, b)
        return None if link is None else link.security_level


# ---------------------------------------------------------------------------
# validation helpers


def _expect(doc, typ, path, what):
    if not isinstance(doc, typ):
        raise ScenarioError(path, f"expected {what}, got {type(doc).__name__}")
    return doc


def _get(doc, key, path, typ=None, what=None, default=_expect):
    if key not in doc:
        if default is not _expect:
            return default
        raise ScenarioError(f"{path}.{key}", "missing required field")
    value = doc[key]
    if typ is not None:
        _expect(value, typ, f"{path}.{key}", what or typ.__name__)
    return value


def _rational(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float, Fraction)):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    q = Fraction(str(value)) if isinstance(value, float) else Fraction(value)
    if minimum is not None and q < minimum:
        raise ScenarioError(path, f"must be >= {minimum}, got {value}")
    return q


def _int_units(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, (float, Fraction)) and Fraction(str(value)).denominator == 1:
            value = int(value)
        else:
            raise ScenarioError(path, f"expected an integer, got {value!r}")
    if value < 0:
        raise ScenarioError(path, f"must be >= 0, got {value}")
    return value


def _resource_map(doc, path):
    _expect(doc, dict, path, "an object")
    if set(doc) != set(RESOURCE_KINDS):
        raise ScenarioError(path, f"resource kinds must be exactly {set(RESOURCE_KINDS)}, got {set(doc)}")
    return {kind: _int_units(doc[kind], f"{path}.{kind}") for kind in RESOURCE_KINDS}


# ---------------------------------------------------------------------------
# loading


def _parse_doc(doc, name):
    if isinstance(doc, (str, bytes)):
        try:
            # parse_float keeps decimal literals exact
            return json.loads(doc, parse_float=Fraction)
        except json.JSONDecodeError as exc:
            raise ScenarioError(name, f"invalid JSON: {exc}") from exc
    return doc


def _load_topology(doc, s_max):
    _expect(doc, dict, "topology", "an object")
    clouds = []
    seen = set()
    for i, cdoc in enumerate(_get(doc, "clouds", "topology", list, "a list")):
        path = f"topology.clouds[{i}]"
        _expect(cdoc, dict, path, "an object")
        cid = _get(cdoc, "id", path, str)
        if cid in seen:
            raise ScenarioError(f"{path}.id", f"duplicate cloud id {cid!r}")
        seen.add(cid)
        clouds.append(CloudNode(id=cid, capacity=_resource_map(_get(cdoc, "capacity", path), f"{path}.capacity")))

    access = tuple(_expect(n, str, f"topology.access_nodes[{i}]", "a node id")
                   for i, n in enumerate(_get(doc, "access_nodes", "topology", list, "a list", default=[])))
    iot = tuple(_expect(n, str, f"topology.iot_domains[{i}]", "a node id")
                for i, n in enumerate(_get(doc, "iot_domains", "topology", list, "a list", default=[])))

    known = seen | set(access) | set(iot)
    links = {}
    for i, ldoc in enumerate(_get(doc, "links", "topology", list, "a list", default=[])):
        path = f"topology.links[{i}]"
        _expect(ldoc, dict, path, "an object")
        a = _get(ldoc, "a", path, str)
        b = _get(ldoc, "b", path, str)
        for end in (a, b):
            if end not in known:
                raise ScenarioError(path, f"dangling id: link endpoint {end!r} is not a known node")
        if a == b:
            raise ScenarioError(path, "self links are not allowed")
        key = (a, b) if a <= b else (b, a)
        if key in links:
            raise ScenarioError(path, f"duplicate link between {a!r} and {b!r}")
        level = _int_units(_get(ldoc, "security_level", path), f"{path}.security_level")
        if not 1 <= level <= s_max:
            raise ScenarioError(f"{path}.security_level", f"must be in [1, {s_max}], got {level}")
        links[key] = LinkProps(
            delay=_rational(_get(ldoc, "delay_ms", path), f"{path}.delay_ms", minimum=0),
            bandwidth=_rational(_get(ldoc, "bandwidth_mbps", path, default=0), f"{path}.bandwidth_mbps", minimum=0),
            security_level=level,
        )
    return Topology(clouds=tuple(clouds), access_nodes=access, iot_domains=iot, links=links)


def _load_sfcs(doc, topology, s_max):
    _expect(doc, list, "sfcs", "a list")
    sfcs = []
    sfc_ids = set()
    vnf_ids = set()
    raw = []  # (sfc index, vnf index, conflicts)
    for i, sdoc in enumerate(doc):
        path = f"sfcs[{i}]"
        _expect(sdoc, dict, path, "an object")
        sid = _get(sdoc, "id", path, str)
        if sid in sfc_ids:
            raise ScenarioError(f"{path}.id", f"duplicate sfc id {sid!r}")
        sfc_ids.add(sid)
        min_sec = _int_units(_get(sdoc, "min_security", path), f"{path}.min_security")
        if not 1 <= min_sec <= s_max:
            raise ScenarioError(f"{path}.min_security", f"must be in [1, {s_max}], got {min_sec}")
        max_delay = _rational(_get(sdoc, "max_delay_ms", path), f"{path}.max_delay_ms")
        if max_delay <= 0:
            raise ScenarioError(f"{path}.max_delay_ms", f"must be > 0, got {max_delay}")
        users = []
        for j, user in enumerate(_get(sdoc, "users", path, list, "a list", default=[])):
            _expect(user, str, f"{path}.users[{j}]", "a node id")
            if user not in topology.node_ids():
                raise ScenarioError(f"{path}.users[{j}]", f"dangling id: unknown node {user!r}")
            users.append(user)
        vnfs = []
        vdocs = _get(sdoc, "vnfs", path, list, "a list")
        if not vdocs:
            raise ScenarioError(f"{path}.vnfs", "chain must be non-empty")
        for j, vdoc in enumerate(vdocs):
            vpath = f"{path}.vnfs[{j}]"
            _expect(vdoc, dict, vpath, "an object")
            vid = _get(vdoc, "id", vpath, str)
            if vid in vnf_ids:
                raise ScenarioError(f"{vpath}.id", f"duplicate vnf id {vid!r}")
            vnf_ids.add(vid)
            vtype = _get(vdoc, "type", vpath)
            if not isinstance(vtype, (str, int)) or isinstance(vtype, bool):
                raise ScenarioError(f"{vpath}.type", f"expected a type label, got {vtype!r}")
            conflicts = _get(vdoc, "conflicts", vpath, list, "a list", default=[])
            raw.append((i, j, list(conflicts)))
            vnfs.append(VnfSpec(vnf_id=vid, vnf_type=vtype, conflicts=frozenset()))
        sfcs.append(SfcRequest(
            id=sid,
            vnfs=tuple(vnfs),
            traffic=_rational(_get(sdoc, "traffic_mbps", path, default=0), f"{path}.traffic_mbps", minimum=0),
            max_delay=max_delay,
            min_security=min_sec,
            users=tuple(users),
            bandwidth_demand=_rational(_get(sdoc, "bandwidth_mbps", path, default=0), f"{path}.bandwidth_mbps", minimum=0),
        ))

    # symmetric closure of the conflict relation
    conflict_sets = {vid: set() for vid in vnf_ids}
    for i, j, conflicts in raw:
        vid = sfcs[i].vnfs[j].vnf_id
        for k, other in enumerate(conflicts):
            cpath = f"sfcs[{i}].vnfs[{j}].conflicts[{k}]"
            _expect(other, str, cpath, "a vnf id")
            if other not in vnf_ids:
                raise ScenarioError(cpath, f"dangling id: unknown vnf {other!r}")
            if other == vid:
                raise ScenarioError(cpath, "a vnf cannot conflict with itself")
            conflict_sets[vid].add(other)
            conflict_sets[other].add(vid)
    closed = []
    for sfc in sfcs:
        vnfs = tuple(replace(v, conflicts=frozenset(conflict_sets[v.vnf_id])) for v in sfc.vnfs)
        closed.append(replace(sfc, vnfs=vnfs))
    return tuple(closed)


def _load_flavors(doc):
    _expect(doc, list, "flavors", "a list")
    if not doc:
        raise ScenarioError("flavors", "at least one flavor is required")
    flavors = []
    seen = set()
    for i, fdoc in enumerate(doc):
        path = f"flavors[{i}]"
        _expect(fdoc, dict, path, "an object")
        fid = _get(fdoc, "id", path, str)
        if fid in seen:
            raise ScenarioError(f"{path}.id", f"duplicate flavor id {fid!r}")
        seen.add(fid)
        flavors.append(Flavor(
            id=fid,
            demand=_resource_map(_get(fdoc, "demand", path), f"{path}.demand"),
            price=_rational(_get(fdoc, "price", path), f"{path}.price", minimum=0),
        ))
    return FlavorCatalog(flavors=tuple(flavors))


def load_scenario(topology_doc, sfcs_doc, flavors_doc, s_max: int = DEFAULT_S_MAX) -> Scenario:
    """Parse and validate the three scenario documents (JSON text or parsed).

    Applies the symmetric closure to conflict sets.  Raises ScenarioError
    with a field path on any schema violation, dangling id, negative
    capacity/price, or min_security above s_max.
    """
    topology = _load_topology(_parse_doc(topology_doc, "topology"), s_max)
    sfcs = _load_sfcs(_parse_doc(sfcs_doc, "sfcs"), topology, s_max)
    flavors = _load_flavors(_parse_doc(flavors_doc, "flavors"))
    return Scenario(topology=topology, sfcs=sfcs, flavors=flavors, s_max=s_max)


def load_scenario_files(topology_path, sfcs_path, flavors_path, s_max: int = DEFAULT_S_MAX) -> Scenario:
    docs = []
    for path in (topology_path, sfcs_path, flavors_path):
        with open(path) as fh:
            docs.append(fh.read())
    return load_scenario(*docs, s_max=s_max)


def load_bundle(path, s_max: int = DEFAULT_S_MAX) -> Scenario:
    """Load a single-file bundle {"topology": ..., "sfcs": ..., "flavors": ...}."""
    with open(path) as fh:
        doc = json.load(fh, parse_float=Fraction)
    _expect(doc, dict, "bundle", "an object")
    return load_scenario(_get(doc, "topology", "bundle"), _get(doc, "sfcs", "bundle"),
                         _get(doc, "flavors", "bundle"), s_max=s_max)


# ---------------------------------------------------------------------------
# saving


def _json_num(q):
    q = Fraction(q)
    return int(q) if q.denominator == 1 else float(q)


def scenario_to_docs(scenario: Scenario):
    """Canonical JSON documents (topology, sfcs, flavors) for the scenario."""
    top = {
        "clouds": [{"id": c.id, "capacity": {k: c.capacity[k] for k in RESOURCE_KINDS}}
                   for c in scenario.topology.clouds],
        "access_nodes": list(scenario.topology.access_nodes),
        "iot_domains": list(scenario.topology.iot_domains),
        "links": [{"a": a, "b": b,
                   "delay_ms": _json_num(props.delay),
                   "bandwidth_mbps": _json_num(props.bandwidth),
                   "security_level": props.security_level}
                  for (a, b), props in sorted(scenario.topology.links.items())],
    }
    sfcs = [{
        "id": sfc.id,
        "traffic_mbps": _json_num(sfc.traffic),
        "max_delay_ms": _json_num(sfc.max_delay),
        "min_security": sfc.min_security,
        "bandwidth_mbps": _json_num(sfc.bandwidth_demand),
        "users": list(sfc.users),
        "vnfs": [{"id": v.vnf_id, "type": v.vnf_type, "conflicts": sorted(v.conflicts)}
                 for v in sfc.vnfs],
    } for sfc in scenario.sfcs]
    flavors = [{"id": f.id, "price": _json_num(f.price),
                "demand": {k: f.demand[k] for k in RESOURCE_KINDS}}
               for f in scenario.flavors.flavors]
    return top, sfcs, flavors


def save_scenario(scenario: Scenario, topology_path, sfcs_path, flavors_path) -> None:
    docs = scenario_to_docs(scenario)
    for doc, path in zip(docs, (topology_path, sfcs_path, flavors_path)):
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")


# ---------------------------------------------------------------------------
# type normalization


def normalize_types(scenario: Scenario) -> Scenario:
    """Re-encode VNF type labels as dense integer codes 1..n_types.

    Codes are assigned by first appearance in chain order, so equality of
    types (the only thing the constraints use) is preserved.  Idempotent.
    """
    codes = {}
    for _, vnf in scenario.vnf_list():
        if vnf.vnf_type not in codes:
            codes[vnf.vnf_type] = len(codes) + 1
    sfcs = tuple(
        replace(sfc, vnfs=tuple(replace(v, vnf_type=codes[v.vnf_type]) for v in sfc.vnfs))
        for sfc in scenario.sfcs
    )
    return replace(scenario, sfcs=sfcs, n_types=len(codes))
