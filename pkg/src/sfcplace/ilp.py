"""Boolean linear program for the placement problem.

Translates a Scenario into a solver-agnostic model: a variable registry,
tagged linear constraints, and a minimize objective over flavor prices.
Products of booleans are linearized with the usual three-inequality
pattern; the type-agreement constraints use a big-M of n_types + 1, the
smallest valid value given dense type codes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import RESOURCE_KINDS, Scenario, normalize_types
from .oracle import Placement, SfcMetrics, VnfAssignment
from .result import ModelIntegrityError

SENSE_LE = "<="
SENSE_GE = ">="
SENSE_EQ = "="

#: every tag a built model may carry
ALL_TAGS = (
    ["eq1", "eq2", "eq3", "eq5", "eq6", "eq7", "eq8", "eq9", "eq10"]
    + [f"eq{i}" for i in range(13, 20)]
    + [f"eq{i}" for i in range(21, 25)]
    + ["eq26", "eq27", "eq28", "hopdef", "eq32", "eq33", "conflict",
       "ext-symbreak", "ext-bandwidth", "ext-endpoints"]
)


@dataclass
class BuildOptions:
    symmetry_breaking: bool = True  # ext-symbreak: block typing + open-order chain
    bandwidth: bool = False  # ext-bandwidth: per-link traffic capacity
    endpoints: bool = False  # ext-endpoints: ingress/egress hops in the delay budget


@dataclass(frozen=True)
class LinearConstraint:
    terms: tuple  # ((coeff, var index), ...)
    sense: str
    rhs: object  # int or Fraction
    tag: str


class VarRegistry:
    """Registers every decision variable exactly once with a stable index.

    Keyed maps use integer coordinates: v = global VNF index (chain order
    across SFCs), u = candidate VNFI index, c = cloud index, f = flavor
    index, p = dense type code.
    """

    def __init__(self):
        self.names = []
        self.kinds = []  # "b" boolean, "c" continuous >= 0
        self.by_name = {}
        self.x = {}      # (v, u) -> idx
        self.b = {}      # (sfc, u) -> idx
        self.yc = {}     # (v, c) -> idx
        self.a = {}      # (u, p) -> idx
        self.u = {}      # (u, c) -> idx
        self.phi = {}    # (u, f) -> idx
        self.yvuc = {}   # (v, u, c) -> idx
        self.cucf = {}   # (u, c, f) -> idx
        self.ypair = {}  # (v1, c1, v2, c2) -> idx
        self.fhop = {}   # (v1, v2) -> idx

    def _add(self, name, kind="b"):
        if name in self.by_name:
            raise ModelIntegrityError(f"variable {name} registered twice")
        idx = len(self.names)
        self.names.append(name)
        self.kinds.append(kind)
        self.by_name[name] = idx
        return idx

    def __len__(self):
        return len(self.names)


class IlpModel:
    """Variable registry + tagged linear constraints + minimize objective."""

    def __init__(self, registry: VarRegistry):
        self.registry = registry
        self.constraints = []
        self.objective = []  # [(coeff, var index), ...], direction: minimize
        self.meta = {}

    def add(self, tag, terms, sense, rhs):
        clean = tuple((c, v) for c, v in terms if c != 0)
        for _, v in clean:
            if not 0 <= v < len(self.registry):
                raise ModelIntegrityError(f"constraint {tag} references unregistered variable {v}")
        self.constraints.append(LinearConstraint(terms=clean, sense=sense, rhs=rhs, tag=tag))

    def tag_counts(self):
        counts = {}
        for con in self.constraints:
            counts[con.tag] = counts.get(con.tag, 0) + 1
        return counts

    def var_count(self, kind=None):
        if kind is None:
            return len(self.registry)
        return sum(1 for k in self.registry.kinds if k == kind)

    # -- LP text serialization ------------------------------------------------

    def to_lp(self) -> str:
        """Standard LP text: minimize section, tagged rows, binaries section."""
        reg = self.registry
        expr = _lp_expr(self.objective, reg)
        if not expr:
            expr = ("0 " + reg.names[0]) if reg.names else "0"
        out = ["Minimize", " obj: " + expr, "Subject To"]
        for i, con in enumerate(self.constraints):
            name = f"{con.tag.replace('-', '_')}_{i}"
            out.append(f" {name}: {_lp_expr(con.terms, reg)} {con.sense} {_fmt_num(con.rhs)}")
        binaries = [reg.names[i] for i in range(len(reg)) if reg.kinds[i] == "b"]
        if binaries:
            out.append("Binary")
            for name in binaries:
                out.append(f" {name}")
        out.append("End")
        return "\n".join(out) + "\n"


def _fmt_num(x):
    q = Fraction(x)
    return str(q.numerator) if q.denominator == 1 else repr(float(q))


def _lp_expr(terms, reg):
    parts = []
    for coeff, var in terms:
        sign = "-" if coeff < 0 else "+"
        if parts or sign == "-":
            parts.append(sign)
        parts.append(f"{_fmt_num(abs(coeff))} {reg.names[var]}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# model construction


def _register_variables(scenario: Scenario, options: BuildOptions) -> IlpModel:
    vnfs = scenario.vnf_list()
    n_vnfs = len(vnfs)
    n_types = scenario.n_types
    clouds = scenario.topology.cloud_ids()
    flavors = scenario.flavors.flavors

    # candidate VNFI pool: one slot per VNF, grouped into per-type blocks
    vnf_type = [vnf.vnf_type for _, vnf in vnfs]
    blocks = {}
    pool_block = []
    for t in range(1, n_types + 1):
        size = sum(1 for ty in vnf_type if ty == t)
        blocks[t] = (len(pool_block), len(pool_block) + size)
        pool_block.extend([t] * size)
    pool = len(pool_block)
    assert pool == n_vnfs

    reg = VarRegistry()
    for v in range(n_vnfs):
        for u in range(pool):
            reg.x[(v, u)] = reg._add(f"X_{v}_{u}")
    for s in range(len(scenario.sfcs)):
        for u in range(pool):
            reg.b[(s, u)] = reg._add(f"B_{s}_{u}")
    for v in range(n_vnfs):
        for c in range(len(clouds)):
            reg.yc[(v, c)] = reg._add(f"YC_{v}_{c}")
    for u in range(pool):
        for p in range(1, n_types + 1):
            reg.a[(u, p)] = reg._add(f"A_{u}_{p}")
    for u in range(pool):
        for c in range(len(clouds)):
            reg.u[(u, c)] = reg._add(f"U_{u}_{c}")
    for u in range(pool):
        for f in range(len(flavors)):
            reg.phi[(u, f)] = reg._add(f"PHI_{u}_{f}")
    for v in range(n_vnfs):
        for u in range(pool):
            for c in range(len(clouds)):
                reg.yvuc[(v, u, c)] = reg._add(f"XU_{v}_{u}_{c}")
    for u in range(pool):
        for c in range(len(clouds)):
            for f in range(len(flavors)):
                reg.cucf[(u, c, f)] = reg._add(f"UF_{u}_{c}_{f}")

    # consecutive pairs per SFC, in chain order
    pairs = []
    base = 0
    for s, sfc in enumerate(scenario.sfcs):
        for j in range(len(sfc.vnfs) - 1):
            pairs.append((base + j, base + j + 1, s))
        base += len(sfc.vnfs)
    for v1, v2, _ in pairs:
        for c1 in range(len(clouds)):
            for c2 in range(len(clouds)):
                if c1 != c2:
                    reg.ypair[(v1, c1, v2, c2)] = reg._add(f"PAIR_{v1}_{c1}_{v2}_{c2}")
    for v1, v2, _ in pairs:
        reg.fhop[(v1, v2)] = reg._add(f"FHOP_{v1}_{v2}", kind="c")

    model = IlpModel(reg)
    model.meta = {
        "options": options,
        "n_types": n_types,
        "pool": pool,
        "pool_block": pool_block,
        "blocks": blocks,
        "vnf_ids": [vnf.vnf_id for _, vnf in vnfs],
        "vnf_type": vnf_type,
        "vnf_sfc": [s for s, sfc in enumerate(scenario.sfcs) for _ in sfc.vnfs],
        "cloud_ids": clouds,
        "flavor_ids": [f.id for f in flavors],
        "prices": [f.price for f in flavors],
        "min_price": min(f.price for f in flavors),
        "pairs": pairs,
    }
    return model


def emit_vnf_vnfi_constraints(model: IlpModel, scenario: Scenario) -> None:
    """VNF-to-VNFI rows: single VNFI per VNF, per-SFC usage indicator,
    conflict exclusion, and big-M type agreement."""
    reg = model.registry
    vnfs = scenario.vnf_list()
    pool = model.meta["pool"]
    n_types = model.meta["n_types"]
    big_m = n_types + 1

    for v in range(len(vnfs)):
        model.add("eq1", [(1, reg.x[(v, u)]) for u in range(pool)], SENSE_EQ, 1)

    base = 0
    for s, sfc in enumerate(scenario.sfcs):
        for u in range(pool):
            terms = [(1, reg.x[(base + j, u)]) for j in range(len(sfc.vnfs))]
            terms.append((-1, reg.b[(s, u)]))
            model.add("eq2", terms, SENSE_EQ, 0)
        base += len(sfc.vnfs)

    # pairwise exclusion of conflicting VNFs on a shared VNFI
    index_of = {vnf.vnf_id: v for v, (_, vnf) in enumerate(vnfs)}
    for v, (_, vnf) in enumerate(vnfs):
        for other in sorted(vnf.conflicts):
            w = index_of[other]
            if v < w:
                for u in range(pool):
                    model.add("conflict", [(1, reg.x[(v, u)]), (1, reg.x[(w, u)])], SENSE_LE, 1)

    for v, (_, vnf) in enumerate(vnfs):
        for u in range(pool):
            for p in range(1, n_types + 1):
                x, a = reg.x[(v, u)], reg.a[(u, p)]
                model.add("eq5", [(big_m, x), (big_m, a)], SENSE_LE, 2 * big_m + p - vnf.vnf_type)
                model.add("eq6", [(big_m, x), (big_m, a)], SENSE_LE, 2 * big_m + vnf.vnf_type - p)

    n_clouds = len(model.meta["cloud_ids"])
    for u in range(pool):
        terms = [(1, reg.a[(u, p)]) for p in range(1, n_types + 1)]
        terms += [(-1, reg.u[(u, c)]) for c in range(n_clouds)]
        model.add("eq7", terms, SENSE_EQ, 0)


def emit_vnfi_cloud_constraints(model: IlpModel, scenario: Scenario) -> None:
    """VNFI deployment rows and the X*U product linearization."""
    reg = model.registry
    pool = model.meta["pool"]
    n_vnfs = len(model.meta["vnf_ids"])
    n_clouds = len(model.meta["cloud_ids"])

    for u in range(pool):
        for v in range(n_vnfs):
            terms = [(1, reg.x[(v, u)])] + [(-1, reg.u[(u, c)]) for c in range(n_clouds)]
            model.add("eq8", terms, SENSE_LE, 0)
    for u in range(pool):
        terms = [(1, reg.u[(u, c)]) for c in range(n_clouds)]
        terms += [(-1, reg.x[(v, u)]) for v in range(n_vnfs)]
        model.add("eq9", terms, SENSE_LE, 0)
    for u in range(pool):
        model.add("eq10", [(1, reg.u[(u, c)]) for c in range(n_clouds)], SENSE_LE, 1)

    for v in range(n_vnfs):
        for u in range(pool):
            for c in range(n_clouds):
                yvuc, x, uu = reg.yvuc[(v, u, c)], reg.x[(v, u)], reg.u[(u, c)]
                model.add("eq13", [(1, yvuc), (-1, uu)], SENSE_LE, 0)
                model.add("eq14", [(1, yvuc), (-1, x)], SENSE_LE, 0)
                model.add("eq15", [(1, yvuc), (-1, x), (-1, uu)], SENSE_GE, -1)
    for v in range(n_vnfs):
        for u in range(pool):
            for c in range(n_clouds):
                model.add("eq16", [(1, reg.yvuc[(v, u, c)]), (-1, reg.yc[(v, c)])], SENSE_LE, 0)
    for v in range(n_vnfs):
        for c in range(n_clouds):
            terms = [(1, reg.yc[(v, c)])] + [(-1, reg.yvuc[(v, u, c)]) for u in range(pool)]
            model.add("eq17", terms, SENSE_LE, 0)
    for v in range(n_vnfs):
        terms = [(1, reg.yc[(v, c)]) for c in range(n_clouds)]
        model.add("eq18", terms, SENSE_EQ, 1)
        # duplicate row kept under its own tag for traceability
        model.add("eq3", terms, SENSE_EQ, 1)


def emit_resource_constraints(model: IlpModel, scenario: Scenario) -> None:
    """Flavor selection, U*Phi linearization, and per-cloud capacity."""
    reg = model.registry
    pool = model.meta["pool"]
    n_clouds = len(model.meta["cloud_ids"])
    flavors = scenario.flavors.flavors

    for u in range(pool):
        terms = [(1, reg.phi[(u, f)]) for f in range(len(flavors))]
        terms += [(-1, reg.u[(u, c)]) for c in range(n_clouds)]
        model.add("eq19", terms, SENSE_EQ, 0)

    for u in range(pool):
        for c in range(n_clouds):
            for f in range(len(flavors)):
                cucf, uu, phi = reg.cucf[(u, c, f)], reg.u[(u, c)], reg.phi[(u, f)]
                model.add("eq21", [(1, cucf), (-1, uu)], SENSE_LE, 0)
                model.add("eq22", [(1, cucf), (-1, phi)], SENSE_LE, 0)
                model.add("eq23", [(1, cucf), (-1, uu), (-1, phi)], SENSE_GE, -1)

    for kind in RESOURCE_KINDS:
        for c, cloud in enumerate(scenario.topology.clouds):
            terms = [(flavors[f].demand[kind], reg.cucf[(u, c, f)])
                     for u in range(pool) for f in range(len(flavors))]
            model.add("eq24", terms, SENSE_LE, cloud.capacity[kind])


def emit_delay_constraints(model: IlpModel, scenario: Scenario) -> None:
    """Pair co-location linearization, hop-delay definition, and the
    per-SFC end-to-end delay budget.

    The hop delay of a consecutive pair is the propagation delay of the
    inter-cloud link carrying it (0 when co-located), expressed directly
    as a linear sum over the pair variables.
    """
    reg = model.registry
    clouds = model.meta["cloud_ids"]
    options: BuildOptions = model.meta["options"]

    for v1, v2, _ in model.meta["pairs"]:
        for c1 in range(len(clouds)):
            for c2 in range(len(clouds)):
                if c1 == c2:
                    continue
                yp = reg.ypair[(v1, c1, v2, c2)]
                model.add("eq26", [(1, yp), (-1, reg.yc[(v1, c1)])], SENSE_LE, 0)
                model.add("eq27", [(1, yp), (-1, reg.yc[(v2, c2)])], SENSE_LE, 0)
                model.add("eq28", [(1, yp), (-1, reg.yc[(v1, c1)]), (-1, reg.yc[(v2, c2)])], SENSE_GE, -1)

    for v1, v2, _ in model.meta["pairs"]:
        terms = [(1, reg.fhop[(v1, v2)])]
        for c1 in range(len(clouds)):
            for c2 in range(len(clouds)):
                if c1 == c2:
                    continue
                delay = scenario.hop_delay(clouds[c1], clouds[c2])
                if delay is not None and delay != 0:
                    terms.append((-delay, reg.ypair[(v1, c1, v2, c2)]))
        model.add("hopdef", terms, SENSE_EQ, 0)

    for s, sfc in enumerate(scenario.sfcs):
        terms = [(1, reg.fhop[(v1, v2)]) for v1, v2, si in model.meta["pairs"] if si == s]
        if options.endpoints:
            terms += _endpoint_terms(model, scenario, s)
        if terms:
            model.add("eq32", terms, SENSE_LE, sfc.max_delay)


def _endpoint_terms(model, scenario, s):
    """Ingress (first user -> first-VNF cloud) and egress (last-VNF cloud ->
    first IoT domain) hop delays, added to the delay budget when enabled."""
    reg = model.registry
    clouds = model.meta["cloud_ids"]
    sfc = scenario.sfcs[s]
    first = sum(len(x.vnfs) for x in scenario.sfcs[:s])
    last = first + len(sfc.vnfs) - 1
    terms = []
    if sfc.users:
        for c, cid in enumerate(clouds):
            link = scenario.topology.link_between(sfc.users[0], cid)
            if link is not None and link.delay != 0:
                terms.append((link.delay, reg.yc[(first, c)]))
    if scenario.topology.iot_domains:
        iot = scenario.topology.iot_domains[0]
        for c, cid in enumerate(clouds):
            link = scenario.topology.link_between(cid, iot)
            if link is not None and link.delay != 0:
                terms.append((link.delay, reg.yc[(last, c)]))
    return terms


def emit_security_constraints(model: IlpModel, scenario: Scenario) -> None:
    """A pair may straddle a link only if its security level meets the SFC's
    minimum; unreachable cloud pairs get a zero right-hand side."""
    reg = model.registry
    clouds = model.meta["cloud_ids"]
    for v1, v2, s in model.meta["pairs"]:
        xi = scenario.sfcs[s].min_security
        for c1 in range(len(clouds)):
            for c2 in range(len(clouds)):
                if c1 == c2:
                    continue
                level = scenario.hop_security(clouds[c1], clouds[c2])
                model.add("eq33", [(xi, reg.ypair[(v1, c1, v2, c2)])], SENSE_LE,
                          0 if level is None else level)


def _emit_extensions(model: IlpModel, scenario: Scenario) -> None:
    reg = model.registry
    options: BuildOptions = model.meta["options"]
    n_clouds = len(model.meta["cloud_ids"])

    if options.symmetry_breaking:
        # pin each pool block to its type and force open VNFIs to pack at
        # the low indices of the block; VNFIs are interchangeable, so this
        # keeps the optimal value
        for u, block_type in enumerate(model.meta["pool_block"]):
            for p in range(1, model.meta["n_types"] + 1):
                if p != block_type:
                    model.add("ext-symbreak", [(1, reg.a[(u, p)])], SENSE_EQ, 0)
        for start, end in model.meta["blocks"].values():
            for u in range(start + 1, end):
                terms = [(1, reg.u[(u, c)]) for c in range(n_clouds)]
                terms += [(-1, reg.u[(u - 1, c)]) for c in range(n_clouds)]
                model.add("ext-symbreak", terms, SENSE_LE, 0)
        # lexicographic slot assignment: order the slots of a block by the
        # lowest-index VNF they host, so the k-th VNF of a type never needs
        # a slot past position k of its block
        vnf_type = model.meta["vnf_type"]
        for t, (start, end) in model.meta["blocks"].items():
            members = [v for v in range(len(vnf_type)) if vnf_type[v] == t]
            for k, v in enumerate(members):
                for u in range(start + k + 1, end):
                    model.add("ext-symbreak", [(1, reg.x[(v, u)])], SENSE_EQ, 0)

    if options.bandwidth:
        clouds = model.meta["cloud_ids"]
        for c1 in range(n_clouds):
            for c2 in range(c1 + 1, n_clouds):
                link = scenario.topology.link_between(clouds[c1], clouds[c2])
                if link is None:
                    continue
                terms = []
                for v1, v2, s in model.meta["pairs"]:
                    lam = scenario.sfcs[s].traffic
                    terms.append((lam, reg.ypair[(v1, c1, v2, c2)]))
                    terms.append((lam, reg.ypair[(v1, c2, v2, c1)]))
                if terms:
                    model.add("ext-bandwidth", terms, SENSE_LE, link.bandwidth)


def emit_objective(model: IlpModel, scenario: Scenario) -> None:
    """Minimize the summed price of the flavors used by deployed VNFIs."""
    reg = model.registry
    model.objective = [(price, reg.phi[(u, f)])
                       for u in range(model.meta["pool"])
                       for f, price in enumerate(model.meta["prices"])]


def build_model(scenario: Scenario, options: BuildOptions | None = None) -> IlpModel:
    """Build the full boolean linear program for a scenario.

    Infeasibility (e.g. an SFC whose minimum security exceeds every link)
    is the solver's verdict, never a build error.
    """
    if not scenario.is_normalized:
        scenario = normalize_types(scenario)
    model = _register_variables(scenario, options or BuildOptions())
    emit_vnf_vnfi_constraints(model, scenario)
    emit_vnfi_cloud_constraints(model, scenario)
    emit_resource_constraints(model, scenario)
    emit_delay_constraints(model, scenario)
    emit_security_constraints(model, scenario)
    _emit_extensions(model, scenario)
    emit_objective(model, scenario)
    return model


# ---------------------------------------------------------------------------
# closed-form size formulas (asserted by tests)


def expected_counts(scenario: Scenario) -> dict:
    scenario = normalize_types(scenario) if not scenario.is_normalized else scenario
    n_v = sum(len(sfc.vnfs) for sfc in scenario.sfcs)
    n_p = sum(len(sfc.vnfs) - 1 for sfc in scenario.sfcs)
    n_c = len(scenario.topology.clouds)
    n_f = len(scenario.flavors.flavors)
    n_t = scenario.n_types
    n_s = len(scenario.sfcs)
    return {
        "X": n_v * n_v, "B": n_s * n_v, "YC": n_v * n_c, "A": n_v * n_t,
        "U": n_v * n_c, "PHI": n_v * n_f, "XU": n_v * n_v * n_c,
        "UF": n_v * n_c * n_f, "PAIR": n_p * n_c * (n_c - 1), "FHOP": n_p,
        "total": (n_v * n_v + n_s * n_v + n_v * n_c + n_v * n_t + n_v * n_c
                  + n_v * n_f + n_v * n_v * n_c + n_v * n_c * n_f
                  + n_p * n_c * (n_c - 1) + n_p),
    }


# ---------------------------------------------------------------------------
# point evaluation and placement codecs


def evaluate_point(model: IlpModel, point: dict) -> list:
    """Tags of constraints violated by a full assignment (missing vars read 0)."""
    violated = []
    for con in model.constraints:
        lhs = sum(c * point.get(v, 0) for c, v in con.terms)
        ok = (lhs <= con.rhs if con.sense == SENSE_LE
              else lhs >= con.rhs if con.sense == SENSE_GE
              else lhs == con.rhs)
        if not ok:
            violated.append(con.tag)
    return violated


def products_consistent(model: IlpModel, point: dict) -> bool:
    """Check the linearized variables equal their defining products at a
    0/1 point: XU = X*U, UF = U*Phi, PAIR = YC*YC."""
    reg = model.registry
    get = lambda i: point.get(i, 0)
    for (v, u, c), idx in reg.yvuc.items():
        if get(idx) != get(reg.x[(v, u)]) * get(reg.u[(u, c)]):
            return False
    for (u, c, f), idx in reg.cucf.items():
        if get(idx) != get(reg.u[(u, c)]) * get(reg.phi[(u, f)]):
            return False
    for (v1, c1, v2, c2), idx in reg.ypair.items():
        if get(idx) != get(reg.yc[(v1, c1)]) * get(reg.yc[(v2, c2)]):
            return False
    return True


def objective_value(model: IlpModel, point: dict):
    return sum((c * point.get(v, 0) for c, v in model.objective), Fraction(0))


def decode_placement(scenario: Scenario, model: IlpModel, assignment: dict) -> Placement:
    """Decode a solved 0/1 assignment into a Placement (ids, per-SFC
    delay/security metrics, total cost)."""
    if not scenario.is_normalized:
        scenario = normalize_types(scenario)
    reg = model.registry
    meta = model.meta
    clouds = meta["cloud_ids"]
    get = lambda i: int(assignment.get(i, 0))

    rows = []
    vnf_cloud = {}
    for v, vnf_id in enumerate(meta["vnf_ids"]):
        used = [u for u in range(meta["pool"]) if get(reg.x[(v, u)])]
        if len(used) != 1:
            raise ModelIntegrityError(f"vnf {vnf_id} uses {len(used)} VNFIs in the assignment")
        u = used[0]
        placed = [c for c in range(len(clouds)) if get(reg.u[(u, c)])]
        flavored = [f for f in range(len(meta["flavor_ids"])) if get(reg.phi[(u, f)])]
        typed = [p for p in range(1, meta["n_types"] + 1) if get(reg.a[(u, p)])]
        if len(placed) != 1 or len(flavored) != 1 or len(typed) != 1:
            raise ModelIntegrityError(f"VNFI u{u} is not consistently deployed")
        rows.append(VnfAssignment(vnf_id=vnf_id, vnfi_id=f"u{u}",
                                  cloud_id=clouds[placed[0]],
                                  flavor_id=meta["flavor_ids"][flavored[0]],
                                  vnf_type=typed[0]))
        vnf_cloud[vnf_id] = clouds[placed[0]]

    metrics = []
    for sfc in scenario.sfcs:
        total = Fraction(0)
        min_sec = scenario.s_max
        for a, b in zip(sfc.vnfs, sfc.vnfs[1:]):
            ca, cb = vnf_cloud[a.vnf_id], vnf_cloud[b.vnf_id]
            delay = scenario.hop_delay(ca, cb)
            sec = scenario.hop_security(ca, cb)
            if delay is None or sec is None:
                raise ModelIntegrityError(f"sfc {sfc.id} crosses unreachable clouds {ca}->{cb}")
            total += delay
            min_sec = min(min_sec, sec)
        metrics.append(SfcMetrics(sfc_id=sfc.id, total_delay=total, min_link_security=min_sec))

    cost = sum((meta["prices"][f] for u in range(meta["pool"])
                for f in range(len(meta["flavor_ids"])) if get(reg.phi[(u, f)])), Fraction(0))
    return Placement(vnfs=tuple(rows), sfcs=tuple(metrics), total_cost=cost)


def encode_placement(scenario: Scenario, model: IlpModel, placement: Placement) -> dict:
    """Full 0/1 assignment (plus derived hop delays) realizing a placement.

    VNFI ids may be arbitrary; each distinct id is mapped onto the next
    free slot of its type block in chain order, which keeps the point
    compatible with the lexicographic symmetry-breaking rows.
    """
    if not scenario.is_normalized:
        scenario = normalize_types(scenario)
    reg = model.registry
    meta = model.meta
    clouds = meta["cloud_ids"]
    cloud_index = {cid: c for c, cid in enumerate(clouds)}
    flavor_index = {fid: f for f, fid in enumerate(meta["flavor_ids"])}
    vnf_index = {vid: v for v, vid in enumerate(meta["vnf_ids"])}

    point = {i: 0 for i in range(len(reg)) if reg.kinds[i] == "b"}
    vnf_u = {}
    u_cloud = {}
    u_flavor = {}
    slot_of = {}
    next_slot = {t: start for t, (start, _) in meta["blocks"].items()}
    for row in sorted(placement.vnfs, key=lambda r: vnf_index[r.vnf_id]):
        v = vnf_index[row.vnf_id]
        if row.vnfi_id not in slot_of:
            t = meta["vnf_type"][v]
            slot_of[row.vnfi_id] = next_slot[t]
            next_slot[t] += 1
        u = slot_of[row.vnfi_id]
        vnf_u[v] = u
        u_cloud[u] = cloud_index[row.cloud_id]
        u_flavor[u] = flavor_index[row.flavor_id]
        point[reg.x[(v, u)]] = 1
        point[reg.yc[(v, cloud_index[row.cloud_id])]] = 1
    for u, c in u_cloud.items():
        point[reg.u[(u, c)]] = 1
        point[reg.phi[(u, u_flavor[u])]] = 1
        point[reg.a[(u, meta["vnf_type"][next(v for v, uu in vnf_u.items() if uu == u)])]] = 1
    for (s, u), idx in reg.b.items():
        point[idx] = int(any(meta["vnf_sfc"][v] == s and vnf_u[v] == u for v in vnf_u))
    for (v, u, c), idx in reg.yvuc.items():
        point[idx] = point[reg.x[(v, u)]] * point[reg.u[(u, c)]]
    for (u, c, f), idx in reg.cucf.items():
        point[idx] = point[reg.u[(u, c)]] * point[reg.phi[(u, f)]]
    for (v1, c1, v2, c2), idx in reg.ypair.items():
        point[idx] = point[reg.yc[(v1, c1)]] * point[reg.yc[(v2, c2)]]
    for (v1, v2), idx in reg.fhop.items():
        total = Fraction(0)
        for c1 in range(len(clouds)):
            for c2 in range(len(clouds)):
                if c1 != c2 and point[reg.ypair[(v1, c1, v2, c2)]]:
                    delay = scenario.hop_delay(clouds[c1], clouds[c2])
                    total += delay if delay is not None else Fraction(0)
        point[idx] = total
    return point
