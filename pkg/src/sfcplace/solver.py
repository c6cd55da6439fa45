"""Exact minimization of an IlpModel by branch-and-bound over booleans.

All constraint arithmetic is exact (ints / Fractions).  Continuous hop-delay
variables are linear consequences of booleans and are substituted away
before the search; their values are recomputed for the final assignment.
Branching is deterministic: slot by slot, the slot's membership variables
first, then its cloud, then its flavor in ascending price order; decision
variables take the 1-branch first, auxiliaries the 0-branch first.
"""

from __future__ import annotations

import shlex
import subprocess
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

from . import ilp as ilp_mod
from .ilp import BuildOptions, IlpModel, LinearConstraint, SENSE_EQ, SENSE_GE, SENSE_LE, build_model
from .model import Scenario, normalize_types
from .result import (Budget, INFEASIBLE, ModelIntegrityError, OPTIMAL, SolveResult,
                     SolveStats, TIMED_OUT)

UNFIXED = -1


class _OutOfBudget(Exception):
    pass


def _substitute_continuous(model: IlpModel):
    """Replace each continuous variable by its defining boolean expression.

    Returns (boolean-only constraints, defs) with defs mapping the
    continuous index to (constant, [(coeff, boolean var), ...]).
    """
    kinds = model.registry.kinds
    defs = {}
    remaining = []
    for con in model.constraints:
        cont = [(c, v) for c, v in con.terms if kinds[v] == "c"]
        if con.sense == SENSE_EQ and len(cont) == 1 and cont[0][1] not in defs:
            a, cv = cont[0]
            rest = [(c, v) for c, v in con.terms if v != cv]
            defs[cv] = (Fraction(con.rhs) / a, [(Fraction(-c, 1) / a, v) for c, v in rest])
            continue
        remaining.append(con)

    out = []
    for con in remaining:
        if all(kinds[v] == "b" for _, v in con.terms):
            out.append(con)
            continue
        acc = {}
        shift = Fraction(0)
        for c, v in con.terms:
            if kinds[v] == "b":
                acc[v] = acc.get(v, 0) + c
            else:
                if v not in defs:
                    raise ModelIntegrityError(
                        f"continuous variable {model.registry.names[v]} has no defining equality")
                const, expr = defs[v]
                shift += c * const
                for c2, v2 in expr:
                    acc[v2] = acc.get(v2, 0) + c * c2
        terms = tuple((_as_int(c), v) for v, c in sorted(acc.items()) if c != 0)
        out.append(LinearConstraint(terms=terms, sense=con.sense, rhs=_as_int(con.rhs - shift),
                                    tag=con.tag))
    return out, defs


def _as_int(q):
    # plain ints keep activity arithmetic off the Fraction slow path
    if isinstance(q, Fraction) and q.denominator == 1:
        return int(q)
    return q


class _Search:
    """One branch-and-bound run over a prepared model."""

    def __init__(self, model: IlpModel):
        self.model = model
        reg = model.registry
        self.n = len(reg)
        self.kinds = reg.kinds
        self.constraints, self.defs = _substitute_continuous(model)
        for i in range(self.n):
            if self.kinds[i] == "c" and i not in self.defs:
                raise ModelIntegrityError(f"continuous variable {reg.names[i]} has no defining equality")

        self.sense = [c.sense for c in self.constraints]
        self.rhs = [c.rhs for c in self.constraints]
        self.terms = [c.terms for c in self.constraints]
        self.tags = [c.tag for c in self.constraints]
        self.minact = []
        self.maxact = []
        self.maxabs = []
        self.occurs = [[] for _ in range(self.n)]
        for ci, con in enumerate(self.constraints):
            lo = sum(min(0, c) for c, _ in con.terms)
            hi = sum(max(0, c) for c, _ in con.terms)
            self.minact.append(lo)
            self.maxact.append(hi)
            self.maxabs.append(max((abs(c) for c, _ in con.terms), default=0))
            for c, v in con.terms:
                self.occurs[v].append((ci, c))

        self.fixed = [UNFIXED] * self.n
        self.trail = []
        self.pending = [False] * len(self.constraints)
        self.queue = []

        objc = [Fraction(0)] * self.n
        for c, v in model.objective:
            objc[v] += c
        self.objc = [_as_int(c) for c in objc]
        self.obj_pos = [c > 0 for c in self.objc]
        self.obj_neg = [c < 0 for c in self.objc]
        self.committed = 0
        self.pending_neg = _as_int(sum(c for c in self.objc if c < 0))

        self._init_meta()
        self.stats = SolveStats()
        self.root_tags = {}
        self.conflict_tag = None
        self.at_root = False

    # -- meta-aware structures ----------------------------------------------

    def _init_meta(self):
        reg = self.model.registry
        meta = self.model.meta
        self.has_meta = bool(meta.get("vnf_ids"))
        if self.has_meta:
            # column-wise: fill slot u (members, cloud, flavor by ascending
            # price) before moving on, so cost and delay commit early
            n_vnfs = len(meta["vnf_type"])
            n_clouds = len(meta["cloud_ids"])
            prices = meta["prices"]
            flavor_order = sorted(range(len(prices)), key=lambda f: (prices[f], f))
            order = []
            for u in range(meta["pool"]):
                order += [reg.x[(v, u)] for v in range(n_vnfs)]
                order += [reg.u[(u, c)] for c in range(n_clouds)]
                order += [reg.phi[(u, f)] for f in flavor_order]
            chosen = set(order)
            order += [i for i in range(self.n) if self.kinds[i] == "b" and i not in chosen]
        else:
            order = [i for i in range(self.n) if self.kinds[i] == "b"]
        self.branch_order = order

        self.varinfo = [None] * self.n
        if self.has_meta:
            self.pool = meta["pool"]
            self.n_types = meta["n_types"]
            self.vnf_type = meta["vnf_type"]
            self.min_price = _as_int(meta["min_price"])
            options = meta.get("options")
            self.block_typed = bool(options and options.symmetry_breaking)
            self.pool_block = meta["pool_block"]
            for (v, u), idx in reg.x.items():
                self.varinfo[idx] = ("x", v, u)
            for (u, c), idx in reg.u.items():
                self.varinfo[idx] = ("u", u, c)
            for (u, f), idx in reg.phi.items():
                self.varinfo[idx] = ("phi", u, f)
            self.xcount_u = [0] * self.pool
            self.placed_u = [0] * self.pool
            self.phicount_u = [0] * self.pool
            self.assigned_v = [0] * len(self.vnf_type)
            self.unassigned_t = [0] * (self.n_types + 1)
            for t in self.vnf_type:
                self.unassigned_t[t] += 1
            self.xcount_ut = [[0] * (self.n_types + 1) for _ in range(self.pool)]
            # same-SFC VNFs of one type can never share a VNFI, so each type
            # needs at least its largest per-SFC multiplicity of instances
            vnf_sfc = meta["vnf_sfc"]
            per_sfc = {}
            for v, t in enumerate(self.vnf_type):
                key = (vnf_sfc[v], t)
                per_sfc[key] = per_sfc.get(key, 0) + 1
            self.needed_t = [0] * (self.n_types + 1)
            for (_, t), count in per_sfc.items():
                self.needed_t[t] = max(self.needed_t[t], count)
            prices = [_as_int(p) for p in meta["prices"]]
            self.phi_by_u = [[(prices[f], reg.phi[(u, f)]) for f in range(len(prices))]
                             for u in range(self.pool)]

    def _meta_update(self, var, val, sign):
        info = self.varinfo[var]
        if info is None or val != 1:
            return
        kind, a, b = info
        if kind == "x":
            self.xcount_u[b] += sign
            self.xcount_ut[b][self.vnf_type[a]] += sign
            self.assigned_v[a] += sign
            if (sign > 0 and self.assigned_v[a] == 1) or (sign < 0 and self.assigned_v[a] == 0):
                self.unassigned_t[self.vnf_type[a]] -= sign
        elif kind == "u":
            self.placed_u[a] += sign
        else:
            self.phicount_u[a] += sign

    # -- propagation ---------------------------------------------------------

    def _fix(self, var, val, tag=None):
        """Fix a boolean; returns False on immediate contradiction."""
        if self.fixed[var] != UNFIXED:
            return self.fixed[var] == val
        self.fixed[var] = val
        self.trail.append(var)
        if self.obj_pos[var]:
            if val == 1:
                self.committed += self.objc[var]
        elif self.obj_neg[var]:
            self.pending_neg -= self.objc[var]
            if val == 1:
                self.committed += self.objc[var]
        if self.varinfo[var] is not None:
            self._meta_update(var, val, +1)
        minact, maxact = self.minact, self.maxact
        sense_arr, rhs_arr, maxabs = self.sense, self.rhs, self.maxabs
        pending, queue = self.pending, self.queue
        for ci, c in self.occurs[var]:
            if c > 0:
                if val:
                    minact[ci] += c
                else:
                    maxact[ci] -= c
            else:
                if val:
                    maxact[ci] += c
                else:
                    minact[ci] -= c
            if pending[ci]:
                continue
            # enqueue only constraints close enough to their bound to force
            # or refute something; slack rows are skipped wholesale
            sense = sense_arr[ci]
            if ((sense != SENSE_GE and rhs_arr[ci] - minact[ci] < maxabs[ci])
                    or (sense != SENSE_LE and maxact[ci] - rhs_arr[ci] < maxabs[ci])):
                pending[ci] = True
                queue.append(ci)
        if tag is not None:
            self.stats.propagations += 1
            if self.at_root:
                self.root_tags[tag] = self.root_tags.get(tag, 0) + 1
        return True

    def _undo_to(self, mark):
        while len(self.trail) > mark:
            var = self.trail.pop()
            val = self.fixed[var]
            self.fixed[var] = UNFIXED
            if self.obj_pos[var]:
                if val == 1:
                    self.committed -= self.objc[var]
            elif self.obj_neg[var]:
                self.pending_neg += self.objc[var]
                if val == 1:
                    self.committed -= self.objc[var]
            if self.varinfo[var] is not None:
                self._meta_update(var, val, -1)
            for ci, c in self.occurs[var]:
                if c > 0:
                    if val:
                        self.minact[ci] -= c
                    else:
                        self.maxact[ci] += c
                else:
                    if val:
                        self.maxact[ci] -= c
                    else:
                        self.minact[ci] += c
        for ci in self.queue:
            self.pending[ci] = False
        self.queue.clear()

    def _propagate(self):
        """Bounds-consistency fixpoint; returns False and records the
        violated tag on conflict."""
        qi = 0
        while qi < len(self.queue):
            ci = self.queue[qi]
            qi += 1
            self.pending[ci] = False
            sense = self.sense[ci]
            rhs = self.rhs[ci]
            lo, hi = self.minact[ci], self.maxact[ci]
            if sense != SENSE_GE and lo > rhs:
                self.conflict_tag = self.tags[ci]
                return False
            if sense != SENSE_LE and hi < rhs:
                self.conflict_tag = self.tags[ci]
                return False
            force_le = sense != SENSE_GE and rhs - lo < self.maxabs[ci]
            force_ge = sense != SENSE_LE and hi - rhs < self.maxabs[ci]
            if not (force_le or force_ge):
                continue
            for c, v in self.terms[ci]:
                if self.fixed[v] != UNFIXED:
                    continue
                want = None
                if force_le:
                    if c > 0 and lo + c > rhs:
                        want = 0
                    elif c < 0 and lo - c > rhs:
                        want = 1
                if want is None and force_ge:
                    if c > 0 and hi - c < rhs:
                        want = 1
                    elif c < 0 and hi + c < rhs:
                        want = 0
                if want is not None:
                    if not self._fix(v, want, tag=self.tags[ci]):
                        self.conflict_tag = self.tags[ci]
                        return False
                    lo, hi = self.minact[ci], self.maxact[ci]
        del self.queue[:qi]
        for ci in self.queue:
            self.pending[ci] = False
        self.queue.clear()
        return True

    def _seed_all(self):
        for ci in range(len(self.constraints)):
            if not self.pending[ci]:
                self.pending[ci] = True
                self.queue.append(ci)

    # -- admissible lower bound ----------------------------------------------

    def bound(self):
        value = self.committed + self.pending_neg
        if not self.has_meta or self.pending_neg != 0:
            return value
        extra = 0
        open_count = [0] * (self.n_types + 1)
        wildcard = False
        for u in range(self.pool):
            is_open = self.xcount_u[u] > 0 or self.placed_u[u] > 0
            if not is_open:
                continue
            if self.phicount_u[u] == 0:
                # cheapest flavor not already excluded by propagation
                extra += min((p for p, idx in self.phi_by_u[u] if self.fixed[idx] != 0),
                             default=self.min_price)
            hosted = next((t for t in range(1, self.n_types + 1) if self.xcount_ut[u][t] > 0), None)
            if hosted is not None:
                open_count[hosted] += 1
            elif self.block_typed:
                open_count[self.pool_block[u]] += 1
            else:
                wildcard = True
        if not wildcard:
            for t in range(1, self.n_types + 1):
                if open_count[t] < self.needed_t[t]:
                    extra += (self.needed_t[t] - open_count[t]) * self.min_price
        return value + extra

    # -- search ---------------------------------------------------------------

    def run(self, budget: Budget, warm_start=None):
        start = time.perf_counter()
        self.budget = budget
        self.start = start
        self.incumbent = None
        self.incumbent_obj = None

        self.at_root = True
        self._seed_all()
        root_ok = self._propagate()
        self.at_root = False
        self.root_bound = self.bound() if root_ok else None

        if warm_start is not None:
            obj, point = warm_start
            self.incumbent_obj = obj
            self.incumbent = dict(point)

        status = None
        if not root_ok:
            status = INFEASIBLE
        else:
            try:
                self._dfs(0)
                status = OPTIMAL if self.incumbent is not None else INFEASIBLE
            except _OutOfBudget:
                status = TIMED_OUT

        self.stats.wall_ms = int((time.perf_counter() - start) * 1000)
        result = SolveResult(status=status, stats=self.stats,
                             root_tags=dict(self.root_tags),
                             conflict_tag=self.conflict_tag if status == INFEASIBLE else None,
                             bound=self.root_bound)
        if self.incumbent is not None and status != INFEASIBLE:
            result.objective = self.incumbent_obj
            assignment = dict(self.incumbent)
            for cv, (const, expr) in self.defs.items():
                assignment[cv] = const + sum(c * assignment.get(v, 0) for c, v in expr)
            result.assignment = assignment
        return result

    def _next_unfixed(self, pos):
        order = self.branch_order
        while pos < len(order) and self.fixed[order[pos]] != UNFIXED:
            pos += 1
        return pos

    def _dfs(self, pos):
        self.stats.nodes_explored += 1
        budget = self.budget
        if budget.max_nodes is not None and self.stats.nodes_explored > budget.max_nodes:
            raise _OutOfBudget
        if (budget.max_wall_ms is not None and self.stats.nodes_explored % 1024 == 0
                and (time.perf_counter() - self.start) * 1000 > budget.max_wall_ms):
            raise _OutOfBudget

        if self.incumbent_obj is not None and self.bound() >= self.incumbent_obj:
            return
        pos = self._next_unfixed(pos)
        if pos == len(self.branch_order):
            obj = self.committed
            if self.incumbent_obj is None or obj < self.incumbent_obj:
                self.incumbent_obj = obj
                self.incumbent = {i: self.fixed[i] for i in range(self.n) if self.kinds[i] == "b"}
            return
        var = self.branch_order[pos]
        # commit decision variables to 1 first: sharing and cheap flavors
        # reach good incumbents early, which tightens pruning
        values = (1, 0) if self.varinfo[var] is not None else (0, 1)
        for val in values:
            mark = len(self.trail)
            if self._fix(var, val) and self._propagate():
                self._dfs(pos + 1)
            self._undo_to(mark)


# ---------------------------------------------------------------------------
# public operations


def propagate(model: IlpModel, partial: dict):
    """Propagate a partial 0/1 assignment to its fixpoint.

    Returns ("consistent", implied) where implied maps variables fixed
    beyond the given ones, or ("conflict", tag) naming the refuting
    constraint family.
    """
    search = _Search(model)
    search._seed_all()
    if not search._propagate():
        return ("conflict", search.conflict_tag)
    for var, val in sorted(partial.items()):
        if not search._fix(var, int(val)) or not search._propagate():
            return ("conflict", search.conflict_tag)
    implied = {v: search.fixed[v] for v in range(search.n)
               if search.fixed[v] != UNFIXED and v not in partial and search.kinds[v] == "b"}
    return ("consistent", implied)


def lower_bound(model: IlpModel, partial: dict):
    """Admissible lower bound on the best completion of a consistent
    partial assignment; never exceeds the true completion optimum."""
    search = _Search(model)
    search._seed_all()
    ok = search._propagate()
    for var, val in sorted(partial.items()):
        ok = ok and search._fix(var, int(val)) and search._propagate()
    if not ok:
        raise ValueError("partial assignment is inconsistent")
    return search.bound()


def solve_bnb(model: IlpModel, budget: Budget | None = None, warm_start=None) -> SolveResult:
    """Exact branch-and-bound solve.  Optimal results carry a full
    assignment; timed-out results carry the best incumbent found."""
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 10000 + 2 * len(model.registry)))
    return _Search(model).run(budget or Budget(), warm_start=warm_start)


# ---------------------------------------------------------------------------
# greedy incumbent (upper bound only; greedy failure is not infeasibility)


def greedy_first_fit(scenario: Scenario, model: IlpModel):
    """Each VNF on its own pool VNFI, first delay/security-feasible cloud,
    cheapest flavor that fits.  Returns (objective, point) or None."""
    if not scenario.is_normalized:
        scenario = normalize_types(scenario)
    meta = model.meta
    clouds = scenario.topology.clouds
    flavors = scenario.flavors.flavors
    order = sorted(range(len(flavors)), key=lambda f: (flavors[f].price, f))

    slot = {t: start for t, (start, end) in meta["blocks"].items()}
    residual = {c.id: dict(c.capacity) for c in clouds}
    rows = []
    v_global = 0
    cloud_of = {}
    for sfc in scenario.sfcs:
        used_delay = Fraction(0)
        prev_cloud = None
        for vnf in sfc.vnfs:
            u = slot[vnf.vnf_type]
            slot[vnf.vnf_type] += 1
            chosen = None
            for cloud in clouds:
                if prev_cloud is not None and cloud.id != prev_cloud:
                    sec = scenario.hop_security(prev_cloud, cloud.id)
                    delay = scenario.hop_delay(prev_cloud, cloud.id)
                    if sec is None or sec < sfc.min_security:
                        continue
                    if used_delay + delay > sfc.max_delay:
                        continue
                else:
                    delay = Fraction(0)
                for f in order:
                    if all(residual[cloud.id][k] >= flavors[f].demand[k] for k in flavors[f].demand):
                        chosen = (cloud.id, f, delay)
                        break
                if chosen:
                    break
            if chosen is None:
                return None
            cloud_id, f, delay = chosen
            for k, units in flavors[f].demand.items():
                residual[cloud_id][k] -= units
            used_delay += delay
            prev_cloud = cloud_id
            cloud_of[vnf.vnf_id] = cloud_id
            rows.append((v_global, u, cloud_id, f, vnf.vnf_type))
            v_global += 1

    from .oracle import Placement, SfcMetrics, VnfAssignment
    placements = tuple(VnfAssignment(vnf_id=meta["vnf_ids"][v], vnfi_id=f"u{u}",
                                     cloud_id=cid, flavor_id=meta["flavor_ids"][f], vnf_type=t)
                       for v, u, cid, f, t in rows)
    metrics = []
    for sfc in scenario.sfcs:
        total = Fraction(0)
        min_sec = scenario.s_max
        for a, b in zip(sfc.vnfs, sfc.vnfs[1:]):
            total += scenario.hop_delay(cloud_of[a.vnf_id], cloud_of[b.vnf_id])
            min_sec = min(min_sec, scenario.hop_security(cloud_of[a.vnf_id], cloud_of[b.vnf_id]))
        metrics.append(SfcMetrics(sfc_id=sfc.id, total_delay=total, min_link_security=min_sec))
    cost = sum((flavors[f].price for _, _, _, f, _ in rows), Fraction(0))
    placement = Placement(vnfs=placements, sfcs=tuple(metrics), total_cost=cost)

    point = ilp_mod.encode_placement(scenario, model, placement)
    if ilp_mod.evaluate_point(model, point):
        return None  # greedy point violates the model; discard, do not conclude
    return ilp_mod.objective_value(model, point), point


# ---------------------------------------------------------------------------
# external backend (process-boundary contract: LP text in, solution file out)


def solve_external(model: IlpModel, command: str, workdir=None) -> SolveResult:
    """Run an external MILP solver: ``<command> <model.lp> <solution.sol>``.

    The solution file carries one ``=obj= <value>`` header (or a single
    ``=infeasible=`` line) followed by ``<var> <value>`` lines.  The
    objective is re-evaluated in exact arithmetic from the parsed point.
    """
    start = time.perf_counter()
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        lp_path = Path(tmp) / "model.lp"
        sol_path = Path(tmp) / "solution.sol"
        lp_path.write_text(model.to_lp())
        proc = subprocess.run(shlex.split(command) + [str(lp_path), str(sol_path)],
                              capture_output=True, text=True)
        if proc.returncode != 0:
            raise RuntimeError(f"external backend failed ({proc.returncode}): {proc.stderr.strip()}")
        text = sol_path.read_text()

    stats = SolveStats(wall_ms=int((time.perf_counter() - start) * 1000))
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if lines and lines[0] == "=infeasible=":
        return SolveResult(status=INFEASIBLE, stats=stats)
    if not lines or not lines[0].startswith("=obj="):
        raise RuntimeError("external backend wrote no =obj= header")
    reg = model.registry
    assignment = {}
    for line in lines[1:]:
        name, raw = line.split()
        if name not in reg.by_name:
            raise RuntimeError(f"external backend named unknown variable {name}")
        idx = reg.by_name[name]
        value = Fraction(raw)
        if reg.kinds[idx] == "b":
            nearest = int(round(float(value)))
            if abs(value - nearest) > Fraction(1, 10**6) or nearest not in (0, 1):
                raise RuntimeError(f"non-binary value {raw} for {name}")
            value = nearest
        assignment[idx] = value
    for i in range(len(reg)):
        assignment.setdefault(i, 0)
    objective = ilp_mod.objective_value(model, assignment)
    return SolveResult(status=OPTIMAL, objective=objective, assignment=assignment, stats=stats)


def solve(model: IlpModel, budget: Budget | None = None, backend: str = "bnb",
          warm_start=None) -> SolveResult:
    if backend == "bnb":
        return solve_bnb(model, budget, warm_start=warm_start)
    if backend.startswith("external:"):
        return solve_external(model, backend[len("external:"):])
    raise ValueError(f"unknown backend {backend!r}")


def solve_scenario(scenario: Scenario, options: BuildOptions | None = None,
                   budget: Budget | None = None, backend: str = "bnb"):
    """Normalize, build, warm-start, solve, decode.

    Returns (model, result, placement); placement is None without an
    incumbent.
    """
    scenario = normalize_types(scenario) if not scenario.is_normalized else scenario
    model = build_model(scenario, options)
    warm = greedy_first_fit(scenario, model) if backend == "bnb" else None
    result = solve(model, budget, backend=backend, warm_start=warm)
    placement = None
    if result.assignment and result.status in (OPTIMAL, TIMED_OUT) and result.objective is not None:
        placement = ilp_mod.decode_placement(scenario, model, result.assignment)
        result.placement = placement
    return model, result, placement
