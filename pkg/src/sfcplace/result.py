"""Shared result types for the exact solver and the exhaustive oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
TIMED_OUT = "timed_out"


class SpaceTooLarge(RuntimeError):
    """The enumeration space exceeds the configured point budget."""


class ModelIntegrityError(RuntimeError):
    """The model references unregistered variables or is otherwise malformed."""


@dataclass
class Budget:
    """Search budget.  max_nodes is the deterministic knob; a wall-clock
    limit makes results machine-dependent and is therefore opt-in."""

    max_nodes: int | None = None
    max_wall_ms: int | None = None


@dataclass
class SolveStats:
    nodes_explored: int = 0
    propagations: int = 0
    wall_ms: int = 0


@dataclass
class SolveResult:
    """Outcome of a solve.  When status is OPTIMAL the assignment satisfies
    every constraint exactly and ``objective`` equals the objective expression
    evaluated at the assignment (rational arithmetic, no tolerance)."""

    status: str
    objective: object = None  # Fraction when an incumbent exists
    assignment: dict = field(default_factory=dict)  # var index -> 0/1 or Fraction
    stats: SolveStats = field(default_factory=SolveStats)
    placement: object = None  # optional decoded Placement (oracle / convenience)
    root_tags: dict = field(default_factory=dict)  # tag -> forced fixings at root
    conflict_tag: str | None = None  # constraint tag that refuted the root
    bound: object = None  # best admissible lower bound when not proven optimal
