"""Contexts, possibilistic support tables and single-world value assignments.

A context is a set of commuting PVMs, represented by their joint PVM. Its
support row lists the joint outcomes with nonzero Born probability. A global
value assignment picks one label per observable; it is consistent with a
table when its restriction to every context is in that context's row.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from .hilbert import STRUCT_TOL, DimensionError, Operator, StateVector
from .measurement import (
    DEFAULT_SUPPORT_TOL,
    PVM,
    MeasurementError,
    Outcome,
    format_outcome,
    join_all,
    support,
)

ValueAssignment = dict[str, str]
WILDCARD = "*"


def commutes(p: Operator, q: Operator, tol: float = STRUCT_TOL) -> bool:
    if p.dim != q.dim:
        raise DimensionError(f"dimension mismatch: {p.dim} vs {q.dim}")
    return float(np.max(np.abs(p.entries @ q.entries - q.entries @ p.entries))) <= tol


@dataclass(frozen=True, eq=False)
class Context:
    id: str
    pvms: tuple[PVM, ...]
    joint: PVM = None  # type: ignore[assignment]

    def __post_init__(self):
        pvms = tuple(self.pvms)
        if not pvms:
            raise MeasurementError(f"context {self.id} has no PVMs")
        names = [o for p in pvms for o in p.observables]
        if len(set(names)) != len(names):
            raise MeasurementError(f"context {self.id} repeats an observable: {names}")
        object.__setattr__(self, "pvms", pvms)
        # join_all raises NonCommutingError on any non-commuting projector pair
        object.__setattr__(self, "joint", join_all(pvms))

    @property
    def observables(self) -> tuple[str, ...]:
        return self.joint.observables

    def __repr__(self):
        return f"Context({self.id}: {self.joint.observable_id})"


@dataclass(frozen=True)
class SupportTable:
    """Per-context support rows plus the label sets needed to enumerate assignments.

    ``state_ref`` is None for tables written down directly rather than
    computed from a state.
    """

    rows: Mapping[str, frozenset[Outcome]]
    observables: Mapping[str, tuple[str, ...]]
    labels: Mapping[str, tuple[str, ...]]
    state_ref: StateVector | None = None

    def __post_init__(self):
        if set(self.rows) != set(self.observables):
            raise ValueError("rows and context observables must name the same contexts")
        for cid, row in self.rows.items():
            obs = self.observables[cid]
            for tup in row:
                if len(tup) != len(obs) or any(v not in self.labels[o] for o, v in zip(obs, tup)):
                    raise ValueError(f"row {cid} holds a tuple {tup} outside its label sets")

    @property
    def context_ids(self) -> tuple[str, ...]:
        return tuple(self.rows)

    @property
    def all_observables(self) -> tuple[str, ...]:
        return tuple(self.labels)

    @classmethod
    def from_rows(
        cls,
        rows: Mapping[str, Iterable[Outcome]],
        observables: Mapping[str, Sequence[str]],
        labels: Mapping[str, Sequence[str]],
    ) -> "SupportTable":
        return cls(
            {cid: frozenset(tuple(t) for t in row) for cid, row in rows.items()},
            {cid: tuple(obs) for cid, obs in observables.items()},
            {o: tuple(ls) for o, ls in labels.items()},
        )


def build_support_table(
    state: StateVector,
    contexts: Sequence[Context],
    tol: float = DEFAULT_SUPPORT_TOL,
) -> SupportTable:
    rows: dict[str, frozenset[Outcome]] = {}
    observables: dict[str, tuple[str, ...]] = {}
    labels: dict[str, tuple[str, ...]] = {}
    for ctx in contexts:
        if ctx.id in rows:
            raise ValueError(f"duplicate context id {ctx.id}")
        if ctx.joint.dim != state.dim:
            raise DimensionError(f"context {ctx.id} has dim {ctx.joint.dim}, state has {state.dim}")
        rows[ctx.id] = support(ctx.joint, state, tol)
        observables[ctx.id] = ctx.observables
        for o in ctx.observables:
            ls = ctx.joint.labels_of(o)
            if labels.setdefault(o, ls) != ls:
                raise ValueError(f"observable {o} has inconsistent labels across contexts")
    return SupportTable(rows, observables, labels, state)


def _check_constraints(table: SupportTable, constraints: Mapping[str, str]) -> None:
    for o, v in constraints.items():
        if o not in table.labels:
            raise ValueError(f"unknown observable {o}")
        if v not in table.labels[o]:
            raise ValueError(f"{v!r} is not an outcome of {o} (choices: {table.labels[o]})")


def _restrict(assignment: Mapping[str, str], obs: Sequence[str]) -> Outcome:
    return tuple(assignment.get(o, WILDCARD) for o in obs)


def _matches(tup: Outcome, pattern: Outcome) -> bool:
    return all(p == WILDCARD or p == t for t, p in zip(tup, pattern))


def is_consistent(table: SupportTable, assignment: Mapping[str, str]) -> bool:
    """True if no context rules out the (possibly partial) assignment."""
    return _first_violation(table, assignment) is None


def global_assignments(
    table: SupportTable,
    constraints: Mapping[str, str] | None = None,
) -> list[ValueAssignment]:
    """All full assignments extending ``constraints`` that every row admits.

    Enumeration is exhaustive and ordered lexicographically by observable
    (first-appearance order) and by each observable's declared label order.
    """
    constraints = dict(constraints or {})
    _check_constraints(table, constraints)
    names = table.all_observables
    choices = [(constraints[o],) if o in constraints else table.labels[o] for o in names]
    found = []
    for values in product(*choices):
        assignment = dict(zip(names, values))
        if all(
            _restrict(assignment, table.observables[cid]) in table.rows[cid]
            for cid in table.context_ids
        ):
            found.append(assignment)
    return found


@dataclass(frozen=True)
class Step:
    context: str
    excluded: tuple[Outcome, ...]
    observable: str
    value: str

    def describe(self, table: SupportTable) -> str:
        obs = ",".join(table.observables[self.context])
        gone = " and ".join("{" + format_outcome(t) + "}" for t in self.excluded)
        return f"context {{{obs}}}: {gone} has zero probability, so {self.observable} = {self.value}"


@dataclass(frozen=True)
class ContradictionCertificate:
    """Unit-propagation chain from a premise to an impossible context tuple.

    ``violated`` is None when propagation stalled; the certificate then rests
    on the exhaustive enumeration alone.
    """

    premise: tuple[tuple[str, str], ...]
    steps: tuple[Step, ...]
    violated: tuple[str, Outcome] | None

    @property
    def conclusion(self) -> dict[str, str]:
        out = dict(self.premise)
        out.update((s.observable, s.value) for s in self.steps)
        return out

    def render(self, table: SupportTable) -> list[str]:
        lines = ["premise: " + ", ".join(f"{o} = {v}" for o, v in self.premise)]
        lines += [f"  {i}. {s.describe(table)}" for i, s in enumerate(self.steps, 1)]
        if self.violated is None:
            lines.append("  propagation stalled; exhaustive search finds no consistent assignment")
        else:
            cid, tup = self.violated
            obs = ",".join(table.observables[cid])
            lines.append(
                f"  contradiction: {{{format_outcome(tup)}}} for {{{obs}}} has zero probability"
            )
        return lines


def _first_violation(table: SupportTable, assignment: Mapping[str, str]) -> tuple[str, Outcome] | None:
    for cid in table.context_ids:
        pattern = _restrict(assignment, table.observables[cid])
        if all(p == WILDCARD for p in pattern):
            continue
        if not any(_matches(t, pattern) for t in table.rows[cid]):
            return cid, pattern
    return None


def _excluded(table: SupportTable, cid: str, assignment: Mapping[str, str], obs: str, value: str) -> tuple[Outcome, ...]:
    names = table.observables[cid]
    pattern = _restrict(assignment, names)
    choices = [
        (p,) if p != WILDCARD else table.labels[o] for o, p in zip(names, pattern)
    ]
    i = names.index(obs)
    return tuple(t for t in product(*choices) if t[i] != value)


def hardy_certificate(
    table: SupportTable,
    premise: Mapping[str, str],
) -> ContradictionCertificate | None:
    """Explain why ``premise`` has no consistent extension, or return None if it has one.

    Contexts are scanned in declaration order, and within a context the
    unassigned observables in declaration order. A context forces an
    observable when exactly one of its labels survives among the row tuples
    that match the current partial assignment. Scanning continues through the
    remaining contexts after a step rather than restarting, so the chain
    follows the declaration order.
    """
    premise = dict(premise)
    _check_constraints(table, premise)
    if global_assignments(table, premise):
        return None
    frozen_premise = tuple(premise.items())
    assignment = dict(premise)
    steps: list[Step] = []

    violation = _first_violation(table, assignment)
    while violation is None:
        progressed = False
        for cid in table.context_ids:
            names = table.observables[cid]
            pattern = _restrict(assignment, names)
            live = [t for t in table.rows[cid] if _matches(t, pattern)]
            for i, o in enumerate(names):
                if o in assignment:
                    continue
                values = {t[i] for t in live}
                if len(values) != 1:
                    continue
                (value,) = values
                steps.append(Step(cid, _excluded(table, cid, assignment, o, value), o, value))
                assignment[o] = value
                progressed = True
                break
            if progressed:
                violation = _first_violation(table, assignment)
                if violation is not None:
                    break
        if not progressed:
            break
    return ContradictionCertificate(frozen_premise, tuple(steps), violation)


def verify_certificate(cert: ContradictionCertificate, table: SupportTable) -> bool:
    """Replay a certificate against ``table``; True iff every claim checks out."""
    assignment = dict(cert.premise)
    for step in cert.steps:
        if step.context not in table.rows or step.observable in assignment:
            return False
        row = table.rows[step.context]
        if any(t in row for t in step.excluded):
            return False
        expected = _excluded(table, step.context, assignment, step.observable, step.value)
        if set(expected) != set(step.excluded):
            return False
        assignment[step.observable] = step.value
    if cert.violated is None:
        return not global_assignments(table, dict(cert.premise))
    cid, pattern = cert.violated
    if cid not in table.rows or pattern != _restrict(assignment, table.observables[cid]):
        return False
    return not any(_matches(t, pattern) for t in table.rows[cid])


def shared_observables(contexts: Sequence[Context]) -> dict[tuple[str, str], frozenset[str]]:
    """Observables common to each pair of contexts (empty pairs omitted)."""
    out = {}
    for i, a in enumerate(contexts):
        for b in contexts[i + 1:]:
            common = frozenset(a.observables) & frozenset(b.observables)
            if common:
                out[(a.id, b.id)] = common
    return out
