"""Projective measurements and the Born rule.

Outcomes are always keyed by tuples of labels, one label per observable the
PVM measures. A PVM built from a single basis therefore has keys like
``("ok",)`` and a joined PVM has keys like ``("ok", "fail")``. Functions that
take an outcome also accept a bare string for single-observable PVMs.

Sampling uses the Philox4x64-10 counter-based generator (numpy's
``Philox`` bit generator keyed directly by the seed). Each uniform is built
from the top 53 bits of one raw 64-bit draw, and outcomes are selected by
inverse CDF over the PVM's declared outcome order. Both the raw stream and
the conversion are fixed, so a given seed yields the same samples on every
platform and release.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Mapping, Sequence, Union

import numpy as np

from .hilbert import (
    STRUCT_TOL,
    VALUE_TOL,
    DimensionError,
    Factorization,
    Operator,
    StateVector,
    apply,
    inner_product,
    projector_from,
    tensor_all,
)

Outcome = tuple[str, ...]
OutcomeLike = Union[str, Sequence[str]]

DEFAULT_SUPPORT_TOL = 1e-9
SEED_MAX = 2**64 - 1


class MeasurementError(ValueError):
    pass


class ImpossibleOutcomeError(MeasurementError):
    """Raised when conditioning on an outcome of (numerically) zero probability."""


class NonCommutingError(MeasurementError):
    pass


def _as_outcome(outcome: OutcomeLike) -> Outcome:
    if isinstance(outcome, str):
        return (outcome,)
    return tuple(outcome)


def format_outcome(outcome: Outcome) -> str:
    return ",".join(outcome)


@dataclass(frozen=True, eq=False)
class PVM:
    """Labelled projectors, pairwise orthogonal and summing to the identity."""

    observables: tuple[str, ...]
    elements: tuple[tuple[Outcome, Operator], ...]
    factorization: Factorization | None = None

    def __post_init__(self):
        obs = tuple(self.observables)
        elements = tuple((_as_outcome(lab), op) for lab, op in self.elements)
        if not elements:
            raise MeasurementError("PVM needs at least one element")
        dim = elements[0][1].dim
        labels = [lab for lab, _ in elements]
        if len(set(labels)) != len(labels):
            raise MeasurementError(f"duplicate outcome labels in {labels}")
        for lab, op in elements:
            if len(lab) != len(obs):
                raise MeasurementError(f"outcome {lab} does not match observables {obs}")
            if op.dim != dim:
                raise DimensionError(f"projector for {lab} has dim {op.dim}, expected {dim}")
            if not op.is_projector():
                raise MeasurementError(f"element {format_outcome(lab)} is not a projector")
        for (la, pa), (lb, pb) in combinations(elements, 2):
            if not (pa @ pb).is_zero():
                raise MeasurementError(
                    f"projectors {format_outcome(la)} and {format_outcome(lb)} are not orthogonal"
                )
        total = Operator.zeros(dim)
        for _, op in elements:
            total = total + op
        if not total.allclose(Operator.identity(dim)):
            raise MeasurementError("projectors do not sum to the identity")
        if self.factorization is not None and self.factorization.dim != dim:
            raise DimensionError("factorization does not match projector dimension")
        object.__setattr__(self, "observables", obs)
        object.__setattr__(self, "elements", elements)

    @property
    def observable_id(self) -> str:
        return ",".join(self.observables)

    @property
    def dim(self) -> int:
        return self.elements[0][1].dim

    @property
    def outcomes(self) -> tuple[Outcome, ...]:
        return tuple(lab for lab, _ in self.elements)

    def projector(self, outcome: OutcomeLike) -> Operator:
        key = _as_outcome(outcome)
        for lab, op in self.elements:
            if lab == key:
                return op
        raise KeyError(f"{self.observable_id} has no outcome {format_outcome(key)}")

    def labels_of(self, observable: str) -> tuple[str, ...]:
        """Distinct labels for one observable, in declared order."""
        i = self.observables.index(observable)
        seen: dict[str, None] = {}
        for lab in self.outcomes:
            seen.setdefault(lab[i], None)
        return tuple(seen)

    def __repr__(self):
        return f"PVM({self.observable_id}: {[format_outcome(o) for o in self.outcomes]})"


@dataclass(frozen=True)
class OutcomeDistribution:
    entries: Mapping[Outcome, float]

    def __post_init__(self):
        cleaned: dict[Outcome, float] = {}
        for key, p in self.entries.items():
            p = float(p)
            if p < -VALUE_TOL:
                raise MeasurementError(f"negative probability {p} for {key}")
            cleaned[_as_outcome(key)] = max(p, 0.0)
        if abs(sum(cleaned.values()) - 1.0) > STRUCT_TOL:
            raise MeasurementError(f"probabilities sum to {sum(cleaned.values())}")
        object.__setattr__(self, "entries", cleaned)

    def __getitem__(self, outcome: OutcomeLike) -> float:
        return self.entries[_as_outcome(outcome)]

    def __iter__(self) -> Iterator[Outcome]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def items(self):
        return self.entries.items()

    def total_variation(self, other: Mapping[Outcome, float]) -> float:
        keys = set(self.entries) | set(other)
        return 0.5 * sum(abs(self.entries.get(k, 0.0) - other.get(k, 0.0)) for k in keys)


def pvm_from_basis(
    observable_id: str,
    basis: Sequence[tuple[str, StateVector]],
    tol: float = STRUCT_TOL,
) -> PVM:
    if not basis:
        raise MeasurementError("empty basis")
    dim = basis[0][1].dim
    for label, v in basis:
        if v.dim != dim:
            raise DimensionError(f"basis vector {label} has dim {v.dim}, expected {dim}")
    for (la, va), (lb, vb) in combinations(basis, 2):
        overlap = abs(inner_product(va, vb))
        if overlap > tol:
            raise MeasurementError(
                f"basis vectors {la} and {lb} are not orthogonal (|<{la}|{lb}>| = {overlap:.3g})"
            )
    if len(basis) != dim:
        raise MeasurementError(
            f"basis for {observable_id} is incomplete: {len(basis)} vectors for dimension {dim}"
        )
    return PVM(
        (observable_id,),
        tuple(((label,), projector_from(v)) for label, v in basis),
        basis[0][1].factorization,
    )


def lift(pvm: PVM, factorization: Factorization, slot: int) -> PVM:
    """Embed ``pvm`` acting on factor ``slot`` into the full product space."""
    dims = factorization.factor_dims
    if not 0 <= slot < len(dims):
        raise MeasurementError(f"slot {slot} out of range for {len(dims)} factors")
    if pvm.dim != dims[slot]:
        raise DimensionError(f"PVM dim {pvm.dim} does not match factor {slot} of dim {dims[slot]}")
    eyes = [Operator.identity(d) for d in dims]

    def embed(op: Operator) -> Operator:
        ops = list(eyes)
        ops[slot] = op
        return tensor_all(ops)

    return PVM(
        pvm.observables,
        tuple((lab, embed(op)) for lab, op in pvm.elements),
        factorization,
    )


def join(p: PVM, q: PVM, tol: float = STRUCT_TOL) -> PVM:
    """Product PVM of two commuting measurements.

    Zero products are kept: whether an outcome is possible is decided by the
    state, not by the algebra.
    """
    if p.dim != q.dim:
        raise DimensionError(f"cannot join PVMs of dims {p.dim} and {q.dim}")
    elements = []
    for la, pa in p.elements:
        for lb, qb in q.elements:
            pq = pa @ qb
            if not pq.allclose(qb @ pa, tol):
                raise NonCommutingError(
                    f"{p.observable_id}={format_outcome(la)} does not commute with "
                    f"{q.observable_id}={format_outcome(lb)}"
                )
            # symmetrize so products stay exactly hermitian
            elements.append((la + lb, Operator(0.5 * (pq.entries + pq.entries.conj().T))))
    return PVM(p.observables + q.observables, tuple(elements), p.factorization or q.factorization)


def join_all(pvms: Sequence[PVM]) -> PVM:
    out = pvms[0]
    for q in pvms[1:]:
        out = join(out, q)
    return out


def _probability(op: Operator, state: StateVector) -> float:
    return float(np.real(inner_product(state, apply(op, state))))


def born(pvm: PVM, state: StateVector) -> OutcomeDistribution:
    if pvm.dim != state.dim:
        raise DimensionError(f"PVM dim {pvm.dim} vs state dim {state.dim}")
    probs = {}
    for lab, op in pvm.elements:
        p = _probability(op, state)
        probs[lab] = 0.0 if p < 0 else min(p, 1.0)
    return OutcomeDistribution(probs)


def conditionalize(pvm: PVM, outcome: OutcomeLike, state: StateVector) -> StateVector:
    """Lüders update: project onto ``outcome`` and renormalize."""
    if pvm.dim != state.dim:
        raise DimensionError(f"PVM dim {pvm.dim} vs state dim {state.dim}")
    key = _as_outcome(outcome)
    projected = apply(pvm.projector(key), state)
    weight = float(np.real(np.vdot(projected, projected)))
    if weight <= VALUE_TOL:
        raise ImpossibleOutcomeError(
            f"conditioning on impossible event {pvm.observable_id}={format_outcome(key)}"
        )
    return StateVector(projected / np.sqrt(weight), state.factorization)


def support(pvm: PVM, state: StateVector, tol: float = DEFAULT_SUPPORT_TOL) -> frozenset[Outcome]:
    if not 0 < tol < 1:
        raise ValueError(f"support tolerance must lie in (0, 1), got {tol}")
    return frozenset(lab for lab, p in born(pvm, state).items() if p > tol)


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def uniforms(seed: int, n: int) -> np.ndarray:
    """``n`` doubles in [0, 1) from the Philox stream keyed by ``seed``."""
    raw = np.random.Philox(key=check_seed(seed)).random_raw(n)
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


def sample_distribution(dist: OutcomeDistribution, n: int, seed: int) -> list[Outcome]:
    if n < 1:
        raise ValueError("need n >= 1")
    outcomes = list(dist)
    probs = np.array([dist[o] for o in outcomes])
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, uniforms(seed, n), side="right")
    # never land past the last outcome with positive weight
    idx = np.minimum(idx, int(np.flatnonzero(probs > 0)[-1]))
    return [outcomes[i] for i in idx]


def sample(pvm: PVM, state: StateVector, n: int, seed: int) -> list[Outcome]:
    """i.i.d. Born draws, deterministic in ``seed``."""
    return sample_distribution(born(pvm, state), n, seed)
