"""Scenario files (JSON) and schema-versioned reports.

A scenario file looks like the bundled ``data/fr.json``::

    {
      "schema_version": 1,
      "id": "...",
      "dims": [2, 2],
      "factor_labels": ["S_A", "S_B"],          # optional
      "state": [[re, im], ...],                  # product-basis amplitudes
      "bases": {"A": [{"label": "h", "vector": [[re, im], ...]}, ...], ...},
      "contexts": {"AB": [["A", 0], ["B", 1]], ...},   # (observable, factor slot)
      "constraints": {"X": "ok"}                 # optional
    }

The state may be off from unit norm by up to 1e-6 and is renormalized. Basis
vectors must be orthonormal to within 1e-6; they are re-orthonormalized by
Gram-Schmidt in declared order before use.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from itertools import product
from pathlib import Path
from typing import Any

import numpy as np

from .frames import ContradictionCertificate, Context, Step, SupportTable, build_support_table
from .hilbert import Factorization, StateVector
from .measurement import PVM, NonCommutingError, format_outcome, lift, pvm_from_basis

SCHEMA_VERSION = 1
FILE_TOL = 1e-6
BUILTINS = {"fr": "fr.json"}


class ScenarioError(ValueError):
    """Invalid scenario file. ``where`` names the offending field or line."""

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True, eq=False)
class Scenario:
    id: str
    state: StateVector
    contexts: tuple[Context, ...]
    constraints: dict[str, str] = field(default_factory=dict)

    def context(self, name: str) -> Context:
        for c in self.contexts:
            if c.id == name:
                return c
        raise KeyError(name)

    def support_table(self, tol: float = 1e-9) -> SupportTable:
        return build_support_table(self.state, self.contexts, tol)


def _require(doc: dict, key: str, kind: type | tuple[type, ...], where: str = "") -> Any:
    path = f"{where}.{key}" if where else key
    if key not in doc:
        raise ScenarioError("missing field", path)
    if not isinstance(doc[key], kind):
        raise ScenarioError(f"expected {getattr(kind, '__name__', kind)}", path)
    return doc[key]


def _complex_vector(raw: Any, where: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise ScenarioError("expected a non-empty list of [re, im] pairs", where)
    out = np.empty(len(raw), dtype=complex)
    for i, pair in enumerate(raw):
        ok = (
            isinstance(pair, list)
            and len(pair) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)
        )
        if not ok:
            raise ScenarioError("expected [re, im] with two numbers", f"{where}[{i}]")
        out[i] = complex(pair[0], pair[1])
    if not np.all(np.isfinite(out)):
        raise ScenarioError("non-finite amplitude", where)
    return out


def _parse_basis(name: str, raw: Any, dim: int, fact: Factorization) -> PVM:
    where = f"bases.{name}"
    if not isinstance(raw, list) or not raw:
        raise ScenarioError("expected a list of {label, vector} entries", where)
    labels, vectors = [], []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ScenarioError("expected an object", f"{where}[{i}]")
        label = _require(entry, "label", str, f"{where}[{i}]")
        vec = _complex_vector(entry.get("vector"), f"{where}[{i}].vector")
        if vec.size != dim:
            raise ScenarioError(f"vector has length {vec.size}, factor has dimension {dim}", f"{where}[{i}].vector")
        if abs(np.linalg.norm(vec) - 1) > FILE_TOL:
            raise ScenarioError(f"vector not normalized (norm {np.linalg.norm(vec):.9g})", f"{where}[{i}].vector")
        labels.append(label)
        vectors.append(vec)
    if len(set(labels)) != len(labels):
        raise ScenarioError(f"duplicate labels {labels}", where)
    if len(vectors) != dim:
        raise ScenarioError(f"incomplete basis: {len(vectors)} vectors for dimension {dim}", where)
    for i in range(dim):
        for j in range(i + 1, dim):
            overlap = abs(np.vdot(vectors[i], vectors[j]))
            if overlap > FILE_TOL:
                raise ScenarioError(
                    f"vectors {labels[i]!r} and {labels[j]!r} are not orthogonal (overlap {overlap:.3g})", where
                )
    ortho: list[np.ndarray] = []
    for v in vectors:
        for u in ortho:
            v = v - np.vdot(u, v) * u
        ortho.append(v / np.linalg.norm(v))
    return pvm_from_basis(name, [(lab, StateVector(v, fact)) for lab, v in zip(labels, ortho)])


def parse_scenario(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("top level must be an object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema version {version!r}", "schema_version")
    sid = doc.get("id", "scenario")
    if not isinstance(sid, str):
        raise ScenarioError("expected a string", "id")
    dims = _require(doc, "dims", list)
    if not dims or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims):
        raise ScenarioError("expected a list of positive integers", "dims")
    labels = doc.get("factor_labels") or [f"S{i}" for i in range(len(dims))]
    if not isinstance(labels, list) or len(labels) != len(dims) or not all(isinstance(s, str) for s in labels):
        raise ScenarioError("expected one string per factor", "factor_labels")
    fact = Factorization(tuple(dims), tuple(labels))

    amps = _complex_vector(doc.get("state"), "state")
    if amps.size != fact.dim:
        raise ScenarioError(f"state has {amps.size} amplitudes, dims give {fact.dim}", "state")
    norm = np.linalg.norm(amps)
    if abs(norm - 1) > FILE_TOL:
        raise ScenarioError(f"state not normalized (norm {norm:.9g})", "state")
    state = StateVector.normalize(amps, fact)

    bases = _require(doc, "bases", dict)
    contexts_raw = _require(doc, "contexts", dict)
    if not contexts_raw:
        raise ScenarioError("at least one context is required", "contexts")

    slot_of: dict[str, int] = {}
    for cname, members in contexts_raw.items():
        where = f"contexts.{cname}"
        if not isinstance(members, list) or not members:
            raise ScenarioError("expected a list of [observable, slot] pairs", where)
        for i, m in enumerate(members):
            if not (isinstance(m, list) and len(m) == 2 and isinstance(m[0], str) and isinstance(m[1], int)):
                raise ScenarioError("expected [observable, slot]", f"{where}[{i}]")
            obs, slot = m
            if obs not in bases:
                raise ScenarioError(f"unknown observable {obs!r}", f"{where}[{i}]")
            if not 0 <= slot < len(dims):
                raise ScenarioError(f"slot {slot} out of range", f"{where}[{i}]")
            if slot_of.setdefault(obs, slot) != slot:
                raise ScenarioError(f"observable {obs!r} used on two different factors", f"{where}[{i}]")

    lifted: dict[str, PVM] = {}
    for obs, slot in slot_of.items():
        single = Factorization((dims[slot],), (labels[slot],))
        pvm = _parse_basis(obs, bases[obs], dims[slot], single)
        lifted[obs] = lift(pvm, fact, slot)

    contexts = []
    for cname, members in contexts_raw.items():
        try:
            contexts.append(Context(cname, tuple(lifted[o] for o, _ in members)))
        except (NonCommutingError, ValueError) as exc:
            raise ScenarioError(str(exc), f"contexts.{cname}") from None

    constraints = doc.get("constraints") or {}
    if not isinstance(constraints, dict):
        raise ScenarioError("expected an object", "constraints")
    for obs, value in constraints.items():
        if obs not in lifted:
            raise ScenarioError(f"unknown observable {obs!r}", f"constraints.{obs}")
        if value not in lifted[obs].labels_of(obs):
            raise ScenarioError(f"{value!r} is not an outcome of {obs}", f"constraints.{obs}")
    return Scenario(sid, state, tuple(contexts), dict(constraints))


def loads_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    return parse_scenario(doc)


def builtin_text(name: str) -> str:
    if name not in BUILTINS:
        raise ScenarioError(f"unknown built-in scenario {name!r} (available: {', '.join(BUILTINS)})")
    return resources.files("qframes.data").joinpath(BUILTINS[name]).read_text()


def load_scenario(source: str | Path) -> Scenario:
    """Load from a path, or from ``builtin:<name>``."""
    source = str(source)
    if source.startswith("builtin:"):
        return loads_scenario(builtin_text(source.split(":", 1)[1]))
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read file: {exc.strerror}", source) from None
    return loads_scenario(text)


# --- reports ---------------------------------------------------------------

def certificate_to_dict(cert: ContradictionCertificate) -> dict:
    return {
        "premise": dict(cert.premise),
        "steps": [
            {
                "context": s.context,
                "excluded": [list(t) for t in s.excluded],
                "observable": s.observable,
                "value": s.value,
            }
            for s in cert.steps
        ],
        "violated": None
        if cert.violated is None
        else {"context": cert.violated[0], "outcome": list(cert.violated[1])},
    }


def certificate_from_dict(d: dict) -> ContradictionCertificate:
    steps = tuple(
        Step(s["context"], tuple(tuple(t) for t in s["excluded"]), s["observable"], s["value"])
        for s in d["steps"]
    )
    v = d["violated"]
    violated = None if v is None else (v["context"], tuple(v["outcome"]))
    return ContradictionCertificate(tuple(d["premise"].items()), steps, violated)


def distribution_to_dict(dist) -> dict[str, float]:
    return {format_outcome(k): float(p) for k, p in dist.items()}


@dataclass
class Report:
    command: str
    scenario: str
    seed: int | None = None
    distributions: dict[str, dict[str, float]] = field(default_factory=dict)
    support: dict[str, list[str]] = field(default_factory=dict)
    assignments: list[dict[str, str]] | None = None
    certificate: dict | None = None
    probabilities: dict[str, float] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Report":
        data = json.loads(text)
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {data.get('schema_version')!r}")
        return cls(**data)


def support_to_dict(table: SupportTable) -> dict[str, list[str]]:
    """Support rows in each context's declared outcome order."""
    out = {}
    for cid in table.context_ids:
        obs = table.observables[cid]
        order = {t: i for i, t in enumerate(_product_order(table, obs))}
        out[cid] = [format_outcome(t) for t in sorted(table.rows[cid], key=order.__getitem__)]
    return out


def _product_order(table: SupportTable, obs) -> list[tuple[str, ...]]:
    return list(product(*(table.labels[o] for o in obs)))
