"""Dense finite-dimensional complex linear algebra.

States and operators are thin immutable wrappers around numpy arrays.
Basis ordering is fixed globally: the first factor's index varies slowest,
so the product basis of two qubits is ordered (00, 01, 10, 11).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Sequence

import numpy as np

STRUCT_TOL = 1e-9
VALUE_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when operands live on spaces of different dimension."""


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.complex128, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Factorization:
    factor_dims: tuple[int, ...]
    factor_labels: tuple[str, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"factor dims must be positive, got {self.factor_dims!r}")
        labels = tuple(self.factor_labels) or tuple(f"S{i}" for i in range(len(dims)))
        if len(labels) != len(dims):
            raise ValueError("need one label per factor")
        object.__setattr__(self, "factor_dims", dims)
        object.__setattr__(self, "factor_labels", labels)

    @property
    def dim(self) -> int:
        return prod(self.factor_dims)

    @classmethod
    def single(cls, dim: int, label: str = "S0") -> "Factorization":
        return cls((dim,), (label,))

    def __add__(self, other: "Factorization") -> "Factorization":
        return Factorization(
            self.factor_dims + other.factor_dims,
            self.factor_labels + other.factor_labels,
        )


@dataclass(frozen=True, eq=False)
class StateVector:
    """A normalized ket. Use :meth:`normalize` for raw amplitudes."""

    amplitudes: np.ndarray
    factorization: Factorization = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.size == 0:
            raise ValueError("empty state")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > STRUCT_TOL:
            raise ValueError(f"state not normalized (norm {norm:.12g})")
        fact = self.factorization or Factorization.single(amps.size)
        if fact.dim != amps.size:
            raise DimensionError(
                f"factorization {fact.factor_dims} does not match dimension {amps.size}"
            )
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "factorization", fact)

    @classmethod
    def normalize(cls, raw: Sequence[complex] | np.ndarray, factorization: Factorization | None = None) -> "StateVector":
        raw = np.asarray(raw, dtype=np.complex128).ravel()
        norm = np.linalg.norm(raw)
        if not np.isfinite(norm) or norm == 0:
            raise ValueError("cannot normalize a zero or non-finite vector")
        return cls(raw / norm, factorization)

    @classmethod
    def basis(cls, dim: int, index: int, factorization: Factorization | None = None) -> "StateVector":
        amps = np.zeros(dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps, factorization)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def __getitem__(self, index: int) -> complex:
        return complex(self.amplitudes[index])

    def allclose(self, other: "StateVector", atol: float = STRUCT_TOL) -> bool:
        return self.dim == other.dim and bool(np.allclose(self.amplitudes, other.amplitudes, rtol=0, atol=atol))

    def __repr__(self):
        return f"StateVector({np.round(self.amplitudes, 6).tolist()}, dims={self.factorization.factor_dims})"


@dataclass(frozen=True, eq=False)
class Operator:
    entries: np.ndarray

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)

    @classmethod
    def identity(cls, dim: int) -> "Operator":
        return cls(np.eye(dim))

    @classmethod
    def zeros(cls, dim: int) -> "Operator":
        return cls(np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def dagger(self) -> "Operator":
        return Operator(self.entries.conj().T)

    def __matmul__(self, other: "Operator") -> "Operator":
        _check_dims(self.dim, other.dim)
        return Operator(self.entries @ other.entries)

    def __add__(self, other: "Operator") -> "Operator":
        _check_dims(self.dim, other.dim)
        return Operator(self.entries + other.entries)

    def __sub__(self, other: "Operator") -> "Operator":
        _check_dims(self.dim, other.dim)
        return Operator(self.entries - other.entries)

    def allclose(self, other: "Operator", atol: float = STRUCT_TOL) -> bool:
        return self.dim == other.dim and bool(np.allclose(self.entries, other.entries, rtol=0, atol=atol))

    def is_zero(self, tol: float = STRUCT_TOL) -> bool:
        return float(np.max(np.abs(self.entries))) <= tol

    def is_hermitian(self, tol: float = STRUCT_TOL) -> bool:
        return self.allclose(self.dagger, tol)

    def is_unitary(self, tol: float = STRUCT_TOL) -> bool:
        return (self.dagger @ self).allclose(Operator.identity(self.dim), tol)

    def is_projector(self, tol: float = STRUCT_TOL) -> bool:
        return self.is_hermitian(tol) and (self @ self).allclose(self, tol)

    def __repr__(self):
        return f"Operator({np.round(self.entries, 6).tolist()})"


def _check_dims(a: int, b: int) -> None:
    if a != b:
        raise DimensionError(f"dimension mismatch: {a} vs {b}")


def tensor_state(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker product; index of (i, j) is ``i * b.dim + j``."""
    return StateVector(np.kron(a.amplitudes, b.amplitudes), a.factorization + b.factorization)


def tensor_operator(p: Operator, q: Operator) -> Operator:
    return Operator(np.kron(p.entries, q.entries))


def tensor_all(ops: Sequence[Operator]) -> Operator:
    out = ops[0]
    for op in ops[1:]:
        out = tensor_operator(out, op)
    return out


def inner_product(a: StateVector | np.ndarray, b: StateVector | np.ndarray) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    va = a.amplitudes if isinstance(a, StateVector) else np.asarray(a)
    vb = b.amplitudes if isinstance(b, StateVector) else np.asarray(b)
    _check_dims(va.size, vb.size)
    return complex(np.vdot(va, vb))


def apply(op: Operator, s: StateVector | np.ndarray) -> np.ndarray:
    """Matrix-vector product. The result is a raw (possibly unnormalized) vector."""
    v = s.amplitudes if isinstance(s, StateVector) else np.asarray(s, dtype=np.complex128)
    _check_dims(op.dim, v.size)
    out = op.entries @ v
    out.setflags(write=False)
    return out


def projector_from(v: StateVector) -> Operator:
    return Operator(np.outer(v.amplitudes, v.amplitudes.conj()))
