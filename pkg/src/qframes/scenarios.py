"""Built-in experiments: the Frauchiger-Renner protocol and CHSH tests."""

from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt
from typing import Literal

import numpy as np
from scipy.optimize import minimize

from .frames import (
    ContradictionCertificate,
    Context,
    SupportTable,
    build_support_table,
    hardy_certificate,
)
from .hilbert import Factorization, StateVector, tensor_state
from .measurement import (
    PVM,
    OutcomeDistribution,
    Outcome,
    born,
    check_seed,
    conditionalize,
    join,
    lift,
    pvm_from_basis,
    sample,
    uniforms,
)

Mode = Literal["unitary", "collapse"]

TSIRELSON = 2 * sqrt(2)
CLASSICAL_CHSH = 2

FR_FACTORS = Factorization((2, 2), ("S_A", "S_B"))
_QUBIT_A = Factorization((2,), ("S_A",))
_QUBIT_B = Factorization((2,), ("S_B",))
R2 = 1 / sqrt(2)


def _qubit(a: float, b: float, fact: Factorization) -> StateVector:
    return StateVector(np.array([a, b], dtype=complex), fact)


def fr_observables() -> dict[str, PVM]:
    """A, B (what Alice and Bob record) and X, Y (the super-observables), lifted to S_A x S_B."""
    a = pvm_from_basis("A", [("h", _qubit(1, 0, _QUBIT_A)), ("t", _qubit(0, 1, _QUBIT_A))])
    x = pvm_from_basis("X", [("ok", _qubit(R2, -R2, _QUBIT_A)), ("fail", _qubit(R2, R2, _QUBIT_A))])
    b = pvm_from_basis("B", [("0", _qubit(1, 0, _QUBIT_B)), ("1", _qubit(0, 1, _QUBIT_B))])
    y = pvm_from_basis("Y", [("ok", _qubit(R2, -R2, _QUBIT_B)), ("fail", _qubit(R2, R2, _QUBIT_B))])
    return {
        "A": lift(a, FR_FACTORS, 0),
        "B": lift(b, FR_FACTORS, 1),
        "X": lift(x, FR_FACTORS, 0),
        "Y": lift(y, FR_FACTORS, 1),
    }


def fr_contexts() -> list[Context]:
    obs = fr_observables()
    return [
        Context("AB", (obs["A"], obs["B"])),
        Context("XB", (obs["X"], obs["B"])),
        Context("AY", (obs["A"], obs["Y"])),
        Context("XY", (obs["X"], obs["Y"])),
    ]


def fr_state() -> StateVector:
    """(|h0> + |t0> + |t1>) / sqrt(3) over (h0, h1, t0, t1)."""
    s = 1 / sqrt(3)
    return StateVector(np.array([s, 0, s, s], dtype=complex), FR_FACTORS)


def fr_protocol_state() -> StateVector:
    """Build the FR state from the preparation: biased coin, then a conditioned qubit."""
    h = _qubit(1, 0, _QUBIT_A)
    t = _qubit(0, 1, _QUBIT_A)
    zero = _qubit(1, 0, _QUBIT_B)
    plus = _qubit(R2, R2, _QUBIT_B)
    branches = (
        sqrt(1 / 3) * tensor_state(h, zero).amplitudes
        + sqrt(2 / 3) * tensor_state(t, plus).amplitudes
    )
    return StateVector(branches, FR_FACTORS)


def fr_support_table(tol: float = 1e-9) -> SupportTable:
    return build_support_table(fr_state(), fr_contexts(), tol)


@dataclass(frozen=True, eq=False)
class FrReport:
    mode: Mode
    alice_bob_outcome: Outcome | None
    pre_super_state: StateVector
    super_distribution: OutcomeDistribution
    p_ok_ok: float
    certificate: ContradictionCertificate | None
    table: SupportTable | None = None


def run_fr(mode: Mode, seed: int = 0, branch: Outcome | None = None) -> FrReport:
    """Run the protocol with Alice and Bob (collapse) or Wigner and Friend (unitary) as ultimate observers.

    In collapse mode the Alice/Bob branch is drawn from the Born
    distribution on {A, B} using ``seed``; ``branch`` overrides the draw.
    """
    check_seed(seed)
    contexts = {c.id: c for c in fr_contexts()}
    psi = fr_state()
    xy = contexts["XY"].joint
    if mode == "unitary":
        table = build_support_table(psi, list(contexts.values()))
        dist = born(xy, psi)
        cert = hardy_certificate(table, {"X": "ok", "Y": "ok"})
        return FrReport(mode, None, psi, dist, dist[("ok", "ok")], cert, table)
    if mode == "collapse":
        ab = contexts["AB"].joint
        if branch is None:
            (branch,) = sample(ab, psi, 1, seed)
        post = conditionalize(ab, branch, psi)
        dist = born(xy, post)
        return FrReport(mode, tuple(branch), post, dist, dist[("ok", "ok")], None)
    raise ValueError(f"mode must be 'unitary' or 'collapse', got {mode!r}")


def is_indefinite(pvm: PVM, state: StateVector, tol: float = 1e-9) -> bool:
    """True when ``state`` is not an eigenstate of ``pvm`` (more than one possible outcome)."""
    return sum(p > tol for _, p in born(pvm, state).items()) > 1


# --- CHSH -----------------------------------------------------------------

@dataclass(frozen=True)
class ChshSetting:
    """Measurement angles in the X-Z plane: Alice (a, a2), Bob (b, b2)."""

    a: float
    a2: float
    b: float
    b2: float

    def __post_init__(self):
        for name in ("a", "a2", "b", "b2"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"angle {name} is not finite")
            object.__setattr__(self, name, v % (2 * pi))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.a2, self.b, self.b2)


def binary_pvm(observable_id: str, theta: float) -> PVM:
    """Qubit PVM for cos(theta) Z + sin(theta) X with outcomes "+1" and "-1"."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    fact = Factorization.single(2)
    return pvm_from_basis(observable_id, [("+1", _qubit(c, s, fact)), ("-1", _qubit(-s, c, fact))])


def _check_two_qubits(state: StateVector) -> None:
    if state.factorization.factor_dims != (2, 2):
        raise ValueError(f"CHSH needs a [2, 2] factorization, got {list(state.factorization.factor_dims)}")


def correlation(state: StateVector, theta_a: float, theta_b: float) -> float:
    _check_two_qubits(state)
    fact = state.factorization
    joint = join(lift(binary_pvm("a", theta_a), fact, 0), lift(binary_pvm("b", theta_b), fact, 1))
    dist = born(joint, state)
    return sum(int(x) * int(y) * p for (x, y), p in dist.items())


def chsh_value(state: StateVector, setting: ChshSetting) -> float:
    a, a2, b, b2 = setting.as_tuple()
    return (
        correlation(state, a, b)
        + correlation(state, a, b2)
        + correlation(state, a2, b)
        - correlation(state, a2, b2)
    )


def correlation_matrix(state: StateVector) -> np.ndarray:
    """<s_i (x) s_j> for s in (Z, X); E(a, b) = n(a) . T . n(b) with n = (cos, sin)."""
    _check_two_qubits(state)
    z = np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    v = state.amplitudes
    return np.array(
        [[np.real(np.vdot(v, np.kron(p, q) @ v)) for q in (z, x)] for p in (z, x)]
    )


def _fast_chsh(t: np.ndarray, angles: np.ndarray) -> float:
    a, a2, b, b2 = angles
    na, na2 = np.array([np.cos(a), np.sin(a)]), np.array([np.cos(a2), np.sin(a2)])
    nb, nb2 = np.array([np.cos(b), np.sin(b)]), np.array([np.cos(b2), np.sin(b2)])
    return float(na @ t @ (nb + nb2) + na2 @ t @ (nb - nb2))


def maximize_chsh(
    state: StateVector,
    restarts: int = 20,
    seed: int = 0,
    xatol: float = 1e-7,
) -> tuple[ChshSetting, float]:
    """Nelder-Mead from seeded uniform random starts; best restart wins, ties to the earliest.

    The objective is evaluated through the correlation matrix; the reported
    value is recomputed with :func:`chsh_value` at the returned setting.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    t = correlation_matrix(state)
    starts = uniforms(seed, 4 * restarts).reshape(restarts, 4) * 2 * pi
    best_x, best_val = None, -np.inf
    for x0 in starts:
        res = minimize(
            lambda x: -_fast_chsh(t, x),
            x0,
            method="Nelder-Mead",
            options={"xatol": xatol, "fatol": 1e-14, "maxiter": 20000},
        )
        val = -float(res.fun)
        if val > best_val:
            best_x, best_val = res.x, val
    setting = ChshSetting(*best_x)
    return setting, chsh_value(state, setting)


def deterministic_chsh(strategy: tuple[int, int, int, int]) -> int:
    """S for fixed +-1 answers (a, a2, b, b2)."""
    a, a2, b, b2 = strategy
    return a * b + a * b2 + a2 * b - a2 * b2


def classical_chsh_bound() -> int:
    strategies = np.array(np.meshgrid(*[[1, -1]] * 4, indexing="ij")).reshape(4, -1).T
    return max(deterministic_chsh(tuple(int(v) for v in s)) for s in strategies)


def singlet() -> StateVector:
    return StateVector(np.array([0, R2, -R2, 0], dtype=complex), Factorization((2, 2)))


def product00() -> StateVector:
    return StateVector(np.array([1, 0, 0, 0], dtype=complex), Factorization((2, 2)))


CHSH_STATES = {"singlet": singlet, "product00": product00, "fr": fr_state}
