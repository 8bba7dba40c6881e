from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SQRT2, SQRT3, random_state, random_unitary
from qframes.hilbert import Factorization, Operator, StateVector, projector_from, tensor_state
from qframes.measurement import (
    PVM,
    ImpossibleOutcomeError,
    MeasurementError,
    NonCommutingError,
    OutcomeDistribution,
    born,
    conditionalize,
    join,
    lift,
    pvm_from_basis,
    sample,
    support,
    uniforms,
)

F = Factorization((2, 2), ("S_A", "S_B"))
h, t = StateVector([1, 0]), StateVector([0, 1])
ok, fail = StateVector(np.array([1, -1]) / SQRT2), StateVector(np.array([1, 1]) / SQRT2)
A0 = pvm_from_basis("A", [("h", h), ("t", t)])
B0 = pvm_from_basis("B", [("0", h), ("1", t)])
X0 = pvm_from_basis("X", [("ok", ok), ("fail", fail)])
Y0 = pvm_from_basis("Y", [("ok", ok), ("fail", fail)])
A, B, X, Y = lift(A0, F, 0), lift(B0, F, 1), lift(X0, F, 0), lift(Y0, F, 1)
psi = StateVector(np.array([1, 0, 1, 1]) / SQRT3, F)


def assert_dist(dist, expected, tol=1e-12):
    assert set(dist) == set(expected)
    for k, v in expected.items():
        assert dist[k] == pytest.approx(v, abs=tol), k


def test_pvm_from_basis():
    assert np.allclose(A0.projector("h").entries, np.diag([1, 0]))
    assert X0.outcomes == (("ok",), ("fail",))
    assert np.allclose(X0.projector("ok").entries, [[0.5, -0.5], [-0.5, 0.5]])


def test_pvm_from_basis_errors():
    with pytest.raises(MeasurementError, match="ok and h"):
        pvm_from_basis("Z", [("ok", ok), ("h", h)])
    with pytest.raises(MeasurementError, match="incomplete"):
        pvm_from_basis("Z", [("h", h)])


def test_pvm_rejects_bad_projectors():
    with pytest.raises(MeasurementError):
        PVM(("Z",), ((("a",), projector_from(h)), (("b",), projector_from(ok))))
    with pytest.raises(MeasurementError):
        PVM(("Z",), ((("a",), projector_from(h)),))


def test_lift():
    assert np.allclose(A.projector("h").entries, np.diag([1, 1, 0, 0]))
    assert np.allclose(Y.projector("ok").entries, np.kron(np.eye(2), [[0.5, -0.5], [-0.5, 0.5]]))
    pa, py = A.projector("h").entries, Y.projector("ok").entries
    assert np.allclose(pa @ py, py @ pa)
    with pytest.raises(ValueError):
        lift(A, F, 0)


def test_join():
    ab = join(A, B)
    assert ab.outcomes == (("h", "0"), ("h", "1"), ("t", "0"), ("t", "1"))
    xy = join(X, Y)
    assert xy.outcomes == (("ok", "ok"), ("ok", "fail"), ("fail", "ok"), ("fail", "fail"))
    with pytest.raises(NonCommutingError, match="A=h"):
        join(A, X)


def test_born_fr_contexts():
    assert_dist(born(join(A, B), psi), {("h", "0"): 1 / 3, ("h", "1"): 0, ("t", "0"): 1 / 3, ("t", "1"): 1 / 3})
    assert_dist(
        born(join(X, Y), psi),
        {("ok", "ok"): 1 / 12, ("ok", "fail"): 1 / 12, ("fail", "ok"): 1 / 12, ("fail", "fail"): 3 / 4},
    )
    assert_dist(born(join(X, B), psi), {("ok", "0"): 0, ("ok", "1"): 1 / 6, ("fail", "0"): 2 / 3, ("fail", "1"): 1 / 6})
    assert_dist(born(join(A, Y), psi), {("h", "ok"): 1 / 6, ("h", "fail"): 1 / 6, ("t", "ok"): 0, ("t", "fail"): 2 / 3})


def test_conditionalize():
    post = conditionalize(join(A, B), ("h", "0"), psi)
    assert post.allclose(tensor_state(h, h), 1e-12)
    post = conditionalize(A, "t", psi)
    assert np.allclose(post.amplitudes, [0, 0, 1 / SQRT2, 1 / SQRT2], atol=1e-12)
    assert post.allclose(tensor_state(t, fail), 1e-12)
    with pytest.raises(ImpossibleOutcomeError, match="impossible event"):
        conditionalize(join(A, B), ("h", "1"), psi)


def test_support():
    assert support(join(A, B), psi) == {("h", "0"), ("t", "0"), ("t", "1")}
    assert support(join(X, B), psi) == {("ok", "1"), ("fail", "0"), ("fail", "1")}
    assert len(support(join(X, Y), tensor_state(h, h))) == 4
    with pytest.raises(ValueError):
        support(A, psi, 0)


def test_distribution_clamps_noise():
    d = OutcomeDistribution({("a",): 1.0, ("b",): -1e-13})
    assert d["b"] == 0.0
    with pytest.raises(MeasurementError):
        OutcomeDistribution({("a",): 1.1, ("b",): -0.1})


def test_sampling_frequencies():
    draws = sample(join(A, B), psi, 90000, 11)
    counts = Counter(draws)
    assert counts[("h", "1")] == 0
    for o in [("h", "0"), ("t", "0"), ("t", "1")]:
        assert abs(counts[o] / 90000 - 1 / 3) < 0.01


def test_sampling_eigenstate_is_constant():
    assert set(sample(X, tensor_state(ok, h), 500, 3)) == {("ok",)}


def test_sampling_is_deterministic():
    assert sample(join(X, Y), psi, 1000, 42) == sample(join(X, Y), psi, 1000, 42)
    assert sample(join(X, Y), psi, 1000, 42) != sample(join(X, Y), psi, 1000, 43)


def test_uniform_stream_is_pinned():
    # Philox4x64-10 keyed by the seed, top 53 bits per draw
    u = uniforms(7, 3)
    assert u.tolist() == [
        16086915834549238692 // 2**11 / 2**53,
        5448529601018347655 // 2**11 / 2**53,
        7749434361382612120 // 2**11 / 2**53,
    ]
    with pytest.raises(ValueError):
        uniforms(-1, 1)


def test_sampling_total_variation():
    xy = join(X, Y)
    counts = Counter(sample(xy, psi, 90000, 5))
    emp = {o: counts[o] / 90000 for o in xy.outcomes}
    assert born(xy, psi).total_variation(emp) < 0.02


# --- properties -----------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


def random_pvm(rng, dim, name="Q"):
    u = random_unitary(rng, dim)
    return pvm_from_basis(name, [(str(i), StateVector(u[:, i])) for i in range(dim)])


@settings(max_examples=500)
@given(seeds, st.integers(2, 6))
def test_pvm_completeness(seed, dim):
    rng = np.random.default_rng(seed)
    p = random_pvm(rng, dim)
    total = sum((op.entries for _, op in p.elements), np.zeros((dim, dim)))
    assert np.allclose(total, np.eye(dim), atol=1e-9)
    for i, (_, pi) in enumerate(p.elements):
        for _, pj in p.elements[i + 1:]:
            assert np.allclose(pi.entries @ pj.entries, 0, atol=1e-9)


@settings(max_examples=500)
@given(seeds, st.integers(2, 6))
def test_born_additivity(seed, dim):
    rng = np.random.default_rng(seed)
    fine = random_pvm(rng, dim)
    psi_r = random_state(rng, dim)
    cut = int(rng.integers(1, dim))
    coarse_op = Operator(sum(op.entries for _, op in fine.elements[:cut]))
    rest_op = Operator(sum(op.entries for _, op in fine.elements[cut:]))
    coarse = PVM(("Q",), ((("lo",), coarse_op), (("hi",), rest_op)))
    dist = born(fine, psi_r)
    assert abs(born(coarse, psi_r)["lo"] - sum(dist[o] for o in fine.outcomes[:cut])) <= 1e-12


@settings(max_examples=500)
@given(seeds, st.integers(2, 6))
def test_luders_idempotence(seed, dim):
    rng = np.random.default_rng(seed)
    p = random_pvm(rng, dim)
    s = random_state(rng, dim)
    once = conditionalize(p, "0", s)
    assert conditionalize(p, "0", once).allclose(once, 1e-9)


@settings(max_examples=500)
@given(seeds, st.integers(2, 6))
def test_conditional_probability_consistency(seed, dim):
    rng = np.random.default_rng(seed)
    p, q = random_pvm(rng, dim, "P"), random_pvm(rng, dim, "Q")
    s = random_state(rng, dim)
    v = s.amplitudes
    pi = p.projector("0").entries
    post = born(q, conditionalize(p, "0", s))
    denom = np.vdot(v, pi @ v).real
    for label, qj in q.elements:
        expected = np.vdot(v, pi @ qj.entries @ pi @ v).real / denom
        assert abs(post[label] - expected) <= 1e-12
