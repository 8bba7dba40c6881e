from dataclasses import replace
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import FR_BASES, FR_CONTEXTS, brute_force_assignments, brute_force_table, fr_possible
from qframes.frames import (
    Context,
    Step,
    SupportTable,
    build_support_table,
    commutes,
    global_assignments,
    hardy_certificate,
    shared_observables,
    verify_certificate,
)
from qframes.hilbert import Operator, StateVector, projector_from, tensor_operator
from qframes.measurement import NonCommutingError
from qframes.scenarios import fr_contexts, fr_observables, fr_state, fr_support_table

ok = StateVector(np.array([1, -1]) / np.sqrt(2))
h = StateVector([1, 0])


def test_commutes():
    eye = Operator.identity(2)
    assert commutes(tensor_operator(projector_from(h), eye), tensor_operator(eye, projector_from(ok)))
    assert not commutes(projector_from(h), projector_from(ok))
    p = projector_from(ok)
    assert commutes(p, p)
    with pytest.raises(ValueError):
        commutes(p, Operator.identity(4))


def test_context_validity():
    obs = fr_observables()
    with pytest.raises(NonCommutingError):
        Context("AX", (obs["A"], obs["X"]))
    with pytest.raises(ValueError):
        Context("AA", (obs["A"], obs["A"]))


def test_fr_support_rows():
    table = fr_support_table()
    assert table.rows["AB"] == {("h", "0"), ("t", "0"), ("t", "1")}
    assert table.rows["XB"] == {("ok", "1"), ("fail", "0"), ("fail", "1")}
    assert table.rows["AY"] == {("h", "ok"), ("h", "fail"), ("t", "fail")}
    assert table.rows["XY"] == set(product(("ok", "fail"), repeat=2))


def test_support_rows_match_oracle():
    table = fr_support_table()
    for cid, (l, r) in FR_CONTEXTS.items():
        expected = {(a, b) for a in FR_BASES[l] for b in FR_BASES[r] if fr_possible(cid, a, b)}
        assert table.rows[cid] == expected


def test_support_table_faithful_across_tolerances():
    assert fr_support_table(1e-9).rows == fr_support_table(1e-6).rows


def test_global_assignments_examples():
    table = fr_support_table()
    assert global_assignments(table, {"X": "ok", "Y": "ok"}) == []
    everything = global_assignments(table)
    assert {"A": "t", "B": "0", "X": "fail", "Y": "fail"} in everything
    assert everything == brute_force_assignments({})
    assert global_assignments(table, {"A": "h", "B": "1"}) == []
    with pytest.raises(ValueError):
        global_assignments(table, {"X": "maybe"})


def test_fr_certificate_is_the_three_step_argument():
    table = fr_support_table()
    cert = hardy_certificate(table, {"X": "ok", "Y": "ok"})
    assert cert.premise == (("X", "ok"), ("Y", "ok"))
    assert cert.steps == (
        Step("XB", (("ok", "0"),), "B", "1"),
        Step("AY", (("t", "ok"),), "A", "h"),
    )
    assert cert.violated == ("AB", ("h", "1"))
    assert verify_certificate(cert, table)


def test_consistent_premise_has_no_certificate():
    table = fr_support_table()
    assert hardy_certificate(table, {"A": "h", "B": "0"}) is None
    assert brute_force_assignments({"A": "h", "B": "0"})


def test_immediate_violation_has_zero_steps():
    cert = hardy_certificate(fr_support_table(), {"A": "h", "B": "1"})
    assert cert.steps == ()
    assert cert.violated == ("AB", ("h", "1"))


def test_tampered_certificates_fail_replay():
    table = fr_support_table()
    cert = hardy_certificate(table, {"X": "ok", "Y": "ok"})
    assert not verify_certificate(replace(cert, steps=cert.steps[:1]), table)
    bad_step = Step("XB", (("fail", "0"),), "B", "1")
    assert not verify_certificate(replace(cert, steps=(bad_step,) + cert.steps[1:]), table)
    assert not verify_certificate(replace(cert, violated=("XY", ("ok", "ok"))), table)


def test_declaration_order_drives_the_chain():
    by_id = {c.id: c for c in fr_contexts()}
    order = [by_id[k] for k in ("AB", "XY", "XB", "AY")]
    table = build_support_table(fr_state(), order)
    cert = hardy_certificate(table, {"X": "ok", "Y": "ok"})
    assert [s.context for s in cert.steps] == ["XB", "AY"]
    assert cert.violated == ("AB", ("h", "1"))


def test_stalled_propagation_falls_back_to_enumeration():
    # two-valued parity constraint: no unit step exists, yet nothing is consistent
    labels = {"P": ("0", "1"), "Q": ("0", "1")}
    table = SupportTable.from_rows(
        {"eq": [("0", "0"), ("1", "1")], "neq": [("0", "1"), ("1", "0")]},
        {"eq": ("P", "Q"), "neq": ("P", "Q")},
        labels,
    )
    assert global_assignments(table) == []
    cert = hardy_certificate(table, {})
    assert cert.violated is None and cert.steps == ()
    assert verify_certificate(cert, table)


def test_intertwinement_witness():
    contexts = fr_contexts()
    shared = shared_observables(contexts)
    assert shared == {
        ("AB", "XB"): {"B"},
        ("AB", "AY"): {"A"},
        ("XB", "XY"): {"X"},
        ("AY", "XY"): {"Y"},
    }
    assert set().union(*(c.observables for c in contexts)) == {"A", "B", "X", "Y"}
    assert all(len(c.observables) < 4 for c in contexts)


# --- randomized certificate soundness -------------------------------------

FR_SHAPE_OBS = {"AB": ("A", "B"), "XB": ("X", "B"), "AY": ("A", "Y"), "XY": ("X", "Y")}
FR_LABELS = {"A": ("h", "t"), "B": ("0", "1"), "X": ("ok", "fail"), "Y": ("ok", "fail")}


@st.composite
def tables_and_premises(draw):
    rows = {}
    for cid, (l, r) in FR_SHAPE_OBS.items():
        cells = list(product(FR_LABELS[l], FR_LABELS[r]))
        keep = draw(st.lists(st.sampled_from(cells), min_size=1, unique=True))
        rows[cid] = keep
    premise = {}
    for o, ls in FR_LABELS.items():
        v = draw(st.sampled_from((None,) + ls))
        if v is not None:
            premise[o] = v
    return rows, premise


@settings(max_examples=600)
@given(tables_and_premises())
def test_certificate_soundness_random_tables(case):
    rows, premise = case
    table = SupportTable.from_rows(rows, FR_SHAPE_OBS, FR_LABELS)
    oracle = brute_force_table({c: set(map(tuple, r)) for c, r in rows.items()}, FR_SHAPE_OBS, FR_LABELS, premise)
    assert global_assignments(table, premise) == oracle
    cert = hardy_certificate(table, premise)
    assert (cert is None) == bool(oracle)
    if cert is not None:
        assert verify_certificate(cert, table)
        for step in cert.steps:
            assert not set(step.excluded) & table.rows[step.context]


@settings(max_examples=500)
@given(st.integers(0, 2**32 - 1))
def test_certificate_soundness_random_sparse_states(seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=4)
    amps[rng.random(4) < 0.4] = 0
    if not amps.any():
        amps[0] = 1
    state = StateVector.normalize(amps, fr_state().factorization)
    table = build_support_table(state, fr_contexts())
    premise = {o: str(rng.choice(FR_LABELS[o])) for o in "ABXY" if rng.random() < 0.5}
    cert = hardy_certificate(table, premise)
    assert (cert is None) == bool(global_assignments(table, premise))
    if cert is not None:
        assert verify_certificate(cert, table)
