import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from counterfactual.histories import (
    CapExceeded, all_f_history, coherent_sum, counterfactuality_report, enumerate_histories,
    interference_report, is_counterfactual_outcome, projective_state,
)
from counterfactual.qstate import PureState
from counterfactual.zeno import (
    Final, ProtocolParams, Variant, outcome_tree, parse_events, run_ideal, success_record,
)

TP = math.pi / 140


def _step_params(x):
    return ProtocolParams(2, 70, x=x)


def _by_name(hs):
    return {str(h): h for h in hs}


def test_first_step_histories_output0():
    hs = _by_name(enumerate_histories(_step_params(0), routine_steps=1, final=False))
    assert hs["f0_3f0_30_2"].vector.allclose(
        PureState({(0, 0, 0): math.cos(TP), (1, 0, 0): math.sin(TP) / 2}))
    assert hs["n0_3f0_30_2"].vector.allclose(PureState({(1, 0, 0): -math.sin(TP) / 2}))
    assert hs["f0_3n0_31_2"].vector.allclose(PureState({(1, 1, 0): math.sin(TP) / 2}))


def test_first_step_histories_output1():
    hs = _by_name(enumerate_histories(_step_params(1), routine_steps=1, final=False))
    assert hs["n1_3f1_30_2"].vector.allclose(PureState({(1, 0, 1): -math.sin(TP) / 2}))


def test_zero_vectors_are_kept():
    hs = enumerate_histories(_step_params(0), routine_steps=1, final=False)
    # 2 insertions and 3 free measurements
    assert len(hs) == 2 ** 5
    assert any(h.norm2 == 0.0 for h in hs)


def test_destructive_interference_output0():
    p = _step_params(0)
    record = parse_events("0_30_30_2")
    hs = enumerate_histories(p, record, routine_steps=1, final=False)
    total = coherent_sum(hs, record)
    assert total.allclose(PureState.basis().scaled(math.cos(TP)))
    assert abs(total.amplitude(1, 0, 0)) < 1e-14
    amps = sorted(h.vector.amplitude(1, 0, 0).real for h in hs if h.norm2 > 0)
    assert amps == pytest.approx([-math.sin(TP) / 2, math.sin(TP) / 2], abs=1e-15)
    cancelling = interference_report(hs, record)
    assert set(cancelling) == {(1, 0, 0, 0, 0)}


def test_output1_single_contributing_history():
    p = _step_params(1)
    record = parse_events("0_30_30_2")
    hs = [h for h in enumerate_histories(p, record, routine_steps=1, final=False) if h.norm2 > 0]
    assert [str(h) for h in hs] == ["f0_3f0_30_2"]
    assert coherent_sum(hs, record).allclose(
        PureState({(0, 0, 0): math.cos(TP), (1, 0, 0): math.sin(TP) / 2}))


def test_empty_protocol_has_one_history():
    hs = enumerate_histories(ProtocolParams(2, 2), routine_steps=0, final=False)
    assert len(hs) == 1
    assert hs[0].events == ()
    assert hs[0].vector.allclose(PureState.basis())


def test_empty_record_sum_is_normalised():
    hs = enumerate_histories(ProtocolParams(2, 2))
    assert abs(coherent_sum(hs).norm2() - 1.0) < 1e-12


def test_cap_refusal():
    with pytest.raises(CapExceeded) as err:
        enumerate_histories(ProtocolParams(4, 4), cap=16)
    assert err.value.cap == 16 and err.value.required > 16
    assert str(err.value.required) in str(err.value)


def test_record_mismatch_and_length():
    p = ProtocolParams(1, 1)
    with pytest.raises(ValueError):
        enumerate_histories(p, parse_events("0_2"))
    with pytest.raises(ValueError):
        enumerate_histories(p, parse_events("0_30_20_10_1"))
    with pytest.raises(ValueError):
        enumerate_histories(p.replace(epsilon=0.1))


@st.composite
def records(draw):
    n, nprime = draw(st.integers(1, 3)), draw(st.integers(1, 3))
    x = draw(st.integers(0, 1))
    variant = draw(st.sampled_from(list(Variant)))
    if variant is Variant.MODIFIED:
        n, nprime = min(n, 2), min(nprime, 2)
    p = ProtocolParams(n, nprime, x=x, variant=variant)
    rec = draw(st.sampled_from(sorted(outcome_tree(p), key=str)))
    # leave at most four real measurements open so enumeration stays small
    cut = draw(st.integers(max(0, len(rec) - 4), len(rec)))
    return p, rec[:cut]


@settings(max_examples=40, deadline=None)
@given(records())
def test_coherent_sum_equals_projective_simulation(case):
    p, record = case
    hs = enumerate_histories(p, record)
    assert coherent_sum(hs, record).max_abs_diff(projective_state(p, record)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 1))
def test_all_f_matches_enumeration(n, nprime, x):
    p = ProtocolParams(n, nprime, x=x)
    rec = success_record(p) + (Final(x),)
    hs = [h for h in enumerate_histories(p, rec) if h.is_all_f and h.real_events == rec]
    assert len(hs) == 1
    assert hs[0].vector.max_abs_diff(all_f_history(p, final=x).vector) < 1e-12
    assert hs[0].events == all_f_history(p, final=x).events


@pytest.mark.parametrize("n,nprime", [(1, 1), (2, 3), (5, 7), (10, 10), (20, 20), (13, 4)])
def test_c1_equals_success_probability(n, nprime):
    rep = counterfactuality_report(ProtocolParams(n, nprime))
    assert abs(rep.c1 - rep.p_mm1_given_1) < 1e-12


def test_report_values():
    rep = counterfactuality_report(ProtocolParams(700, 70))
    assert (round(rep.c0, 4), round(rep.c1, 3)) == (0.0015, 0.884)
    assert (round(rep.p_mm0_given_0, 3), round(rep.p_mm1_given_1, 3)) == (0.965, 0.884)
    rep = counterfactuality_report(ProtocolParams(40, 70))
    assert (round(rep.c0, 3), round(rep.c1, 3)) == (0.188, 0.175)
    assert all(0 <= v <= 1 for v in rep.as_dict().values())


@pytest.mark.parametrize("n,nprime", [(2, 1), (2, 2), (3, 2)])
def test_output1_success_is_counterfactual(n, nprime):
    p = ProtocolParams(n, nprime, x=1)
    ok, w = is_counterfactual_outcome(p, success_record(p) + (Final(1),))
    assert ok and w.condition1 and w.condition2


@pytest.mark.parametrize("n,nprime", [(2, 2), (3, 2)])
def test_output0_success_is_not_counterfactual(n, nprime):
    p = ProtocolParams(n, nprime, x=0)
    ok, w = is_counterfactual_outcome(p, success_record(p) + (Final(0),))
    assert not ok and not w.condition1
    assert w.offending and all(not h.is_all_f for h in w.offending)


def test_vacuous_record():
    ok, w = is_counterfactual_outcome(ProtocolParams(2, 2), ())
    assert ok and w.note


def test_condition2_detects_shared_record():
    # with N'=1 a single routine step makes q1=1 certain, and m_1 is reachable for both outputs
    p = ProtocolParams(3, 1, x=1)
    ok, w = is_counterfactual_outcome(p, success_record(p) + (Final(1),))
    assert ok == (w.condition1 and w.condition2)
    assert w.other_output_probability == pytest.approx(
        run_ideal(p.replace(x=0)).p_success_1, abs=1e-15)
