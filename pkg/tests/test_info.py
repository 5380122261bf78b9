import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from counterfactual.info import (
    PARTITIONS, best_partition, binary_entropy, entropy, mutual_information,
    mutual_information_repeat, mutual_information_zeno, zeno_conditional, zeno_params,
)

EPS_HALF = 1 - math.sqrt(2) / 2


def test_binary_entropy():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(0.5) == 1.0
    with pytest.raises(ValueError):
        binary_entropy(1.5)


def test_entropy_uniform():
    assert entropy([0.25] * 4) == 2.0


def test_mi_extremes():
    assert mutual_information([[1, 0], [0, 1]]) == 1.0
    assert mutual_information([[0.3, 0.7], [0.3, 0.7]]) == pytest.approx(0.0, abs=1e-15)


@st.composite
def channels(draw):
    k = draw(st.integers(2, 5))
    rows = []
    for _ in range(2):
        w = np.array(draw(st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k)))
        rows.append(w / w.sum())
    return np.array(rows)


@given(channels())
def test_mi_bounded(cond):
    mi = mutual_information(cond)
    assert 0.0 <= mi <= 1.0


def test_binary_symmetric_channel_closed_form():
    q = 0.1
    mi = mutual_information([[1 - q, q], [q, 1 - q]])
    assert math.isclose(mi, 1 - binary_entropy(q), abs_tol=1e-12)
    assert math.isclose(mutual_information_repeat(1, 1 - math.sqrt(1 - q)).mi_bits, mi,
                        abs_tol=1e-12)


def test_repeated_runs_values():
    assert round(mutual_information_repeat(200, 0.2).mi_bits, 4) == 0.9999
    assert round(mutual_information_repeat(8, 0.2).mi_bits, 3) == 0.360


@given(st.integers(1, 2000))
def test_repeated_runs_useless_at_half_flip(runs):
    assert mutual_information_repeat(runs, EPS_HALF).mi_bits < 1e-12


@settings(deadline=None)
@given(st.integers(1, 300), st.floats(0.0, 0.25))
def test_more_runs_never_hurt(runs, eps):
    a = mutual_information_repeat(runs, eps).mi_bits
    b = mutual_information_repeat(runs + 1, eps).mi_bits
    assert b >= a - 1e-12


def test_repeat_validation():
    with pytest.raises(ValueError):
        mutual_information_repeat(0, 0.2)
    with pytest.raises(ValueError):
        mutual_information_repeat(2.5, 0.2)


@pytest.mark.parametrize("partition", PARTITIONS)
def test_conditional_rows_are_distributions(partition):
    cond = zeno_conditional(zeno_params(3, 4, 0.2), partition)
    np.testing.assert_allclose(cond.sum(axis=1), 1.0, atol=1e-10)


def test_unknown_partition():
    with pytest.raises(ValueError):
        zeno_conditional(zeno_params(2, 2, 0.2), "other")


def test_partition_is_recorded():
    r = mutual_information_zeno(zeno_params(2, 2, 0.2), "success_only")
    assert r.partition == "success_only"
    assert r.runs == 8


def test_best_partition_is_closest():
    p = zeno_params(2, 2, 0.2)
    name, values = best_partition(p, 0.6)
    assert set(values) == set(PARTITIONS)
    assert all(abs(values[name] - 0.6) <= abs(v - 0.6) for v in values.values())


def test_decoherence_costs_information():
    clean = mutual_information_zeno(zeno_params(3, 3, 0.0)).mi_bits
    noisy = mutual_information_zeno(zeno_params(3, 3, 0.2)).mi_bits
    assert clean > noisy
