from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from gmekit import (
    Family,
    InvalidArgumentError,
    MeasureSpec,
    Partition,
    SystemShape,
    all_bipartitions,
    bipartite_value,
    delta_pure,
    evaluate_genuine_pure,
    fixture,
    ghz,
    gmc_pure,
    gmc_with_cut,
    product,
    random_pure,
    sum_1234_2,
    sum_1234_3,
    w_state,
)
from gmekit.genuine import sum_over_splits

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def biseparable(seed: int):
    rng = np.random.default_rng(seed)
    return product(random_pure(SystemShape.qubits(2), rng), random_pure(SystemShape([2, 3]), rng))


def test_example_state_reference_values():
    psi = fixture("example4")
    shape = psi.shape
    assert bipartite_value(Family.CONCURRENCE, psi, shape.partition("ABC|D")) == pytest.approx(
        math.sqrt(15) / 8, abs=1e-9)
    assert bipartite_value(Family.CONCURRENCE, psi, shape.partition("AB|CD")) == pytest.approx(
        math.sqrt(65) / 8, abs=1e-9)
    value, cut = gmc_with_cut(psi)
    assert value == pytest.approx(math.sqrt(15) / 8, abs=1e-9)
    assert shape.format(cut) == "ABC|D"
    assert delta_pure(psi).value == 1


def test_delta_on_biseparable_state():
    verdict = delta_pure(biseparable(0))
    assert verdict.value == 0
    assert verdict.witness.format() == "AB|CD"
    assert verdict.max_offproduct <= 1e-12


def test_delta_witness_in_original_indices():
    psi = product(ghz(2), random_pure(SystemShape.qubits(2), 3))
    verdict = delta_pure(psi, partition=Partition.parse("A|B|CD"))
    assert verdict.value == 0
    assert verdict.witness == Partition.parse("AB|CD")
    assert verdict.to_dict(psi.shape.labels)["witness"] == "AB|CD"


def test_delta_on_partition_view_of_genuine_state():
    # the two-block view AB|CD of GHZ4 is entangled, so the gate stays open
    assert delta_pure(ghz(4), partition=Partition.parse("AB|CD")).value == 1


def test_delta_requires_full_cover():
    with pytest.raises(InvalidArgumentError):
        delta_pure(ghz(3), partition=Partition.parse("A|B"))


@given(seeds)
def test_gmc_matches_oracle(seed):
    psi = random_pure(SystemShape([2, 2, 3]), seed)
    assert gmc_pure(psi) == pytest.approx(oracles.gmc_value(psi.amplitudes, (2, 2, 3)), abs=1e-9)


@given(seeds)
def test_gmc_is_min_over_bipartitions(seed):
    psi = random_pure(SystemShape.qubits(4), seed)
    g = gmc_pure(psi)
    values = [bipartite_value(Family.CONCURRENCE, psi, cut) for cut in all_bipartitions(4)]
    assert all(g <= v + 1e-12 for v in values)
    assert min(values) == pytest.approx(g, abs=1e-12)


@given(seeds)
def test_gate_matches_oracle(seed):
    psi = biseparable(seed) if seed % 2 else random_pure(SystemShape([2, 2, 2, 3]), seed)
    dims = psi.shape.dims
    assert delta_pure(psi).value == (0 if oracles.is_biseparable(psi.amplitudes, dims) else 1)


@pytest.mark.parametrize("family", ["ef", "tau", "concurrence", "negativity", "tsallis", "renyi", "fid"])
def test_genuine_variants_vanish_on_biseparable(family):
    psi = biseparable(4)
    spec = MeasureSpec(Family(family))
    assert evaluate_genuine_pure(spec, psi) == 0.0
    assert evaluate_genuine_pure(spec, ghz(4)) == pytest.approx(
        oracles.family_value(family, ghz(4).amplitudes, (2, 2, 2, 2)), abs=1e-9)


def test_sum_functions():
    assert sum_1234_2(Family.CONCURRENCE, ghz(4)) == pytest.approx(7.0, abs=1e-9)
    assert sum_1234_3(Family.TAU, ghz(4)) == pytest.approx(9.0, abs=1e-9)
    assert sum_1234_2(Family.CONCURRENCE, biseparable(1)) == 0.0
    with pytest.raises(InvalidArgumentError):
        sum_1234_2(Family.CONCURRENCE, ghz(3))
    spec = MeasureSpec(Family.SUM_1234_2, inner=Family.TAU)
    # three parties: the three cuts of W each have tau = 2 (1 - 5/9)
    assert sum_over_splits(spec, w_state(3)) == pytest.approx(3 * 8 / 9, abs=1e-9)
    with pytest.raises(InvalidArgumentError):
        sum_over_splits(MeasureSpec(Family.TAU), ghz(3))


def test_gmc_of_ghz_and_w():
    assert gmc_pure(ghz(3)) == pytest.approx(1.0, abs=1e-12)
    assert gmc_pure(w_state(3)) == pytest.approx(math.sqrt(2 * (1 - 5 / 9)), abs=1e-12)
