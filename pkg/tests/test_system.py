import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfc.ring import RingParams
from qfc.spectra import fsr
from qfc.system import (
    DfbTuning,
    NoiseModel,
    PowerBudget,
    Stage,
    chain_efficiency,
    channel_count,
    detuning_temperature,
    dfb_wavelength,
)


def test_reference_channel_count():
    assert channel_count(PowerBudget(20.0, 0.20, 360.0)) == 11
    assert 20.0 * 1e3 * 0.20 // 360.0 == 11


def test_channel_count_exact_multiple_and_zero():
    assert channel_count(PowerBudget(3.6, 1.0, 360.0)) == 10
    assert channel_count(PowerBudget(1.0, 0.2, 360.0)) == 0


def test_channel_count_doubling():
    assert channel_count(PowerBudget(40.0, 0.20, 360.0)) == 22


@given(
    p=st.floats(0.1, 100.0),
    eta=st.floats(0.01, 0.5),
    per=st.floats(10.0, 5000.0),
    f=st.floats(1.0, 2.0),
)
def test_channel_count_monotone(p, eta, per, f):
    n = channel_count(PowerBudget(p, eta, per))
    assert channel_count(PowerBudget(p * f, eta, per)) >= n
    assert channel_count(PowerBudget(p, min(eta * f, 1.0), per)) >= n
    assert channel_count(PowerBudget(p, eta, per * f)) <= n


def test_budget_invariants():
    with pytest.raises(ValueError):
        PowerBudget(20.0, 1.5, 360.0)
    with pytest.raises(ValueError):
        PowerBudget(0.0, 0.2, 360.0)


def test_residual_stage_composition():
    res = chain_efficiency([Stage("ring", 0.70), Stage("residual", 0.57 / 0.70)])
    assert res.efficiency == pytest.approx(0.57, rel=1e-12)
    assert 0.57 / 0.70 == pytest.approx(0.814, abs=1e-3)


def test_fiber_to_fiber_chain():
    res = chain_efficiency([Stage("on-chip", 0.57), Stage("fiber", 0.30)])
    assert res.efficiency == pytest.approx(0.171, rel=1e-12)
    assert res.loss_db == pytest.approx(-10 * math.log10(0.171), rel=1e-12)


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=5))
def test_chain_order_invariant(effs):
    stages = [Stage(f"s{i}", e) for i, e in enumerate(effs)]
    base = chain_efficiency(stages).efficiency
    for perm in itertools.islice(itertools.permutations(stages), 24):
        assert chain_efficiency(perm).efficiency == pytest.approx(base, rel=1e-12)


def test_chain_errors():
    with pytest.raises(ValueError):
        chain_efficiency([])
    with pytest.raises(ValueError):
        Stage("bad", 1.2)


def test_dfb_tuning():
    t = DfbTuning(1064.0, 25.0)
    assert dfb_wavelength(t, 25.0) == 1064.0
    assert dfb_wavelength(t, 35.0) == pytest.approx(1064.855, abs=1e-12)
    with pytest.raises(ValueError):
        dfb_wavelength(t, 80.0)


def test_dfb_temperature_per_fsr():
    t = DfbTuning(1064.0, 25.0)
    spacing = fsr(RingParams(74.0, 1.73, 0.2), 2.2, 1533.0)
    assert detuning_temperature(t, spacing) == pytest.approx(spacing / 0.0855, rel=1e-12)
    assert detuning_temperature(t, spacing) == pytest.approx(26.87, abs=0.01)


def test_noise_anchor():
    m = NoiseModel()
    assert m.rate(360e-6) == pytest.approx(7000.0, rel=1e-12)
    assert m.rate(0.0) == 0.0
    assert NoiseModel.from_anchor(360e-6, 7000.0) == m
    assert NoiseModel.from_anchor(360e-6, 7000.0).rate(720e-6) == pytest.approx(14000.0)
