import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from orbitplan.placement import (
    COST_COMPARE,
    FIXED,
    REDUCTION_HEURISTIC,
    PlacementConfig,
    cost_ground,
    cost_onboard,
    decide,
    ground_volumes,
    place,
)
from orbitplan.presets import load_preset
from orbitplan.workload import EITHER, GROUND, ONBOARD, ProcessingStep


def _step(**kw):
    kw.setdefault("id", "s")
    kw.setdefault("duration", 60.0)
    return ProcessingStep(**kw)


def test_cost_onboard_values():
    assert cost_onboard(_step(power=20.0, thermal=10.0), 40.0) == 1355.0
    assert cost_onboard(_step(duration=1e-9), 40.0) == pytest.approx(0.0, abs=1e-6)
    a = cost_onboard(_step(power=7.0, duration=50.0), 40.0)
    b = cost_onboard(_step(power=7.0, duration=100.0), 40.0)
    assert b == pytest.approx(2 * a)
    with pytest.raises(ValueError):
        cost_onboard(_step(), 0.0)


def test_cost_ground_values():
    s = _step(data_in=100.0, data_out=10.0, encryption="aes256")
    assert ground_volumes(s) == pytest.approx((140.0, 14.0))
    assert cost_ground(s) == pytest.approx(462.0)
    assert cost_ground(_step()) == 0.0
    plain = _step(data_in=100.0, data_out=10.0)
    assert cost_ground(s) / cost_ground(plain) == pytest.approx(1.05)


@given(st.floats(0, 100), st.floats(1, 300), st.floats(0, 40), st.floats(0, 5000), st.floats(0, 5000))
def test_costs_match_oracles(p, d, theta, d_in, d_out):
    s = _step(power=p, duration=d, thermal=theta, data_in=d_in, data_out=d_out, encryption="aes128")
    assert cost_onboard(s, 40.0) == pytest.approx(oracles.onboard_cost(p, d, theta, 40.0))
    assert cost_ground(s) == pytest.approx(oracles.ground_cost(d_in, d_out, 0.03))


def test_reduction_heuristic():
    d = decide(_step(location=EITHER, data_in=500.0, data_out=10.0, power=1000.0), 40.0)
    assert (d.location, d.reason) == (ONBOARD, REDUCTION_HEURISTIC)


def test_fixed_location():
    d = decide(_step(location=GROUND, data_in=500.0, data_out=10.0), 40.0)
    assert (d.location, d.reason, d.cost_onboard, d.cost_ground) == (GROUND, FIXED, None, None)


def test_cost_compare_goes_ground():
    s = _step(location=EITHER, power=20.0, thermal=10.0, data_in=100.0, data_out=10.0, encryption="aes256")
    d = decide(s, 40.0)
    assert (d.location, d.reason) == (GROUND, COST_COMPARE)
    assert (d.cost_onboard, d.cost_ground) == pytest.approx((1355.0, 462.0))


def test_zero_input_falls_through_to_cost_compare():
    d = decide(_step(location=EITHER, data_in=0.0, data_out=5.0), 40.0)
    assert d.reason == COST_COMPARE


def test_tie_goes_onboard():
    # onboard 60 * 0.5 = 30; ground V/10*10 + 2V = 3V with V = (6 + 1.5) / 0.75 = 10
    s = _step(location=EITHER, data_in=6.0, data_out=1.5)
    assert cost_onboard(s, 40.0) == cost_ground(s) == 30.0
    assert decide(s, 40.0).location == ONBOARD


@given(
    p=st.floats(0, 100), d=st.floats(1, 300), theta=st.floats(0, 40),
    d_in=st.floats(0, 5000), d_out=st.floats(0, 5000), loc=st.sampled_from([EITHER, ONBOARD, GROUND]),
)
def test_fixed_never_contradicted_and_heuristic_ignores_resources(p, d, theta, d_in, d_out, loc):
    s = _step(location=loc, power=p, duration=d, thermal=theta, data_in=d_in, data_out=d_out)
    dec = decide(s, 40.0)
    if loc != EITHER:
        assert dec.location == loc and dec.reason == FIXED
    elif d_in > 0 and d_out / d_in < 0.1:
        assert dec.reason == REDUCTION_HEURISTIC
        assert decide(_step(location=EITHER, data_in=d_in, data_out=d_out), 40.0).reason == REDUCTION_HEURISTIC


def test_presets_place_deterministically():
    for name in ("ml-inference", "split-learning", "federated"):
        w = load_preset(name)
        assert place(w, 40.0) == place(w, 40.0)
    sl = {d.step_id: d for d in place(load_preset("split-learning"), 40.0)}
    assert sl["feature_extract"].location == ONBOARD
    assert (sl["backend_train"].location, sl["backend_train"].reason) == (GROUND, COST_COMPARE)
    ml = {d.step_id: d for d in place(load_preset("ml-inference"), 40.0)}
    assert (ml["inference"].location, ml["inference"].reason) == (ONBOARD, REDUCTION_HEURISTIC)


def test_config_validation_and_scaling():
    with pytest.raises(ValueError):
        PlacementConfig(transfer_volume_weight=0.0)
    with pytest.raises(ValueError):
        PlacementConfig(enc_overhead={"none": 0.1})
    cfg = PlacementConfig().scaled(4.0)
    assert cfg.thermal_penalty_scale == 2000.0 and cfg.assumed_mean_rate == 80.0
