import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from strategies import located_dags
from orbitplan.errors import NoCapacityError
from orbitplan.groundlink import PassPrediction
from orbitplan.placement import place
from orbitplan.presets import load_preset
from orbitplan.transfer import (
    allocate_passes,
    boundary_crossings,
    insert_transfers,
    retransmission_reserve,
    security_overheads,
    select_fec,
    size_transfer,
    total_volume,
)
from orbitplan.workload import DOWNLINK, GROUND, ONBOARD, UPLINK, ProcessingStep, Workload, topo_sort, validate


def _pass(pid, aos, capacity, ber=1e-5):
    return PassPrediction(pid, pid.split("#")[0], aos, aos + 600.0, 40.0, (), mean_data_rate=capacity * 8 / 600,
                          ber=ber, capacity=capacity)


PASSES = [_pass("a#0", 1000.0, 6000.0), _pass("b#0", 7000.0, 6000.0)]


def test_fec_table():
    assert [select_fec(b) for b in (1e-4, 1e-6, 1e-8)] == [0.5, 0.75, 0.875]


def test_reserve_table():
    assert [retransmission_reserve(b) for b in (1e-4, 1e-6, 1e-8)] == [0.20, 0.05, 0.01]


@given(st.floats(1e-12, 0.5), st.floats(1e-12, 0.5))
def test_fec_monotone(a, b):
    worse, better = max(a, b), min(a, b)
    assert select_fec(worse) <= select_fec(better)


def test_security_overheads():
    mk = lambda enc, integ: ProcessingStep("s", 1.0, encryption=enc, integrity=integ)  # noqa: E731
    assert security_overheads(mk("aes256", "sha256")) == (0.05, 0.008, 0.02)
    assert security_overheads(mk("none", "none")) == (0.0, 0.0, 0.02)
    assert security_overheads(mk("aes128", "crc32")) == (0.03, 0.001, 0.02)


def test_total_volume_values():
    ovh = (0.05, 0.008, 0.02)
    assert total_volume(36.75, 0.75, ovh) == pytest.approx(52.822, abs=1e-9)
    assert total_volume(0.0, 0.75, ovh) == 0.0
    assert total_volume(100.0, 0.75, ovh) == pytest.approx(143.7333333, abs=1e-6)
    with pytest.raises(ValueError):
        total_volume(-1.0, 0.75, ovh)


@given(st.floats(0, 1e5, allow_subnormal=False), st.sampled_from([0.5, 0.75, 0.875]), st.sampled_from([0, 0.03, 0.05]),
       st.sampled_from([0, 0.001, 0.008]))
def test_total_volume_matches_oracle(raw, fec, enc, integ):
    got = total_volume(raw, fec, (enc, integ, 0.02))
    assert got == pytest.approx(oracles.channel_volume(raw, fec, enc, integ), rel=1e-12, abs=1e-12)
    assert got >= raw
    if raw > 0:
        assert got > raw


def test_allocation_examples():
    assert allocate_passes(100.0, [_pass("p#0", 0.0, 7500.0)], DOWNLINK) == ([("p#0", 100.0)], 0.0)
    allocs, short = allocate_passes(10000.0, PASSES, DOWNLINK)
    assert [mb for _, mb in allocs] == pytest.approx([5400.0, 4600.0]) and short == 0.0
    assert allocate_passes(1000.0, [], DOWNLINK) == ([], 1000.0)


def test_uplink_halves_capacity():
    allocs, short = allocate_passes(10000.0, PASSES, UPLINK)
    assert [mb for _, mb in allocs] == [3000.0, 3000.0] and short == pytest.approx(4000.0)


@given(st.floats(0, 50000), st.lists(st.floats(0, 8000), max_size=8), st.sampled_from([DOWNLINK, UPLINK]))
def test_allocation_conservation(volume, caps, direction):
    passes = [_pass(f"p{k}#0", 600.0 * k, c) for k, c in enumerate(caps)]
    allocs, short = allocate_passes(volume, passes, direction)
    kappa = 0.9 if direction == DOWNLINK else 0.5
    assert sum(mb for _, mb in allocs) + short == pytest.approx(volume, rel=1e-12, abs=1e-9)
    cap = {p.id: p.capacity * kappa for p in passes}
    assert all(0 < mb <= cap[pid] + 1e-9 for pid, mb in allocs)
    ref, ref_short = oracles.greedy_fill(volume, caps, kappa)
    assert [mb for _, mb in allocs] == pytest.approx(ref) and short == pytest.approx(ref_short, abs=1e-9)


def test_size_transfer_fields():
    prod = ProcessingStep("enc", 30.0, data_out=36.75, encryption="aes256", integrity="sha256")
    t = size_transfer("x", prod, "dec", DOWNLINK, 1e-5, PASSES)
    assert (t.fec_rate, t.reserve_fraction) == (0.75, 0.05)
    assert t.parity == pytest.approx(12.25)
    assert t.total == pytest.approx(52.822)
    assert t.planned == pytest.approx(52.822 * 1.05)
    assert sum(mb for _, mb in t.allocations) + t.shortfall == pytest.approx(t.planned)
    s = t.step
    assert (s.power, s.compute, s.thermal, s.memory) == (40.0, 0.1, 15.0, 128.0)
    assert s.needs_comms and s.retry_policy == "retry_next_window" and s.max_retries == 3
    assert s.duration == pytest.approx(t.planned / 10.0)  # 80 Mbps = 10 MB/s
    tiny = size_transfer("z", ProcessingStep("p", 1.0, data_out=5.0), None, DOWNLINK, 1e-5, PASSES)
    assert tiny.step.duration == 5.0
    big = size_transfer("y", ProcessingStep("p", 1.0, data_out=1000.0), None, DOWNLINK, 1e-5, PASSES)
    assert big.step.duration == pytest.approx(big.planned / 10.0)


def test_channel_ready_skips_overheads():
    prod = ProcessingStep("enc", 30.0, data_out=560.0, encryption="aes256", channel_ready=True)
    t = size_transfer("x", prod, None, DOWNLINK, 1e-5, PASSES)
    assert t.total == 560.0 and t.parity == 0.0 and t.fec_rate == 1.0


def _insert(name):
    w = load_preset(name)
    return w, *insert_transfers(w, place(w, 40.0), PASSES)


def test_ml_inference_single_downlink():
    w, w2, transfers = _insert("ml-inference")
    assert [t.direction for t in transfers] == [DOWNLINK]
    assert transfers[0].raw == 10.5 and transfers[0].consumer is None
    assert len(w2.steps) == 5
    validate(w2)


def test_split_learning_down_and_up():
    _, w2, transfers = _insert("split-learning")
    assert sorted(t.direction for t in transfers) == [DOWNLINK, UPLINK]
    assert len(w2.steps) == 10
    up = next(t for t in transfers if t.direction == UPLINK)
    assert up.raw == 5.25 and up.total == pytest.approx(7.546)


def test_all_onboard_unchanged():
    w = Workload("x", (ProcessingStep("a", 10.0, location=ONBOARD), ProcessingStep("b", 10.0, location=ONBOARD)),
                 (("a", "b"),))
    w2, transfers = insert_transfers(w, place(w, 40.0), [])
    assert w2 is w and transfers == []


def test_no_passes_with_crossing():
    w = load_preset("split-learning")
    with pytest.raises(NoCapacityError):
        insert_transfers(w, place(w, 40.0), [])


def test_crossings_of_ground_sink():
    w = load_preset("ml-inference")
    locs = {d.step_id: d.location for d in place(w, 40.0)}
    assert boundary_crossings(w, locs) == [("encrypt", None)]


def _reach(w):
    succ = w.successors()
    out = {}
    for s in topo_sort(w)[::-1]:
        out[s] = set(succ[s]).union(*(out[v] for v in succ[s])) if succ[s] else set()
    return out


@given(located_dags())
def test_insertion_keeps_dag_and_reachability(w):
    decisions = place(w, 40.0)
    w2, transfers = insert_transfers(w, decisions, PASSES)
    validate(w2)
    before, after = _reach(w), _reach(w2)
    for u, reach in before.items():
        assert reach <= after[u]
    loc = {d.step_id: d.location for d in decisions}
    for t in transfers:
        loc[t.id] = ONBOARD
    # every remaining edge between original steps stays on one side
    original = {s.id for s in w.steps}
    for u, v in w2.edges:
        if u in original and v in original:
            assert loc[u] == loc[v]
    for t in transfers:
        assert t.total >= t.raw
        assert sum(mb for _, mb in t.allocations) + t.shortfall == pytest.approx(t.planned, abs=1e-9)
