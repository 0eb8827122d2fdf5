import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from orbitplan.errors import CycleError, DanglingEdgeError, DuplicateStepError, UnknownPresetError, WorkloadError
from orbitplan.presets import load_preset, preset_names
from orbitplan.workload import (
    EITHER,
    GROUND,
    ONBOARD,
    ProcessingStep,
    Workload,
    load_workload_file,
    topo_sort,
    validate,
    workload_from_dict,
    workload_to_dict,
)


def _wl(ids, edges, **kw):
    return Workload("t", tuple(ProcessingStep(i, 10.0) for i in ids), tuple(edges), **kw)


def test_chain_validates_and_sorts():
    w = _wl("abc", [("a", "b"), ("b", "c")])
    validate(w)
    assert topo_sort(w) == ["a", "b", "c"]


def test_two_cycle_reported():
    with pytest.raises(CycleError) as exc:
        validate(_wl("ab", [("a", "b"), ("b", "a")]))
    assert exc.value.cycle == ["a", "b"]


def test_longer_cycle_is_a_real_cycle():
    edges = [("a", "b"), ("b", "c"), ("c", "d"), ("d", "b")]
    with pytest.raises(CycleError) as exc:
        validate(_wl("abcd", edges))
    cyc = exc.value.cycle
    assert set(cyc) == {"b", "c", "d"}
    assert all((cyc[i], cyc[(i + 1) % len(cyc)]) in edges for i in range(len(cyc)))


def test_dangling_edge():
    with pytest.raises(DanglingEdgeError):
        validate(_wl("ab", [("a", "z")]))


def test_duplicate_id():
    with pytest.raises(DuplicateStepError):
        validate(_wl("aa", []))


def test_step_field_checks():
    with pytest.raises(WorkloadError):
        validate(Workload("t", (ProcessingStep("a", 0.0),)))
    with pytest.raises(WorkloadError):
        validate(Workload("t", (ProcessingStep("a", 1.0, compute=1.5),)))
    with pytest.raises(WorkloadError):
        validate(Workload("t", (ProcessingStep("a", 1.0, encryption="des"),)))


def test_diamond_tie_break():
    w = _wl("dcba", [("a", "c"), ("a", "b"), ("b", "d"), ("c", "d")])
    assert topo_sort(w) == ["a", "b", "c", "d"]


def test_empty_workload():
    assert topo_sort(Workload("empty", ())) == []


@st.composite
def dags(draw):
    n = draw(st.integers(1, 15))
    ids = [f"s{k:02d}" for k in draw(st.permutations(range(n)))]
    edges = {(ids[i], ids[j]) for i in range(n) for j in range(i + 1, n) if draw(st.booleans())}
    return ids, sorted(edges)


@given(dags())
def test_topo_sort_is_a_valid_permutation(d):
    ids, edges = d
    order = topo_sort(_wl(ids, edges))
    assert sorted(order) == sorted(ids)
    pos = {s: k for k, s in enumerate(order)}
    assert all(pos[u] < pos[v] for u, v in edges)


def test_json_round_trip(tmp_path):
    w = load_preset("split-learning")
    path = tmp_path / "w.json"
    path.write_text(json.dumps(workload_to_dict(w)))
    assert load_workload_file(path) == w


def test_json_edge_forms_and_errors(tmp_path):
    doc = {"name": "x", "steps": [{"id": "a", "duration": 1}, {"id": "b", "duration": 2}],
           "edges": [{"from": "a", "to": "b"}]}
    assert workload_from_dict(doc).edges == (("a", "b"),)
    doc["edges"] = [["a", "b"]]
    assert workload_from_dict(doc).edges == (("a", "b"),)
    with pytest.raises(WorkloadError):
        workload_from_dict({"steps": [{"id": "a", "duration": 1, "colour": "red"}]})
    with pytest.raises(WorkloadError):
        workload_from_dict({"steps": [{"id": "a"}]})
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(WorkloadError):
        load_workload_file(bad)


# -- presets -----------------------------------------------------------------------


def test_five_presets_all_valid():
    assert preset_names() == ["ml-inference", "split-learning", "eo-qa", "federated", "store-forward"]
    for name in preset_names():
        validate(load_preset(name))


def test_unknown_preset():
    with pytest.raises(UnknownPresetError):
        load_preset("weather")


def test_preset_resource_envelope():
    for name in preset_names():
        for s in load_preset(name).steps:
            if s.location != GROUND:
                assert s.power <= 25 and s.compute <= 0.6 and s.thermal <= 15, (name, s.id)
                assert 30 <= s.duration <= 300, (name, s.id)


def _exit_volume(w, step_id):
    return w.step(step_id).data_out


def test_ml_inference_chain():
    w = load_preset("ml-inference")
    assert topo_sort(w) == ["capture", "preprocess", "inference", "encrypt"]
    assert [w.step(s).data_out for s in topo_sort(w)] == [2000.0, 500.0, 10.0, 10.5]
    assert w.sink == GROUND
    assert all(s.location in (ONBOARD, EITHER) for s in w.steps)


def test_preset_boundary_volumes():
    assert _exit_volume(load_preset("split-learning"), "encrypt_features") == 36.75
    assert _exit_volume(load_preset("split-learning"), "encrypt_weights") == 5.25
    assert _exit_volume(load_preset("federated"), "encrypt") == 3.7
    assert _exit_volume(load_preset("federated"), "encrypt_global") == 5.8
    assert _exit_volume(load_preset("eo-qa"), "encrypt") == pytest.approx(5000 * 0.9 * (2 / 3) / 7.5 / 0.75 * 1.05)
    assert _exit_volume(load_preset("eo-qa"), "encrypt") == 560.0
    assert _exit_volume(load_preset("store-forward"), "encrypt") == pytest.approx(100 * 1.5 * 1.05)


def test_federated_raw_data_stays_onboard():
    w = load_preset("federated")
    assert w.step("load_dataset").location == ONBOARD
    assert w.step("local_train").data_out / w.step("local_train").data_in < 0.1
