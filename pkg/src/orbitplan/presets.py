"""The five built-in workloads.

Resource figures are representative values chosen so every non-transfer
on-board step fits an eclipse window (power <= 25 W, compute <= 0.6,
thermal <= 15 W, 30-300 s). Data volumes follow each pipeline's
reduction chain:

================  =============================================  ===========
preset            boundary chain                                 DL / UL MB
================  =============================================  ===========
ml-inference      2000 -> 500 (4:1) -> 10 (50:1) -> 10.5 (+5%)  10.5 / 0
split-learning    2000 -> 50 (40:1) -> 35 -> 36.75 | 5 -> 5.25  36.75 / 5.25
eo-qa             5000 -> 4500 -> 3000 -> 400 -> 533.3 -> 560    560 / 0
federated         800 -> 40 -> 4 (top-k 10%) -> 3.52 -> 3.7      3.7 / 5.8
store-forward     100 -> 100 (CRC) -> 150 (RS 2/3) -> 157.5      157.5 / 0
================  =============================================  ===========
"""

from __future__ import annotations

from orbitplan.errors import UnknownPresetError
from orbitplan.workload import EITHER, GROUND, ONBOARD, ProcessingStep, Workload


def _onboard(step_id, duration, power, compute, thermal, data_in, data_out, **kw) -> ProcessingStep:
    kw.setdefault("location", ONBOARD)
    kw.setdefault("retry_policy", "retry_same_window")
    kw.setdefault("max_retries", 2)
    return ProcessingStep(
        id=step_id,
        duration=duration,
        power=power,
        compute=compute,
        thermal=thermal,
        memory=kw.pop("memory", 256.0),
        storage=kw.pop("storage", max(data_in, data_out)),
        data_in=data_in,
        data_out=data_out,
        **kw,
    )


def _ground(step_id, duration, data_in, data_out, **kw) -> ProcessingStep:
    return ProcessingStep(
        id=step_id,
        duration=duration,
        power=0.0,
        compute=0.0,
        thermal=0.0,
        memory=kw.pop("memory", 4096.0),
        storage=kw.pop("storage", max(data_in, data_out)),
        data_in=data_in,
        data_out=data_out,
        location=GROUND,
        retry_policy=kw.pop("retry_policy", "retry_same_window"),
        max_retries=kw.pop("max_retries", 3),
        **kw,
    )


def _chain(*ids):
    return tuple(zip(ids, ids[1:]))


def ml_inference() -> Workload:
    steps = (
        _onboard("capture", 120, 12.0, 0.2, 5.0, 0.0, 2000.0, description="sensor captures 2 GB of imagery"),
        _onboard("preprocess", 180, 20.0, 0.5, 10.0, 2000.0, 500.0, location=EITHER, memory=1024.0,
                 checkpoint_interval=60.0, description="radiometric correction and tiling (4:1)"),
        _onboard("inference", 240, 25.0, 0.6, 15.0, 500.0, 10.0, location=EITHER, memory=2048.0,
                 checkpoint_interval=120.0, description="detection model (50:1)"),
        _onboard("encrypt", 30, 8.0, 0.2, 4.0, 10.0, 10.5, encryption="aes256", integrity="sha256",
                 description="encrypt detections for downlink"),
    )
    return Workload(
        name="ml-inference",
        steps=steps,
        edges=_chain("capture", "preprocess", "inference", "encrypt"),
        sink=GROUND,
        description="All compute on-board; only detections are downlinked.",
    )


def split_learning() -> Workload:
    steps = (
        _onboard("capture", 120, 12.0, 0.2, 5.0, 0.0, 2000.0),
        _onboard("feature_extract", 240, 25.0, 0.6, 15.0, 2000.0, 50.0, location=EITHER, memory=2048.0,
                 checkpoint_interval=120.0, description="frontend layers (40:1)"),
        _onboard("compress_features", 60, 10.0, 0.3, 5.0, 50.0, 35.0),
        _onboard("encrypt_features", 30, 8.0, 0.2, 4.0, 35.0, 36.75, encryption="aes256", integrity="sha256"),
        _ground("decrypt_features", 20, 36.75, 35.0),
        ProcessingStep(
            id="backend_train", duration=300, power=25.0, compute=0.6, thermal=15.0, memory=8192.0,
            storage=512.0, data_in=35.0, data_out=5.0, location=EITHER, retry_policy="retry_same_window",
            max_retries=3, checkpoint_interval=60.0, description="backend layers; produces weight update",
        ),
        _ground("encrypt_weights", 10, 5.0, 5.25, encryption="aes256", integrity="sha256"),
        _onboard("apply_weights", 60, 10.0, 0.3, 5.0, 5.25, 0.0, description="load updated frontend weights"),
    )
    return Workload(
        name="split-learning",
        steps=steps,
        edges=_chain(
            "capture", "feature_extract", "compress_features", "encrypt_features",
            "decrypt_features", "backend_train", "encrypt_weights", "apply_weights",
        ),
        description="Frontend on-board, backend on the ground, weights uplinked.",
    )


def eo_qa() -> Workload:
    steps = (
        _onboard("capture", 180, 12.0, 0.2, 5.0, 0.0, 5000.0),
        _onboard("quality_check", 120, 15.0, 0.4, 8.0, 5000.0, 4500.0, description="reject 10% of frames"),
        _onboard("cloud_filter", 240, 20.0, 0.5, 10.0, 4500.0, 3000.0, location=EITHER,
                 checkpoint_interval=120.0, description="discard cloudy tiles (33%)"),
        _onboard("compress", 300, 22.0, 0.6, 12.0, 3000.0, 400.0, checkpoint_interval=150.0,
                 description="JPEG2000 (7.5:1)"),
        _onboard("fec_encode", 60, 10.0, 0.3, 5.0, 400.0, 400.0 / 0.75, description="Reed-Solomon rate 3/4"),
        _onboard("encrypt", 60, 8.0, 0.2, 4.0, 400.0 / 0.75, 560.0, encryption="aes256", integrity="sha256",
                 channel_ready=True),
        _ground("ingest", 60, 560.0, 400.0 / 0.75, description="decrypt"),
        _ground("fec_decode", 60, 400.0 / 0.75, 400.0),
        _ground("archive", 30, 400.0, 0.0),
    )
    return Workload(
        name="eo-qa",
        steps=steps,
        edges=_chain(
            "capture", "quality_check", "cloud_filter", "compress", "fec_encode", "encrypt",
            "ingest", "fec_decode", "archive",
        ),
        description="Large-volume imagery pipeline with on-board QA and channel coding.",
    )


def federated() -> Workload:
    steps = (
        _onboard("load_dataset", 60, 8.0, 0.2, 4.0, 0.0, 800.0),
        _onboard("local_train", 300, 25.0, 0.6, 15.0, 800.0, 40.0, location=EITHER, memory=2048.0,
                 checkpoint_interval=60.0),
        _onboard("compute_gradients", 120, 20.0, 0.5, 10.0, 40.0, 40.0),
        _onboard("sparsify", 60, 10.0, 0.3, 5.0, 40.0, 4.0, description="top-k, keep 10%"),
        _onboard("compress", 30, 8.0, 0.2, 4.0, 4.0, 3.52),
        _onboard("encrypt", 30, 8.0, 0.2, 4.0, 3.52, 3.7, encryption="aes256", integrity="sha256"),
        _ground("decrypt", 10, 3.7, 3.52),
        _ground("fedavg_aggregate", 120, 3.52, 5.5),
        _ground("encrypt_global", 10, 5.5, 5.8, encryption="aes256", integrity="sha256"),
        _onboard("apply_global_model", 60, 10.0, 0.3, 5.0, 5.8, 0.0),
    )
    return Workload(
        name="federated",
        steps=steps,
        edges=_chain(
            "load_dataset", "local_train", "compute_gradients", "sparsify", "compress", "encrypt",
            "decrypt", "fedavg_aggregate", "encrypt_global", "apply_global_model",
        ),
        description="Local training on-board; only sparse gradients and global weights cross the link.",
    )


def store_forward() -> Workload:
    steps = (
        _onboard("receive", 60, 20.0, 0.2, 8.0, 0.0, 100.0, needs_comms=True, retry_policy="retry_next_window",
                 max_retries=3, description="ingest relay data during a contact"),
        _onboard("crc_check", 30, 8.0, 0.2, 4.0, 100.0, 100.0, integrity="crc32"),
        _onboard("rs_encode", 60, 10.0, 0.3, 5.0, 100.0, 150.0, description="Reed-Solomon rate 2/3"),
        _onboard("encrypt", 30, 8.0, 0.2, 4.0, 150.0, 157.5, encryption="aes256", channel_ready=True),
        _ground("rs_decode", 30, 157.5, 100.0),
        _ground("deliver", 10, 100.0, 0.0),
    )
    return Workload(
        name="store-forward",
        steps=steps,
        edges=_chain("receive", "crc_check", "rs_encode", "encrypt", "rs_decode", "deliver"),
        description="Receive on one contact, protect, forward on a later one.",
    )


PRESETS = {
    "ml-inference": ml_inference,
    "split-learning": split_learning,
    "eo-qa": eo_qa,
    "federated": federated,
    "store-forward": store_forward,
}


def preset_names() -> list[str]:
    return list(PRESETS)


def load_preset(name: str) -> Workload:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise UnknownPresetError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return factory()
