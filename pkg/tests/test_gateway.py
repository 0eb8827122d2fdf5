import io
import json
import socket
import threading
import time
import urllib.error
import urllib.request
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from conftest import FIXTURES, START
from orbitplan.errors import CycleError, RequestError, SatelliteNotFoundError, TleError, TleProviderError
from orbitplan.gateway.cache import PlanCache
from orbitplan.gateway.cli import main
from orbitplan.gateway.pipeline import PlanConfig, PlanRequest, Planner, cache_key, config_from_dict
from orbitplan.gateway.service import make_server
from orbitplan.gateway.tle_source import FileTleSource, InlineTleSource, RemoteTleSource, parse_tle_text
from orbitplan.placement import PlacementConfig

ISS_TEXT = (FIXTURES / "iss.tle").read_text()
ISO_START = "2024-03-20T00:00:00Z"


# -- element-set sources -------------------------------------------------------------


def test_parse_two_and_three_line_text():
    lines = ISS_TEXT.strip().splitlines()
    (three,) = parse_tle_text(ISS_TEXT)
    (two,) = parse_tle_text("\n".join(lines[1:]))
    assert three.name == "ISS (ZARYA)" and two.name == ""
    assert three.catalog_number == two.catalog_number == 25544
    (titled,) = parse_tle_text("0 " + ISS_TEXT)
    assert titled.name == "ISS (ZARYA)"
    assert len(parse_tle_text((FIXTURES / "catalog.tle").read_text())) == 3
    with pytest.raises(TleError):
        parse_tle_text("JUST A TITLE\n")


def test_file_and_inline_sources():
    cat = FileTleSource(FIXTURES / "catalog.tle")
    assert cat.fetch(43013).catalog_number == 43013
    with pytest.raises(SatelliteNotFoundError):
        cat.fetch(99999)
    with pytest.raises(RequestError):
        cat.fetch(None)
    with pytest.raises(RequestError):
        FileTleSource(FIXTURES / "missing.tle").fetch(25544)
    _, l1, l2 = ISS_TEXT.strip().splitlines()
    assert InlineTleSource(l1, l2).fetch(25544).catalog_number == 25544
    assert not cat.remote and not InlineTleSource(l1, l2).remote


class _Provider(BaseHTTPRequestHandler):
    delay = 0.0
    hits = 0

    def log_message(self, *args):
        pass

    def do_GET(self):
        type(self).hits += 1
        if self.delay:
            time.sleep(self.delay)
        if "CATNR=25544" in self.path:
            body, status = ISS_TEXT, 200
        elif "CATNR=404" in self.path:
            body, status = "", 404
        else:
            body, status = "No GP data found", 200
        data = body.encode()
        try:
            self.send_response(status)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)
        except OSError:
            pass


@pytest.fixture
def provider():
    handler = type("Handler", (_Provider,), {"delay": 0.0, "hits": 0})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield handler, f"http://127.0.0.1:{server.server_address[1]}/gp.php?CATNR={{norad}}&FORMAT=TLE"
    server.shutdown()
    server.server_close()


def test_remote_fetch_from_fixture_server(provider):
    _, url = provider
    tle = RemoteTleSource(url).fetch(25544)
    assert (tle.catalog_number, tle.name) == (25544, "ISS (ZARYA)")
    assert tle == FileTleSource(FIXTURES / "iss.tle").fetch(25544)


def test_remote_not_found(provider):
    _, url = provider
    with pytest.raises(SatelliteNotFoundError):
        RemoteTleSource(url).fetch(11111)
    with pytest.raises(SatelliteNotFoundError):
        RemoteTleSource(url).fetch(404)


def test_remote_timeout_retries_then_fails(provider):
    handler, url = provider
    handler.delay = 1.0
    naps = []
    src = RemoteTleSource(url, timeout=0.2, sleep=naps.append)
    with pytest.raises(TleProviderError):
        src.fetch(25544)
    assert naps == [1.0, 1.0]
    assert handler.hits == 3


def test_remote_url_template_from_env(monkeypatch):
    monkeypatch.setenv("ORBITPLAN_TLE_URL", "http://example.invalid/{norad}")
    assert RemoteTleSource().url_template == "http://example.invalid/{norad}"
    with pytest.raises(RequestError):
        RemoteTleSource("http://example.invalid/")


def test_remote_malformed_response():
    class _Resp(io.BytesIO):
        def __enter__(self):
            return self

        def __exit__(self, *exc):
            return False

    src = RemoteTleSource("http://x/{norad}", opener=lambda url, timeout: _Resp(b"1 garbage\n2 garbage\n"))
    with pytest.raises(TleProviderError):
        src.fetch(25544)


def test_remote_http_error_is_provider_failure():
    def opener(url, timeout):
        raise urllib.error.HTTPError(url, 503, "unavailable", None, None)

    with pytest.raises(TleProviderError):
        RemoteTleSource("http://x/{norad}", opener=opener, sleep=lambda s: None).fetch(25544)


# -- cache -------------------------------------------------------------------------


def test_cache_ttl_with_injected_clock():
    now = [0.0]
    cache = PlanCache(ttl=3600.0, clock=lambda: now[0])
    cache.put("k", "plan")
    now[0] = 3599.0
    assert cache.get("k") == "plan" and cache.remaining("k") == 1.0
    now[0] = 3600.0
    assert cache.get("k") is None and len(cache) == 0


def test_cache_ttl_env(monkeypatch):
    monkeypatch.setenv("ORBITPLAN_CACHE_TTL", "10")
    assert PlanCache().ttl == 10.0
    monkeypatch.delenv("ORBITPLAN_CACHE_TTL")
    assert PlanCache().ttl == 3600.0


def _req(workload="ml-inference", **kw):
    kw.setdefault("start", ISO_START)
    return PlanRequest(25544, workload, FileTleSource(FIXTURES / "iss.tle"), **kw)


def test_cache_key_sensitivity():
    base = cache_key(_req(), START)
    assert cache_key(_req(), START) == base
    assert cache_key(_req("federated"), START) != base
    assert cache_key(_req(horizon_hours=6), START) != base
    assert cache_key(_req(), START + 60) != base
    tweaked = PlanConfig(placement=PlacementConfig(transfer_volume_weight=2.5))
    assert cache_key(_req(config=tweaked), START) != base


def test_planner_cache_hit_is_same_object():
    planner = Planner(cache=PlanCache(ttl=3600.0))
    a = planner.plan(_req())
    b = planner.plan(_req())
    assert a is b and a.determinism_hash == b.determinism_hash
    assert a.metrics["step_count"] == 5 and a.metrics["payload_downlink_mb"] == pytest.approx(10.5)


def test_now_requests_coalesce_within_a_minute():
    clock = [START + 5.0]
    planner = Planner(cache=PlanCache(), now=lambda: clock[0])
    a = planner.plan(_req(start="now", horizon_hours=2))
    clock[0] = START + 50.0
    assert planner.plan(_req(start="now", horizon_hours=2)) is a


def test_cyclic_workload_not_cached():
    planner = Planner(cache=PlanCache())
    doc = {"name": "loop", "steps": [{"id": "a", "duration": 30}, {"id": "b", "duration": 30}],
           "edges": [["a", "b"], ["b", "a"]]}
    with pytest.raises(CycleError):
        planner.plan(_req(doc))
    assert len(planner.cache) == 0


def test_request_validation():
    with pytest.raises(RequestError):
        _req(horizon_hours=0.5)
    with pytest.raises(RequestError):
        _req(horizon_hours=169)
    with pytest.raises(RequestError):
        PlanRequest(25544, "ml-inference", None)
    with pytest.raises(RequestError):
        config_from_dict({"envelope": {"sunlit_watts": 3}})
    with pytest.raises(RequestError):
        config_from_dict({"orbit": {}})
    assert config_from_dict({"envelope": {"eclipse_power": 20}}).envelope.eclipse_power == 20


# -- CLI ---------------------------------------------------------------------------


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


ISS_ARGS = ("--norad", "25544", "--tle-file", str(FIXTURES / "iss.tle"), "--start", ISO_START)


def test_cli_plan_json():
    code, out, _ = _cli("plan", *ISS_ARGS, "--workload", "ml-inference", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["metrics"]["step_count"] == 5 and len(doc["determinism_hash"]) == 64


def test_cli_plan_table_and_workload_file(tmp_path):
    code, out, _ = _cli("plan", *ISS_ARGS, "--workload", "federated", "--format", "table")
    assert code == 0 and "steps=12" in out and "hash " in out
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"name": "one", "steps": [{"id": "a", "duration": 60, "location": "onboard"}]}))
    code, out, _ = _cli("plan", *ISS_ARGS, "--workload-file", str(path))
    assert code == 0 and json.loads(out)["metrics"]["step_count"] == 1


def test_cli_usage_errors():
    assert _cli("plan", *ISS_ARGS)[0] == 1
    assert _cli("plan", *ISS_ARGS, "--workload", "a", "--workload-file", "b")[0] == 1
    assert _cli("nonsense")[0] == 1
    code, _, err = _cli("plan", "--norad", "25544", "--offline", "--workload", "ml-inference")
    assert code == 1 and json.loads(err)["kind"] == "input"
    code, _, err = _cli("plan", *ISS_ARGS, "--workload", "weather")
    assert code == 1 and json.loads(err)["error"] == "unknown_preset"


def test_cli_planning_failure_exit_two(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"name": "huge", "deadline_orbits": 1,
                                "steps": [{"id": "a", "duration": 90000, "location": "onboard"}]}))
    code, _, err = _cli("plan", *ISS_ARGS, "--workload-file", str(path))
    assert code == 2 and json.loads(err)["kind"] == "infeasible"


def test_cli_presets_lists_five():
    code, out, _ = _cli("presets")
    names = [line.split()[0] for line in out.strip().splitlines()]
    assert code == 0 and names == ["ml-inference", "split-learning", "eo-qa", "federated", "store-forward"]


def test_cli_windows_and_passes():
    code, out, _ = _cli("windows", *ISS_ARGS, "--horizon", "3")
    windows = json.loads(out)
    assert code == 0 and windows[0]["t_start"] == "2024-03-20T00:00:00.000Z"
    code, out, _ = _cli("passes", *ISS_ARGS, "--format", "table")
    assert code == 0 and "oregon" in out


@pytest.fixture
def no_network(monkeypatch):
    def refuse(*args, **kw):
        raise AssertionError("network access attempted")

    monkeypatch.setattr(socket.socket, "connect", refuse)
    monkeypatch.setattr(socket, "create_connection", refuse)
    monkeypatch.setattr(urllib.request, "urlopen", refuse)


def test_offline_mode_never_touches_network(no_network):
    code, out, err = _cli("plan", *ISS_ARGS, "--offline", "--workload", "split-learning")
    assert code == 0, err
    assert json.loads(out)["metrics"]["step_count"] == 10


# -- HTTP service ------------------------------------------------------------------


@pytest.fixture(scope="module")
def service():
    server = make_server("127.0.0.1:0", FileTleSource(FIXTURES / "catalog.tle"), Planner(cache=PlanCache()))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    server.server_close()


def _get(url):
    try:
        with urllib.request.urlopen(url, timeout=30) as resp:
            return resp.status, dict(resp.headers), json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, dict(exc.headers), json.loads(exc.read())


def test_service_health_and_presets(service):
    assert _get(service + "/health")[0] == 200
    status, _, doc = _get(service + "/presets")
    assert status == 200 and len(doc) == 5


def test_service_plan(service):
    status, headers, doc = _get(f"{service}/plan?norad=25544&workload=federated&start={ISO_START}")
    assert status == 200
    assert doc["metrics"]["step_count"] == 12
    assert headers["X-Determinism-Hash"] == doc["determinism_hash"]
    assert headers["ETag"] == f'"{doc["determinism_hash"]}"'
    assert headers["Cache-Control"].startswith("public, max-age=")


def test_service_errors(service):
    status, headers, doc = _get(service + "/plan?workload=ml-inference")
    assert status == 400 and headers["Content-Type"] == "application/problem+json"
    assert doc["type"].startswith("urn:orbitplan:error:")
    assert _get(f"{service}/plan?norad=99999&workload=ml-inference&start={ISO_START}")[0] == 404
    assert _get(f"{service}/plan?norad=25544&workload=weather&start={ISO_START}")[0] == 404
    assert _get(service + "/nowhere")[0] == 404
