"""Self-hosted HTTP endpoint: ``/plan``, ``/presets`` and ``/health``."""

from __future__ import annotations

import json
import logging
import os
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from orbitplan.errors import OrbitPlanError, RequestError
from orbitplan.gateway.pipeline import PlanRequest, Planner
from orbitplan.gateway.tle_source import RemoteTleSource, TleSource
from orbitplan.presets import PRESETS, load_preset
from orbitplan.scheduler import PLAN_SCHEMA_VERSION

log = logging.getLogger(__name__)

BIND_ENV = "ORBITPLAN_BIND"
DEFAULT_BIND = "127.0.0.1:8080"
STATUS_BY_KIND = {"input": 400, "not_found": 404, "infeasible": 422, "provider": 502}


def parse_bind(bind: str | None) -> tuple[str, int]:
    bind = bind or os.environ.get(BIND_ENV, DEFAULT_BIND)
    host, _, port = bind.rpartition(":")
    try:
        return host or "127.0.0.1", int(port)
    except ValueError:
        raise RequestError(f"bad bind address {bind!r}; expected host:port") from None


def _single(query: dict, name: str, required: bool = False) -> str | None:
    values = query.get(name)
    if not values:
        if required:
            raise RequestError(f"missing query parameter {name!r}")
        return None
    if len(values) > 1:
        raise RequestError(f"query parameter {name!r} given more than once")
    return values[0]


def plan_request_from_query(query: dict, tle_source: TleSource) -> PlanRequest:
    norad_text = _single(query, "norad", required=True)
    workload = _single(query, "workload", required=True)
    try:
        norad = int(norad_text)
        horizon = float(_single(query, "horizon") or 12.0)
    except ValueError:
        raise RequestError("norad must be an integer and horizon a number") from None
    return PlanRequest(norad=norad, workload=workload, tle_source=tle_source, horizon_hours=horizon,
                       start=_single(query, "start") or "now")


def make_handler(planner: Planner, tle_source: TleSource):
    class Handler(BaseHTTPRequestHandler):
        server_version = "orbitplan/" + PLAN_SCHEMA_VERSION

        def log_message(self, fmt, *args):
            log.info("%s " + fmt, self.address_string(), *args)

        def _send(self, status: int, body: str, ctype: str = "application/json", headers=()):
            data = body.encode()
            self.send_response(status)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(data)))
            for k, v in headers:
                self.send_header(k, v)
            self.end_headers()
            self.wfile.write(data)

        def _problem(self, err: OrbitPlanError):
            status = STATUS_BY_KIND.get(err.kind, 500)
            doc = {"type": f"urn:orbitplan:error:{err.code}", "title": err.code, "status": status, "detail": str(err)}
            self._send(status, json.dumps(doc), "application/problem+json")

        def do_GET(self):
            url = urlsplit(self.path)
            try:
                if url.path == "/health":
                    self._send(200, json.dumps({"status": "ok", "schema_version": PLAN_SCHEMA_VERSION}))
                elif url.path == "/presets":
                    doc = [{"name": n, "steps": len(load_preset(n).steps), "description": load_preset(n).description}
                           for n in PRESETS]
                    self._send(200, json.dumps(doc))
                elif url.path == "/plan":
                    req = plan_request_from_query(parse_qs(url.query), tle_source)
                    plan = planner.plan(req)
                    key = plan.extras.get("cache_key", "")
                    ttl = int(planner.cache.remaining(key))
                    self._send(200, plan.to_json(), headers=(
                        ("ETag", f'"{plan.determinism_hash}"'),
                        ("X-Determinism-Hash", plan.determinism_hash),
                        ("Cache-Control", f"public, max-age={ttl}"),
                    ))
                else:
                    self._send(404, json.dumps({"type": "about:blank", "title": "not_found", "status": 404,
                                                "detail": f"no route {url.path}"}), "application/problem+json")
            except OrbitPlanError as err:
                self._problem(err)
            except Exception:
                log.exception("unhandled error for %s", self.path)
                self._send(500, json.dumps({"type": "about:blank", "title": "internal_error", "status": 500}),
                           "application/problem+json")

    return Handler


def make_server(bind: str | None = None, tle_source: TleSource | None = None,
                planner: Planner | None = None) -> ThreadingHTTPServer:
    host, port = parse_bind(bind)
    handler = make_handler(planner or Planner(), tle_source or RemoteTleSource())
    return ThreadingHTTPServer((host, port), handler)


def serve(bind: str | None = None, tle_source: TleSource | None = None) -> None:
    server = make_server(bind, tle_source)
    log.warning("serving on http://%s:%d", *server.server_address[:2])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
