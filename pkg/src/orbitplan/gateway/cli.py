"""``orbitplan`` command-line interface.

Exit status: 0 on success, 1 on bad input (including usage errors and
unknown satellites or presets), 2 when planning or the TLE provider fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from orbitplan.errors import OrbitPlanError, RequestError
from orbitplan.gateway.pipeline import PlanConfig, PlanRequest, Planner, config_from_dict, STEP_S
from orbitplan.gateway.tle_source import FileTleSource, RemoteTleSource
from orbitplan.groundlink import DEFAULT_STATIONS, predict_passes
from orbitplan.orbitcore import isoformat
from orbitplan.presets import PRESETS, load_preset
from orbitplan.propagator import PropagationConfig, propagate_trajectory
from orbitplan.skymodel import eclipse_windows
from orbitplan.timeline import build_timeline
from orbitplan.workload import load_workload_file

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_PLANNING = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _exit_code(err: OrbitPlanError) -> int:
    return EXIT_INPUT if err.kind in ("input", "not_found") else EXIT_PLANNING


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orbitplan", description="Plan satellite workloads against orbital resource windows.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def orbit_args(p, workload: bool):
        p.add_argument("--norad", type=int, help="catalog number of the satellite")
        p.add_argument("--tle-file", type=Path, help="read element sets from a 2- or 3-line TLE file")
        p.add_argument("--offline", action="store_true", help="never contact the TLE provider")
        p.add_argument("--start", default="now", help="planning start, ISO-8601 UTC or 'now'")
        p.add_argument("--horizon", type=float, default=12.0, help="planning horizon in hours (1-168)")
        p.add_argument("--config", type=Path, help="JSON file with envelope/placement/link overrides")
        p.add_argument("--format", choices=("json", "table"), default="json")
        if workload:
            group = p.add_mutually_exclusive_group()
            group.add_argument("--workload", help="preset name")
            group.add_argument("--workload-file", type=Path, help="custom workload JSON document")

    orbit_args(sub.add_parser("plan", help="produce an execution plan"), workload=True)
    orbit_args(sub.add_parser("windows", help="list orbital resource windows"), workload=False)
    orbit_args(sub.add_parser("passes", help="list ground-station passes"), workload=False)
    sub.add_parser("presets", help="list built-in workloads")
    serve = sub.add_parser("serve", help="run the HTTP endpoint")
    serve.add_argument("--bind", default=None, help="host:port (default from ORBITPLAN_BIND or 127.0.0.1:8080)")
    serve.add_argument("--tle-file", type=Path, help="serve element sets from this file instead of the provider")
    return parser


def _tle_source(args):
    if args.tle_file is not None:
        return FileTleSource(args.tle_file)
    if args.offline:
        raise RequestError("--offline needs --tle-file")
    if args.norad is None:
        raise RequestError("--norad is required without --tle-file")
    return RemoteTleSource()


def _config(args) -> PlanConfig:
    if args.config is None:
        return PlanConfig()
    try:
        doc = json.loads(args.config.read_text())
    except OSError as exc:
        raise RequestError(f"cannot read config file {args.config}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise RequestError(f"config file is not valid JSON: {exc}") from None
    return config_from_dict(doc)


def _orbit_products(args):
    req = PlanRequest(norad=args.norad, workload="", tle_source=_tle_source(args),
                      horizon_hours=args.horizon, start=args.start, config=_config(args))
    tle = req.tle_source.fetch(req.norad)
    traj = propagate_trajectory(tle, PropagationConfig(req.resolve_start(), req.horizon_hours * 3600.0, STEP_S))
    passes = predict_passes(traj, DEFAULT_STATIONS, req.config.link)
    return tle, traj, passes, req.config


def _table(headers, rows) -> str:
    cells = [[str(c) for c in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(headers)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    return "\n".join([fmt.format(*headers), fmt.format(*("-" * w for w in widths))] + [fmt.format(*r) for r in cells])


def pass_to_dict(p) -> dict:
    return {
        "id": p.id,
        "station": p.station_id,
        "aos": isoformat(p.aos),
        "los": isoformat(p.los),
        "duration_s": p.duration,
        "peak_elevation_deg": p.peak_elevation,
        "mean_data_rate_mbps": p.mean_data_rate,
        "worst_margin_db": p.worst_margin,
        "ber": p.ber,
        "capacity_mb": p.capacity,
    }


def _cmd_plan(args, out) -> int:
    if args.workload is None and args.workload_file is None:
        raise _UsageError("orbitplan plan: one of --workload or --workload-file is required")
    workload = args.workload if args.workload is not None else load_workload_file(args.workload_file)
    req = PlanRequest(norad=args.norad, workload=workload, tle_source=_tle_source(args),
                      horizon_hours=args.horizon, start=args.start, config=_config(args))
    plan = Planner().plan(req)
    if args.format == "json":
        print(plan.to_json(), file=out)
        return EXIT_OK
    m = plan.metrics
    print(f"{plan.satellite['name'] or plan.satellite['norad']}  workload={plan.workload}  "
          f"steps={m['step_count']}  confidence={plan.confidence:.2f}", file=out)
    print(f"downlink {m['payload_downlink_mb']:.2f} MB payload / {m['channel_downlink_mb']:.2f} MB channel   "
          f"uplink {m['payload_uplink_mb']:.2f} MB payload / {m['channel_uplink_mb']:.2f} MB channel", file=out)
    rows = [(s.step_id, s.location, "-" if s.window_id is None else s.window_id,
             isoformat(s.t_start), isoformat(s.t_end)) for s in plan.schedule]
    print(_table(("step", "location", "window", "start", "end"), rows), file=out)
    print(f"hash {plan.determinism_hash}", file=out)
    return EXIT_OK


def _cmd_windows(args, out) -> int:
    _, traj, passes, cfg = _orbit_products(args)
    windows = build_timeline(eclipse_windows(traj), passes, cfg.envelope)
    if args.format == "json":
        print(json.dumps([w.to_dict() for w in windows], indent=2), file=out)
        return EXIT_OK
    rows = [(w.id, w.kind, isoformat(w.t_start), f"{w.duration:.0f}", f"{w.power:g}", f"{w.compute:g}",
             f"{w.comms_rate:g}", w.station or "-") for w in windows]
    print(_table(("id", "kind", "start", "dur_s", "power_w", "compute", "rate_mbps", "station"), rows), file=out)
    return EXIT_OK


def _cmd_passes(args, out) -> int:
    _, _, passes, _ = _orbit_products(args)
    if args.format == "json":
        print(json.dumps([pass_to_dict(p) for p in passes], indent=2), file=out)
        return EXIT_OK
    rows = [(p.station_id, isoformat(p.aos), isoformat(p.los), f"{p.peak_elevation:.1f}",
             f"{p.mean_data_rate:.1f}", f"{p.ber:.0e}", f"{p.capacity:.0f}") for p in passes]
    print(_table(("station", "aos", "los", "peak_deg", "rate_mbps", "ber", "capacity_mb"), rows), file=out)
    return EXIT_OK


def _cmd_presets(args, out) -> int:
    for name in PRESETS:
        w = load_preset(name)
        print(f"{name:<16} {len(w.steps):2d} base steps  {w.description}", file=out)
    return EXIT_OK


def _cmd_serve(args, out) -> int:
    from orbitplan.gateway.service import serve

    serve(args.bind, FileTleSource(args.tle_file) if args.tle_file else None)
    return EXIT_OK


COMMANDS = {"plan": _cmd_plan, "windows": _cmd_windows, "passes": _cmd_passes,
            "presets": _cmd_presets, "serve": _cmd_serve}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=err)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=err)
    try:
        return COMMANDS[args.command](args, out)
    except _UsageError as exc:
        print(exc, file=err)
        return EXIT_INPUT
    except OrbitPlanError as exc:
        print(json.dumps({"error": exc.code, "kind": exc.kind, "message": str(exc)}), file=err)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
