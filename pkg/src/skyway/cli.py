"""Command-line entry points for the delivery pipeline.

Commands: gen-city, build-network, plan, simulate, serve. Exit codes:
0 success, 1 usage or validation failure, 2 unreachable, 3 simulation
failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .city import CityError, load_city
from .citygen import generate_city_document
from .network import (
    NetworkError,
    NetworkParams,
    build_network,
    load_network,
    save_network,
)
from .planner import (
    DroneSpec,
    PlanError,
    UnreachableError,
    load_route,
    plan,
    save_route,
)
from .simulator import SimulationError, new_mission, run_to_completion


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def _add_drone_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cruise-speed", type=float, default=5.0, help="m/s")
    p.add_argument("--capacity", type=float, default=16.0, help="Wh")
    p.add_argument("--cruise-power", type=float, default=72.0, help="W")
    p.add_argument("--hover-power", type=float, default=36.0, help="W")
    p.add_argument("--recharge-rate", type=float, default=0.5, help="Wh/s")
    p.add_argument("--reserve", type=float, default=0.1, help="fraction of capacity")
    p.add_argument(
        "--yaw-rate", type=float, default=math.pi / 2, help="rad/s (inf allowed)"
    )


def _drone_from(args: argparse.Namespace) -> DroneSpec:
    return DroneSpec(
        cruise_speed=args.cruise_speed,
        yaw_rate=args.yaw_rate,
        capacity=args.capacity,
        cruise_power=args.cruise_power,
        hover_power=args.hover_power,
        recharge_rate=args.recharge_rate,
        reserve_fraction=args.reserve,
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="skyway", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-city", help="write a deterministic fixture city")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)

    p = sub.add_parser("build-network", help="compute the skyway network")
    p.add_argument("--city", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=float, default=1.2, help="corridor width, m")
    p.add_argument("--clearance", type=float, default=0.5, help="vertical margin, m")

    p = sub.add_parser("plan", help="plan a delivery route (JSON to stdout)")
    p.add_argument("--network", required=True)
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--to", dest="dst", required=True)
    p.add_argument("--battery-fraction", type=float, default=1.0)
    _add_drone_flags(p)

    p = sub.add_parser("simulate", help="fly a planned route tick by tick")
    p.add_argument("--network", required=True)
    p.add_argument("--route", required=True)
    p.add_argument("--tick-ms", type=int, default=100)
    p.add_argument("--out", default="-", help="mission log path, - for stdout")
    p.add_argument("--max-ticks", type=int, default=10_000_000)
    p.add_argument(
        "--local-frame",
        action="store_true",
        help="report positions relative to the source node",
    )
    _add_drone_flags(p)

    p = sub.add_parser("serve", help="run the dispatch service")
    p.add_argument("--city", required=True)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--speedup", type=float, default=10.0)
    p.add_argument("--tick-ms", type=int, default=100)
    p.add_argument("--width", type=float, default=1.2)
    p.add_argument("--clearance", type=float, default=0.5)
    p.add_argument("--static-dir", default=None, help="dashboard assets to serve at /")
    _add_drone_flags(p)

    return parser


def cmd_gen_city(args: argparse.Namespace) -> int:
    document = generate_city_document(args.seed)
    Path(args.out).write_text(document, encoding="utf-8")
    return 0


def cmd_build_network(args: argparse.Namespace) -> int:
    city = load_city(Path(args.city).read_bytes())
    params = NetworkParams(corridor_width=args.width, clearance=args.clearance)
    net = build_network(city, params)
    Path(args.out).write_text(save_network(net), encoding="utf-8")
    return 0


def cmd_plan(args: argparse.Namespace) -> int:
    net = load_network(Path(args.network).read_bytes())
    drone = _drone_from(args)
    route = plan(
        net, drone, args.src, args.dst, args.battery_fraction * drone.capacity
    )
    sys.stdout.write(save_route(route))
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    net = load_network(Path(args.network).read_bytes())
    route = load_route(Path(args.route).read_bytes())
    drone = _drone_from(args)
    mission = new_mission(route, drone, net)
    log = run_to_completion(mission, args.tick_ms / 1000.0, max_ticks=args.max_ticks)
    text = log.to_ndjson(local_frame=args.local_frame)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    city = load_city(Path(args.city).read_bytes())
    app = create_app(
        city,
        params=NetworkParams(corridor_width=args.width, clearance=args.clearance),
        drone=_drone_from(args),
        speedup=args.speedup,
        tick_ms=args.tick_ms,
        static_dir=args.static_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_COMMANDS = {
    "gen-city": cmd_gen_city,
    "build-network": cmd_build_network,
    "plan": cmd_plan,
    "simulate": cmd_simulate,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UnreachableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SimulationError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (CityError, NetworkError, PlanError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
