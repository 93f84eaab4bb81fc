"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines alongside pytest's own verdicts.
"""

import dataclasses
import functools
import json
import math
import random
import time

import pytest
from fastapi.testclient import TestClient

from scenes import random_instance, random_scene
from skyway.city import Point3
from skyway.cli import main as cli_main
from skyway.geometry import EPS, corridor, min_los_height_over, polygons_intersect
from skyway.network import (
    NetworkParams,
    SkywayEdge,
    SkywayNetwork,
    SkywayNode,
    build_network,
    candidate_obstacles,
    load_network,
    los_clear,
    los_oracle,
    rooftop_node,
)
from skyway.planner import (
    DroneSpec,
    UnreachableError,
    edge_cost,
    heuristic,
    load_route,
    plan,
    plan_oracle,
)
from skyway.service import create_app
from skyway.simulator import new_mission, run_to_completion


def _verdict(name: str, ok: bool, extra: str = "") -> None:
    state = "PASS" if ok else "FAIL"
    suffix = f" ({extra})" if extra else ""
    print(f"[{state}] {name}{suffix}")
    assert ok, f"{name}{suffix}"


def _station_nodes(city):
    by_id = {b.id: b for b in city.stations}
    return {bid: rooftop_node(by_id[bid], city) for bid in by_id}


def _grazing(a, b, city, params) -> bool:
    for bld in candidate_obstacles(a, b, city, params):
        min_h = min_los_height_over(
            bld.footprint.coords(), a.position.xyz(), b.position.xyz(),
            params.corridor_width,
        )
        if min_h is not None and abs(bld.height + params.clearance - min_h) <= 2 * EPS:
            return True
    return False


def test_criterion_1_los_oracle_equivalence():
    """los_clear vs the 0.05 m sampling oracle on 1,000 random scenes."""
    rng = random.Random(20240808)
    params = NetworkParams()
    started = time.monotonic()
    pairs = checked = 0
    mismatches = []
    for scene_idx in range(1000):
        city = random_scene(
            rng, max_buildings=20, max_stations=10, with_zones=(rng.random() < 0.4)
        )
        nodes = _station_nodes(city)
        ids = sorted(nodes)
        for i, u in enumerate(ids):
            for v in ids[i + 1 :]:
                pairs += 1
                if _grazing(nodes[u], nodes[v], city, params):
                    continue
                checked += 1
                clear = los_clear(nodes[u], nodes[v], city, params).clear
                oracle = los_oracle(nodes[u], nodes[v], city, params, step=0.05)
                if clear != oracle:
                    mismatches.append((scene_idx, u, v, clear, oracle))
    elapsed = time.monotonic() - started
    _verdict(
        "criterion 1: LoS oracle equivalence",
        not mismatches and elapsed < 60.0,
        f"{checked}/{pairs} pairs checked, {len(mismatches)} mismatches, {elapsed:.1f}s",
    )


def test_criterion_2_candidate_filter_exactness():
    """Corridor pre-filter equals the brute-force intersection filter."""
    rng = random.Random(31415)
    params = NetworkParams()
    tested = 0
    exact = True
    while tested < 1000:
        city = random_scene(rng, max_buildings=20, max_stations=10)
        nodes = _station_nodes(city)
        ids = sorted(nodes)
        for i, u in enumerate(ids):
            for v in ids[i + 1 :]:
                a, b = nodes[u], nodes[v]
                quad = corridor(
                    a.position.xy(), b.position.xy(), params.corridor_width
                ).quad
                brute = [
                    bld.id
                    for bld in city.buildings
                    if bld.id not in (u, v)
                    and polygons_intersect(bld.footprint.coords(), quad)
                ]
                mine = [c.id for c in candidate_obstacles(a, b, city, params)]
                exact = exact and mine == brute
                tested += 1
                if tested >= 1000:
                    break
            if tested >= 1000:
                break
    _verdict("criterion 2: candidate filter exactness", exact, f"{tested} pairs")


def test_criterion_3_no_fly_zone_exclusion(fixture_city, fixture_network):
    """No emitted edge corridor may touch any of the seven fixture zones."""
    zones_ok = len(fixture_city.no_fly_zones) == 7
    crossings = 0
    for e in fixture_network.edges:
        a = fixture_network.nodes[e.from_id]
        b = fixture_network.nodes[e.to_id]
        quad = corridor(
            a.position.xy(), b.position.xy(), fixture_network.params.corridor_width
        ).quad
        for zone in fixture_city.no_fly_zones:
            if polygons_intersect(zone.region.coords(), quad):
                crossings += 1
    _verdict(
        "criterion 3: no-fly-zone exclusion",
        zones_ok and crossings == 0,
        f"{len(fixture_network.edges)} edges, {crossings} zone crossings",
    )


@functools.lru_cache(maxsize=1)
def _planner_benchmark():
    rng = random.Random(271828)
    results = []
    started = time.monotonic()
    for _ in range(200):
        network, drone, src, dst, initial = random_instance(rng, max_nodes=12)
        try:
            mine = plan(network, drone, src, dst, initial, quanta=5)
        except UnreachableError:
            mine = None
        try:
            other = plan_oracle(network, drone, src, dst, initial, quanta=5)
        except UnreachableError:
            other = None
        results.append((network, drone, src, dst, initial, mine, other))
    return results, time.monotonic() - started


def test_criterion_4_planner_optimality():
    """plan == plan_oracle total time on 200 random quantized instances."""
    results, elapsed = _planner_benchmark()
    agree = 0
    solved = 0
    for _network, _drone, _src, _dst, _initial, mine, other in results:
        if mine is None and other is None:
            agree += 1
        elif mine is not None and other is not None:
            solved += 1
            if mine.total_time_s == other.total_time_s:
                agree += 1
    _verdict(
        "criterion 4: planner optimality vs exhaustive oracle",
        agree == len(results) and elapsed < 60.0,
        f"{agree}/{len(results)} agree, {solved} solvable, {elapsed:.1f}s",
    )


def test_criterion_5_recharge_composition():
    """Hand-computed recharge stop: fly 20 s, recharge 10 s, fly 20 s."""
    nodes = {
        "s": SkywayNode("s", Point3(0.0, 0.0, 10.0), False),
        "m": SkywayNode("m", Point3(100.0, 0.0, 10.0), True),
        "d": SkywayNode("d", Point3(200.0, 0.0, 10.0), False),
    }
    edges = tuple(
        SkywayEdge(min(u, v), max(u, v), 100.0) for u, v in (("s", "m"), ("m", "d"))
    )
    net = SkywayNetwork(nodes=nodes, edges=edges, params=NetworkParams(), zones=())
    drone = DroneSpec(
        cruise_speed=5.0,
        capacity=150.0,
        cruise_power=18000.0,  # 1 Wh per metre at 5 m/s
        hover_power=36.0,
        recharge_rate=10.0,
        reserve_fraction=0.0,
    )
    route = plan(net, drone, "s", "d", 150.0)
    kinds = [leg.kind for leg in route.legs]
    ok = (
        kinds == ["fly", "recharge", "fly"]
        and route.total_time_s == 50.0
        and [round(leg.duration_s, 9) for leg in route.legs] == [20.0, 10.0, 20.0]
    )
    _verdict(
        "criterion 5: recharge composition (50 s, fly/recharge/fly)",
        ok,
        f"kinds={kinds}, total={route.total_time_s}",
    )


def test_criterion_6_heuristic_admissible_consistent(fixture_network):
    """Heuristic below optimal time on solved instances; consistent edges."""
    results, _ = _planner_benchmark()
    admissible = True
    for network, drone, src, dst, _initial, mine, _other in results:
        if mine is None:
            continue
        h = heuristic(network.nodes[src], network.nodes[dst], drone)
        admissible = admissible and h <= mine.total_time_s + 1e-9
    consistent = True
    drone = DroneSpec()
    for dest in fixture_network.nodes.values():
        for e in fixture_network.edges:
            u = fixture_network.nodes[e.from_id]
            v = fixture_network.nodes[e.to_id]
            duration, _ = edge_cost(e, drone)
            consistent = consistent and (
                heuristic(u, dest, drone) <= duration + heuristic(v, dest, drone) + 1e-9
            )
            consistent = consistent and (
                heuristic(v, dest, drone) <= duration + heuristic(u, dest, drone) + 1e-9
            )
    _verdict(
        "criterion 6: heuristic admissibility and consistency",
        admissible and consistent,
    )


def test_criterion_7_simulator_fidelity(fixture_network):
    """50 planned routes: node order, battery books, and timing bounds."""
    rng = random.Random(5050)
    missions = []
    ids = sorted(fixture_network.nodes)
    drone = DroneSpec()
    while len(missions) < 30:
        src, dst = rng.sample(ids, 2)
        initial = rng.uniform(0.7, 1.0) * drone.capacity
        try:
            route = plan(fixture_network, drone, src, dst, initial)
        except UnreachableError:
            continue
        missions.append((fixture_network, drone, route))
    while len(missions) < 50:
        network, idrone, src, dst, initial = random_instance(rng, max_nodes=10)
        try:
            route = plan(network, idrone, src, dst, initial, quanta=20)
        except UnreachableError:
            continue
        missions.append((network, idrone, route))

    dt = 0.1
    ok = True
    details = []
    recharge_count = 0
    for network, mdrone, route in missions:
        recharge_count += sum(1 for leg in route.legs if leg.kind == "recharge")
        log = run_to_completion(new_mission(route, mdrone, network), dt)
        final = log.final_state
        if log.visited != route.node_sequence():
            ok = False
            details.append("node sequence mismatch")
        books = route.initial_battery_wh - final.drained_wh + final.recharged_wh
        if abs(final.battery - books) > 1e-6:
            ok = False
            details.append(f"battery books off by {abs(final.battery - books):.2e}")
        if final.clock < route.total_time_s - 1e-9:
            ok = False
            details.append("simulated faster than planned")
        instant = dataclasses.replace(mdrone, yaw_rate=math.inf)
        fast_log = run_to_completion(new_mission(route, instant, network), dt)
        gap = abs(fast_log.final_state.clock - route.total_time_s)
        if gap > dt * max(1, len(route.legs)):
            ok = False
            details.append(f"instant-yaw gap {gap:.3f}s over bound")
    _verdict(
        "criterion 7: simulator fidelity over 50 routes",
        ok,
        f"{recharge_count} recharge legs exercised" + ("; " + "; ".join(details[:3]) if details else ""),
    )


def test_criterion_8_end_to_end_determinism(tmp_path, capsys):
    """gen-city | build-network | plan | simulate twice, byte-identical."""

    def pipeline(workdir):
        workdir.mkdir()
        city = workdir / "city.json"
        net = workdir / "net.json"
        route = workdir / "route.json"
        log = workdir / "log.ndjson"
        assert cli_main(["gen-city", "--seed", "42", "--out", str(city)]) == 0
        assert cli_main(["build-network", "--city", str(city), "--out", str(net)]) == 0
        network = load_network(net.read_bytes())
        ids = sorted(network.nodes)
        seen, stack = {ids[0]}, [ids[0]]
        while stack:
            node = stack.pop()
            for other, _ in network.neighbors(node):
                if other not in seen:
                    seen.add(other)
                    stack.append(other)
        component = sorted(seen)
        src, dst = component[0], component[-1]
        assert (
            cli_main(["plan", "--network", str(net), "--from", src, "--to", dst]) == 0
        )
        route.write_text(capsys.readouterr().out)
        assert (
            cli_main(
                [
                    "simulate",
                    "--network", str(net),
                    "--route", str(route),
                    "--out", str(log),
                ]
            )
            == 0
        )
        return city.read_bytes(), net.read_bytes(), route.read_bytes(), log.read_bytes()

    first = pipeline(tmp_path / "run1")
    second = pipeline(tmp_path / "run2")
    same = all(a == b for a, b in zip(first, second))
    _verdict(
        "criterion 8: end-to-end determinism (seed 42)",
        same,
        "city/network/route/log byte-identical",
    )


def test_criterion_9_service_contract(fixture_city, fixture_network, tmp_path):
    """Streamed telemetry equals the CLI simulation of the same route."""
    shortest = min(fixture_network.edges, key=lambda e: e.length3d)
    app = create_app(fixture_city, speedup=5.0, tick_ms=100)
    with TestClient(app) as client:
        bad = client.post("/api/deliveries", json={"src": "x", "dst": "y"})
        structured_errors = (
            bad.status_code == 422 and set(bad.json()) == {"error", "detail"}
        )
        same = client.post(
            "/api/deliveries", json={"src": shortest.from_id, "dst": shortest.from_id}
        )
        structured_errors = structured_errors and same.status_code == 400

        response = client.post(
            "/api/deliveries",
            json={"src": shortest.from_id, "dst": shortest.to_id},
        )
        assert response.status_code == 201
        delivery = response.json()
        events = []
        with client.stream(
            "GET", f"/api/deliveries/{delivery['id']}/telemetry"
        ) as stream:
            name, data = None, []
            for line in stream.iter_lines():
                if line == "":
                    if name is not None:
                        events.append((name, json.loads("".join(data))))
                    name, data = None, []
                elif line.startswith("event: "):
                    name = line[len("event: ") :]
                elif line.startswith("data: "):
                    data.append(line[len("data: ") :])
    frames = [payload for name, payload in events if name == "frame"]
    terminal_ok = events[-1] == ("status", {"status": "delivered"})

    net_path = tmp_path / "net.json"
    route_path = tmp_path / "route.json"
    log_path = tmp_path / "log.ndjson"
    from skyway.network import save_network

    net_path.write_text(save_network(fixture_network))
    route_path.write_text(json.dumps(delivery["route"]))
    assert (
        cli_main(
            [
                "simulate",
                "--network", str(net_path),
                "--route", str(route_path),
                "--tick-ms", "100",
                "--out", str(log_path),
            ]
        )
        == 0
    )
    expected = [json.loads(line) for line in log_path.read_text().splitlines()]
    _verdict(
        "criterion 9: service stream equals cmd_simulate output",
        frames == expected and terminal_ok and structured_errors,
        f"{len(frames)} frames streamed",
    )
