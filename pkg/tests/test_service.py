import json
import time

import pytest
from fastapi.testclient import TestClient

from skyway.city import Building, CityModel, Polygon2
from skyway.network import NetworkParams, build_network, save_network
from skyway.planner import DroneSpec
from skyway.service import create_app
from skyway.simulator import new_mission, run_to_completion


def rect(cx, cy, half_w, half_h):
    return [
        [cx - half_w, cy - half_h],
        [cx + half_w, cy - half_h],
        [cx + half_w, cy + half_h],
        [cx - half_w, cy + half_h],
    ]


@pytest.fixture(scope="module")
def cluster_city():
    """Two connected pairs separated by an impassable wall."""

    def b(bid, cx, cy, height, station=True, half=3.0):
        return Building(
            id=bid,
            footprint=Polygon2.from_coords(rect(cx, cy, half, half)),
            height=height,
            has_station=station,
            is_recharge=False,
        )

    wall = Building(
        id="wall",
        footprint=Polygon2.from_coords(rect(210.0, 0.0, 10.0, 500.0)),
        height=500.0,
        has_station=False,
    )
    return CityModel(
        buildings=(
            b("a", 0.0, 0.0, 30.0),
            b("b", 40.0, 0.0, 30.0),
            b("c", 400.0, 0.0, 30.0),
            b("d", 440.0, 0.0, 30.0),
            wall,
        )
    )


@pytest.fixture(scope="module")
def client(cluster_city):
    app = create_app(cluster_city, speedup=200.0, tick_ms=100)
    with TestClient(app) as c:
        yield c


def read_events(response):
    events = []
    name, data = None, []
    for line in response.iter_lines():
        if line == "":
            if name is not None:
                events.append((name, json.loads("".join(data))))
            name, data = None, []
        elif line.startswith("event: "):
            name = line[len("event: ") :]
        elif line.startswith("data: "):
            data.append(line[len("data: ") :])
    return events


def poll_until(client, delivery_id, statuses, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        record = client.get(f"/api/deliveries/{delivery_id}").json()
        if record["status"] in statuses:
            return record
        time.sleep(0.02)
    raise AssertionError(f"delivery never reached {statuses}")


def test_health(client):
    response = client.get("/api/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_network_document_byte_stable(client, cluster_city):
    first = client.get("/api/network")
    second = client.get("/api/network")
    assert first.status_code == 200
    assert first.content == second.content
    expected = save_network(build_network(cluster_city, NetworkParams()))
    assert first.text == expected
    doc = first.json()
    assert {n["id"] for n in doc["nodes"]} == {"a", "b", "c", "d"}
    assert "zones" in doc


def test_same_src_dst_rejected(client):
    response = client.post("/api/deliveries", json={"src": "a", "dst": "a"})
    assert response.status_code == 400
    body = response.json()
    assert body["error"] == "invalid_request"
    assert "detail" in body


def test_unknown_node_rejected(client):
    response = client.post("/api/deliveries", json={"src": "a", "dst": "nope"})
    assert response.status_code == 422
    assert response.json()["error"] == "unknown_node"


def test_bad_battery_fraction_rejected(client):
    response = client.post(
        "/api/deliveries",
        json={"src": "a", "dst": "b", "initial_battery_fraction": 1.5},
    )
    assert response.status_code == 400


def test_malformed_body_uses_error_shape(client):
    response = client.post("/api/deliveries", json={"src": "a"})
    assert response.status_code == 400
    body = response.json()
    assert set(body) == {"error", "detail"}
    assert "dst" in body["detail"]


def test_unknown_delivery_404(client):
    assert client.get("/api/deliveries/missing").status_code == 404
    assert client.get("/api/deliveries/missing/telemetry").status_code == 404


def test_unreachable_delivery_fails_with_reason(client):
    response = client.post("/api/deliveries", json={"src": "a", "dst": "c"})
    assert response.status_code == 201
    body = response.json()
    assert body["status"] == "failed"
    assert body["reason"] == "unreachable"
    assert body["route"] is None
    with client.stream("GET", f"/api/deliveries/{body['id']}/telemetry") as stream:
        events = read_events(stream)
    assert events == [("status", {"reason": "unreachable", "status": "failed"})]


def test_delivery_lifecycle_and_late_subscribe(client):
    response = client.post("/api/deliveries", json={"src": "a", "dst": "b"})
    assert response.status_code == 201
    body = response.json()
    assert body["status"] in ("planned", "flying")
    assert body["route"]["src"] == "a"
    record = poll_until(client, body["id"], {"delivered", "failed"})
    assert record["status"] == "delivered"
    # Late subscriber: latest frame first, then the terminal status event.
    with client.stream("GET", f"/api/deliveries/{body['id']}/telemetry") as stream:
        events = read_events(stream)
    assert events[0][0] == "frame"
    assert events[-1] == ("status", {"status": "delivered"})
    assert len(events) == 2


def test_full_stream_matches_direct_simulation(cluster_city):
    app = create_app(cluster_city, speedup=20.0, tick_ms=100)
    with TestClient(app) as client:
        response = client.post("/api/deliveries", json={"src": "c", "dst": "d"})
        assert response.status_code == 201
        delivery = response.json()
        with client.stream(
            "GET", f"/api/deliveries/{delivery['id']}/telemetry"
        ) as stream:
            events = read_events(stream)
    frames = [payload for name, payload in events if name == "frame"]
    assert events[-1] == ("status", {"status": "delivered"})
    # subscribed before launch: the stream opens with the clock-zero snapshot
    assert frames[0]["clock"] == 0.0

    from skyway.planner import load_route

    route = load_route(json.dumps(delivery["route"]))
    network = build_network(cluster_city, NetworkParams())
    log = run_to_completion(new_mission(route, DroneSpec(), network), 0.1)
    expected = [json.loads(line) for line in log.to_ndjson().splitlines()]
    assert frames == expected


def test_concurrent_missions_are_isolated(client, cluster_city):
    first = client.post("/api/deliveries", json={"src": "a", "dst": "b"}).json()
    second = client.post("/api/deliveries", json={"src": "d", "dst": "c"}).json()
    poll_until(client, first["id"], {"delivered"})
    poll_until(client, second["id"], {"delivered"})
    network = build_network(cluster_city, NetworkParams())

    def final_position(delivery_id):
        with client.stream("GET", f"/api/deliveries/{delivery_id}/telemetry") as s:
            events = read_events(s)
        frames = [p for n, p in events if n == "frame"]
        clocks = [f["clock"] for f in frames]
        assert clocks == sorted(clocks)
        return frames[-1]["position"]

    assert final_position(first["id"]) == pytest.approx(
        list(network.nodes["b"].position.xyz())
    )
    assert final_position(second["id"]) == pytest.approx(
        list(network.nodes["c"].position.xyz())
    )
