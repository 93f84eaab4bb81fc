"""Dispatch service: plan deliveries over HTTP and stream live telemetry.

One process owns one city and its skyway network. Each accepted delivery
runs its own simulated mission in a background thread, paced at simulated
tick / speedup wall seconds, and publishes telemetry frames to an in-memory
buffer that server-sent-event subscribers drain in order. Delivery records
live only for the process lifetime.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterator, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response, StreamingResponse
from pydantic import BaseModel

from .city import CityModel
from .network import NetworkParams, SkywayNetwork, build_network, save_network
from .planner import (
    DroneSpec,
    PlanError,
    Route,
    UnreachableError,
    plan,
    route_doc,
)
from .simulator import (
    DELIVERED,
    MissionFailed,
    SimulationError,
    frame_doc,
    new_mission,
    snapshot_frame,
    tick,
)

PLANNED = "planned"
FLYING = "flying"
DELIVERED_STATUS = "delivered"
FAILED = "failed"


class DeliveryRequest(BaseModel):
    src: str
    dst: str
    initial_battery_fraction: float = 1.0


@dataclass
class DeliveryRecord:
    id: str
    request: DeliveryRequest
    route: Optional[Route]
    status: str
    reason: Optional[str]
    created_at: str
    frames: list[dict] = field(default_factory=list)
    cond: threading.Condition = field(default_factory=threading.Condition)
    done: bool = False

    def snapshot(self) -> dict:
        return {
            "id": self.id,
            "request": self.request.model_dump(),
            "route": route_doc(self.route) if self.route is not None else None,
            "status": self.status,
            "reason": self.reason,
            "created_at": self.created_at,
        }


class Dispatcher:
    """Owns the delivery registry; all mutations go through its lock."""

    def __init__(
        self,
        network: SkywayNetwork,
        drone: DroneSpec,
        speedup: float = 10.0,
        tick_s: float = 0.1,
    ):
        if speedup <= 0:
            raise ValueError("speedup must be positive")
        self.network = network
        self.drone = drone
        self.speedup = speedup
        self.tick_s = tick_s
        self._lock = threading.Lock()
        self._records: dict[str, DeliveryRecord] = {}

    def submit(self, request: DeliveryRequest) -> DeliveryRecord:
        record = DeliveryRecord(
            id=uuid.uuid4().hex,
            request=request,
            route=None,
            status=PLANNED,
            reason=None,
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        initial = request.initial_battery_fraction * self.drone.capacity
        try:
            route = plan(self.network, self.drone, request.src, request.dst, initial)
        except UnreachableError:
            record.status = FAILED
            record.reason = "unreachable"
            record.done = True
        else:
            record.route = route
        with self._lock:
            self._records[record.id] = record
        if record.route is not None:
            thread = threading.Thread(
                target=self._fly, args=(record,), daemon=True
            )
            thread.start()
        return record

    def get(self, delivery_id: str) -> Optional[DeliveryRecord]:
        with self._lock:
            return self._records.get(delivery_id)

    def _fly(self, record: DeliveryRecord) -> None:
        pace = self.tick_s / self.speedup
        mission = new_mission(record.route, self.drone, self.network)
        with record.cond:
            record.status = FLYING if mission.phase != DELIVERED else DELIVERED_STATUS
            if mission.phase == DELIVERED:
                record.done = True
                record.cond.notify_all()
                return
        try:
            # Launch snapshot first (clock 0), matching the mission log.
            time.sleep(pace)
            with record.cond:
                record.frames.append(frame_doc(snapshot_frame(mission)))
                record.cond.notify_all()
            while mission.phase != DELIVERED:
                time.sleep(pace)
                _, frame = tick(mission, self.tick_s)
                with record.cond:
                    record.frames.append(frame_doc(frame))
                    record.cond.notify_all()
            final_status, reason = DELIVERED_STATUS, None
        except MissionFailed as exc:
            final_status, reason = FAILED, str(exc)
        except SimulationError as exc:
            final_status, reason = FAILED, f"simulation_error: {exc}"
        with record.cond:
            record.status = final_status
            record.reason = reason
            record.done = True
            record.cond.notify_all()

    def stream(self, record: DeliveryRecord) -> Iterator[str]:
        """Yield SSE events: buffered latest frame first for late
        subscribers, then live frames in tick order, then a status event.
        """
        with record.cond:
            index = max(0, len(record.frames) - 1)
        while True:
            with record.cond:
                while len(record.frames) <= index and not record.done:
                    record.cond.wait(timeout=0.25)
                fresh = record.frames[index:]
                index = len(record.frames)
                finished = record.done and index == len(record.frames)
                status = record.status
                reason = record.reason
            for doc in fresh:
                yield _sse_event("frame", doc)
            if finished:
                payload = {"status": status}
                if reason:
                    payload["reason"] = reason
                yield _sse_event("status", payload)
                return


def _sse_event(name: str, payload: dict) -> str:
    return f"event: {name}\ndata: {json.dumps(payload, sort_keys=True)}\n\n"


def _error(status_code: int, error: str, detail: str) -> JSONResponse:
    return JSONResponse(
        status_code=status_code, content={"error": error, "detail": detail}
    )


def create_app(
    city: CityModel,
    params: NetworkParams = NetworkParams(),
    drone: DroneSpec = DroneSpec(),
    speedup: float = 10.0,
    tick_ms: int = 100,
    static_dir: Optional[str] = None,
) -> FastAPI:
    network = build_network(city, params)
    network_document = save_network(network)
    dispatcher = Dispatcher(
        network=network, drone=drone, speedup=speedup, tick_s=tick_ms / 1000.0
    )
    app = FastAPI(title="skyway dispatch")
    app.state.dispatcher = dispatcher

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        issues = "; ".join(
            f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors()[:3]
        )
        return _error(400, "invalid_request", issues or "malformed request body")

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/api/network")
    def get_network() -> Response:
        return Response(content=network_document, media_type="application/json")

    @app.post("/api/deliveries", status_code=201)
    def submit_delivery(request: DeliveryRequest):
        if request.src == request.dst:
            return _error(400, "invalid_request", "src and dst must differ")
        if not 0 < request.initial_battery_fraction <= 1:
            return _error(
                400, "invalid_request", "initial_battery_fraction must be in (0, 1]"
            )
        for label, node_id in (("src", request.src), ("dst", request.dst)):
            if node_id not in dispatcher.network.nodes:
                return _error(422, "unknown_node", f"{label} node {node_id!r} not found")
        try:
            record = dispatcher.submit(request)
        except PlanError as exc:
            return _error(400, "invalid_request", str(exc))
        return JSONResponse(status_code=201, content=record.snapshot())

    @app.get("/api/deliveries/{delivery_id}")
    def get_delivery(delivery_id: str):
        record = dispatcher.get(delivery_id)
        if record is None:
            return _error(404, "unknown_delivery", f"no delivery {delivery_id!r}")
        return record.snapshot()

    @app.get("/api/deliveries/{delivery_id}/telemetry")
    def telemetry(delivery_id: str):
        record = dispatcher.get(delivery_id)
        if record is None:
            return _error(404, "unknown_delivery", f"no delivery {delivery_id!r}")
        return StreamingResponse(
            dispatcher.stream(record), media_type="text/event-stream"
        )

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="dashboard")

    return app
