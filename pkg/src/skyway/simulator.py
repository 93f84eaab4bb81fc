"""Discrete-time mission execution.

A mission replays a planned route as a small state machine: rotate toward
the next node, cruise the straight sight-line segment, recharge where the
route says so, and finish Delivered. Each tick may hand leftover time to
the next phase, so a leg that completes mid-tick starts the following phase
within the same tick and the delivery clock is exact rather than rounded
up to tick boundaries.

Ticks drain hover power while rotating, cruise power while flying, and add
charge while recharging. Missions are deterministic: the same route, drone
and tick size produce a bitwise-identical telemetry log.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .network import SkywayNetwork
from .planner import DroneSpec, FlyLeg, RechargeLeg, Route

IDLE = "idle"
ROTATING = "rotating"
CRUISING = "cruising"
RECHARGING = "recharging"
DELIVERED = "delivered"

_EPS_T = 1e-12  # seconds; guards the sub-tick loop against float dust


class SimulationError(Exception):
    pass


class MissionFailed(SimulationError):
    """The mission cannot continue (battery exhausted)."""


@dataclass(frozen=True, slots=True)
class TelemetryFrame:
    clock: float
    position: tuple[float, float, float]
    heading: float
    battery: float
    battery_fraction: float
    phase: str
    current_leg: int


@dataclass
class MissionState:
    route: Route
    drone: DroneSpec
    node_positions: dict[str, tuple[float, float, float]]
    leg_index: int
    phase: str
    target: Optional[str]
    position: tuple[float, float, float]
    heading: float
    battery: float
    clock: float
    origin: tuple[float, float, float]
    visited: list[str] = field(default_factory=list)
    drained_wh: float = 0.0
    recharged_wh: float = 0.0


@dataclass
class MissionLog:
    frames: list[TelemetryFrame]
    final_state: MissionState
    visited: list[str]
    reserve_warnings: list[float]

    def to_ndjson(self, local_frame: bool = False) -> str:
        origin = self.final_state.origin if local_frame else None
        return "".join(frame_json(f, origin) + "\n" for f in self.frames)


def frame_doc(frame: TelemetryFrame, origin=None) -> dict:
    x, y, z = frame.position
    if origin is not None:
        x, y, z = x - origin[0], y - origin[1], z - origin[2]
    return {
        "clock": frame.clock,
        "position": [x, y, z],
        "heading": frame.heading,
        "battery": frame.battery,
        "battery_fraction": frame.battery_fraction,
        "phase": frame.phase,
        "current_leg": frame.current_leg,
    }


def frame_json(frame: TelemetryFrame, origin=None) -> str:
    return json.dumps(frame_doc(frame, origin), sort_keys=True)


def snapshot_frame(state: MissionState) -> TelemetryFrame:
    """Telemetry for the state as it stands, without advancing time."""
    drone = state.drone
    return TelemetryFrame(
        clock=state.clock,
        position=state.position,
        heading=state.heading,
        battery=state.battery,
        battery_fraction=(
            state.battery / drone.capacity if math.isfinite(drone.capacity) else 1.0
        ),
        phase=state.phase,
        current_leg=min(state.leg_index, max(0, len(state.route.legs) - 1)),
    )


def new_mission(
    route: Route, drone: DroneSpec, network: SkywayNetwork
) -> MissionState:
    """Validate the route against the network and stage the mission at the
    source node. An empty route (src == dst) is Delivered immediately.
    """
    positions: dict[str, tuple[float, float, float]] = {}

    def lookup(node_id: str) -> tuple[float, float, float]:
        node = network.nodes.get(node_id)
        if node is None:
            raise SimulationError(f"route references unknown node {node_id!r}")
        positions[node_id] = node.position.xyz()
        return positions[node_id]

    lookup(route.src)
    lookup(route.dst)
    for leg in route.legs:
        if isinstance(leg, FlyLeg):
            lookup(leg.from_id)
            lookup(leg.to_id)
            if network.edge_between(leg.from_id, leg.to_id) is None:
                raise SimulationError(
                    f"route references missing edge {leg.from_id}-{leg.to_id}"
                )
        else:
            lookup(leg.at)
            if not network.nodes[leg.at].is_recharge:
                raise SimulationError(f"node {leg.at!r} cannot recharge")

    start = positions[route.src]
    return MissionState(
        route=route,
        drone=drone,
        node_positions=positions,
        leg_index=0,
        phase=DELIVERED if not route.legs else IDLE,
        target=None,
        position=start,
        heading=0.0,
        battery=route.initial_battery_wh,
        clock=0.0,
        origin=start,
        visited=[route.src],
    )


def _bearing_to(state: MissionState, node_id: str) -> Optional[float]:
    tx, ty, _ = state.node_positions[node_id]
    dx, dy = tx - state.position[0], ty - state.position[1]
    if math.hypot(dx, dy) < 1e-12:
        return None
    return math.atan2(dy, dx)


def _wrap(angle: float) -> float:
    return math.atan2(math.sin(angle), math.cos(angle))


def _drain(state: MissionState, watts: float, seconds: float) -> None:
    amount = watts * seconds / 3600.0
    state.battery -= amount
    state.drained_wh += amount
    if state.battery < -1e-9:
        state.battery = 0.0
        raise MissionFailed("battery_exhausted")
    if state.battery < 0.0:
        state.battery = 0.0


def _enter_leg(state: MissionState) -> None:
    if state.leg_index >= len(state.route.legs):
        state.phase = DELIVERED
        state.target = None
        return
    leg = state.route.legs[state.leg_index]
    if isinstance(leg, RechargeLeg):
        state.phase = RECHARGING
        state.target = None
    else:
        state.phase = ROTATING
        state.target = leg.to_id


def tick(state: MissionState, dt: float) -> tuple[MissionState, TelemetryFrame]:
    """Advance the mission by dt seconds (in place) and snapshot telemetry.

    Raises SimulationError when called on a Delivered mission and
    MissionFailed when the battery runs out mid-flight.
    """
    if dt <= 0:
        raise SimulationError("dt must be positive")
    if state.phase == DELIVERED:
        raise SimulationError("tick after delivery")
    drone = state.drone
    remaining = dt
    while remaining > _EPS_T and state.phase != DELIVERED:
        if state.phase == IDLE:
            _enter_leg(state)
        elif state.phase == ROTATING:
            bearing = _bearing_to(state, state.target)
            if bearing is None:
                state.phase = CRUISING
                continue
            err = _wrap(bearing - state.heading)
            need = abs(err) / drone.yaw_rate
            if need <= remaining:
                if need > 0:
                    _drain(state, drone.hover_power, need)
                state.heading = bearing
                remaining -= need
                state.phase = CRUISING
            else:
                _drain(state, drone.hover_power, remaining)
                state.heading = _wrap(
                    state.heading + math.copysign(drone.yaw_rate * remaining, err)
                )
                remaining = 0.0
        elif state.phase == CRUISING:
            tx, ty, tz = state.node_positions[state.target]
            px, py, pz = state.position
            dist = math.dist((px, py, pz), (tx, ty, tz))
            need = dist / drone.cruise_speed
            if need <= remaining:
                _drain(state, drone.cruise_power, need)
                state.position = (tx, ty, tz)
                remaining -= need
                state.visited.append(state.target)
                state.leg_index += 1
                _enter_leg(state)
            else:
                _drain(state, drone.cruise_power, remaining)
                step = drone.cruise_speed * remaining / dist
                state.position = (
                    px + (tx - px) * step,
                    py + (ty - py) * step,
                    pz + (tz - pz) * step,
                )
                remaining = 0.0
        elif state.phase == RECHARGING:
            deficit = drone.capacity - state.battery
            need = deficit / drone.recharge_rate
            if need <= remaining:
                state.battery = drone.capacity
                state.recharged_wh += deficit
                remaining -= need
                state.leg_index += 1
                _enter_leg(state)
            else:
                gained = drone.recharge_rate * remaining
                state.battery = min(drone.capacity, state.battery + gained)
                state.recharged_wh += gained
                remaining = 0.0
    state.clock += dt - remaining
    return state, snapshot_frame(state)


def run_to_completion(
    state: MissionState, dt: float, max_ticks: int = 10_000_000
) -> MissionLog:
    """Tick until Delivered, collecting every telemetry frame in order.

    A mission with legs to fly opens with a clock-zero snapshot so monitors
    see the launch state; an already-delivered (empty) route logs nothing.
    """
    if dt <= 0:
        raise SimulationError("dt must be positive")
    frames: list[TelemetryFrame] = []
    warnings: list[float] = []
    reserve = state.drone.reserve_wh
    if state.phase != DELIVERED and state.clock == 0.0:
        frames.append(snapshot_frame(state))
    while state.phase != DELIVERED:
        if len(frames) >= max_ticks:
            raise SimulationError(f"tick budget of {max_ticks} exhausted")
        _, frame = tick(state, dt)
        frames.append(frame)
        if frame.battery < reserve - 1e-9:
            warnings.append(frame.clock)
    return MissionLog(
        frames=frames,
        final_state=state,
        visited=list(state.visited),
        reserve_warnings=warnings,
    )
