"""Temporal-optimal route planning with battery and recharge constraints.

Search runs over (node, battery) states with the battery axis quantized to
a fixed number of levels, which keeps the state space finite and lets an
exhaustive oracle verify optimality. Arrival battery rounds down to the
grid (conservative). The winning action sequence is then replayed with
exact arithmetic to produce the reported legs, times and battery trace.

Tie-breaking among equal-time routes prefers fewer legs, then the
lexicographically smallest node-id sequence, so planning is deterministic.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from typing import IO, Union

from .network import SkywayEdge, SkywayNetwork, SkywayNode


class PlanError(Exception):
    pass


class UnreachableError(PlanError):
    """No feasible route exists under the battery constraints."""


@dataclass(frozen=True, slots=True)
class DroneSpec:
    cruise_speed: float = 5.0  # m/s
    yaw_rate: float = math.pi / 2  # rad/s, may be math.inf
    capacity: float = 16.0  # Wh
    cruise_power: float = 72.0  # W
    hover_power: float = 36.0  # W
    recharge_rate: float = 0.5  # Wh/s
    reserve_fraction: float = 0.1

    def __post_init__(self) -> None:
        for name in ("cruise_speed", "yaw_rate", "capacity", "cruise_power",
                     "hover_power", "recharge_rate"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.reserve_fraction < 1:
            raise ValueError("reserve_fraction must be in [0, 1)")
        if self.hover_power > self.cruise_power:
            raise ValueError("hover_power cannot exceed cruise_power")

    @property
    def reserve_wh(self) -> float:
        # Unlimited capacity disables the reserve (plain shortest-time mode).
        if math.isinf(self.capacity):
            return 0.0
        return self.reserve_fraction * self.capacity


@dataclass(frozen=True, slots=True)
class FlyLeg:
    from_id: str
    to_id: str
    duration_s: float
    energy_wh: float

    kind = "fly"


@dataclass(frozen=True, slots=True)
class RechargeLeg:
    at: str
    duration_s: float
    energy_wh: float  # energy gained

    kind = "recharge"


RouteLeg = Union[FlyLeg, RechargeLeg]


@dataclass(frozen=True)
class Route:
    src: str
    dst: str
    legs: tuple[RouteLeg, ...]
    total_time_s: float
    battery_trace_wh: tuple[float, ...]
    initial_battery_wh: float

    def node_sequence(self) -> list[str]:
        """Distinct nodes visited in order (recharge stops do not repeat)."""
        seq = [self.src]
        for leg in self.legs:
            if isinstance(leg, FlyLeg):
                seq.append(leg.to_id)
        return seq


def edge_cost(edge: SkywayEdge, drone: DroneSpec) -> tuple[float, float]:
    """(duration in s, energy in Wh) for flying one edge at cruise."""
    duration = edge.length3d / drone.cruise_speed
    energy = drone.cruise_power * duration / 3600.0
    return duration, energy


def heuristic(node: SkywayNode, dest: SkywayNode, drone: DroneSpec) -> float:
    """Straight-line flight time, ignoring obstructions and recharging.

    Admissible and consistent: every edge is a 3D straight segment, so the
    triangle inequality carries over after dividing by cruise speed.
    """
    return math.dist(node.position.xyz(), dest.position.xyz()) / drone.cruise_speed


_FUZZ = 1e-9


def plan(
    network: SkywayNetwork,
    drone: DroneSpec,
    src: str,
    dst: str,
    initial_battery: float,
    *,
    quanta: int = 100,
) -> Route:
    """Minimum-total-time route from src to dst.

    Actions are flying a network edge (allowed while the battery stays at or
    above the reserve) and recharging to full at a recharge-capable node.
    Raises UnreachableError when no feasible route exists, PlanError for
    invalid endpoints or an out-of-range initial battery.
    """
    return _search(network, drone, src, dst, initial_battery, quanta)


def plan_oracle(
    network: SkywayNetwork,
    drone: DroneSpec,
    src: str,
    dst: str,
    initial_battery: float,
    *,
    quanta: int = 100,
) -> Route:
    """Uniform-cost search over the identical quantized state graph.

    Exists to cross-check plan(): a separate, heuristic-free Dijkstra loop
    with the same action rules and tie-breaking, so both must report the
    same optimal total time.
    """
    if src not in network.nodes or dst not in network.nodes:
        raise PlanError("unknown endpoint")
    reserve = drone.reserve_wh
    if initial_battery < reserve - _FUZZ:
        raise PlanError("initial battery below reserve")
    if initial_battery > drone.capacity + _FUZZ:
        raise PlanError("initial battery exceeds capacity")
    costs = {(e.from_id, e.to_id): edge_cost(e, drone) for e in network.edges}
    costs.update({(v, u): c for (u, v), c in list(costs.items())})
    if src == dst:
        return _assemble(network, drone, (src,), initial_battery, costs)

    unlimited = math.isinf(drone.capacity)
    q = math.inf if unlimited else drone.capacity / quanta
    start_q = quanta if unlimited else int(math.floor(initial_battery / q + _FUZZ))
    reserve_q = 0 if unlimited else int(math.ceil(reserve / q - _FUZZ))

    frontier: list[tuple[float, int, tuple[str, ...], str, int]] = [
        (0.0, 0, (src,), src, start_q)
    ]
    settled: set[tuple[str, int]] = set()
    while frontier:
        g, nlegs, seq, node, bq = heapq.heappop(frontier)
        if (node, bq) in settled:
            continue
        settled.add((node, bq))
        if node == dst:
            return _assemble(network, drone, seq, initial_battery, costs)
        level = drone.capacity if unlimited else bq * q
        for other, _length in network.neighbors(node):
            duration, energy = costs[(node, other)]
            if unlimited:
                next_q = quanta
            else:
                next_q = int(math.floor((level - energy) / q + _FUZZ))
                if next_q < reserve_q:
                    continue
            if (other, next_q) not in settled:
                heapq.heappush(
                    frontier, (g + duration, nlegs + 1, seq + (other,), other, next_q)
                )
        if not unlimited and bq < quanta and network.nodes[node].is_recharge:
            duration = (drone.capacity - level) / drone.recharge_rate
            if (node, quanta) not in settled:
                heapq.heappush(
                    frontier, (g + duration, nlegs + 1, seq + (node,), node, quanta)
                )
    raise UnreachableError(f"no feasible route from {src!r} to {dst!r}")


def _search(
    network: SkywayNetwork,
    drone: DroneSpec,
    src: str,
    dst: str,
    initial_battery: float,
    quanta: int,
) -> Route:
    if src not in network.nodes:
        raise PlanError(f"unknown source node {src!r}")
    if dst not in network.nodes:
        raise PlanError(f"unknown destination node {dst!r}")
    reserve = drone.reserve_wh
    if initial_battery < reserve - _FUZZ:
        raise PlanError("initial battery below reserve")
    if initial_battery > drone.capacity + _FUZZ:
        raise PlanError("initial battery exceeds capacity")
    if src == dst:
        return Route(
            src=src,
            dst=dst,
            legs=(),
            total_time_s=0.0,
            battery_trace_wh=(),
            initial_battery_wh=initial_battery,
        )

    unlimited = math.isinf(drone.capacity)
    if unlimited:
        q = math.inf
        start_q = quanta
        reserve_q = 0
    else:
        q = drone.capacity / quanta
        start_q = int(math.floor(initial_battery / q + _FUZZ))
        reserve_q = int(math.ceil(reserve / q - _FUZZ))

    dest_node = network.nodes[dst]

    def h(node_id: str) -> float:
        return heuristic(network.nodes[node_id], dest_node, drone)

    costs = {
        (e.from_id, e.to_id): edge_cost(e, drone) for e in network.edges
    }
    costs.update({(v, u): c for (u, v), c in list(costs.items())})

    # Label: (f, legs, node-id sequence, g, node, battery quanta).
    start = (h(src), 0, (src,), 0.0, src, start_q)
    heap = [start]
    best: dict[tuple[str, int], tuple[float, int, tuple[str, ...]]] = {}
    while heap:
        f, nlegs, seq, g, node, bq = heapq.heappop(heap)
        key = (node, bq)
        label = (g, nlegs, seq)
        if key in best and best[key] <= label:
            continue
        best[key] = label
        if node == dst:
            return _assemble(network, drone, seq, initial_battery, costs)
        level = drone.capacity if unlimited else bq * q
        for other, _length in network.neighbors(node):
            duration, energy = costs[(node, other)]
            if unlimited:
                next_q = quanta
            else:
                next_q = int(math.floor((level - energy) / q + _FUZZ))
                if next_q < reserve_q:
                    continue
            nseq = seq + (other,)
            ng = g + duration
            nkey = (other, next_q)
            nlabel = (ng, nlegs + 1, nseq)
            if nkey in best and best[nkey] <= nlabel:
                continue
            heapq.heappush(heap, (ng + h(other), nlegs + 1, nseq, ng, other, next_q))
        if not unlimited and bq < quanta and network.nodes[node].is_recharge:
            duration = (drone.capacity - level) / drone.recharge_rate
            nseq = seq + (node,)
            ng = g + duration
            nkey = (node, quanta)
            nlabel = (ng, nlegs + 1, nseq)
            if not (nkey in best and best[nkey] <= nlabel):
                heapq.heappush(heap, (ng + h(node), nlegs + 1, nseq, ng, node, quanta))
    raise UnreachableError(f"no feasible route from {src!r} to {dst!r}")


def _assemble(
    network: SkywayNetwork,
    drone: DroneSpec,
    seq: tuple[str, ...],
    initial_battery: float,
    costs: dict[tuple[str, str], tuple[float, float]],
) -> Route:
    """Replay the winning action sequence with exact arithmetic.

    A repeated node in the sequence is a recharge stop (the network has no
    self-edges, so the encoding is unambiguous).
    """
    legs: list[RouteLeg] = []
    trace: list[float] = []
    battery = initial_battery
    total = 0.0
    for cur, nxt in zip(seq, seq[1:]):
        if nxt == cur:
            gained = drone.capacity - battery
            duration = gained / drone.recharge_rate
            legs.append(RechargeLeg(at=cur, duration_s=duration, energy_wh=gained))
            battery = drone.capacity
        else:
            duration, energy = costs[(cur, nxt)]
            legs.append(
                FlyLeg(from_id=cur, to_id=nxt, duration_s=duration, energy_wh=energy)
            )
            battery -= energy
        trace.append(battery)
        total += duration
    return Route(
        src=seq[0],
        dst=seq[-1],
        legs=tuple(legs),
        total_time_s=total,
        battery_trace_wh=tuple(trace),
        initial_battery_wh=initial_battery,
    )


def route_doc(route: Route) -> dict:
    legs = []
    for leg in route.legs:
        if isinstance(leg, FlyLeg):
            legs.append(
                {
                    "kind": "fly",
                    "from": leg.from_id,
                    "to": leg.to_id,
                    "duration_s": leg.duration_s,
                    "energy_wh": leg.energy_wh,
                }
            )
        else:
            legs.append(
                {
                    "kind": "recharge",
                    "at": leg.at,
                    "duration_s": leg.duration_s,
                    "energy_wh": leg.energy_wh,
                }
            )
    return {
        "src": route.src,
        "dst": route.dst,
        "legs": legs,
        "total_time_s": route.total_time_s,
        "battery_trace_wh": list(route.battery_trace_wh),
        "initial_battery_wh": route.initial_battery_wh,
    }


def save_route(route: Route) -> str:
    return json.dumps(route_doc(route), indent=2, sort_keys=True) + "\n"


def load_route(document: Union[bytes, str, IO]) -> Route:
    if hasattr(document, "read"):
        document = document.read()
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
        legs: list[RouteLeg] = []
        for entry in data["legs"]:
            if entry["kind"] == "fly":
                legs.append(
                    FlyLeg(
                        from_id=entry["from"],
                        to_id=entry["to"],
                        duration_s=float(entry["duration_s"]),
                        energy_wh=float(entry["energy_wh"]),
                    )
                )
            elif entry["kind"] == "recharge":
                legs.append(
                    RechargeLeg(
                        at=entry["at"],
                        duration_s=float(entry["duration_s"]),
                        energy_wh=float(entry["energy_wh"]),
                    )
                )
            else:
                raise PlanError(f"unknown leg kind {entry['kind']!r}")
        return Route(
            src=data["src"],
            dst=data["dst"],
            legs=tuple(legs),
            total_time_s=float(data["total_time_s"]),
            battery_trace_wh=tuple(float(v) for v in data["battery_trace_wh"]),
            initial_battery_wh=float(data["initial_battery_wh"]),
        )
    except PlanError:
        raise
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise PlanError(f"malformed route document: {exc}") from exc
