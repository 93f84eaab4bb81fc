"""Skyway network construction: line-of-sight testing between rooftop
stations and assembly of the flight graph.

An edge exists between two stations when the rectangular corridor between
them (drone width plus safety margin) is free of obstructing buildings and
does not cross any no-fly zone. A building obstructs when its roof, plus
vertical clearance, pokes above the sight line over the part of its
footprint inside the corridor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Union

import numpy as np

from .city import Building, CityModel, NoFlyZone, Point3, Polygon2, station_anchor
from .geometry import (
    EPS,
    corridor,
    min_los_height_over,
    polygons_intersect,
)


class NetworkError(Exception):
    pass


@dataclass(frozen=True, slots=True)
class NetworkParams:
    # Default width: 0.2 m drone plus 0.5 m lateral safety on each side.
    corridor_width: float = 1.2
    clearance: float = 0.5


@dataclass(frozen=True, slots=True)
class SkywayNode:
    id: str
    position: Point3
    is_recharge: bool


@dataclass(frozen=True, slots=True)
class LosVerdict:
    clear: bool
    blockers: tuple[str, ...]
    nfz_violations: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class SkywayEdge:
    from_id: str
    to_id: str
    length3d: float


@dataclass(frozen=True)
class SkywayNetwork:
    nodes: dict[str, SkywayNode]
    edges: tuple[SkywayEdge, ...]
    params: NetworkParams
    zones: tuple[NoFlyZone, ...] = ()

    _adjacency: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        adj: dict[str, list[tuple[str, float]]] = {nid: [] for nid in self.nodes}
        for e in self.edges:
            adj[e.from_id].append((e.to_id, e.length3d))
            adj[e.to_id].append((e.from_id, e.length3d))
        for nid in adj:
            adj[nid].sort()
        object.__setattr__(self, "_adjacency", adj)

    def neighbors(self, node_id: str) -> list[tuple[str, float]]:
        return self._adjacency[node_id]

    def edge_between(self, u: str, v: str) -> Optional[SkywayEdge]:
        lo, hi = min(u, v), max(u, v)
        for e in self.edges:
            if e.from_id == lo and e.to_id == hi:
                return e
        return None


def rooftop_node(b: Building, city: CityModel) -> SkywayNode:
    """Station node for a building: roof anchor point at height + offset."""
    if not b.has_station:
        raise NetworkError(f"building {b.id!r} is not a station")
    (x, y), _rule = station_anchor(b.footprint)
    return SkywayNode(
        id=b.id,
        position=Point3(x, y, b.height + city.node_offset),
        is_recharge=b.is_recharge,
    )


def candidate_obstacles(
    a: SkywayNode, b: SkywayNode, city: CityModel, params: NetworkParams
) -> list[Building]:
    """Buildings whose footprint touches the corridor between a and b.

    This is the exact xy-plane pre-filter: endpoints' own buildings are
    excluded (a node always touches its own roof), everything else is kept
    iff its footprint intersects the corridor rectangle.
    """
    cor = corridor(a.position.xy(), b.position.xy(), params.corridor_width)
    out = []
    for bld in city.buildings:
        if bld.id == a.id or bld.id == b.id:
            continue
        if polygons_intersect(bld.footprint.coords(), cor.quad):
            out.append(bld)
    return out


def los_clear(
    a: SkywayNode, b: SkywayNode, city: CityModel, params: NetworkParams
) -> LosVerdict:
    """Analytic line-of-sight verdict for the station pair (a, b)."""
    apos = a.position.xyz()
    bpos = b.position.xyz()
    blockers = []
    for bld in candidate_obstacles(a, b, city, params):
        min_h = min_los_height_over(
            bld.footprint.coords(), apos, bpos, params.corridor_width
        )
        # Strict comparison with the building side inflated by EPS: a roof
        # grazing the sight line counts as blocking.
        if min_h is not None and bld.height + params.clearance > min_h - EPS:
            blockers.append(bld.id)
    cor = corridor(a.position.xy(), b.position.xy(), params.corridor_width)
    violations = [
        z.id
        for z in city.no_fly_zones
        if polygons_intersect(z.region.coords(), cor.quad)
    ]
    return LosVerdict(
        clear=not blockers and not violations,
        blockers=tuple(blockers),
        nfz_violations=tuple(violations),
    )


def los_oracle(
    a: SkywayNode,
    b: SkywayNode,
    city: CityModel,
    params: NetworkParams,
    step: float = 0.05,
) -> bool:
    """Sampling cross-check of los_clear, built on different machinery.

    Walks the 3D segment and tests, at each sampled fraction, whether the
    horizontal cross-section of the corridor (a stick of corridor width,
    perpendicular to the axis) touches a building footprint below roof +
    clearance altitude, or touches a no-fly zone. The sample set is the
    regular step grid augmented with every footprint vertex projection and
    every footprint-edge/corridor-boundary crossing, so verdicts do not
    depend on step size except at grazing contact.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    ax, ay, az = a.position.xyz()
    bx, by, bz = b.position.xyz()
    length_xy = math.hypot(bx - ax, by - ay)
    if length_xy <= EPS:
        raise NetworkError("degenerate node pair")
    ux, uy = (bx - ax) / length_xy, (by - ay) / length_xy
    half_w = params.corridor_width / 2.0
    length_3d = math.dist((ax, ay, az), (bx, by, bz))
    grid = np.linspace(0.0, 1.0, max(2, math.ceil(length_3d / step) + 1))

    def frame(poly: Polygon2) -> tuple[np.ndarray, np.ndarray]:
        pts = np.asarray(poly.coords(), dtype=float)
        rel_x = pts[:, 0] - ax
        rel_y = pts[:, 1] - ay
        s = rel_x * ux + rel_y * uy
        d = -rel_x * uy + rel_y * ux
        return s, d

    for bld in city.buildings:
        if bld.id == a.id or bld.id == b.id:
            continue
        s, d = frame(bld.footprint)
        hits, ts = _stick_hits(s, d, grid, length_xy, half_w)
        if hits is None:
            continue
        z_at = az + ts * (bz - az)
        roof = bld.height + params.clearance
        if np.any(hits & (roof > z_at - EPS)):
            return False
    for zone in city.no_fly_zones:
        s, d = frame(zone.region)
        hits, _ = _stick_hits(s, d, grid, length_xy, half_w)
        if hits is not None and np.any(hits):
            return False
    return True


def _stick_hits(
    s: np.ndarray, d: np.ndarray, grid: np.ndarray, length: float, half_w: float
) -> tuple[Optional[np.ndarray], Optional[np.ndarray]]:
    """For one polygon in corridor frame coordinates, which sampled fractions
    have a cross-section stick touching the polygon. Returns (hits, ts) or
    (None, None) when the polygon's bounding box misses the corridor.
    """
    if (
        s.max() < -EPS
        or s.min() > length + EPS
        or d.min() > half_w + EPS
        or d.max() < -half_w - EPS
    ):
        return None, None
    s1, d1 = s, d
    s2, d2 = np.roll(s, -1), np.roll(d, -1)

    # Critical fractions: vertex projections plus edge crossings of the two
    # corridor long edges (d = +/- half_w).
    crit = [np.clip(s / length, 0.0, 1.0)]
    for bound in (half_w, -half_w):
        num = bound - d1
        den = d2 - d1
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(np.abs(den) > 0, num / den, np.nan)
        valid = np.isfinite(u) & (u >= 0.0) & (u <= 1.0)
        if np.any(valid):
            s_cross = s1[valid] + u[valid] * (s2[valid] - s1[valid])
            crit.append(np.clip(s_cross / length, 0.0, 1.0))
    ts = np.unique(np.concatenate([grid] + crit))

    samples = ts * length
    sa = samples[:, None]
    crossing = (s1[None, :] <= sa) != (s2[None, :] <= sa)
    den = s2 - s1
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(np.abs(den) > 0, (sa - s1[None, :]) / den[None, :], 0.0)
    d_cross = d1[None, :] + frac * (d2 - d1)[None, :]
    boundary_hit = np.any(crossing & (np.abs(d_cross) <= half_w + EPS), axis=1)
    above = np.sum(crossing & (d_cross > 0), axis=1)
    axis_inside = (above % 2) == 1
    return boundary_hit | axis_inside, ts


def build_network(city: CityModel, params: NetworkParams) -> SkywayNetwork:
    """All-pairs LoS construction over the city's stations.

    Output is deterministic: nodes and edges are ordered by id, and the
    result does not depend on the ordering of the building list.
    """
    nodes = {
        b.id: rooftop_node(b, city)
        for b in sorted(city.stations, key=lambda b: b.id)
    }
    ids = sorted(nodes)
    edges = []
    for i, u in enumerate(ids):
        for v in ids[i + 1 :]:
            verdict = los_clear(nodes[u], nodes[v], city, params)
            if verdict.clear:
                edges.append(
                    SkywayEdge(
                        from_id=u,
                        to_id=v,
                        length3d=math.dist(
                            nodes[u].position.xyz(), nodes[v].position.xyz()
                        ),
                    )
                )
    return SkywayNetwork(
        nodes=nodes, edges=tuple(edges), params=params, zones=city.no_fly_zones
    )


def save_network(net: SkywayNetwork) -> str:
    doc = {
        "nodes": [
            {
                "id": n.id,
                "position": [n.position.x, n.position.y, n.position.z],
                "is_recharge": n.is_recharge,
            }
            for n in (net.nodes[i] for i in sorted(net.nodes))
        ],
        "edges": [
            {"from": e.from_id, "to": e.to_id, "length3d": e.length3d}
            for e in net.edges
        ],
        "params": {
            "corridor_width": net.params.corridor_width,
            "clearance": net.params.clearance,
        },
        "zones": [
            {"id": z.id, "region": [[v.x, v.y] for v in z.region.vertices]}
            for z in net.zones
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_network(document: Union[bytes, str, IO]) -> SkywayNetwork:
    if hasattr(document, "read"):
        document = document.read()
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"invalid network document: {exc}") from exc
    try:
        nodes = {}
        for entry in data["nodes"]:
            x, y, z = entry["position"]
            nodes[entry["id"]] = SkywayNode(
                id=entry["id"],
                position=Point3(float(x), float(y), float(z)),
                is_recharge=bool(entry["is_recharge"]),
            )
        edges = []
        for entry in data["edges"]:
            edge = SkywayEdge(
                from_id=entry["from"],
                to_id=entry["to"],
                length3d=float(entry["length3d"]),
            )
            edges.append(edge)
        params = NetworkParams(
            corridor_width=float(data["params"]["corridor_width"]),
            clearance=float(data["params"]["clearance"]),
        )
        zones = tuple(
            NoFlyZone(id=entry["id"], region=Polygon2.from_coords(entry["region"]))
            for entry in data.get("zones", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkError(f"malformed network document: {exc}") from exc
    for node in nodes.values():
        if not node.position.z > 0:
            raise NetworkError(f"node {node.id!r} at non-positive altitude")
    _check_edges(nodes, edges)
    return SkywayNetwork(nodes=nodes, edges=tuple(edges), params=params, zones=zones)


def _check_edges(nodes: dict, edges: Iterable[SkywayEdge]) -> None:
    seen = set()
    for e in edges:
        if e.from_id not in nodes or e.to_id not in nodes:
            raise NetworkError(f"edge {e.from_id}-{e.to_id} references unknown node")
        if e.from_id == e.to_id:
            raise NetworkError(f"self-edge on {e.from_id}")
        key = (min(e.from_id, e.to_id), max(e.from_id, e.to_id))
        if key in seen:
            raise NetworkError(f"duplicate edge {key[0]}-{key[1]}")
        seen.add(key)
        if not e.length3d > 0:
            raise NetworkError(f"edge {e.from_id}-{e.to_id} has non-positive length")
