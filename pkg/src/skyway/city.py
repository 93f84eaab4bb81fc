"""World model: buildings with rooftop stations, and no-fly zones.

A city document is JSON with top-level keys ``buildings``, ``no_fly_zones``
and ``node_offset``; all coordinates are metres in a local east/north frame.
Models are immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Union

from .geometry import (
    EPS,
    Vec2,
    ensure_ccw,
    point_in_polygon,
    polygon_centroid,
    polygon_is_simple,
    signed_area,
)


class CityError(Exception):
    pass


class CityParseError(CityError):
    """The document is not well-formed (bad bytes, bad JSON, bad shapes)."""


class CityValidationError(CityError):
    """The document parsed but violates model invariants."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True, slots=True)
class Point2:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("coordinates must be finite")

    def xy(self) -> Vec2:
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class Point3:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if not (
            math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)
        ):
            raise ValueError("coordinates must be finite")

    def xy(self) -> Vec2:
        return (self.x, self.y)

    def xyz(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Polygon2:
    """Simple polygon, vertices counter-clockwise."""

    vertices: tuple[Point2, ...]

    @classmethod
    def from_coords(cls, coords) -> "Polygon2":
        pts = ensure_ccw([(float(x), float(y)) for x, y in coords])
        return cls(tuple(Point2(x, y) for x, y in pts))

    def coords(self) -> tuple[Vec2, ...]:
        return tuple(v.xy() for v in self.vertices)

    def area(self) -> float:
        return abs(signed_area(self.coords()))

    def violations(self, label: str) -> list[str]:
        out = []
        if len(self.vertices) < 3:
            out.append(f"{label}: fewer than 3 vertices")
            return out
        if not polygon_is_simple(self.coords()):
            out.append(f"{label}: polygon self-intersects")
        if self.area() <= EPS:
            out.append(f"{label}: polygon has zero area")
        return out


@dataclass(frozen=True)
class Building:
    id: str
    footprint: Polygon2
    height: float
    has_station: bool = False
    is_recharge: bool = False


@dataclass(frozen=True)
class NoFlyZone:
    id: str
    region: Polygon2


@dataclass(frozen=True)
class CityModel:
    buildings: tuple[Building, ...]
    no_fly_zones: tuple[NoFlyZone, ...] = ()
    node_offset: float = 1.0

    _by_id: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_by_id", {b.id: b for b in self.buildings})

    def building(self, building_id: str) -> Building:
        return self._by_id[building_id]

    @property
    def stations(self) -> tuple[Building, ...]:
        return tuple(b for b in self.buildings if b.has_station)

    def validate(self) -> list[str]:
        """Collect every violated invariant (empty list means valid)."""
        out: list[str] = []
        seen: set[str] = set()
        for b in self.buildings:
            if b.id in seen:
                out.append(f"building {b.id!r}: duplicate id")
            seen.add(b.id)
            out.extend(b.footprint.violations(f"building {b.id!r}"))
            if not b.height > 0:
                out.append(f"building {b.id!r}: height must be positive")
            if b.is_recharge and not b.has_station:
                out.append(f"building {b.id!r}: recharge flag requires a station")
        zone_seen: set[str] = set()
        for z in self.no_fly_zones:
            if z.id in zone_seen:
                out.append(f"zone {z.id!r}: duplicate id")
            zone_seen.add(z.id)
            out.extend(z.region.violations(f"zone {z.id!r}"))
        if not self.node_offset > 0:
            out.append("node_offset must be positive")
        stations = self.stations
        if len(stations) < 2:
            out.append("at least 2 stations required")
        for b in stations:
            if b.footprint.violations(""):
                continue  # anchor is undefined on a broken footprint
            anchor, _ = station_anchor(b.footprint)
            for z in self.no_fly_zones:
                if len(z.region.vertices) >= 3 and point_in_polygon(
                    anchor, z.region.coords()
                ):
                    out.append(
                        f"station {b.id!r} rooftop point lies inside zone {z.id!r}"
                    )
        return out


def station_anchor(footprint: Polygon2) -> tuple[Vec2, str]:
    """Where on the roof the station sits, and which placement rule fired.

    The centroid is used when it falls inside the footprint. Non-convex
    footprints whose centroid lands outside fall back to the vertex average
    projected onto the nearest point of the polygon.
    """
    coords = footprint.coords()
    c = polygon_centroid(coords)
    if point_in_polygon(c, coords):
        return c, "centroid"
    n = len(coords)
    mean = (sum(p[0] for p in coords) / n, sum(p[1] for p in coords) / n)
    if point_in_polygon(mean, coords):
        return mean, "pole_fallback"
    return _nearest_boundary_point(mean, coords), "pole_fallback"


def _nearest_boundary_point(p: Vec2, coords) -> Vec2:
    best = None
    best_d = math.inf
    n = len(coords)
    for i in range(n):
        a, b = coords[i], coords[(i + 1) % n]
        dx, dy = b[0] - a[0], b[1] - a[1]
        denom = dx * dx + dy * dy
        if denom < EPS * EPS:
            q = a
        else:
            t = max(0.0, min(1.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / denom))
            q = (a[0] + t * dx, a[1] + t * dy)
        d = math.hypot(p[0] - q[0], p[1] - q[1])
        if d < best_d:
            best_d, best = d, q
    assert best is not None
    return best


Document = Union[bytes, str, IO[bytes], IO[str]]


def load_city(document: Document) -> CityModel:
    """Parse and validate a city document.

    Raises CityParseError for anything that is not a well-formed document
    and CityValidationError (carrying the violation list) for documents
    that parse but break model invariants. Never raises anything else,
    whatever the input bytes.
    """
    data = _read_json(document)
    if not isinstance(data, dict):
        raise CityParseError("top level must be a JSON object")
    try:
        buildings = tuple(
            Building(
                id=_req_str(entry, "id", "building"),
                footprint=Polygon2.from_coords(_req_ring(entry, "footprint")),
                height=_req_num(entry, "height", "building"),
                has_station=bool(entry.get("has_station", False)),
                is_recharge=bool(entry.get("is_recharge", False)),
            )
            for entry in _req_list(data, "buildings")
        )
        zones = tuple(
            NoFlyZone(
                id=_req_str(entry, "id", "zone"),
                region=Polygon2.from_coords(_req_ring(entry, "region")),
            )
            for entry in _req_list(data, "no_fly_zones")
        )
        offset = data.get("node_offset", 1.0)
        if not isinstance(offset, (int, float)) or isinstance(offset, bool):
            raise CityParseError("node_offset must be a number")
        city = CityModel(
            buildings=buildings, no_fly_zones=zones, node_offset=float(offset)
        )
    except CityParseError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise CityParseError(f"malformed city document: {exc}") from exc
    violations = city.validate()
    if violations:
        raise CityValidationError(violations)
    return city


def save_city(city: CityModel) -> str:
    doc = {
        "buildings": [
            {
                "id": b.id,
                "footprint": [[v.x, v.y] for v in b.footprint.vertices],
                "height": b.height,
                "has_station": b.has_station,
                "is_recharge": b.is_recharge,
            }
            for b in city.buildings
        ],
        "no_fly_zones": [
            {"id": z.id, "region": [[v.x, v.y] for v in z.region.vertices]}
            for z in city.no_fly_zones
        ],
        "node_offset": city.node_offset,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _read_json(document: Document):
    if hasattr(document, "read"):
        document = document.read()
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CityParseError(f"document is not UTF-8: {exc}") from exc
    if not isinstance(document, str):
        raise CityParseError("document must be bytes, text, or a readable stream")

    def _reject_constant(token: str):
        raise CityParseError(f"non-finite number {token!r} not allowed")

    try:
        return json.loads(document, parse_constant=_reject_constant)
    except CityParseError:
        raise
    except (json.JSONDecodeError, RecursionError) as exc:
        raise CityParseError(f"invalid JSON: {exc}") from exc


def _req_list(data: dict, key: str) -> list:
    value = data.get(key, [])
    if not isinstance(value, list):
        raise CityParseError(f"{key} must be an array")
    return value


def _req_str(entry, key: str, kind: str) -> str:
    if not isinstance(entry, dict):
        raise CityParseError(f"each {kind} must be an object")
    value = entry.get(key)
    if not isinstance(value, str) or not value:
        raise CityParseError(f"{kind} {key} must be a non-empty string")
    return value


def _req_num(entry: dict, key: str, kind: str) -> float:
    value = entry.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise CityParseError(f"{kind} {key} must be a number")
    return float(value)


def _req_ring(entry: dict, key: str) -> list:
    value = entry.get(key)
    if not isinstance(value, list):
        raise CityParseError(f"{key} must be an array of [x, y] pairs")
    for pair in value:
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in pair)
        ):
            raise CityParseError(f"{key} must contain [x, y] number pairs")
    return value
