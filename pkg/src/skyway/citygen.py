"""Synthetic city fixtures.

Generates a deterministic downtown block grid: 36 buildings on a 6x6 grid
with varied heights, most of them carrying rooftop stations, plus exactly
seven no-fly zones sitting in the street gaps between blocks. The output
validates as a city document and is byte-stable for a given seed.
"""

from __future__ import annotations

import random

from .city import Building, CityModel, NoFlyZone, Polygon2, save_city

GRID = 6
PITCH = 70.0  # metres between block centres
ZONE_COUNT = 7
MIN_STATIONS = 20


def _rect(cx: float, cy: float, half_w: float, half_h: float) -> list[list[float]]:
    return [
        [round(cx - half_w, 2), round(cy - half_h, 2)],
        [round(cx + half_w, 2), round(cy - half_h, 2)],
        [round(cx + half_w, 2), round(cy + half_h, 2)],
        [round(cx - half_w, 2), round(cy + half_h, 2)],
    ]


def generate_city(seed: int = 42) -> CityModel:
    rng = random.Random(seed)
    buildings = []
    station_flags = []
    for j in range(GRID):
        for i in range(GRID):
            cx = PITCH / 2 + PITCH * i + rng.uniform(-5.0, 5.0)
            cy = PITCH / 2 + PITCH * j + rng.uniform(-5.0, 5.0)
            half_w = rng.uniform(12.0, 19.0)
            half_h = rng.uniform(12.0, 19.0)
            height = round(rng.uniform(15.0, 90.0), 1)
            station = rng.random() < 0.72
            station_flags.append(station)
            buildings.append(
                Building(
                    id=f"b{j * GRID + i:02d}",
                    footprint=Polygon2.from_coords(_rect(cx, cy, half_w, half_h)),
                    height=height,
                    has_station=station,
                    is_recharge=False,
                )
            )
    # Top up to the minimum station count deterministically.
    shortfall = MIN_STATIONS - sum(station_flags)
    for idx in range(len(buildings)):
        if shortfall <= 0:
            break
        if not station_flags[idx]:
            station_flags[idx] = True
            shortfall -= 1
    station_indices = [i for i, flag in enumerate(station_flags) if flag]
    recharge_ids = {buildings[i].id for i in station_indices[::3]}
    buildings = [
        Building(
            id=b.id,
            footprint=b.footprint,
            height=b.height,
            has_station=station_flags[i],
            is_recharge=b.id in recharge_ids,
        )
        for i, b in enumerate(buildings)
    ]

    zones = []
    # Candidate zone sites: street crossings between blocks, shuffled once.
    sites = [(sx, sy) for sx in range(1, GRID) for sy in range(1, GRID)]
    rng.shuffle(sites)
    for n, (sx, sy) in enumerate(sites[:ZONE_COUNT]):
        cx = PITCH * sx + rng.uniform(-4.0, 4.0)
        cy = PITCH * sy + rng.uniform(-4.0, 4.0)
        along_x = rng.random() < 0.5
        long_half = rng.uniform(14.0, 30.0)
        short_half = rng.uniform(5.0, 11.0)
        if along_x:
            ring = _rect(cx, cy, long_half, short_half)
        else:
            ring = _rect(cx, cy, short_half, long_half)
        zones.append(NoFlyZone(id=f"z{n}", region=Polygon2.from_coords(ring)))

    city = CityModel(
        buildings=tuple(buildings), no_fly_zones=tuple(zones), node_offset=1.0
    )
    violations = city.validate()
    if violations:
        raise RuntimeError(f"generated city is invalid: {violations}")
    return city


def generate_city_document(seed: int = 42) -> str:
    return save_city(generate_city(seed))
