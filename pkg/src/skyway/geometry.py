"""Planar and line-of-sight geometry predicates.

Everything operates on plain ``(x, y)`` tuples in a local metric frame.
All predicates use an absolute tolerance of EPS metres, and contact within
EPS counts as intersection: for obstruction tests the conservative answer
is the safe one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

Vec2 = tuple[float, float]
Vec3 = tuple[float, float, float]
Poly = Sequence[Vec2]

EPS = 1e-9


def _cross(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * by - ay * bx


def _dot(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * bx + ay * by


def signed_area(poly: Poly) -> float:
    a = 0.0
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        a += x1 * y2 - y1 * x2
    return 0.5 * a


def is_ccw(poly: Poly) -> bool:
    return signed_area(poly) > 0


def ensure_ccw(poly: Poly) -> tuple[Vec2, ...]:
    pts = tuple((float(x), float(y)) for x, y in poly)
    return pts if is_ccw(pts) else pts[::-1]


def polygon_centroid(poly: Poly) -> Vec2:
    """Area-weighted centroid; falls back to the vertex mean for slivers."""
    a2 = 0.0
    cx = 0.0
    cy = 0.0
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        w = x1 * y2 - x2 * y1
        a2 += w
        cx += (x1 + x2) * w
        cy += (y1 + y2) * w
    if abs(a2) < EPS:
        return (sum(p[0] for p in poly) / n, sum(p[1] for p in poly) / n)
    return (cx / (3.0 * a2), cy / (3.0 * a2))


def point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> float:
    px, py = p
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom < EPS * EPS:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / denom))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool:
    """Segment-segment intersection, endpoint and collinear contact included."""
    o1 = _cross(p2[0] - p1[0], p2[1] - p1[1], q1[0] - p1[0], q1[1] - p1[1])
    o2 = _cross(p2[0] - p1[0], p2[1] - p1[1], q2[0] - p1[0], q2[1] - p1[1])
    o3 = _cross(q2[0] - q1[0], q2[1] - q1[1], p1[0] - q1[0], p1[1] - q1[1])
    o4 = _cross(q2[0] - q1[0], q2[1] - q1[1], p2[0] - q1[0], p2[1] - q1[1])
    if ((o1 > EPS and o2 < -EPS) or (o1 < -EPS and o2 > EPS)) and (
        (o3 > EPS and o4 < -EPS) or (o3 < -EPS and o4 > EPS)
    ):
        return True
    # Grazing or collinear cases: some endpoint lies on the other segment.
    if point_segment_distance(q1, p1, p2) <= EPS:
        return True
    if point_segment_distance(q2, p1, p2) <= EPS:
        return True
    if point_segment_distance(p1, q1, q2) <= EPS:
        return True
    if point_segment_distance(p2, q1, q2) <= EPS:
        return True
    return False


def point_on_polygon_boundary(p: Vec2, poly: Poly) -> bool:
    n = len(poly)
    for i in range(n):
        if point_segment_distance(p, poly[i], poly[(i + 1) % n]) <= EPS:
            return True
    return False


def point_in_polygon(p: Vec2, poly: Poly) -> bool:
    """Boundary-inclusive containment test (crossing number)."""
    if point_on_polygon_boundary(p, poly):
        return True
    x, y = p
    inside = False
    n = len(poly)
    x1, y1 = poly[-1]
    for i in range(n):
        x2, y2 = poly[i]
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if xi > x:
                inside = not inside
        x1, y1 = x2, y2
    return inside


def polygon_is_simple(poly: Poly) -> bool:
    """True when no two non-adjacent edges touch and no vertices repeat."""
    n = len(poly)
    if n < 3:
        return False
    for i in range(n):
        for j in range(i + 1, n):
            if math.hypot(poly[i][0] - poly[j][0], poly[i][1] - poly[j][1]) <= EPS:
                return False
    for i in range(n):
        a1, a2 = poly[i], poly[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if segments_intersect(a1, a2, poly[j], poly[(j + 1) % n]):
                return False
    return True


def _bboxes_disjoint(p: Poly, q: Poly, pad: float) -> bool:
    pxs = [v[0] for v in p]
    pys = [v[1] for v in p]
    qxs = [v[0] for v in q]
    qys = [v[1] for v in q]
    return (
        max(pxs) + pad < min(qxs)
        or max(qxs) + pad < min(pxs)
        or max(pys) + pad < min(qys)
        or max(qys) + pad < min(pys)
    )


def polygons_intersect(p: Poly, q: Poly) -> bool:
    """True iff the closed regions share any point (touching counts)."""
    if _bboxes_disjoint(p, q, EPS):
        return False
    np_, nq = len(p), len(q)
    for i in range(np_):
        a1, a2 = p[i], p[(i + 1) % np_]
        for j in range(nq):
            if segments_intersect(a1, a2, q[j], q[(j + 1) % nq]):
                return True
    # No boundary contact: one polygon may still contain the other.
    if point_in_polygon(p[0], q):
        return True
    if point_in_polygon(q[0], p):
        return True
    return False


def segment_intersects_polygon(s1: Vec2, s2: Vec2, poly: Poly) -> bool:
    """True iff segment s1-s2 touches the closed polygon region."""
    n = len(poly)
    for i in range(n):
        if segments_intersect(s1, s2, poly[i], poly[(i + 1) % n]):
            return True
    return point_in_polygon(s1, poly)


@dataclass(frozen=True, slots=True)
class Corridor:
    """Rectangle of the given width centred on the directed axis a -> b."""

    quad: tuple[Vec2, Vec2, Vec2, Vec2]
    a: Vec2
    b: Vec2
    width: float


def corridor(a: Vec2, b: Vec2, width: float) -> Corridor:
    dx, dy = b[0] - a[0], b[1] - a[1]
    length = math.hypot(dx, dy)
    if length <= EPS:
        raise ValueError("corridor endpoints coincide")
    if width <= 0:
        raise ValueError("corridor width must be positive")
    ux, uy = dx / length, dy / length
    nx, ny = -uy, ux
    h = width / 2.0
    quad = (
        (a[0] - nx * h, a[1] - ny * h),
        (b[0] - nx * h, b[1] - ny * h),
        (b[0] + nx * h, b[1] + ny * h),
        (a[0] + nx * h, a[1] + ny * h),
    )
    return Corridor(quad=quad, a=(a[0], a[1]), b=(b[0], b[1]), width=width)


def project_fraction(q: Vec2, a: Vec2, b: Vec2) -> float:
    """Projection of q onto axis a->b as a fraction, clamped to [0, 1]."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    denom = dx * dx + dy * dy
    if denom < EPS * EPS:
        return 0.0
    t = ((q[0] - a[0]) * dx + (q[1] - a[1]) * dy) / denom
    return max(0.0, min(1.0, t))


def los_height_at(a: Vec3, b: Vec3, t: float) -> float:
    """Altitude of the straight sight line between a and b at fraction t."""
    if t < -EPS or t > 1.0 + EPS:
        raise ValueError(f"fraction {t} outside [0, 1]")
    t = max(0.0, min(1.0, t))
    return a[2] + t * (b[2] - a[2])


def clip_polygon_convex(subject: Poly, clipper: Poly) -> list[Vec2]:
    """Sutherland-Hodgman clip of a (possibly non-convex) subject against a
    convex CCW clipper. Inclusion is EPS-tolerant so grazing contact survives.
    """
    out = list(subject)
    m = len(clipper)
    for i in range(m):
        if not out:
            return []
        a = clipper[i]
        b = clipper[(i + 1) % m]
        ex, ey = b[0] - a[0], b[1] - a[1]

        def side(p: Vec2) -> float:
            return _cross(ex, ey, p[0] - a[0], p[1] - a[1])

        inp = out
        out = []
        prev = inp[-1]
        prev_side = side(prev)
        for cur in inp:
            cur_side = side(cur)
            if cur_side >= -EPS:
                if prev_side < -EPS:
                    out.append(_edge_line_hit(prev, cur, a, b))
                out.append(cur)
            elif prev_side >= -EPS:
                out.append(_edge_line_hit(prev, cur, a, b))
            prev, prev_side = cur, cur_side
    return out


def _edge_line_hit(p1: Vec2, p2: Vec2, a: Vec2, b: Vec2) -> Vec2:
    dx, dy = p2[0] - p1[0], p2[1] - p1[1]
    ex, ey = b[0] - a[0], b[1] - a[1]
    denom = _cross(dx, dy, ex, ey)
    if abs(denom) < EPS * EPS:
        return p2
    t = _cross(a[0] - p1[0], a[1] - p1[1], ex, ey) / denom
    t = max(0.0, min(1.0, t))
    return (p1[0] + t * dx, p1[1] + t * dy)


def min_los_height_over(
    p: Poly, a: Vec3, b: Vec3, corridor_width: float
) -> Optional[float]:
    """Minimum sight-line altitude over the part of polygon p inside the
    corridor between a and b, or None when p misses the corridor entirely.

    The altitude over a point is linear in its axis projection, so the
    minimum over the clipped region sits at one of the region's vertices.
    """
    cor = corridor((a[0], a[1]), (b[0], b[1]), corridor_width)
    region = clip_polygon_convex(p, cor.quad)
    if not region:
        return None
    best = None
    for v in region:
        t = project_fraction(v, cor.a, cor.b)
        z = los_height_at(a, b, t)
        if best is None or z < best:
            best = z
    return best
