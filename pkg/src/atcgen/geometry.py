"""Small planar geometry helpers shared by the encoder, generators and checks.

All coordinates are (x, y) tuples in nautical miles.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence, Tuple

Point = Tuple[float, float]

EPS = 1e-9


def dist(p: Point, q: Point) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def polyline_length(points: Sequence[Point]) -> float:
    return sum(dist(points[i], points[i + 1]) for i in range(len(points) - 1))


def centroid(points: Sequence[Point]) -> Point:
    n = len(points)
    return (sum(p[0] for p in points) / n, sum(p[1] for p in points) / n)


def lerp(p: Point, q: Point, t: float) -> Point:
    return (p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t)


def turn_angle_deg(a: Point, b: Point, c: Point) -> float:
    """Deviation from straight-ahead at b when walking a -> b -> c, in degrees."""
    v1 = (b[0] - a[0], b[1] - a[1])
    v2 = (c[0] - b[0], c[1] - b[1])
    n1 = math.hypot(*v1)
    n2 = math.hypot(*v2)
    if n1 < EPS or n2 < EPS:
        return 0.0
    cosang = (v1[0] * v2[0] + v1[1] * v2[1]) / (n1 * n2)
    cosang = max(-1.0, min(1.0, cosang))
    return math.degrees(math.acos(cosang))


def angle_between_deg(u: Point, v: Point) -> float:
    """Angle between two direction vectors in [0, 180] degrees."""
    nu = math.hypot(*u)
    nv = math.hypot(*v)
    if nu < EPS or nv < EPS:
        return 0.0
    cosang = (u[0] * v[0] + u[1] * v[1]) / (nu * nv)
    cosang = max(-1.0, min(1.0, cosang))
    return math.degrees(math.acos(cosang))


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    ab = (b[0] - a[0], b[1] - a[1])
    ap = (p[0] - a[0], p[1] - a[1])
    denom = ab[0] ** 2 + ab[1] ** 2
    if denom < EPS:
        return dist(p, a)
    t = max(0.0, min(1.0, (ap[0] * ab[0] + ap[1] * ab[1]) / denom))
    return dist(p, lerp(a, b, t))


def segment_intersection(a1: Point, a2: Point, b1: Point, b2: Point) -> Optional[Point]:
    """Proper crossing point of two segments, or None.

    Returns the intersection point when the open interiors (or an endpoint of
    one lying on the other) meet. Collinear overlaps return None; callers
    handle those separately.
    """
    d1 = (a2[0] - a1[0], a2[1] - a1[1])
    d2 = (b2[0] - b1[0], b2[1] - b1[1])
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(denom) < EPS:
        return None
    t = ((b1[0] - a1[0]) * d2[1] - (b1[1] - a1[1]) * d2[0]) / denom
    u = ((b1[0] - a1[0]) * d1[1] - (b1[1] - a1[1]) * d1[0]) / denom
    if -EPS <= t <= 1 + EPS and -EPS <= u <= 1 + EPS:
        return lerp(a1, a2, max(0.0, min(1.0, t)))
    return None


def segments_cross_off_endpoints(a1: Point, a2: Point, b1: Point, b2: Point,
                                 tol: float = 1e-6) -> bool:
    """True when two segments cross at a point that is not a shared endpoint."""
    p = segment_intersection(a1, a2, b1, b2)
    if p is None:
        return False
    for e in (a1, a2):
        for f in (b1, b2):
            if dist(e, f) < tol and dist(p, e) < tol:
                return False
    # touching at one segment's endpoint that is not a node of the other
    return True


def collinear_overlap(a1: Point, a2: Point, b1: Point, b2: Point,
                      perp_tol: float = 1.0) -> Optional[Tuple[Point, Point]]:
    """Overlapping extent of two (near-)collinear segments.

    Returns the overlap interval endpoints projected on segment a, or None if
    the segments are not collinear within perp_tol or do not overlap over a
    positive length.
    """
    d1 = (a2[0] - a1[0], a2[1] - a1[1])
    n1 = math.hypot(*d1)
    if n1 < EPS:
        return None
    if point_segment_distance(b1, a1, a2) > perp_tol and \
       point_segment_distance(b2, a1, a2) > perp_tol:
        return None
    # require near-parallel directions
    if angle_between_deg(d1, (b2[0] - b1[0], b2[1] - b1[1])) % 180 > 1.0 and \
       angle_between_deg(d1, (b2[0] - b1[0], b2[1] - b1[1])) % 180 < 179.0:
        return None
    u = (d1[0] / n1, d1[1] / n1)

    def proj(p: Point) -> float:
        return (p[0] - a1[0]) * u[0] + (p[1] - a1[1]) * u[1]

    lo = max(0.0, min(proj(b1), proj(b2)))
    hi = min(n1, max(proj(b1), proj(b2)))
    if hi - lo < EPS:
        return None
    if max(point_segment_distance(lerp(a1, a2, lo / n1), b1, b2),
           point_segment_distance(lerp(a1, a2, hi / n1), b1, b2)) > perp_tol:
        return None
    return (lerp(a1, a2, lo / n1), lerp(a1, a2, hi / n1))
