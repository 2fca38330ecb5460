"""Small axis-aligned geometry helpers shared across the engine.

Primitive geometry is stored as interval triples ((xlo,xhi),(ylo,yhi),(zlo,zhi));
everything here works on those or on plain 3-vectors.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

AXIS_NAMES = ("X", "Y", "Z")

Intervals = tuple[tuple[float, float], tuple[float, float], tuple[float, float]]


def interval_length(iv: Sequence[float]) -> float:
    return iv[1] - iv[0]


def interval_mid(iv: Sequence[float]) -> float:
    return 0.5 * (iv[0] + iv[1])


def lengths(intervals: Intervals) -> tuple[float, float, float]:
    return tuple(iv[1] - iv[0] for iv in intervals)  # type: ignore[return-value]


def center(intervals: Intervals) -> tuple[float, float, float]:
    return tuple(0.5 * (iv[0] + iv[1]) for iv in intervals)  # type: ignore[return-value]


def volume(intervals: Intervals) -> float:
    v = 1.0
    for iv in intervals:
        v *= max(iv[1] - iv[0], 0.0)
    return v


def face_area(intervals: Intervals, perp_axis: int) -> float:
    a, b = [ax for ax in range(3) if ax != perp_axis]
    return max(intervals[a][1] - intervals[a][0], 0.0) * max(
        intervals[b][1] - intervals[b][0], 0.0
    )


def max_face_area(intervals: Intervals) -> float:
    return max(face_area(intervals, ax) for ax in range(3))


def box_corners(intervals: Intervals) -> list[tuple[float, float, float]]:
    (xl, xh), (yl, yh), (zl, zh) = intervals
    return [
        (x, y, z) for x in (xl, xh) for y in (yl, yh) for z in (zl, zh)
    ]


def box_edges(intervals: Intervals) -> list[tuple[tuple[float, float, float], tuple[float, float, float]]]:
    """The 12 wireframe edges (degenerate axes collapse duplicates away)."""
    (xl, xh), (yl, yh), (zl, zh) = intervals
    edges = set()
    for y in (yl, yh):
        for z in (zl, zh):
            edges.add(((xl, y, z), (xh, y, z)))
    for x in (xl, xh):
        for z in (zl, zh):
            edges.add(((x, yl, z), (x, yh, z)))
    for x in (xl, xh):
        for y in (yl, yh):
            edges.add(((x, y, zl), (x, y, zh)))
    return sorted(e for e in edges if e[0] != e[1])


def face_centers(intervals: Intervals) -> list[tuple[float, float, float]]:
    c = list(center(intervals))
    out = []
    for ax in range(3):
        for side in range(2):
            p = list(c)
            p[ax] = intervals[ax][side]
            out.append(tuple(p))
    return out


def bbox_of_points(points: np.ndarray) -> Intervals:
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    return tuple((float(lo[i]), float(hi[i])) for i in range(3))  # type: ignore[return-value]


def bbox_diagonal(intervals: Intervals) -> float:
    return math.sqrt(sum((iv[1] - iv[0]) ** 2 for iv in intervals))


def merge_bboxes(boxes: Sequence[Intervals]) -> Intervals:
    lo = [min(b[i][0] for b in boxes) for i in range(3)]
    hi = [max(b[i][1] for b in boxes) for i in range(3)]
    return tuple((lo[i], hi[i]) for i in range(3))  # type: ignore[return-value]


def box_surface_distance(p: Sequence[float], intervals: Intervals) -> float:
    """Distance from a point to the surface of an axis-aligned box.

    Degenerate axes are fine, which makes the same metric work for the
    plane primitive (a box that is flat along one axis).
    """
    outside = 0.0
    inside_margin = math.inf
    for ax in range(3):
        lo, hi = intervals[ax]
        v = p[ax]
        if v < lo:
            outside += (lo - v) ** 2
        elif v > hi:
            outside += (v - hi) ** 2
        else:
            inside_margin = min(inside_margin, v - lo, hi - v)
    if outside > 0.0:
        return math.sqrt(outside)
    return inside_margin


def capped_cylinder_distance(
    p: Sequence[float], axis: int, c1: float, c2: float, r: float,
    alo: float, ahi: float,
) -> float:
    """Distance to the surface of a capped cylinder along a world axis."""
    t1, t2 = [ax for ax in range(3) if ax != axis]
    rho = math.hypot(p[t1] - c1, p[t2] - c2)
    a = p[axis]
    if alo <= a <= ahi and rho <= r:
        return min(r - rho, a - alo, ahi - a)
    # outside: distance to the nearest boundary piece
    d_rho = max(rho - r, 0.0)
    d_a = max(alo - a, a - ahi, 0.0)
    if rho <= r:
        return d_a
    if alo <= a <= ahi:
        return d_rho
    return math.hypot(d_rho, d_a)


def _point_to_quad(p: np.ndarray, quad: np.ndarray) -> float:
    """Distance from a point to a planar quad given by 4 corners in order."""
    origin = quad[0]
    e1 = quad[1] - quad[0]
    e2 = quad[3] - quad[0]
    n = np.cross(e1, e2)
    nn = np.linalg.norm(n)
    if nn < 1e-15:
        # degenerate quad: fall back to min corner distance
        return float(min(np.linalg.norm(p - q) for q in quad))
    n = n / nn
    d_plane = float(np.dot(p - origin, n))
    proj = p - d_plane * n
    # inside test via cross-product winding; if outside, use edge distances
    inside = True
    for k in range(4):
        a, b = quad[k], quad[(k + 1) % 4]
        if np.dot(np.cross(b - a, proj - a), n) < -1e-12:
            inside = False
            break
    if inside:
        return abs(d_plane)
    best = math.inf
    for k in range(4):
        a, b = quad[k], quad[(k + 1) % 4]
        ab = b - a
        t = float(np.clip(np.dot(p - a, ab) / max(np.dot(ab, ab), 1e-30), 0.0, 1.0))
        best = min(best, float(np.linalg.norm(p - (a + t * ab))))
    return best


def frustum_distance(
    p: Sequence[float], axis: int,
    bottom: tuple[tuple[float, float], tuple[float, float]],
    top: tuple[tuple[float, float], tuple[float, float]],
    alo: float, ahi: float,
) -> float:
    """Distance to the surface of a rectangular frustum (planar trapezoid sides)."""
    t1, t2 = [ax for ax in range(3) if ax != axis]

    def corner(rect, u_side, v_side, a):
        q = [0.0, 0.0, 0.0]
        q[axis] = a
        q[t1] = rect[0][u_side]
        q[t2] = rect[1][v_side]
        return q

    bl = [corner(bottom, u, v, alo) for u, v in ((0, 0), (1, 0), (1, 1), (0, 1))]
    tl = [corner(top, u, v, ahi) for u, v in ((0, 0), (1, 0), (1, 1), (0, 1))]
    quads = [np.array(bl), np.array(tl)]
    for k in range(4):
        quads.append(np.array([bl[k], bl[(k + 1) % 4], tl[(k + 1) % 4], tl[k]]))
    pt = np.asarray(p, dtype=float)
    return min(_point_to_quad(pt, q) for q in quads)


def segment_blocked_by_box(
    a: Sequence[float], b: Sequence[float], intervals: Intervals,
    t_eps: float = 1e-6,
) -> bool:
    """True when the open segment a->b passes through the box interior.

    Used for occlusion tests: a sample point at b is hidden by the box when
    the eye-to-point segment enters it strictly before reaching the point.
    """
    t0, t1 = 0.0, 1.0
    for ax in range(3):
        d = b[ax] - a[ax]
        lo, hi = intervals[ax]
        if abs(d) < 1e-15:
            if a[ax] < lo or a[ax] > hi:
                return False
            continue
        ta = (lo - a[ax]) / d
        tb = (hi - a[ax]) / d
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t0 > t1:
            return False
    # require a real chord strictly inside the segment
    t0 = max(t0, t_eps)
    t1 = min(t1, 1.0 - t_eps)
    return t1 - t0 > t_eps


def polygon_area_2d(points: Sequence[Sequence[float]]) -> float:
    s = 0.0
    n = len(points)
    for k in range(n):
        x1, y1 = points[k]
        x2, y2 = points[(k + 1) % n]
        s += x1 * y2 - x2 * y1
    return abs(s) * 0.5
