"""Built-in models used by the demos and the test suite.

Each builder returns a SegmentedModel whose segments are meshed just finely
enough to exercise the fitting code.  The layouts are not arbitrary: part
extents are placed so that specific guideline anchors exist (or are kept out
of the admissible windows) and so that the relation detector sees a known
set of coincidences.  Tests assert against those facts, so treat any edit to
a coordinate here as a behaviour change.

``fixture_camera`` and ``fixture_config`` give per-model defaults that the
CLI and demos use when the caller does not supply their own.
"""

from __future__ import annotations

import math

import numpy as np

from .model_io import (
    EngineConfig,
    Segment,
    SegmentedModel,
    make_box_segment,
    make_cylinder_segment,
    make_frustum_segment,
    make_plane_segment,
)
from .projective import Camera


def make_tube_segment(
    sid: int, name: str, points: list[tuple[float, float, float]],
    radius: float, sides: int = 8,
) -> Segment:
    """Tube swept along an open polyline, with flat end caps."""
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 2:
        raise ValueError("tube needs at least two points")
    # direction at each joint = mean of adjacent segment directions
    dirs = []
    seg_dirs = pts[1:] - pts[:-1]
    seg_dirs = seg_dirs / np.linalg.norm(seg_dirs, axis=1, keepdims=True)
    for i in range(len(pts)):
        if i == 0:
            d = seg_dirs[0]
        elif i == len(pts) - 1:
            d = seg_dirs[-1]
        else:
            d = seg_dirs[i - 1] + seg_dirs[i]
        dirs.append(d / np.linalg.norm(d))

    verts: list[np.ndarray] = []
    tris: list[tuple[int, int, int]] = []
    ring_start = []
    for p, d in zip(pts, dirs):
        ref = np.array([0.0, 1.0, 0.0])
        if abs(float(np.dot(ref, d))) > 0.9:
            ref = np.array([1.0, 0.0, 0.0])
        u = np.cross(d, ref)
        u /= np.linalg.norm(u)
        v = np.cross(d, u)
        ring_start.append(len(verts))
        for k in range(sides):
            ang = 2.0 * math.pi * k / sides
            verts.append(p + radius * (math.cos(ang) * u + math.sin(ang) * v))
    for i in range(len(pts) - 1):
        a, b = ring_start[i], ring_start[i + 1]
        for k in range(sides):
            k2 = (k + 1) % sides
            tris.append((a + k, b + k, b + k2))
            tris.append((a + k, b + k2, a + k2))
    # caps
    for end, ring in ((0, ring_start[0]), (len(pts) - 1, ring_start[-1])):
        c = len(verts)
        verts.append(pts[end])
        for k in range(sides):
            k2 = (k + 1) % sides
            tris.append((c, ring + k, ring + k2))
    return Segment(
        id=sid, name=name,
        vertices=np.asarray(verts, dtype=np.float64),
        triangles=np.asarray(tris, dtype=np.int32),
    )


def two_cuboids() -> SegmentedModel:
    """A pedestal with a centered cap: one coaxial relation, exact anchors."""
    segs = [
        make_box_segment(0, "pedestal", ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))),
        make_box_segment(1, "cap", ((0.25, 0.75), (1.0, 1.5), (0.25, 0.75))),
    ]
    return SegmentedModel(up_axis=1, segments=segs)


def chain4() -> SegmentedModel:
    """Four slabs sharing a footprint, tuned so greedy ordering is suboptimal.

    All parts span x [0,1], z [0,0.6]; only the y extents differ.  B can be
    guided from A cheaply one-sided (hi -> 0.93) or slightly dearer as the
    pair (1/3, hi) = (0.31, 0.93).  C's only admissible y anchor is the
    ExtendTwo feature of that pair variant (0.93 + 2*0.62 = 2.17), so a
    solver that commits B to its locally cheapest candidate leaves C with an
    unguided axis.  D's y windows are empty on purpose.
    """
    x, z = (0.0, 1.0), (0.0, 0.6)
    segs = [
        make_box_segment(0, "slab_a", (x, (0.0, 0.93), z)),
        make_box_segment(1, "slab_b", (x, (0.285, 0.945), z)),
        make_box_segment(2, "slab_c", (x, (1.75, 2.15), z)),
        make_box_segment(3, "slab_d", (x, (0.10, 0.28), z)),
    ]
    return SegmentedModel(up_axis=1, segments=segs)


def mixer() -> SegmentedModel:
    """Six-part stand mixer: plane, two cylinders, three cuboids.

    The bowl and blade are coaxial; bowl, blade, stand and body share the
    z midplane 0.28; everything that touches the base plate is flush with
    it.  Part extents are chosen so every axis that a relation depends on
    has a zero-deviation anchor available, which keeps the solved geometry
    on-relation without any special casing.
    """
    segs = [
        make_plane_segment(0, "base", 1, 0.0, (0.0, 1.0), (0.0, 0.5)),
        make_cylinder_segment(1, "bowl", 1, 0.46, 0.28, 0.21, 0.0, 0.42),
        make_cylinder_segment(2, "blade", 1, 0.46, 0.28, 0.03, 0.12, 0.54),
        make_box_segment(3, "stand", ((0.72, 0.95), (0.0, 0.72), (0.06, 0.50))),
        make_box_segment(4, "body", ((0.56, 0.94), (0.72, 0.96), (0.06, 0.50))),
        make_box_segment(5, "knob", ((0.60, 0.66), (0.76, 0.84), (0.44, 0.49))),
    ]
    return SegmentedModel(up_axis=1, segments=segs)


def table8() -> SegmentedModel:
    """Eight-part table: the sizing stress fixture for the full pipeline."""
    leg_y = (0.0, 0.70)
    segs = [
        make_box_segment(0, "top", ((0.0, 1.2), (0.70, 0.74), (0.0, 0.7))),
        make_box_segment(1, "leg_fl", ((0.06, 0.12), leg_y, (0.06, 0.12))),
        make_box_segment(2, "leg_fr", ((1.08, 1.14), leg_y, (0.06, 0.12))),
        make_box_segment(3, "leg_bl", ((0.06, 0.12), leg_y, (0.58, 0.64))),
        make_box_segment(4, "leg_br", ((1.08, 1.14), leg_y, (0.58, 0.64))),
        make_box_segment(5, "apron_f", ((0.12, 1.08), (0.62, 0.70), (0.06, 0.12))),
        make_box_segment(6, "apron_b", ((0.12, 1.08), (0.62, 0.70), (0.58, 0.64))),
        make_box_segment(7, "shelf", ((0.12, 1.08), (0.20, 0.26), (0.12, 0.58))),
    ]
    return SegmentedModel(up_axis=1, segments=segs)


def lamp() -> SegmentedModel:
    """Box base plus a free-form wire that no primitive should fit.

    The wire is a star: it dives from a loose knot near the bbox centre out
    to every corner and back.  Mass at the centre makes spanning fits pay,
    the corner spikes stop shrunk fits, and mixing all eight corners keeps
    any single plane or circle from splitting the difference.  The best
    primitive lands around 0.99 of the default custom threshold, which is
    why ``fixture_config`` lowers the fraction for this model.
    """
    knot = (0.40, 0.41, 0.40)
    jitter = [
        (-0.02, 0.0, 0.02), (0.02, 0.02, -0.02), (0.0, -0.02, 0.0),
        (0.02, -0.02, 0.02), (-0.02, 0.02, -0.02), (0.0, 0.02, 0.0),
        (-0.02, -0.02, 0.0), (0.02, 0.0, -0.02), (0.0, 0.0, 0.02),
    ]
    corners = [
        (0.1, 0.1, 0.1), (0.7, 0.1, 0.7), (0.1, 0.75, 0.7), (0.7, 0.75, 0.1),
        (0.7, 0.1, 0.1), (0.1, 0.1, 0.7), (0.7, 0.75, 0.7), (0.1, 0.75, 0.1),
    ]
    path = []
    for i, corner in enumerate(corners):
        j = jitter[i]
        path.append((knot[0] + j[0], knot[1] + j[1], knot[2] + j[2]))
        path.append(corner)
    j = jitter[8]
    path.append((knot[0] + j[0], knot[1] + j[1], knot[2] + j[2]))
    wire = make_tube_segment(1, "wire", path, radius=0.015, sides=8)
    segs = [
        make_box_segment(0, "base", ((0.0, 0.8), (0.0, 0.08), (0.0, 0.8))),
        wire,
    ]
    return SegmentedModel(up_axis=1, segments=segs)


def hopper() -> SegmentedModel:
    """Ground plane, connecting chute and a flaring frustum on top of it."""
    segs = [
        make_plane_segment(0, "ground", 1, 0.0, (0.0, 1.0), (0.0, 0.8)),
        make_box_segment(1, "chute", ((0.45, 0.55), (0.0, 0.12), (0.35, 0.45))),
        make_frustum_segment(
            2, "funnel", 1,
            ((0.42, 0.58), (0.32, 0.48)),
            ((0.25, 0.75), (0.16, 0.64)),
            0.12, 0.52,
        ),
    ]
    return SegmentedModel(up_axis=1, segments=segs)


FIXTURES = {
    "two_cuboids": two_cuboids,
    "chain4": chain4,
    "mixer": mixer,
    "table8": table8,
    "lamp": lamp,
    "hopper": hopper,
}

_CAMERAS = {
    "two_cuboids": ((2.8, 2.2, 3.2), (0.5, 0.75, 0.5), 45.0),
    "chain4": ((3.2, 2.6, 3.4), (0.5, 1.0, 0.3), 50.0),
    "mixer": ((2.3, 1.4, 2.0), (0.5, 0.4, 0.25), 40.0),
    "table8": ((2.6, 1.6, 2.4), (0.6, 0.4, 0.35), 45.0),
    "lamp": ((2.1, 1.3, 2.3), (0.4, 0.4, 0.4), 45.0),
    "hopper": ((2.2, 1.5, 2.0), (0.5, 0.3, 0.4), 45.0),
}


def fixture_model(name: str) -> SegmentedModel:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; have {sorted(FIXTURES)}") from None


def fixture_camera(name: str) -> Camera:
    eye, target, fov = _CAMERAS[name]
    return Camera(eye=eye, target=target, up=(0.0, 1.0, 0.0), fov_deg=fov)


def fixture_config(name: str) -> EngineConfig:
    # table8 is the sizing fixture; a tighter per-part cap keeps its total
    # candidate count small enough to enumerate exhaustively in tests.
    if name == "table8":
        return EngineConfig(max_candidates_per_part=60)
    # the lamp wire's best primitive sits at ~0.99 of the default fraction;
    # an axis-aligned fit can get surprisingly close to any tube, so the
    # intentionally-custom fixture asks for a little more conviction
    if name == "lamp":
        return EngineConfig(custom_residue_fraction=0.12)
    return EngineConfig()
