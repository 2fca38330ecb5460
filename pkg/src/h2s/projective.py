"""Pinhole camera, vanishing points, and guideline construction recipes.

Recipes are built in the parameter space of a host face: s runs along the
guided axis, t across it. The face rectangle spans [0,1]x[0,1]; extension
recipes reach beyond s=1 (mirrored variants beyond s=0). Each recipe
returns world-space guide lines tagged with the ability tier that still
needs them:

  Master-hidden  drawn at every ability level
  Apprentice     drawn for novices and apprentices
  Novice         drawn for novices only
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TIER_NOVICE = "Novice"
TIER_APPRENTICE = "Apprentice"
TIER_MASTER = "Master-hidden"

FOV_MIN = 10.0
FOV_MAX = 120.0


class CameraError(ValueError):
    pass


class BehindCameraError(ValueError):
    pass


@dataclass(frozen=True)
class Camera:
    eye: tuple[float, float, float]
    target: tuple[float, float, float]
    up: tuple[float, float, float] = (0.0, 1.0, 0.0)
    fov_deg: float = 50.0
    width: int = 800
    height: int = 600

    def validate(self) -> None:
        if not (FOV_MIN < self.fov_deg < FOV_MAX):
            raise CameraError(
                f"fov must be strictly between {FOV_MIN} and {FOV_MAX} degrees")
        if self.width < 1 or self.height < 1:
            raise CameraError("image size must be positive")
        f = np.subtract(self.target, self.eye)
        nf = np.linalg.norm(f)
        if nf < 1e-12:
            raise CameraError("eye and target coincide")
        u = np.asarray(self.up, dtype=float)
        nu = np.linalg.norm(u)
        if nu < 1e-12:
            raise CameraError("up vector is zero")
        if np.linalg.norm(np.cross(f / nf, u / nu)) < 1e-9:
            raise CameraError("up vector is parallel to the view direction")

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        f = np.subtract(self.target, self.eye)
        f = f / np.linalg.norm(f)
        r = np.cross(f, np.asarray(self.up, dtype=float))
        r = r / np.linalg.norm(r)
        u = np.cross(r, f)
        return f, r, u

    def focal(self) -> float:
        return (self.height / 2.0) / math.tan(math.radians(self.fov_deg) / 2.0)

    def to_dict(self) -> dict:
        return {
            "eye": list(self.eye),
            "target": list(self.target),
            "up": list(self.up),
            "fov_deg": self.fov_deg,
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Camera":
        cam = cls(
            eye=tuple(float(v) for v in d["eye"]),
            target=tuple(float(v) for v in d["target"]),
            up=tuple(float(v) for v in d.get("up", (0.0, 1.0, 0.0))),
            fov_deg=float(d.get("fov_deg", 50.0)),
            width=int(d.get("width", 800)),
            height=int(d.get("height", 600)),
        )
        cam.validate()
        return cam


def project(camera: Camera, point) -> tuple[float, float]:
    """World point to pixel coordinates, y growing downward."""
    f, r, u = camera.basis()
    d = np.subtract(point, camera.eye)
    z = float(np.dot(f, d))
    if z <= 1e-9:
        raise BehindCameraError(f"point {tuple(point)} is behind the camera")
    fx = camera.focal()
    px = camera.width / 2.0 + fx * float(np.dot(r, d)) / z
    py = camera.height / 2.0 - fx * float(np.dot(u, d)) / z
    return px, py


def project_many(camera: Camera, points: np.ndarray) -> np.ndarray:
    f, r, u = camera.basis()
    d = np.asarray(points, dtype=float) - np.asarray(camera.eye, dtype=float)
    z = d @ f
    if np.any(z <= 1e-9):
        raise BehindCameraError("a point is behind the camera")
    fx = camera.focal()
    px = camera.width / 2.0 + fx * (d @ r) / z
    py = camera.height / 2.0 - fx * (d @ u) / z
    return np.column_stack([px, py])


def vanishing_point(camera: Camera, direction) -> tuple[float, float] | None:
    """Image point where lines of the given world direction converge.

    None when the direction is parallel to the image plane (the vanishing
    point is at infinity).
    """
    f, r, u = camera.basis()
    d = np.asarray(direction, dtype=float)
    zd = float(np.dot(f, d))
    if abs(zd) < 1e-9:
        return None
    fx = camera.focal()
    px = camera.width / 2.0 + fx * float(np.dot(r, d)) / zd
    py = camera.height / 2.0 - fx * float(np.dot(u, d)) / zd
    return px, py


def axis_vanishing_points(camera: Camera) -> list[tuple[float, float] | None]:
    out = []
    for ax in range(3):
        d = [0.0, 0.0, 0.0]
        d[ax] = 1.0
        out.append(vanishing_point(camera, d))
    return out


# ---------------------------------------------------------------------------
# host faces


@dataclass(frozen=True)
class Face:
    """Axis-aligned rectangle at a fixed coordinate along its normal axis."""

    axis: int
    coord: float
    u_axis: int
    v_axis: int
    u_lo: float
    u_hi: float
    v_lo: float
    v_hi: float

    def to3d(self, u: float, v: float) -> tuple[float, float, float]:
        p = [0.0, 0.0, 0.0]
        p[self.axis] = self.coord
        p[self.u_axis] = self.u_lo + u * (self.u_hi - self.u_lo)
        p[self.v_axis] = self.v_lo + v * (self.v_hi - self.v_lo)
        return tuple(p)

    def corners(self) -> list[tuple[float, float, float]]:
        return [self.to3d(u, v) for u, v in ((0, 0), (1, 0), (1, 1), (0, 1))]

    def param_of(self, axis: int, world: float) -> float:
        if axis == self.u_axis:
            return (world - self.u_lo) / (self.u_hi - self.u_lo)
        if axis == self.v_axis:
            return (world - self.v_lo) / (self.v_hi - self.v_lo)
        raise ValueError("axis does not lie in the face")


def face_of_box(intervals, axis: int, side: int) -> Face:
    u_axis, v_axis = [ax for ax in range(3) if ax != axis]
    return Face(
        axis=axis,
        coord=intervals[axis][side],
        u_axis=u_axis, v_axis=v_axis,
        u_lo=intervals[u_axis][0], u_hi=intervals[u_axis][1],
        v_lo=intervals[v_axis][0], v_hi=intervals[v_axis][1],
    )


# ---------------------------------------------------------------------------
# recipes


@dataclass(frozen=True)
class GuideLine:
    p0: tuple[float, float, float]
    p1: tuple[float, float, float]
    tier: str
    recipe: str
    role: str

    def to_dict(self) -> dict:
        return {
            "p0": list(self.p0), "p1": list(self.p1),
            "tier": self.tier, "recipe": self.recipe, "role": self.role,
        }


def _emit(
    face: Face, s_axis: int, mirror: bool, recipe: str,
    rows: list[tuple[float, float, float, float, str, str]],
) -> list[GuideLine]:
    """rows: (s0, t0, s1, t1, tier, role) in canonical recipe space."""
    swap = s_axis == face.v_axis
    if not swap and s_axis != face.u_axis:
        raise ValueError("anchored axis does not lie in the host face")
    out = []
    for s0, t0, s1, t1, tier, role in rows:
        if mirror:
            s0, s1 = 1.0 - s0, 1.0 - s1
        if swap:
            a0, b0, a1, b1 = t0, s0, t1, s1
        else:
            a0, b0, a1, b1 = s0, t0, s1, t1
        out.append(GuideLine(
            face.to3d(a0, b0), face.to3d(a1, b1), tier, recipe, role))
    return out


def construct_half(face: Face, s_axis: int, mirror: bool = False) -> list[GuideLine]:
    return _emit(face, s_axis, mirror, "Half", [
        (0, 0, 1, 1, TIER_NOVICE, "diag-ac"),
        (1, 0, 0, 1, TIER_NOVICE, "diag-bd"),
        (0.5, 0, 0.5, 1, TIER_APPRENTICE, "result"),
    ])


def construct_third(face: Face, s_axis: int, mirror: bool = False) -> list[GuideLine]:
    third = 1.0 / 3.0
    return _emit(face, s_axis, mirror, "Third", [
        (0, 0, 1, 1, TIER_NOVICE, "diag-ac"),
        (1, 0, 0, 1, TIER_NOVICE, "diag-bd"),
        (0, 0.5, 1, 0.5, TIER_NOVICE, "cross-midline"),
        (1, 1, 0, 0.5, TIER_NOVICE, "corner-to-edge-mid"),
        (third, 0, third, 1, TIER_APPRENTICE, "result"),
        (0, 2 * third, 1, 2 * third, TIER_NOVICE, "companion"),
    ])


def construct_quarter(face: Face, s_axis: int, mirror: bool = False) -> list[GuideLine]:
    return _emit(face, s_axis, mirror, "Quarter", [
        (0, 0, 1, 1, TIER_NOVICE, "diag-ac"),
        (1, 0, 0, 1, TIER_NOVICE, "diag-bd"),
        (0.5, 0, 0.5, 1, TIER_NOVICE, "half-line"),
        (0, 0, 0.5, 1, TIER_NOVICE, "sub-diag-a"),
        (0.5, 0, 0, 1, TIER_NOVICE, "sub-diag-b"),
        (0.25, 0, 0.25, 1, TIER_APPRENTICE, "result"),
    ])


def construct_extend_one(face: Face, s_axis: int, mirror: bool = False) -> list[GuideLine]:
    return _emit(face, s_axis, mirror, "ExtendOne", [
        (0, 0, 2, 0, TIER_MASTER, "ray-lo"),
        (0, 1, 2, 1, TIER_MASTER, "ray-hi"),
        (0, 0, 1, 1, TIER_NOVICE, "diag-ac"),
        (1, 0, 0, 1, TIER_NOVICE, "diag-bd"),
        (0, 0.5, 2, 0.5, TIER_APPRENTICE, "midline"),
        (0, 0, 2, 1, TIER_APPRENTICE, "reflection"),
        (2, 0, 2, 1, TIER_MASTER, "result"),
    ])


def construct_extend_half(face: Face, s_axis: int, mirror: bool = False) -> list[GuideLine]:
    return _emit(face, s_axis, mirror, "ExtendHalf", [
        (0, 0, 1.5, 0, TIER_MASTER, "ray-lo"),
        (0, 1, 1.5, 1, TIER_MASTER, "ray-hi"),
        (0, 0, 1, 1, TIER_NOVICE, "diag-ac"),
        (1, 0, 0, 1, TIER_NOVICE, "diag-bd"),
        (0, 0.5, 1.5, 0.5, TIER_APPRENTICE, "midline"),
        (0.5, 0, 0.5, 1, TIER_APPRENTICE, "half-line"),
        (0.5, 0, 1.5, 1, TIER_APPRENTICE, "reflection-a"),
        (0.5, 1, 1.5, 0, TIER_NOVICE, "reflection-b"),
        (1.5, 0, 1.5, 1, TIER_MASTER, "result"),
    ])


def construct_extend_two(face: Face, s_axis: int, mirror: bool = False) -> list[GuideLine]:
    return _emit(face, s_axis, mirror, "ExtendTwo", [
        (0, 0, 3, 0, TIER_MASTER, "ray-lo"),
        (0, 1, 3, 1, TIER_MASTER, "ray-hi"),
        (0, 0, 1, 1, TIER_NOVICE, "diag-ac"),
        (1, 0, 0, 1, TIER_NOVICE, "diag-bd"),
        (0, 0.5, 3, 0.5, TIER_APPRENTICE, "midline"),
        (0, 0, 2, 1, TIER_APPRENTICE, "reflection"),
        (2, 0, 2, 1, TIER_MASTER, "closing"),
        (1, 0, 2, 1, TIER_NOVICE, "second-diag-a"),
        (1, 1, 2, 0, TIER_NOVICE, "second-diag-b"),
        (1, 0, 3, 1, TIER_APPRENTICE, "reflection-2"),
        (3, 0, 3, 1, TIER_MASTER, "result"),
    ])


def construct_align(
    face: Face, s_axis: int, s_param: float, t_lo: float, t_hi: float,
) -> list[GuideLine]:
    """Single alignment ray at a fixed position along the guided axis.

    t bounds are parameters along the transverse face direction and may
    exceed [0, 1] so the ray reaches across to the child part.
    """
    return _emit(face, s_axis, False, "Align", [
        (s_param, t_lo, s_param, t_hi, TIER_APPRENTICE, "result"),
    ])


RECIPE_BUILDERS = {
    "Half": construct_half,
    "Third": construct_third,
    "Quarter": construct_quarter,
    "ExtendHalf": construct_extend_half,
    "ExtendOne": construct_extend_one,
    "ExtendTwo": construct_extend_two,
}

# features whose canonical recipe runs mirrored (anchor beyond or toward
# the high end of the parent axis)
MIRRORED_FEATURES = {
    "TwoThird", "ThreeQuarter", "ExtendHalfLo", "ExtendOneLo", "ExtendTwoLo",
}


def ellipse_guides(face: Face) -> list[GuideLine]:
    """Freehand-ellipse helpers on a cap face: midlines plus tangent dots."""
    lines = [
        GuideLine(face.to3d(0.5, 0), face.to3d(0.5, 1),
                  TIER_APPRENTICE, "EllipseGuides", "midline-u"),
        GuideLine(face.to3d(0, 0.5), face.to3d(1, 0.5),
                  TIER_APPRENTICE, "EllipseGuides", "midline-v"),
    ]
    for name, (u, v) in (
        ("tangent-s0", (0.0, 0.5)), ("tangent-s1", (1.0, 0.5)),
        ("tangent-t0", (0.5, 0.0)), ("tangent-t1", (0.5, 1.0)),
    ):
        p = face.to3d(u, v)
        lines.append(GuideLine(p, p, TIER_NOVICE, "EllipseGuides", name))
    return lines


def ellipse_polyline(
    center: tuple[float, float, float],
    axis_u: tuple[float, float, float],
    axis_v: tuple[float, float, float],
    samples: int = 64,
) -> list[tuple[float, float, float]]:
    """Closed 3D polyline approximating an ellipse from two radius vectors."""
    pts = []
    for k in range(samples + 1):
        ang = 2.0 * math.pi * k / samples
        c, s = math.cos(ang), math.sin(ang)
        pts.append(tuple(
            center[i] + c * axis_u[i] + s * axis_v[i] for i in range(3)))
    return pts
