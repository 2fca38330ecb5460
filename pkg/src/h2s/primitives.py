"""Fit axis-aligned primitives to model segments.

Each segment gets the simplest primitive whose surface stays close to the
segment's triangles. Closeness is measured on a sample set of vertices,
edge midpoints and triangle centroids against the distance to the
primitive's solid surface; the residue is the RMS of those distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geom
from .model_io import EngineConfig, Segment, SegmentedModel

Rect = tuple[tuple[float, float], tuple[float, float]]

KIND_PLANE = "Plane"
KIND_CYLINDER = "Cylinder"
KIND_CUBOID = "Cuboid"
KIND_PYRAMID = "TruncatedPyramid"
KIND_CUSTOM = "Custom"

# tie-break preference, simplest first
_COMPLEXITY = {KIND_PLANE: 0, KIND_CYLINDER: 1, KIND_CUBOID: 2, KIND_PYRAMID: 3}

TIE_TOLERANCE_FRACTION = 1e-6


@dataclass(frozen=True)
class Primitive:
    """A fitted primitive, reduced to axis-aligned intervals plus extras.

    intervals is always the tight bounding box of the solid. axis is the
    normal axis for planes, the symmetry axis for cylinders and pyramids,
    None for cuboids and customs. Pyramids additionally carry bottom/top
    rectangles in the two transverse axes (ascending axis order).
    """

    part_id: int
    kind: str
    intervals: geom.Intervals
    axis: int | None = None
    bottom: Rect | None = None
    top: Rect | None = None
    residue: float = 0.0

    def transverse_axes(self) -> tuple[int, int]:
        if self.axis is None:
            raise ValueError("primitive has no symmetry axis")
        t = [ax for ax in range(3) if ax != self.axis]
        return t[0], t[1]

    def to_dict(self) -> dict:
        d = {
            "part_id": self.part_id,
            "kind": self.kind,
            "intervals": [list(iv) for iv in self.intervals],
            "residue": self.residue,
        }
        if self.axis is not None:
            d["axis"] = self.axis
        if self.bottom is not None:
            d["bottom"] = [list(iv) for iv in self.bottom]
        if self.top is not None:
            d["top"] = [list(iv) for iv in self.top]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Primitive":
        return cls(
            part_id=int(d["part_id"]),
            kind=str(d["kind"]),
            intervals=tuple(tuple(iv) for iv in d["intervals"]),  # type: ignore[arg-type]
            axis=d.get("axis"),
            bottom=tuple(tuple(iv) for iv in d["bottom"]) if "bottom" in d else None,  # type: ignore[arg-type]
            top=tuple(tuple(iv) for iv in d["top"]) if "top" in d else None,  # type: ignore[arg-type]
            residue=float(d.get("residue", 0.0)),
        )


def sample_points(seg: Segment) -> np.ndarray:
    """Vertices, edge midpoints and centroids of every triangle.

    Vertex-only sampling is not enough: a box's corners lie on a common
    cylinder, so the curved fits need points from face interiors too.
    """
    v = seg.vertices
    t = seg.triangles
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    mids = np.concatenate([(a + b) * 0.5, (b + c) * 0.5, (a + c) * 0.5])
    centroids = (a + b + c) / 3.0
    return np.concatenate([v, mids, centroids])


def _rms(dists: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(dists))))


def _box_residue(samples: np.ndarray, intervals: geom.Intervals) -> float:
    d = np.array([geom.box_surface_distance(p, intervals) for p in samples])
    return _rms(d)


def fit_cuboid(seg: Segment, samples: np.ndarray) -> Primitive:
    box = geom.bbox_of_points(samples)
    return Primitive(seg.id, KIND_CUBOID, box, residue=_box_residue(samples, box))


def fit_plane(seg: Segment, samples: np.ndarray) -> Primitive:
    box = geom.bbox_of_points(samples)
    sizes = geom.lengths(box)
    best = None
    for axis in range(3):
        coord = float(np.mean(samples[:, axis]))
        iv = list(box)
        iv[axis] = (coord, coord)
        flat: geom.Intervals = tuple(iv)  # type: ignore[assignment]
        res = _box_residue(samples, flat)
        if best is None or res < best.residue or (
            res == best.residue and sizes[axis] < sizes[best.axis]
        ):
            best = Primitive(seg.id, KIND_PLANE, flat, axis=axis, residue=res)
    assert best is not None
    return best


def _kasa_circle(u: np.ndarray, w: np.ndarray) -> tuple[float, float, float] | None:
    """Algebraic least-squares circle through 2D points; None when singular."""
    A = np.column_stack([u, w, np.ones_like(u)])
    rhs = u * u + w * w
    try:
        sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    except np.linalg.LinAlgError:
        return None
    cu = 0.5 * sol[0]
    cw = 0.5 * sol[1]
    r2 = sol[2] + cu * cu + cw * cw
    if not np.isfinite(r2) or r2 <= 0.0:
        return None
    return float(cu), float(cw), float(math.sqrt(r2))


def fit_cylinder(seg: Segment, samples: np.ndarray) -> Primitive | None:
    best: Primitive | None = None
    for axis in range(3):
        t1, t2 = [ax for ax in range(3) if ax != axis]
        alo = float(samples[:, axis].min())
        ahi = float(samples[:, axis].max())
        u = samples[:, t1]
        w = samples[:, t2]
        # seed circle from the transverse bounding box
        cu0 = 0.5 * (float(u.min()) + float(u.max()))
        cw0 = 0.5 * (float(w.min()) + float(w.max()))
        r0 = 0.5 * (0.5 * (float(u.max()) - float(u.min()))
                    + 0.5 * (float(w.max()) - float(w.min())))
        if r0 <= 0.0:
            continue
        circles = [(cu0, cw0, r0)]
        # refine on the outer radial shell; interior cap samples would
        # otherwise drag the algebraic fit inward
        rho = np.hypot(u - cu0, w - cw0)
        shell = rho >= 0.8 * r0
        if int(shell.sum()) >= 8:
            fit = _kasa_circle(u[shell], w[shell])
            if fit is not None:
                circles.append(fit)
        for c1, c2, r in circles:
            d = np.array([
                geom.capped_cylinder_distance(p, axis, c1, c2, r, alo, ahi)
                for p in samples
            ])
            res = _rms(d)
            iv = [None, None, None]
            iv[axis] = (alo, ahi)
            iv[t1] = (c1 - r, c1 + r)
            iv[t2] = (c2 - r, c2 + r)
            cand = Primitive(
                seg.id, KIND_CYLINDER, tuple(iv),  # type: ignore[arg-type]
                axis=axis, residue=res)
            if best is None or res < best.residue:
                best = cand
    return best


def _slab_rect(samples: np.ndarray, axis: int, lo: float, hi: float) -> Rect | None:
    mask = (samples[:, axis] >= lo) & (samples[:, axis] <= hi)
    if not mask.any():
        return None
    t1, t2 = [ax for ax in range(3) if ax != axis]
    sel = samples[mask]
    return (
        (float(sel[:, t1].min()), float(sel[:, t1].max())),
        (float(sel[:, t2].min()), float(sel[:, t2].max())),
    )


def fit_pyramid(seg: Segment, samples: np.ndarray) -> Primitive | None:
    """Rectangular frustum: slab bounding rectangles at both ends."""
    best: Primitive | None = None
    for axis in range(3):
        alo = float(samples[:, axis].min())
        ahi = float(samples[:, axis].max())
        h = ahi - alo
        if h <= 0.0:
            continue
        bottom = _slab_rect(samples, axis, alo, alo + 0.1 * h)
        top = _slab_rect(samples, axis, ahi - 0.1 * h, ahi)
        if bottom is None or top is None:
            continue
        d = np.array([
            geom.frustum_distance(p, axis, bottom, top, alo, ahi)
            for p in samples
        ])
        res = _rms(d)
        t1, t2 = [ax for ax in range(3) if ax != axis]
        iv = [None, None, None]
        iv[axis] = (alo, ahi)
        iv[t1] = (min(bottom[0][0], top[0][0]), max(bottom[0][1], top[0][1]))
        iv[t2] = (min(bottom[1][0], top[1][0]), max(bottom[1][1], top[1][1]))
        cand = Primitive(
            seg.id, KIND_PYRAMID, tuple(iv),  # type: ignore[arg-type]
            axis=axis, bottom=bottom, top=top, residue=res)
        if best is None or res < best.residue:
            best = cand
    return best


def fit_primitive(seg: Segment, config: EngineConfig | None = None) -> Primitive:
    config = config or EngineConfig()
    samples = sample_points(seg)
    seg_diag = geom.bbox_diagonal(geom.bbox_of_points(samples))
    tie_tol = TIE_TOLERANCE_FRACTION * max(seg_diag, 1e-30)

    fits = [fit_cuboid(seg, samples), fit_plane(seg, samples)]
    cyl = fit_cylinder(seg, samples)
    if cyl is not None:
        fits.append(cyl)
    pyr = fit_pyramid(seg, samples)
    if pyr is not None:
        fits.append(pyr)

    # lowest residue wins; within tie_tol of it the simpler kind wins
    fits.sort(key=lambda p: (p.residue, _COMPLEXITY[p.kind]))
    floor = fits[0].residue
    best = fits[0]
    for cand in fits[1:]:
        if cand.residue - floor <= tie_tol and (
            _COMPLEXITY[cand.kind] < _COMPLEXITY[best.kind]
        ):
            best = cand

    if best.residue > config.custom_residue_fraction * seg_diag:
        return Primitive(
            seg.id, KIND_CUSTOM, geom.bbox_of_points(samples),
            residue=best.residue)
    return best


def fit_all(model: SegmentedModel, config: EngineConfig | None = None) -> dict[int, Primitive]:
    return {seg.id: fit_primitive(seg, config) for seg in model.segments}
