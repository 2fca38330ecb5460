"""Segmented model documents, OBJ import, and engine configuration."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import docio, geom

MODEL_DOC_VERSION = 1


class ModelFormatError(ValueError):
    """Raised when a model file cannot be parsed.

    Carries ``line`` (1-based, OBJ input) or ``path`` (JSON documents)
    so callers can point at the offending spot.
    """

    def __init__(self, message: str, *, line: int | None = None, path: str | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line})"
        elif path:
            loc = f" (at {path})"
        super().__init__(message + loc)
        self.line = line
        self.path = path


class ModelValidationError(ValueError):
    """Raised when a parsed model violates a structural requirement."""

    def __init__(self, message: str, *, segment_id: int | None = None):
        if segment_id is not None:
            message = f"segment {segment_id}: {message}"
        super().__init__(message)
        self.segment_id = segment_id


@dataclass
class Segment:
    """One part of the model: a triangle soup plus optional contour polylines."""

    id: int
    name: str
    vertices: np.ndarray       # (n, 3) float64
    triangles: np.ndarray      # (m, 3) int32 indices into vertices
    contours: list[np.ndarray] = field(default_factory=list)

    def bbox(self) -> geom.Intervals:
        if len(self.vertices) == 0:
            raise ModelValidationError("has no vertices", segment_id=self.id)
        return geom.bbox_of_points(self.vertices)

    def copy(self) -> "Segment":
        return Segment(
            id=self.id,
            name=self.name,
            vertices=self.vertices.copy(),
            triangles=self.triangles.copy(),
            contours=[c.copy() for c in self.contours],
        )


@dataclass
class SegmentedModel:
    up_axis: int
    segments: list[Segment]

    def bbox(self) -> geom.Intervals:
        return geom.merge_bboxes([s.bbox() for s in self.segments])

    def bbox_diagonal(self) -> float:
        return geom.bbox_diagonal(self.bbox())

    def segment_by_id(self, sid: int) -> Segment:
        for s in self.segments:
            if s.id == sid:
                return s
        raise KeyError(f"no segment with id {sid}")


_RATIO_KINDS = (
    "Align", "Half", "Third", "Quarter",
    "ExtendHalf", "ExtendOne", "ExtendTwo",
)


@dataclass(frozen=True)
class EngineConfig:
    """Tunable knobs; defaults match the published behaviour."""

    prune_fraction: float = 0.10
    relation_distance_tol: float = 0.01
    relation_angle_tol: float = 1.0
    difficulty_weight: float = 0.05
    unguided_axis_penalty: float = 2.0
    eyeball_fraction: float = 0.002
    guide_merge_tol: float = 1e-4
    custom_residue_fraction: float = 0.15
    max_candidates_per_part: int = 400
    ratio_catalog: tuple[str, ...] = _RATIO_KINDS

    def validate(self) -> None:
        if not 0.0 < self.prune_fraction < 1.0:
            raise ValueError("prune_fraction must be in (0, 1)")
        if self.relation_distance_tol <= 0.0:
            raise ValueError("relation_distance_tol must be positive")
        if self.relation_angle_tol <= 0.0:
            raise ValueError("relation_angle_tol must be positive")
        if self.difficulty_weight < 0.0:
            raise ValueError("difficulty_weight must be non-negative")
        if self.unguided_axis_penalty <= 0.0:
            raise ValueError("unguided_axis_penalty must be positive")
        if not 0.0 < self.eyeball_fraction < 1.0:
            raise ValueError("eyeball_fraction must be in (0, 1)")
        if self.guide_merge_tol < 0.0:
            raise ValueError("guide_merge_tol must be non-negative")
        if not 0.0 < self.custom_residue_fraction < 1.0:
            raise ValueError("custom_residue_fraction must be in (0, 1)")
        if self.max_candidates_per_part < 1:
            raise ValueError("max_candidates_per_part must be >= 1")
        unknown = set(self.ratio_catalog) - set(_RATIO_KINDS)
        if unknown:
            raise ValueError(f"unknown ratio kinds: {sorted(unknown)}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["ratio_catalog"] = list(self.ratio_catalog)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EngineConfig":
        kwargs = dict(d)
        if "ratio_catalog" in kwargs:
            kwargs["ratio_catalog"] = tuple(kwargs["ratio_catalog"])
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def hash(self) -> str:
        return docio.content_hash(self.to_dict())


# ---------------------------------------------------------------------------
# document (JSON) form


def model_to_doc(model: SegmentedModel) -> dict:
    segs = []
    for s in model.segments:
        entry = {
            "id": s.id,
            "name": s.name,
            "vertices": [float(v) for v in s.vertices.reshape(-1)],
            "triangles": [int(t) for t in s.triangles.reshape(-1)],
        }
        if s.contours:
            entry["contours"] = [
                [float(v) for v in c.reshape(-1)] for c in s.contours
            ]
        segs.append(entry)
    return {
        "version": MODEL_DOC_VERSION,
        "up_axis": model.up_axis,
        "segments": segs,
    }


def model_from_doc(doc: dict) -> SegmentedModel:
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object", path="$")
    version = doc.get("version")
    if version != MODEL_DOC_VERSION:
        raise ModelFormatError(
            f"unsupported model document version {version!r}", path="$.version")
    up_axis = doc.get("up_axis", 1)
    if up_axis not in (0, 1, 2):
        raise ModelFormatError("up_axis must be 0, 1 or 2", path="$.up_axis")
    raw_segments = doc.get("segments")
    if not isinstance(raw_segments, list) or not raw_segments:
        raise ModelFormatError("segments must be a non-empty list", path="$.segments")
    segments = []
    for i, entry in enumerate(raw_segments):
        where = f"$.segments[{i}]"
        if not isinstance(entry, dict):
            raise ModelFormatError("segment must be an object", path=where)
        try:
            sid = int(entry["id"])
            name = str(entry.get("name", f"part{sid}"))
            flat_v = entry["vertices"]
            flat_t = entry["triangles"]
        except KeyError as exc:
            raise ModelFormatError(f"missing key {exc}", path=where) from None
        if len(flat_v) % 3 != 0:
            raise ModelFormatError("vertices length not a multiple of 3", path=where)
        if len(flat_t) % 3 != 0:
            raise ModelFormatError("triangles length not a multiple of 3", path=where)
        vertices = np.asarray(flat_v, dtype=np.float64).reshape(-1, 3)
        triangles = np.asarray(flat_t, dtype=np.int32).reshape(-1, 3)
        contours = []
        for j, flat_c in enumerate(entry.get("contours", [])):
            if len(flat_c) % 3 != 0:
                raise ModelFormatError(
                    "contour length not a multiple of 3", path=f"{where}.contours[{j}]")
            contours.append(np.asarray(flat_c, dtype=np.float64).reshape(-1, 3))
        segments.append(Segment(sid, name, vertices, triangles, contours))
    model = SegmentedModel(up_axis=int(up_axis), segments=segments)
    validate_model(model)
    return model


def validate_model(model: SegmentedModel) -> None:
    seen_ids: set[int] = set()
    for s in model.segments:
        if s.id in seen_ids:
            raise ModelValidationError("duplicate id", segment_id=s.id)
        seen_ids.add(s.id)
        if len(s.vertices) == 0:
            raise ModelValidationError("has no vertices", segment_id=s.id)
        if len(s.triangles) == 0:
            raise ModelValidationError("has no triangles", segment_id=s.id)
        if not np.isfinite(s.vertices).all():
            raise ModelValidationError("non-finite vertex coordinate", segment_id=s.id)
        tmin = int(s.triangles.min())
        tmax = int(s.triangles.max())
        if tmin < 0 or tmax >= len(s.vertices):
            raise ModelValidationError(
                f"triangle index {tmax if tmax >= len(s.vertices) else tmin} out of range",
                segment_id=s.id)


# ---------------------------------------------------------------------------
# OBJ import: one part per g/o group, faces fan-triangulated


def model_from_obj(text: str, up_axis: int = 1) -> SegmentedModel:
    all_vertices: list[tuple[float, float, float]] = []
    groups: dict[str, list[tuple[int, int, int]]] = {}
    order: list[str] = []
    current = "default"

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        tag = fields[0]
        if tag == "v":
            if len(fields) < 4:
                raise ModelFormatError("vertex needs 3 coordinates", line=lineno)
            try:
                all_vertices.append(tuple(float(x) for x in fields[1:4]))
            except ValueError:
                raise ModelFormatError("bad vertex coordinate", line=lineno) from None
        elif tag in ("g", "o"):
            current = " ".join(fields[1:]) or "default"
        elif tag == "f":
            if len(fields) < 4:
                raise ModelFormatError("face needs at least 3 vertices", line=lineno)
            idx = []
            for f in fields[1:]:
                part = f.split("/")[0]
                try:
                    k = int(part)
                except ValueError:
                    raise ModelFormatError("bad face index", line=lineno) from None
                if k < 0:
                    k = len(all_vertices) + k
                else:
                    k = k - 1
                if k < 0 or k >= len(all_vertices):
                    raise ModelFormatError(
                        f"face index {part} out of range", line=lineno)
                idx.append(k)
            tris = groups.get(current)
            if tris is None:
                tris = groups[current] = []
                order.append(current)
            for k in range(1, len(idx) - 1):
                tris.append((idx[0], idx[k], idx[k + 1]))
        # v-normals, textures, materials are irrelevant here

    if not order:
        raise ModelFormatError("no faces found", line=None)

    verts = np.asarray(all_vertices, dtype=np.float64)
    segments = []
    for sid, name in enumerate(order):
        tris = np.asarray(groups[name], dtype=np.int64)
        used = np.unique(tris)
        remap = {int(old): new for new, old in enumerate(used)}
        local_tris = np.vectorize(remap.__getitem__)(tris).astype(np.int32)
        segments.append(Segment(
            id=sid, name=name,
            vertices=verts[used].copy(),
            triangles=local_tris,
        ))
    model = SegmentedModel(up_axis=up_axis, segments=segments)
    validate_model(model)
    return model


# ---------------------------------------------------------------------------
# normalization: deduplicate vertices, drop degenerate triangles


def _dedup_key(p: np.ndarray) -> tuple[float, float, float]:
    return (docio.round9(float(p[0])), docio.round9(float(p[1])), docio.round9(float(p[2])))


def normalize_segment(seg: Segment) -> Segment:
    keys: dict[tuple[float, float, float], int] = {}
    new_verts: list[tuple[float, float, float]] = []
    remap = np.empty(len(seg.vertices), dtype=np.int64)
    for i, p in enumerate(seg.vertices):
        k = _dedup_key(p)
        j = keys.get(k)
        if j is None:
            j = len(new_verts)
            keys[k] = j
            new_verts.append(k)
        remap[i] = j
    tris = remap[seg.triangles.astype(np.int64)]
    keep = (
        (tris[:, 0] != tris[:, 1])
        & (tris[:, 1] != tris[:, 2])
        & (tris[:, 0] != tris[:, 2])
    )
    tris = tris[keep]
    if len(tris) == 0:
        raise ModelValidationError(
            "all triangles degenerate after dedup", segment_id=seg.id)
    contours = [
        np.asarray([_dedup_key(p) for p in c], dtype=np.float64)
        for c in seg.contours
    ]
    return Segment(
        id=seg.id, name=seg.name,
        vertices=np.asarray(new_verts, dtype=np.float64),
        triangles=tris.astype(np.int32),
        contours=contours,
    )


def normalize_model(model: SegmentedModel) -> SegmentedModel:
    """Deduplicate vertices per segment. Idempotent by construction."""
    return SegmentedModel(
        up_axis=model.up_axis,
        segments=[normalize_segment(s) for s in model.segments],
    )


def load_model(path: str, up_axis: int = 1) -> SegmentedModel:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".obj"):
        return model_from_obj(text, up_axis=up_axis)
    return model_from_doc(docio.loads(text))


def save_model(model: SegmentedModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(docio.canonical_dumps(model_to_doc(model)))


def make_box_segment(
    sid: int, name: str, intervals: geom.Intervals,
) -> Segment:
    """Axis-aligned box mesh (12 triangles), handy for fixtures."""
    corners = geom.box_corners(intervals)
    v = np.asarray(corners, dtype=np.float64)
    # corner index: x*4 + y*2 + z with each in {0, 1}
    quads = [
        (0, 1, 3, 2), (4, 6, 7, 5),   # x faces
        (0, 4, 5, 1), (2, 3, 7, 6),   # y faces
        (0, 2, 6, 4), (1, 5, 7, 3),   # z faces
    ]
    tris = []
    for a, b, c, d in quads:
        tris.append((a, b, c))
        tris.append((a, c, d))
    return Segment(
        id=sid, name=name,
        vertices=v,
        triangles=np.asarray(tris, dtype=np.int32),
    )


def make_plane_segment(
    sid: int, name: str, axis: int, coord: float,
    u_iv: tuple[float, float], v_iv: tuple[float, float],
) -> Segment:
    """Flat rectangle (two triangles) perpendicular to a world axis."""
    t1, t2 = [ax for ax in range(3) if ax != axis]
    verts = []
    for u, v in ((0, 0), (1, 0), (1, 1), (0, 1)):
        p = [0.0, 0.0, 0.0]
        p[axis] = coord
        p[t1] = u_iv[u]
        p[t2] = v_iv[v]
        verts.append(tuple(p))
    return Segment(
        id=sid, name=name,
        vertices=np.asarray(verts, dtype=np.float64),
        triangles=np.asarray([(0, 1, 2), (0, 2, 3)], dtype=np.int32),
    )


def make_cylinder_segment(
    sid: int, name: str, axis: int,
    c1: float, c2: float, r: float, alo: float, ahi: float,
    sides: int = 64,
) -> Segment:
    """Capped cylinder mesh along a world axis."""
    t1, t2 = [ax for ax in range(3) if ax != axis]
    ring = []
    for k in range(sides):
        ang = 2.0 * math.pi * k / sides
        ring.append((c1 + r * math.cos(ang), c2 + r * math.sin(ang)))
    verts = []
    for a in (alo, ahi):
        for u, w in ring:
            p = [0.0, 0.0, 0.0]
            p[axis] = a
            p[t1] = u
            p[t2] = w
            verts.append(tuple(p))
    lo_center = [0.0, 0.0, 0.0]
    lo_center[axis] = alo
    lo_center[t1] = c1
    lo_center[t2] = c2
    hi_center = list(lo_center)
    hi_center[axis] = ahi
    verts.append(tuple(lo_center))
    verts.append(tuple(hi_center))
    nlo, nhi = 2 * sides, 2 * sides + 1
    tris = []
    for k in range(sides):
        k2 = (k + 1) % sides
        tris.append((k, k2, sides + k2))
        tris.append((k, sides + k2, sides + k))
        tris.append((nlo, k2, k))
        tris.append((nhi, sides + k, sides + k2))
    return Segment(
        id=sid, name=name,
        vertices=np.asarray(verts, dtype=np.float64),
        triangles=np.asarray(tris, dtype=np.int32),
    )


def make_frustum_segment(
    sid: int, name: str, axis: int,
    bottom: tuple[tuple[float, float], tuple[float, float]],
    top: tuple[tuple[float, float], tuple[float, float]],
    alo: float, ahi: float,
) -> Segment:
    """Rectangular frustum mesh: two rectangles joined by trapezoids."""
    t1, t2 = [ax for ax in range(3) if ax != axis]

    def rect_corners(rect, a):
        out = []
        for u, w in ((0, 0), (1, 0), (1, 1), (0, 1)):
            p = [0.0, 0.0, 0.0]
            p[axis] = a
            p[t1] = rect[0][u]
            p[t2] = rect[1][w]
            out.append(tuple(p))
        return out

    verts = rect_corners(bottom, alo) + rect_corners(top, ahi)
    tris = [(0, 2, 1), (0, 3, 2), (4, 5, 6), (4, 6, 7)]
    for k in range(4):
        k2 = (k + 1) % 4
        tris.append((k, k2, 4 + k2))
        tris.append((k, 4 + k2, 4 + k))
    return Segment(
        id=sid, name=name,
        vertices=np.asarray(verts, dtype=np.float64),
        triangles=np.asarray(tris, dtype=np.int32),
    )
