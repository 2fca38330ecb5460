"""Compile a solved selection into an ordered, ability-adapted step sequence.

The selection fixes which candidate each part uses and a partial drawing
order; everything view-dependent happens here: tie-breaking by eye
distance, occlusion culling, the eyeball fallback for fiddly guides,
ability filtering, guide lifetime tracking with erase steps, and the
per-part contour pass. Compilation is deterministic for fixed inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geom
from .candidates import Candidate, GuideSpec
from .docio import content_hash, round9, round_floats
from .model_io import EngineConfig, SegmentedModel
from .projective import (
    MIRRORED_FEATURES,
    TIER_APPRENTICE,
    TIER_MASTER,
    TIER_NOVICE,
    Camera,
    Face,
    GuideLine,
    RECIPE_BUILDERS,
    axis_vanishing_points,
    construct_align,
    ellipse_guides,
    ellipse_polyline,
    face_of_box,
    project,
)
from .selection import FEATURE_RECIPE

ABILITY_NOVICE = "Novice"
ABILITY_APPRENTICE = "Apprentice"
ABILITY_MASTER = "Master"
ABILITIES = (ABILITY_NOVICE, ABILITY_APPRENTICE, ABILITY_MASTER)

# ability -> set of line tiers still shown
_TIER_VISIBILITY = {
    ABILITY_NOVICE: {TIER_NOVICE, TIER_APPRENTICE, TIER_MASTER},
    ABILITY_APPRENTICE: {TIER_APPRENTICE, TIER_MASTER},
    ABILITY_MASTER: {TIER_MASTER},
}

STEP_VANISHING = "DrawVanishingSetup"
STEP_GUIDE = "DrawGuide"
STEP_EDGE = "DrawPrimitiveEdge"
STEP_ELLIPSE = "DrawEllipse"
STEP_ERASE = "EraseGuides"
STEP_CONTOURS = "DrawContours"
STEP_EYEBALL = "EyeballPrimitive"

OCCLUSION_EPS = 1e-9
CONTOUR_SAMPLES = 16        # subdivisions per polyline leg during clipping
CREASE_COS = math.cos(math.radians(40.0))

_RECIPE_TEXT = {
    "Half": "halve",
    "Third": "mark a third of",
    "Quarter": "mark a quarter of",
    "ExtendHalf": "extend by half-width",
    "ExtendOne": "extend by its own width",
    "ExtendTwo": "extend by twice its width",
}


class TutorialError(ValueError):
    pass


@dataclass
class TutorialGuide:
    """One merged guide stroke with its lifetime over the step list."""

    id: int
    kind: str                       # recipe name
    role: str
    p0: tuple[float, float, float]
    p1: tuple[float, float, float]
    host_part: int
    ability_min: str
    recipe_step: int
    first_step: int = -1
    last_step: int = -1

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "role": self.role,
            "p0": list(self.p0),
            "p1": list(self.p1),
            "host_part": self.host_part,
            "ability_min": self.ability_min,
            "recipe_step": self.recipe_step,
            "first_step": self.first_step,
            "last_step": self.last_step,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TutorialGuide":
        return cls(
            id=int(d["id"]),
            kind=str(d["kind"]),
            role=str(d["role"]),
            p0=tuple(float(v) for v in d["p0"]),
            p1=tuple(float(v) for v in d["p1"]),
            host_part=int(d["host_part"]),
            ability_min=str(d["ability_min"]),
            recipe_step=int(d["recipe_step"]),
            first_step=int(d["first_step"]),
            last_step=int(d["last_step"]),
        )


@dataclass
class TutorialStep:
    index: int
    kind: str
    part_id: int | None
    payload: dict
    instruction_text: str
    inset_hint: int | None = None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "part_id": self.part_id,
            "payload": self.payload,
            "instruction_text": self.instruction_text,
            "inset_hint": self.inset_hint,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TutorialStep":
        return cls(
            index=int(d["index"]),
            kind=str(d["kind"]),
            part_id=None if d.get("part_id") is None else int(d["part_id"]),
            payload=dict(d["payload"]),
            instruction_text=str(d["instruction_text"]),
            inset_hint=(
                None if d.get("inset_hint") is None else int(d["inset_hint"])),
        )


@dataclass
class Tutorial:
    steps: list[TutorialStep]
    camera: Camera
    ability: str
    vanishing_points: list[tuple[float, float] | None]
    guides: list[TutorialGuide]
    skipped_parts: list[int]
    part_order: list[int]
    chosen: dict[int, int] = field(default_factory=dict)   # part -> candidate
    config_hash: str = ""

    def guide_by_id(self, gid: int) -> TutorialGuide:
        return self.guides[gid]


def normalize_ability(text: str) -> str:
    for a in ABILITIES:
        if text.lower() == a.lower():
            return a
    raise TutorialError(
        f"unknown ability {text!r}; expected one of {[a.lower() for a in ABILITIES]}")


# ---------------------------------------------------------------------------
# ordering and culling


def break_ties(
    parts: list[int],
    edges: list[tuple[int, int]],
    chosen: dict[int, Candidate],
    camera: Camera,
) -> list[int]:
    """Linearize the selection's partial order, nearest-to-eye first."""
    indeg = {p: 0 for p in parts}
    adj: dict[int, list[int]] = {p: [] for p in parts}
    for a, b in edges:
        adj[a].append(b)
        indeg[b] += 1

    def eye_dist(p: int) -> float:
        c = geom.center(chosen[p].geometry)
        return math.dist(camera.eye, c)

    order: list[int] = []
    ready = [p for p, d in indeg.items() if d == 0]
    while ready:
        ready.sort(key=lambda p: (eye_dist(p), p))
        p = ready.pop(0)
        order.append(p)
        for q in adj[p]:
            indeg[q] -= 1
            if indeg[q] == 0:
                ready.append(q)
    if len(order) != len(parts):
        raise TutorialError("selection order contains a cycle")
    return order


def _sample_points(intervals: geom.Intervals) -> list[tuple[float, float, float]]:
    # 8 corners + 6 face centers; degenerate axes just repeat points
    return geom.box_corners(intervals) + geom.face_centers(intervals)


def _point_occluded(
    eye: tuple[float, float, float],
    p: tuple[float, float, float],
    boxes: list[geom.Intervals],
) -> bool:
    return any(geom.segment_blocked_by_box(eye, p, b) for b in boxes)


def cull_occluded(
    chosen: dict[int, Candidate], camera: Camera,
) -> list[int]:
    """Parts hidden behind other primitives that anchor nothing visible."""
    parts = sorted(chosen)
    hidden = set()
    for p in parts:
        others = [
            chosen[q].geometry for q in parts
            if q != p and geom.volume(chosen[q].geometry) > 0.0
        ]
        samples = _sample_points(chosen[p].geometry)
        if all(_point_occluded(camera.eye, s, others) for s in samples):
            hidden.add(p)

    visible = [p for p in parts if p not in hidden]
    by_id = {c.id: c for c in chosen.values()}
    keep = set(visible)
    stack = list(visible)
    while stack:
        p = stack.pop()
        for pcid in chosen[p].parent_candidates:
            q = by_id[pcid].part_id
            if q not in keep:
                keep.add(q)
                stack.append(q)
    return sorted(set(parts) - keep)


def projected_face_area(camera: Camera, f: Face) -> float | None:
    """Area in px^2 of the projected host face, None when it leaves the view."""
    pts = []
    for corner in f.corners():
        try:
            pts.append(project(camera, corner))
        except ValueError:
            return None
    return geom.polygon_area_2d(pts)


def eyeball_parts(
    chosen: dict[int, Candidate], camera: Camera, config: EngineConfig,
) -> list[int]:
    """Parts whose guides would be too small on paper to bother with."""
    image_area = float(camera.width * camera.height)
    out = []
    for p in sorted(chosen):
        cand = chosen[p]
        k = cand.nominal_guide_total()
        if k == 0:
            continue
        areas = []
        for spec in cand.all_specs():
            host = chosen[spec.parent]
            f = face_of_box(host.geometry, spec.host_axis, spec.host_side)
            a = projected_face_area(camera, f)
            areas.append(-1.0 if a is None else a)
        a_p = min(areas)
        # a host face behind the camera cannot be constructed on at all
        if a_p < 0.0 or a_p / k < config.eyeball_fraction * image_area:
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# guide construction


@dataclass
class _RecipeInstance:
    part_id: int
    recipe: str
    parent: int
    lines: list[GuideLine]
    spec: GuideSpec | None = None


def _spec_entries(cand: Candidate) -> list[tuple[int, str, GuideSpec]]:
    """(guided axis, end, spec) triples in canonical slot order."""
    out: list[tuple[int, str, GuideSpec]] = []
    for ax in range(3):
        plan = cand.axes[ax]
        if plan is None:
            continue
        for end, spec in (("lo", plan.lo), ("hi", plan.hi)):
            if spec is not None:
                out.append((ax, end, spec))
    if cand.bottom is not None:
        t_axes = [ax for ax in range(3) if ax != cand.prim_axis]
        for plans in (cand.bottom_plans, cand.top_plans):
            if plans is None:
                continue
            for k, plan in enumerate(plans):
                if plan is None:
                    continue
                for end, spec in (("lo", plan.lo), ("hi", plan.hi)):
                    if spec is not None:
                        out.append((t_axes[k], end, spec))
    return out


def _reach(f: Face, t_axis: int, child: Candidate) -> tuple[float, float]:
    """Param range along a face axis wide enough to reach the child."""
    lo, hi = child.geometry[t_axis]
    pa, pb = f.param_of(t_axis, lo), f.param_of(t_axis, hi)
    return min(0.0, pa, pb), max(1.0, pa, pb)


def _align_lines(f: Face, axis: int, spec: GuideSpec, child: Candidate):
    if axis in (f.u_axis, f.v_axis):
        # line at the aligned coordinate, carried across to the child
        s_param = f.param_of(axis, spec.value)
        t_axis = f.v_axis if axis == f.u_axis else f.u_axis
        t_lo, t_hi = _reach(f, t_axis, child)
        return construct_align(f, axis, s_param, t_lo, t_hi)
    # face normal is the guided axis: the face itself is the aligned
    # plane, so run a carrier line through the child's footprint
    c = geom.center(child.geometry)
    s_param = f.param_of(f.u_axis, c[f.u_axis])
    t_lo, t_hi = _reach(f, f.v_axis, child)
    return construct_align(f, f.u_axis, s_param, t_lo, t_hi)


def recipe_instances(
    cand: Candidate, chosen: dict[int, Candidate],
) -> list[_RecipeInstance]:
    """All guide constructions for one candidate, in canonical order."""
    out: list[_RecipeInstance] = []
    for axis, _end, spec in _spec_entries(cand):
        host = chosen[spec.parent]
        f = face_of_box(host.geometry, spec.host_axis, spec.host_side)
        recipe = FEATURE_RECIPE[spec.feature]
        if recipe == "Align":
            lines = _align_lines(f, axis, spec, cand)
        else:
            mirror = spec.feature in MIRRORED_FEATURES
            lines = RECIPE_BUILDERS[recipe](f, axis, mirror)
        out.append(_RecipeInstance(
            part_id=cand.part_id, recipe=recipe,
            parent=spec.parent, lines=lines, spec=spec))
    return out


def visible_caps(cand: Candidate, camera: Camera) -> list[int]:
    """Front-facing cap sides (0/1) of a cylinder candidate."""
    if cand.kind != "Cylinder" or cand.prim_axis is None:
        return []
    w = cand.prim_axis
    sides = []
    for side in range(2):
        coord = cand.geometry[w][side]
        outward = -1.0 if side == 0 else 1.0
        if (camera.eye[w] - coord) * outward > OCCLUSION_EPS:
            sides.append(side)
    return sides


def cap_face(cand: Candidate, side: int) -> Face:
    return face_of_box(cand.geometry, cand.prim_axis, side)


def cap_ellipse(cand: Candidate, side: int, samples: int = 64) -> list:
    """Closed polyline of the inscribed cap circle in 3D."""
    w = cand.prim_axis
    t_axes = [ax for ax in range(3) if ax != w]
    r = min(geom.interval_length(cand.geometry[ax]) for ax in t_axes) / 2.0
    c = list(geom.center(cand.geometry))
    c[w] = cand.geometry[w][side]
    au = [0.0, 0.0, 0.0]
    av = [0.0, 0.0, 0.0]
    au[t_axes[0]] = r
    av[t_axes[1]] = r
    return ellipse_polyline(tuple(c), tuple(au), tuple(av), samples)


def primitive_edges(
    cand: Candidate,
) -> list[tuple[tuple[float, float, float], tuple[float, float, float]]]:
    """Wireframe the drawer lays down for a part's scaffold."""
    if cand.kind == "TruncatedPyramid" and cand.bottom is not None:
        w = cand.prim_axis
        t_axes = [ax for ax in range(3) if ax != w]
        lo_w, hi_w = cand.geometry[w]

        def ring(rect, wc):
            pts = []
            for u, v in ((0, 0), (1, 0), (1, 1), (0, 1)):
                p = [0.0, 0.0, 0.0]
                p[w] = wc
                p[t_axes[0]] = rect[0][u]
                p[t_axes[1]] = rect[1][v]
                pts.append(tuple(p))
            return pts

        bot = ring(cand.bottom, lo_w)
        top = ring(cand.top, hi_w)
        edges = []
        for k in range(4):
            edges.append((bot[k], bot[(k + 1) % 4]))
            edges.append((top[k], top[(k + 1) % 4]))
            edges.append((bot[k], top[k]))
        return edges
    return geom.box_edges(cand.geometry)


# ---------------------------------------------------------------------------
# contours


def _affine_maps(
    original: geom.Intervals, new: geom.Intervals,
) -> list[tuple[float, float]]:
    """Per-axis (scale, offset) taking original coordinates to the candidate."""
    maps = []
    for ax in range(3):
        lo0, hi0 = original[ax]
        lo1, hi1 = new[ax]
        len0 = hi0 - lo0
        if len0 <= 0.0:
            maps.append((1.0, lo1 - lo0))
        else:
            s = (hi1 - lo1) / len0
            maps.append((s, lo1 - s * lo0))
    return maps


def apply_affine(points: np.ndarray, maps) -> np.ndarray:
    out = points.astype(np.float64).copy()
    for ax, (s, o) in enumerate(maps):
        out[:, ax] = s * out[:, ax] + o
    return out


def silhouette_polylines(
    vertices: np.ndarray, triangles: np.ndarray, camera: Camera,
) -> list[np.ndarray]:
    """Fallback contours: boundary, crease and silhouette edges of the mesh."""
    v = np.asarray(vertices, dtype=np.float64)
    tri = np.asarray(triangles, dtype=np.int64)
    e1 = v[tri[:, 1]] - v[tri[:, 0]]
    e2 = v[tri[:, 2]] - v[tri[:, 0]]
    normals = np.cross(e1, e2)
    norms = np.linalg.norm(normals, axis=1)
    norms[norms == 0.0] = 1.0
    normals = normals / norms[:, None]
    centers = v[tri].mean(axis=1)
    to_eye = np.asarray(camera.eye, dtype=np.float64)[None, :] - centers
    facing = np.einsum("ij,ij->i", normals, to_eye) > 0.0

    edge_faces: dict[tuple[int, int], list[int]] = {}
    for fi, (a, b, c) in enumerate(tri):
        for p, q in ((a, b), (b, c), (c, a)):
            key = (min(p, q), max(p, q))
            edge_faces.setdefault(key, []).append(fi)

    out = []
    for (p, q), faces in sorted(edge_faces.items()):
        keep = False
        if len(faces) == 1:
            keep = True
        else:
            fa, fb = faces[0], faces[1]
            if facing[fa] != facing[fb]:
                keep = True            # silhouette under this camera
            elif float(np.dot(normals[fa], normals[fb])) < CREASE_COS:
                keep = True            # sharp crease
        if keep:
            out.append(np.vstack([v[p], v[q]]))
    return out


def clip_polyline(
    poly: np.ndarray,
    camera: Camera,
    occluders: list[geom.Intervals],
) -> list[np.ndarray]:
    """Split a polyline into its unoccluded runs, sampled per leg."""
    if len(poly) < 2:
        return []
    pts: list[np.ndarray] = []
    for k in range(len(poly) - 1):
        a, b = poly[k], poly[k + 1]
        n = CONTOUR_SAMPLES
        for j in range(n):
            pts.append(a + (b - a) * (j / n))
    pts.append(np.asarray(poly[-1], dtype=np.float64))

    runs: list[np.ndarray] = []
    current: list[np.ndarray] = []
    for p in pts:
        if _point_occluded(camera.eye, tuple(p), occluders):
            if len(current) >= 2:
                runs.append(np.vstack(current))
            current = []
        else:
            current.append(p)
    if len(current) >= 2:
        runs.append(np.vstack(current))
    return runs


def contour_polylines(
    model: SegmentedModel,
    cand: Candidate,
    original: geom.Intervals,
    camera: Camera,
    occluders: list[geom.Intervals],
) -> list[np.ndarray]:
    seg = model.segment_by_id(cand.part_id)
    maps = _affine_maps(original, cand.geometry)
    if seg.contours:
        polys = [apply_affine(np.asarray(c, dtype=np.float64), maps)
                 for c in seg.contours]
    else:
        verts = apply_affine(seg.vertices, maps)
        polys = silhouette_polylines(verts, seg.triangles, camera)
    out = []
    for poly in polys:
        out.extend(clip_polyline(poly, camera, occluders))
    return out


# ---------------------------------------------------------------------------
# lifetimes


class _GuidePool:
    """Assigns stable ids to guides, merging strokes that coincide."""

    def __init__(self, tol: float):
        self.tol = tol
        self.guides: list[TutorialGuide] = []

    @staticmethod
    def _key(line: GuideLine) -> tuple:
        return tuple(sorted((line.p0, line.p1)))

    def _match(self, line: GuideLine) -> int | None:
        a, b = sorted((line.p0, line.p1))
        for g in self.guides:
            ga, gb = sorted((g.p0, g.p1))
            if (max(abs(a[i] - ga[i]) for i in range(3)) <= self.tol
                    and max(abs(b[i] - gb[i]) for i in range(3)) <= self.tol):
                return g.id
        return None

    def intern(
        self, line: GuideLine, host_part: int, recipe_step: int,
    ) -> tuple[int, bool]:
        """Return (guide id, is_new)."""
        gid = self._match(line)
        if gid is not None:
            return gid, False
        g = TutorialGuide(
            id=len(self.guides),
            kind=line.recipe,
            role=line.role,
            p0=line.p0,
            p1=line.p1,
            host_part=host_part,
            ability_min=line.tier,
            recipe_step=recipe_step,
        )
        self.guides.append(g)
        return g.id, True


# ---------------------------------------------------------------------------
# compilation


def _part_names(model: SegmentedModel) -> dict[int, str]:
    return {s.id: s.name for s in model.segments}


def _guide_step_text(
    ability: str, instances: list[_RecipeInstance], names: dict[int, str],
) -> str:
    parents = sorted({i.parent for i in instances})
    pnames = ", ".join(names.get(p, f"part {p}") for p in parents)
    head = names.get(instances[0].part_id, f"part {instances[0].part_id}")
    return f"Construct the guides that place {head}, working on {pnames}."


def _recipe_text(inst: _RecipeInstance, names: dict[int, str]) -> str:
    pname = names.get(inst.parent, f"part {inst.parent}")
    if inst.recipe == "Align":
        return f"Carry an alignment line across the face of {pname}."
    verb = _RECIPE_TEXT.get(inst.recipe, "construct on")
    return f"Using diagonals, {verb} the highlighted face of {pname}."


def _master_hint(instances: list[_RecipeInstance], names: dict[int, str]) -> str:
    bits = []
    for inst in instances:
        pname = names.get(inst.parent, f"part {inst.parent}")
        if inst.spec is not None:
            bits.append(f"{inst.spec.feature} of {pname}")
    if not bits:
        return ""
    return " Judge by eye: " + "; ".join(sorted(set(bits))) + "."


@dataclass
class _DraftStep:
    kind: str
    part_id: int | None
    payload: dict
    text: str
    inset_hint: int | None
    draws: list[int] = field(default_factory=list)
    reuses: list[int] = field(default_factory=list)


def compile_tutorial(
    model: SegmentedModel,
    chosen: dict[int, Candidate],
    camera: Camera,
    ability: str,
    config: EngineConfig | None = None,
    originals: dict[int, geom.Intervals] | None = None,
) -> Tutorial:
    """Build the full step list for one viewpoint and ability.

    ``chosen`` maps part id to its selected candidate (parent candidates
    included, per the selection's Eq 2). ``originals`` carries the fitted
    primitive intervals for the contour affine map; parts missing from it
    fall back to the candidate geometry (identity map).
    """
    config = config or EngineConfig()
    ability = normalize_ability(ability)
    # canonical 9-digit camera so a round-tripped document reprojects
    # to the exact same pixels
    camera = Camera.from_dict(round_floats(camera.to_dict()))
    camera.validate()
    names = _part_names(model)
    visible_tiers = _TIER_VISIBILITY[ability]

    edges = set()
    by_id = {c.id: c for c in chosen.values()}
    for c in chosen.values():
        for pcid in c.parent_candidates:
            if pcid not in by_id:
                raise TutorialError(
                    f"candidate {c.id} references parent {pcid} outside the selection")
            edges.add((by_id[pcid].part_id, c.part_id))

    order = break_ties(sorted(chosen), sorted(edges), chosen, camera)
    skipped = cull_occluded(chosen, camera)
    drawn = [p for p in order if p not in skipped]
    eyeballed = set(eyeball_parts(chosen, camera, config)) & set(drawn)

    pool = _GuidePool(config.guide_merge_tol)
    drafts: list[_DraftStep] = []

    vps = axis_vanishing_points(camera)
    drafts.append(_DraftStep(
        kind=STEP_VANISHING, part_id=None,
        payload={
            "vanishing_points": [list(v) if v else None for v in vps],
        },
        text="Set up the sheet: mark the vanishing points and the horizon.",
        inset_hint=None,
    ))

    def add_lines(
        draft: _DraftStep, lines: list[GuideLine], host_part: int,
    ) -> None:
        for k, line in enumerate(lines):
            if line.tier not in visible_tiers:
                continue
            gid, is_new = pool.intern(line, host_part, k + 1)
            if is_new:
                draft.draws.append(gid)
            elif gid not in draft.draws and gid not in draft.reuses:
                draft.reuses.append(gid)

    part_guides: dict[int, list[int]] = {}

    for p in drawn:
        cand = chosen[p]
        instances = recipe_instances(cand, chosen)
        ell_sides = visible_caps(cand, camera)
        gids_here: list[int] = []

        if p in eyeballed:
            drafts.append(_DraftStep(
                kind=STEP_EYEBALL, part_id=p,
                payload={"candidate": cand.id},
                text=(f"Sketch {names.get(p, p)} freehand; its guides would "
                      "be too small on paper to help."),
                inset_hint=cand.id,
            ))
        elif instances or ell_sides:
            cap_guide_lines = [
                (side, ellipse_guides(cap_face(cand, side)))
                for side in ell_sides
            ]
            if ability == ABILITY_NOVICE:
                # one step per construction so each recipe reads separately
                for inst in instances:
                    d = _DraftStep(
                        kind=STEP_GUIDE, part_id=p, payload={},
                        text=_recipe_text(inst, names), inset_hint=cand.id)
                    add_lines(d, inst.lines, inst.parent)
                    if d.draws or d.reuses:
                        d.payload = {"draw": d.draws, "reuse": d.reuses}
                        drafts.append(d)
                        gids_here.extend(d.draws + d.reuses)
                for side, lines in cap_guide_lines:
                    d = _DraftStep(
                        kind=STEP_GUIDE, part_id=p, payload={},
                        text=(f"Cross the cap face of {names.get(p, p)} to "
                              "find where the ellipse must touch."),
                        inset_hint=cand.id)
                    add_lines(d, lines, p)
                    if d.draws or d.reuses:
                        d.payload = {"draw": d.draws, "reuse": d.reuses}
                        drafts.append(d)
                        gids_here.extend(d.draws + d.reuses)
            else:
                d = _DraftStep(
                    kind=STEP_GUIDE, part_id=p, payload={},
                    text=_guide_step_text(ability, instances, names)
                    if instances else
                    f"Mark the ellipse touch points for {names.get(p, p)}.",
                    inset_hint=cand.id)
                for inst in instances:
                    add_lines(d, inst.lines, inst.parent)
                for side, lines in cap_guide_lines:
                    add_lines(d, lines, p)
                if d.draws or d.reuses:
                    d.payload = {"draw": d.draws, "reuse": d.reuses}
                    drafts.append(d)
                    gids_here.extend(d.draws + d.reuses)

        # a guide drawn for one construction and picked up again by the
        # next lands in gids_here twice; payloads carry each id once
        part_guides[p] = list(dict.fromkeys(gids_here))

        edge_text = f"Draw the {cand.kind.lower()} scaffold for {names.get(p, p)}."
        if ability == ABILITY_MASTER and p not in eyeballed:
            edge_text += _master_hint(instances, names)
        edge_draft = _DraftStep(
            kind=STEP_EDGE, part_id=p,
            payload={
                "edges": [[list(a), list(b)] for a, b in primitive_edges(cand)],
                "candidate": cand.id,
            },
            text=edge_text,
            inset_hint=cand.id,
        )
        edge_draft.reuses = list(part_guides[p])
        drafts.append(edge_draft)

        for side in ell_sides:
            poly = cap_ellipse(cand, side)
            d = _DraftStep(
                kind=STEP_ELLIPSE, part_id=p,
                payload={
                    "polyline": [list(q) for q in poly],
                    "side": side,
                },
                text=(f"Draw the ellipse on the "
                      f"{'near' if side else 'far'} cap of {names.get(p, p)}, "
                      "touching the marked points."),
                inset_hint=cand.id,
            )
            if p not in eyeballed:
                d.reuses = [
                    g for g in part_guides[p]
                    if pool.guides[g].kind == "EllipseGuides"
                    and pool.guides[g].host_part == p
                ]
            drafts.append(d)

    contoured: list[int] = []
    for p in drawn:
        cand = chosen[p]
        occluders = [
            chosen[q].geometry for q in contoured
            if geom.volume(chosen[q].geometry) > 0.0
        ]
        orig = (originals or {}).get(p, cand.geometry)
        polys = contour_polylines(model, cand, orig, camera, occluders)
        payload = {"polylines": [[list(q) for q in poly] for poly in polys]}
        text = f"Ink the contours of {names.get(p, p)} over its scaffold."
        if not polys:
            payload["warning"] = "no contour polylines survived clipping"
            text += " (nothing visible from here)"
        drafts.append(_DraftStep(
            kind=STEP_CONTOURS, part_id=p, payload=payload,
            text=text, inset_hint=cand.id))
        contoured.append(p)

    # lifetimes over the draft list, then erase steps, then renumbering
    last_use: dict[int, int] = {}
    first_use: dict[int, int] = {}
    for di, d in enumerate(drafts):
        for gid in d.draws:
            first_use.setdefault(gid, di)
            last_use[gid] = di
        for gid in d.reuses:
            last_use[gid] = di

    steps: list[TutorialStep] = []
    for di, d in enumerate(drafts):
        idx = len(steps)
        payload = dict(d.payload)
        if d.draws or d.reuses:
            payload["draw"] = list(d.draws)
            payload["reuse"] = list(d.reuses)
        steps.append(TutorialStep(
            index=idx, kind=d.kind, part_id=d.part_id,
            payload=payload, instruction_text=d.text,
            inset_hint=d.inset_hint))
        for gid in d.draws:
            pool.guides[gid].first_step = idx
        for gid in d.draws + d.reuses:
            pool.guides[gid].last_step = idx
        expiring = sorted(
            gid for gid, last in last_use.items() if last == di)
        if expiring:
            steps.append(TutorialStep(
                index=len(steps), kind=STEP_ERASE, part_id=None,
                payload={"erase": expiring},
                instruction_text="Erase the guides that will not be used again.",
                inset_hint=None))

    for g in pool.guides:
        g.p0 = tuple(round9(v) for v in g.p0)
        g.p1 = tuple(round9(v) for v in g.p1)
    for s in steps:
        s.payload = round_floats(s.payload)

    return Tutorial(
        steps=steps,
        camera=camera,
        ability=ability,
        vanishing_points=[
            (round9(v[0]), round9(v[1])) if v is not None else None
            for v in vps
        ],
        guides=pool.guides,
        skipped_parts=skipped,
        part_order=order,
        chosen={p: c.id for p, c in sorted(chosen.items())},
        config_hash=content_hash(config.to_dict()),
    )
