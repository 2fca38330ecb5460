"""Generate adjusted-geometry candidates for every part.

A candidate reshapes a part so its dimensions land on easy-to-construct
ratios of a parent part (halves, thirds, quarters, extensions), which lets
the tutorial anchor the part with ruler-and-pencil guide lines instead of
eyeballing. Generation runs in three stages:

  i   anchor each part to the original geometry of every other part
  ii  translate stage-i candidates that broke a detected relation so the
      relation holds again
  iii anchor parts to the stage-i candidates of their parents, one level
      deep (no level-3 chains, no re-restoration)

Candidates carry their deviation cost e_d and construction cost e_e; the
selection solve later picks exactly one per part.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

from . import docio, geom
from .model_io import EngineConfig, SegmentedModel
from .primitives import KIND_CUSTOM, KIND_PLANE, KIND_PYRAMID, Primitive, Rect
from .relations import COAXIAL, COPLANAR, Relation, relation_between, relation_satisfied
from .selection import FEATURE_RECIPE, cost_e_d, cost_e_e, guide_count

PRUNE_EPS = 1e-12

# stage iii re-anchors parts to already-adjusted parents; bounding the number
# of parent candidates it fans out from keeps generation roughly linear even
# on models where stage i produces hundreds of close variants per part
STAGE3_PARENT_CAP = 64

# feature name -> position ratio along the parent axis (value = lo + ratio * L)
FEATURE_RATIOS = {
    "LoEdge": 0.0,
    "HiEdge": 1.0,
    "Half": 0.5,
    "Third": 1.0 / 3.0,
    "TwoThird": 2.0 / 3.0,
    "Quarter": 0.25,
    "ThreeQuarter": 0.75,
    "ExtendHalfLo": -0.5,
    "ExtendHalfHi": 1.5,
    "ExtendOneLo": -1.0,
    "ExtendOneHi": 2.0,
    "ExtendTwoLo": -2.0,
    "ExtendTwoHi": 3.0,
}


@dataclass(frozen=True)
class GuideSpec:
    """One guided coordinate: a recipe drawn on a face of the parent part."""

    parent: int          # parent part id
    feature: str
    ratio: float
    host_axis: int       # normal axis of the parent face hosting the recipe
    host_side: int
    value: float         # world coordinate the guided end lands on
    host_area: float = 0.0   # derived, not serialized

    def to_dict(self) -> dict:
        return {
            "parent": self.parent,
            "feature": self.feature,
            "ratio": self.ratio,
            "host_axis": self.host_axis,
            "host_side": self.host_side,
            "value": self.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GuideSpec":
        return cls(
            parent=int(d["parent"]),
            feature=str(d["feature"]),
            ratio=float(d["ratio"]),
            host_axis=int(d["host_axis"]),
            host_side=int(d["host_side"]),
            value=float(d["value"]),
        )


@dataclass(frozen=True)
class AxisPlan:
    """How one axis of the candidate is positioned.

    Either end may be guided by a GuideSpec. An unguided end keeps its
    original coordinate, unless translate is set (relation restoration),
    in which case it follows the guided end to preserve the length.
    """

    new_lo: float
    new_hi: float
    lo: GuideSpec | None = None
    hi: GuideSpec | None = None
    translate: bool = False

    def specs(self) -> list[GuideSpec]:
        return [s for s in (self.lo, self.hi) if s is not None]

    def guide_sum(self) -> int:
        return sum(guide_count(s.feature) for s in self.specs())


Plans3 = tuple["AxisPlan | None", "AxisPlan | None", "AxisPlan | None"]
Plans2 = tuple["AxisPlan | None", "AxisPlan | None"]


@dataclass
class Candidate:
    id: int
    part_id: int
    kind: str
    level: int
    geometry: geom.Intervals
    axes: Plans3 = (None, None, None)
    prim_axis: int | None = None      # symmetry axis for cylinder/pyramid/plane
    bottom: Rect | None = None        # pyramid rects in ascending transverse order
    top: Rect | None = None
    bottom_plans: Plans2 | None = None
    top_plans: Plans2 | None = None
    parent_candidates: tuple[int, ...] = ()
    e_d: float = 0.0
    e_e: float = 0.0

    @property
    def cost(self) -> float:
        return self.e_d + self.e_e

    def guided_axes(self) -> tuple[bool, bool, bool]:
        flags = [
            self.axes[ax] is not None and bool(self.axes[ax].specs())
            for ax in range(3)
        ]
        if self.kind == KIND_PYRAMID:
            t_axes = [ax for ax in range(3) if ax != self.prim_axis]
            for k, ax in enumerate(t_axes):
                if (self.bottom_plans and self.bottom_plans[k] is not None) or (
                    self.top_plans and self.top_plans[k] is not None
                ):
                    flags[ax] = True
        return tuple(flags)  # type: ignore[return-value]

    def all_specs(self) -> list[GuideSpec]:
        out: list[GuideSpec] = []
        for plan in self.axes:
            if plan is not None:
                out.extend(plan.specs())
        for plans in (self.bottom_plans, self.top_plans):
            if plans is not None:
                for plan in plans:
                    if plan is not None:
                        out.extend(plan.specs())
        return out

    def parent_parts(self) -> frozenset[int]:
        return frozenset(s.parent for s in self.all_specs())

    def nominal_guide_total(self) -> int:
        return sum(guide_count(s.feature) for s in self.all_specs())

    def dedup_key(self) -> tuple:
        return (self.geometry, self.bottom, self.top, self.parent_candidates)

    def to_dict(self) -> dict:
        d: dict = {
            "id": self.id,
            "part_id": self.part_id,
            "kind": self.kind,
            "level": self.level,
            "geometry": [list(iv) for iv in self.geometry],
            "parents": list(self.parent_candidates),
            "e_d": self.e_d,
            "e_e": self.e_e,
            "anchors": [],
        }
        if self.prim_axis is not None:
            d["prim_axis"] = self.prim_axis
        if self.bottom is not None:
            d["bottom"] = [list(iv) for iv in self.bottom]
            d["top"] = [list(iv) for iv in self.top]

        def emit(slot: str, axis: int, plan: AxisPlan | None) -> None:
            if plan is None:
                return
            for end, spec in (("lo", plan.lo), ("hi", plan.hi)):
                if spec is None:
                    continue
                entry = {"slot": slot, "axis": axis, "end": end}
                entry.update(spec.to_dict())
                if plan.translate:
                    entry["translate"] = True
                d["anchors"].append(entry)

        for ax in range(3):
            emit("axes", ax, self.axes[ax])
        if self.bottom is not None:
            t_axes = [ax for ax in range(3) if ax != self.prim_axis]
            for k, ax in enumerate(t_axes):
                if self.bottom_plans:
                    emit("bottom", ax, self.bottom_plans[k])
                if self.top_plans:
                    emit("top", ax, self.top_plans[k])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Candidate":
        geometry = tuple(tuple(iv) for iv in d["geometry"])
        prim_axis = d.get("prim_axis")
        bottom = tuple(tuple(iv) for iv in d["bottom"]) if "bottom" in d else None
        top = tuple(tuple(iv) for iv in d["top"]) if "top" in d else None
        axes: list[AxisPlan | None] = [None, None, None]
        bplans: list[AxisPlan | None] = [None, None]
        tplans: list[AxisPlan | None] = [None, None]
        t_axes = (
            [ax for ax in range(3) if ax != prim_axis]
            if prim_axis is not None else [])
        for entry in d.get("anchors", []):
            spec = GuideSpec.from_dict(entry)
            slot, axis, end = entry["slot"], int(entry["axis"]), entry["end"]
            translate = bool(entry.get("translate", False))
            if slot == "axes":
                new_lo, new_hi = geometry[axis]
                plan = axes[axis] or AxisPlan(new_lo, new_hi)
            else:
                k = t_axes.index(axis)
                rect = bottom if slot == "bottom" else top
                new_lo, new_hi = rect[k]
                store = bplans if slot == "bottom" else tplans
                plan = store[k] or AxisPlan(new_lo, new_hi)
            plan = replace(
                plan,
                lo=spec if end == "lo" else plan.lo,
                hi=spec if end == "hi" else plan.hi,
                translate=plan.translate or translate,
            )
            if slot == "axes":
                axes[axis] = plan
            elif slot == "bottom":
                bplans[t_axes.index(axis)] = plan
            else:
                tplans[t_axes.index(axis)] = plan
        has_rects = bottom is not None
        return cls(
            id=int(d["id"]),
            part_id=int(d["part_id"]),
            kind=str(d["kind"]),
            level=int(d["level"]),
            geometry=geometry,  # type: ignore[arg-type]
            axes=tuple(axes),   # type: ignore[arg-type]
            prim_axis=prim_axis,
            bottom=bottom,      # type: ignore[arg-type]
            top=top,            # type: ignore[arg-type]
            bottom_plans=tuple(bplans) if has_rects else None,  # type: ignore[arg-type]
            top_plans=tuple(tplans) if has_rects else None,     # type: ignore[arg-type]
            parent_candidates=tuple(d.get("parents", ())),
            e_d=float(d["e_d"]),
            e_e=float(d["e_e"]),
        )


# ---------------------------------------------------------------------------
# axis anchors


def generate_axis_anchors(
    parent_iv: tuple[float, float],
    child_iv: tuple[float, float],
    parent_part: int,
    host_axis: int,
    host_side: int,
    host_area: float,
    config: EngineConfig,
) -> list[AxisPlan]:
    """All prunable anchor options for one child axis against one parent axis."""
    a, b = parent_iv
    parent_len = b - a
    c_lo, c_hi = child_iv
    len0 = c_hi - c_lo
    if len0 <= 0.0:
        return []
    mid0 = 0.5 * (c_lo + c_hi)

    if parent_len > 0.0:
        features = [
            (name, ratio, a + ratio * parent_len)
            for name, ratio in FEATURE_RATIOS.items()
            if FEATURE_RECIPE[name] in config.ratio_catalog
        ]
    else:
        # a degenerate parent axis offers only its single position
        features = (
            [("LoEdge", 0.0, a)] if "Align" in config.ratio_catalog else [])

    def spec(name: str, ratio: float, value: float) -> GuideSpec:
        return GuideSpec(
            parent=parent_part, feature=name, ratio=ratio,
            host_axis=host_axis, host_side=host_side, value=value,
            host_area=host_area)

    bound = config.prune_fraction + PRUNE_EPS

    def admissible(new_lo: float, new_hi: float) -> bool:
        new_len = new_hi - new_lo
        if new_len <= 0.0:
            return False
        d_len = abs(new_len - len0) / len0
        d_mid = abs(0.5 * (new_lo + new_hi) - mid0) / len0
        return d_len <= bound and d_mid <= bound

    options: list[AxisPlan] = []
    for f1, f2 in itertools.combinations(features, 2):
        lo_f, hi_f = (f1, f2) if f1[2] < f2[2] else (f2, f1)
        if lo_f[2] >= hi_f[2]:
            continue
        if admissible(lo_f[2], hi_f[2]):
            options.append(AxisPlan(
                lo_f[2], hi_f[2], lo=spec(*lo_f), hi=spec(*hi_f)))
    for name, ratio, value in features:
        if admissible(value, c_hi):
            options.append(AxisPlan(value, c_hi, lo=spec(name, ratio, value)))
        if admissible(c_lo, value):
            options.append(AxisPlan(c_lo, value, hi=spec(name, ratio, value)))

    # identical coordinates reachable by several routes: keep the cheapest
    best: dict[tuple[float, float], AxisPlan] = {}
    for plan in options:
        key = (plan.new_lo, plan.new_hi)
        old = best.get(key)
        if old is None or plan.guide_sum() < old.guide_sum():
            best[key] = plan
    return sorted(
        best.values(),
        key=lambda p: (p.new_lo, p.new_hi, p.guide_sum(),
                       tuple(s.feature for s in p.specs())))


# ---------------------------------------------------------------------------
# host faces


def host_face_for_plane(
    parent_geom: geom.Intervals,
    child_center_w: float,
    w: int,
    rel: Relation | None,
    parent_id: int,
) -> int | None:
    """Parent face perpendicular to w on which in-plane guides are drawn."""
    if geom.face_area(parent_geom, w) <= 0.0:
        return None
    if rel is not None and rel.kind == COPLANAR and rel.axis == w:
        return rel.side_a if rel.part_a == parent_id else rel.side_b
    return min(
        range(2), key=lambda s: (abs(parent_geom[w][s] - child_center_w), s))


def host_face_for_axis(
    parent_geom: geom.Intervals,
    child_center: tuple[float, float, float],
    w: int,
) -> tuple[int, int] | None:
    """Parent face containing direction w, nearest to the child."""
    choices = []
    for a in range(3):
        if a == w or geom.face_area(parent_geom, a) <= 0.0:
            continue
        for side in range(2):
            choices.append(
                (abs(parent_geom[a][side] - child_center[a]), a, side))
    if not choices:
        return None
    _, a, side = min(choices)
    return a, side


# ---------------------------------------------------------------------------
# generation


class _Gen:
    def __init__(
        self,
        model: SegmentedModel,
        primitives: dict[int, Primitive],
        relations: list[Relation],
        config: EngineConfig,
    ):
        self.model = model
        self.prims = primitives
        self.relations = relations
        self.config = config
        self.max_face = max(
            geom.max_face_area(p.intervals) for p in primitives.values())
        self.tol = config.relation_distance_tol * model.bbox_diagonal()
        self.parts = sorted(primitives)
        self.regular = [
            pid for pid in self.parts if primitives[pid].kind != KIND_CUSTOM]
        self.counter = 0
        self.originals: dict[int, Candidate] = {}
        self._by_id: dict[int, Candidate] = {}

    def next_id(self) -> int:
        self.counter += 1
        return self.counter - 1

    def part_of(self, cand_id: int) -> int:
        return self._by_id[cand_id].part_id

    def finish(self, cand: Candidate) -> Candidate | None:
        prim = self.prims[cand.part_id]
        try:
            cand.e_d = cost_e_d(
                prim.intervals, cand.geometry, cand.guided_axes(), self.config)
        except ValueError:
            return None
        cand.e_e = cost_e_e(
            ((s.feature, s.host_area) for s in cand.all_specs()),
            self.max_face, self.config)
        if not math.isfinite(cand.e_e):
            return None
        return cand

    # -- stage 0 ------------------------------------------------------------

    def make_originals(self) -> list[Candidate]:
        out = []
        for pid in self.parts:
            prim = self.prims[pid]
            is_pyr = prim.kind == KIND_PYRAMID
            cand = Candidate(
                id=self.next_id(), part_id=pid, kind=prim.kind, level=0,
                geometry=prim.intervals,
                prim_axis=prim.axis,
                bottom=prim.bottom, top=prim.top,
                bottom_plans=(None, None) if is_pyr else None,
                top_plans=(None, None) if is_pyr else None,
            )
            cand = self.finish(cand)
            assert cand is not None, f"original candidate of part {pid} must cost out"
            self.originals[pid] = cand
            self._by_id[cand.id] = cand
            out.append(cand)
        return out

    # -- box-like assembly ----------------------------------------------------

    def box_candidates(
        self,
        child: Primitive,
        parent_id: int,
        parent_geom: geom.Intervals,
        parent_cand_id: int,
        third_sources: list[tuple[int, geom.Intervals, int]],
        level: int,
    ) -> list[Candidate]:
        """Plane-plus-third-axis assembly for cuboid, cylinder, plane parts."""
        cfg = self.config
        child_center = geom.center(child.intervals)
        rel = relation_between(self.relations, parent_id, child.part_id)
        orientations = (
            [child.axis] if child.kind == KIND_PLANE else [0, 1, 2])
        made: list[Candidate] = []
        for w in orientations:
            host_side = host_face_for_plane(
                parent_geom, child_center[w], w, rel, parent_id)
            if host_side is None:
                continue
            host_area = geom.face_area(parent_geom, w)
            u_ax, v_ax = [ax for ax in range(3) if ax != w]
            au_opts: list[AxisPlan | None] = [None]
            au_opts += generate_axis_anchors(
                parent_geom[u_ax], child.intervals[u_ax], parent_id,
                w, host_side, host_area, cfg)
            av_opts: list[AxisPlan | None] = [None]
            av_opts += generate_axis_anchors(
                parent_geom[v_ax], child.intervals[v_ax], parent_id,
                w, host_side, host_area, cfg)

            third_opts: list[tuple[AxisPlan | None, int | None]] = [(None, None)]
            if child.kind != KIND_PLANE:
                for src_part, src_geom, src_cand in third_sources:
                    host = host_face_for_axis(src_geom, child_center, w)
                    if host is None:
                        continue
                    h_axis, h_side = host
                    area = geom.face_area(src_geom, h_axis)
                    for plan in generate_axis_anchors(
                        src_geom[w], child.intervals[w], src_part,
                        h_axis, h_side, area, cfg,
                    ):
                        third_opts.append((plan, src_cand))

            for au, av, (aw, w_cand) in itertools.product(
                au_opts, av_opts, third_opts,
            ):
                if au is None and av is None and aw is None:
                    continue
                parent_ids = {parent_cand_id} if (au or av) else set()
                if aw is not None:
                    assert w_cand is not None
                    w_part = self.part_of(w_cand)
                    # never require two different candidates of one part
                    if parent_ids and w_part == parent_id and w_cand != parent_cand_id:
                        continue
                    parent_ids.add(w_cand)
                axes: list[AxisPlan | None] = [None, None, None]
                axes[u_ax] = au
                axes[v_ax] = av
                axes[w] = aw
                ivs = list(child.intervals)
                for ax in range(3):
                    if axes[ax] is not None:
                        ivs[ax] = (axes[ax].new_lo, axes[ax].new_hi)
                cand = Candidate(
                    id=self.next_id(), part_id=child.part_id, kind=child.kind,
                    level=level,
                    geometry=tuple(ivs),  # type: ignore[arg-type]
                    axes=tuple(axes),     # type: ignore[arg-type]
                    prim_axis=child.axis,
                    parent_candidates=tuple(sorted(parent_ids)),
                )
                cand = self.finish(cand)
                if cand is not None:
                    made.append(cand)
        return made

    # -- pyramids ---------------------------------------------------------------

    def pyramid_candidates(
        self,
        child: Primitive,
        parent_id: int,
        parent_geom: geom.Intervals,
        parent_cand_id: int,
        third_sources: list[tuple[int, geom.Intervals, int]],
        level: int,
    ) -> list[Candidate]:
        cfg = self.config
        w = child.axis
        assert w is not None and child.bottom is not None and child.top is not None
        rel = relation_between(self.relations, parent_id, child.part_id)
        if geom.face_area(parent_geom, w) <= 0.0:
            return []
        host_area = geom.face_area(parent_geom, w)
        t_axes = [ax for ax in range(3) if ax != w]
        child_center = geom.center(child.intervals)

        def rect_host_side(child_side: int) -> int:
            if rel is not None and rel.kind == COPLANAR and rel.axis == w:
                c_side = rel.side_b if rel.part_b == child.part_id else rel.side_a
                if c_side == child_side:
                    return rel.side_a if rel.part_a == parent_id else rel.side_b
            coord = child.intervals[w][child_side]
            return min(
                range(2), key=lambda s: (abs(parent_geom[w][s] - coord), s))

        rect_opts: dict[str, list] = {}
        for slot, rect, host_side in (
            ("bottom", child.bottom, rect_host_side(0)),
            ("top", child.top, rect_host_side(1)),
        ):
            per_axis = []
            for k, t in enumerate(t_axes):
                opts: list[AxisPlan | None] = [None]
                opts += generate_axis_anchors(
                    parent_geom[t], rect[k], parent_id,
                    w, host_side, host_area, cfg)
                per_axis.append(opts)
            rect_opts[slot] = list(itertools.product(*per_axis))

        height_opts: list[tuple[AxisPlan | None, int | None]] = [(None, None)]
        for src_part, src_geom, src_cand in third_sources:
            host = host_face_for_axis(src_geom, child_center, w)
            if host is None:
                continue
            h_axis, h_side = host
            area = geom.face_area(src_geom, h_axis)
            for plan in generate_axis_anchors(
                src_geom[w], child.intervals[w], src_part, h_axis, h_side,
                area, cfg,
            ):
                height_opts.append((plan, src_cand))

        bound = cfg.prune_fraction + PRUNE_EPS
        made: list[Candidate] = []
        for bplans, tplans, (hplan, h_cand) in itertools.product(
            rect_opts["bottom"], rect_opts["top"], height_opts,
        ):
            rect_guided = any(p is not None for p in bplans + tplans)
            if not rect_guided and hplan is None:
                continue
            parent_ids = {parent_cand_id} if rect_guided else set()
            if hplan is not None:
                assert h_cand is not None
                w_part = self.part_of(h_cand)
                if parent_ids and w_part == parent_id and h_cand != parent_cand_id:
                    continue
                parent_ids.add(h_cand)

            new_bottom = tuple(
                (p.new_lo, p.new_hi) if p is not None else child.bottom[k]
                for k, p in enumerate(bplans))
            new_top = tuple(
                (p.new_lo, p.new_hi) if p is not None else child.top[k]
                for k, p in enumerate(tplans))
            ivs = list(child.intervals)
            if hplan is not None:
                ivs[w] = (hplan.new_lo, hplan.new_hi)
            ok = True
            for k, t in enumerate(t_axes):
                span = (
                    min(new_bottom[k][0], new_top[k][0]),
                    max(new_bottom[k][1], new_top[k][1]),
                )
                len0 = child.intervals[t][1] - child.intervals[t][0]
                if len0 <= 0.0 or span[1] - span[0] <= 0.0:
                    ok = False
                    break
                d_len = abs((span[1] - span[0]) - len0) / len0
                d_mid = abs(
                    0.5 * (span[0] + span[1])
                    - 0.5 * (child.intervals[t][0] + child.intervals[t][1])
                ) / len0
                if d_len > bound or d_mid > bound:
                    ok = False
                    break
                ivs[t] = span
            if not ok:
                continue
            axes: list[AxisPlan | None] = [None, None, None]
            axes[w] = hplan
            cand = Candidate(
                id=self.next_id(), part_id=child.part_id, kind=child.kind,
                level=level,
                geometry=tuple(ivs),  # type: ignore[arg-type]
                axes=tuple(axes),     # type: ignore[arg-type]
                prim_axis=w,
                bottom=new_bottom,    # type: ignore[arg-type]
                top=new_top,          # type: ignore[arg-type]
                bottom_plans=bplans,
                top_plans=tplans,
                parent_candidates=tuple(sorted(parent_ids)),
            )
            cand = self.finish(cand)
            if cand is not None:
                made.append(cand)
        return made

    # -- stage ii ------------------------------------------------------------

    def restore_relations(self, level1: list[Candidate]) -> list[Candidate]:
        made: list[Candidate] = []
        for cand in level1:
            pid = cand.part_id
            rels = sorted(
                (r for r in self.relations if pid in (r.part_a, r.part_b)),
                key=lambda r: (r.kind, r.part_a, r.part_b))
            broken = []
            for r in rels:
                ga = cand.geometry if r.part_a == pid else self.prims[r.part_a].intervals
                gb = cand.geometry if r.part_b == pid else self.prims[r.part_b].intervals
                if not relation_satisfied(r, ga, gb, self.tol):
                    broken.append(r)
            if not broken:
                continue
            restored = self._restore(cand, self.prims[pid], broken)
            if restored is not None:
                made.append(restored)
        return made

    def _restore(
        self, cand: Candidate, prim: Primitive, broken: list[Relation],
    ) -> Candidate | None:
        if cand.kind == KIND_PYRAMID:
            return None    # translated rects would detach from their anchors
        axes = list(cand.axes)
        ivs = [list(iv) for iv in cand.geometry]
        moved: dict[int, tuple[float, float]] = {}
        parent_ids = set(cand.parent_candidates)

        def translate_axis(
            ax: int, new_lo: float, new_hi: float,
            spec: GuideSpec, guided_end: str,
        ) -> bool:
            if ivs[ax][1] - ivs[ax][0] <= 0.0:
                return False   # degenerate axes never move
            if ax in moved and moved[ax] != (new_lo, new_hi):
                return False
            moved[ax] = (new_lo, new_hi)
            ivs[ax] = [new_lo, new_hi]
            axes[ax] = AxisPlan(
                new_lo, new_hi,
                lo=spec if guided_end == "lo" else None,
                hi=spec if guided_end == "hi" else None,
                translate=True)
            return True

        for r in broken:
            other = r.other(cand.part_id)
            og = self.prims[other].intervals
            o_mid = geom.center(og)
            if r.kind == COPLANAR:
                my_side = r.side_a if r.part_a == cand.part_id else r.side_b
                o_side = r.side_b if r.part_a == cand.part_id else r.side_a
                if geom.face_area(og, r.axis) <= 0.0:
                    return None
                target = og[r.axis][o_side]
                feature = "LoEdge" if o_side == 0 else "HiEdge"
                spec = GuideSpec(
                    parent=other, feature=feature,
                    ratio=FEATURE_RATIOS[feature],
                    host_axis=r.axis, host_side=o_side, value=target,
                    host_area=geom.face_area(og, r.axis))
                length = ivs[r.axis][1] - ivs[r.axis][0]
                if my_side == 0:
                    new_lo, new_hi, end = target, target + length, "lo"
                else:
                    new_lo, new_hi, end = target - length, target, "hi"
                if not translate_axis(r.axis, new_lo, new_hi, spec, end):
                    return None
            else:
                to_fix = (
                    [ax for ax in range(3) if ax != r.axis]
                    if r.kind == COAXIAL else [r.axis])
                for ax in to_fix:
                    c_mid = 0.5 * (ivs[ax][0] + ivs[ax][1])
                    if abs(c_mid - o_mid[ax]) <= self.tol:
                        continue
                    host = host_face_for_axis(
                        og, geom.center(prim.intervals), ax)
                    if host is None:
                        return None
                    h_axis, h_side = host
                    length = ivs[ax][1] - ivs[ax][0]
                    new_lo = o_mid[ax] - 0.5 * length
                    spec = GuideSpec(
                        parent=other, feature="HalfLine", ratio=0.5,
                        host_axis=h_axis, host_side=h_side, value=new_lo,
                        host_area=geom.face_area(og, h_axis))
                    if not translate_axis(ax, new_lo, new_lo + length, spec, "lo"):
                        return None
            parent_ids.add(self.originals[other].id)

        if not moved:
            return None
        bound = self.config.prune_fraction + PRUNE_EPS
        for ax in range(3):
            lo0, hi0 = prim.intervals[ax]
            len0 = hi0 - lo0
            new_lo, new_hi = ivs[ax]
            if len0 <= 0.0:
                if (new_lo, new_hi) != (lo0, hi0):
                    return None
                continue
            d_len = abs((new_hi - new_lo) - len0) / len0
            d_mid = abs(0.5 * (new_lo + new_hi) - 0.5 * (lo0 + hi0)) / len0
            if d_len > bound or d_mid > bound:
                return None
        by_part: dict[int, int] = {}
        for pcid in parent_ids:
            p = self.part_of(pcid)
            if by_part.get(p, pcid) != pcid:
                return None
            by_part[p] = pcid
        out = Candidate(
            id=self.next_id(), part_id=cand.part_id, kind=cand.kind, level=2,
            geometry=tuple(tuple(iv) for iv in ivs),  # type: ignore[arg-type]
            axes=tuple(axes),                          # type: ignore[arg-type]
            prim_axis=cand.prim_axis,
            parent_candidates=tuple(sorted(parent_ids)),
        )
        return self.finish(out)

    # -- orchestration -------------------------------------------------------

    def run(self) -> list[Candidate]:
        originals = self.make_originals()

        level1: list[Candidate] = []
        for cid in self.regular:
            child = self.prims[cid]
            third_sources = [
                (pid, self.prims[pid].intervals, self.originals[pid].id)
                for pid in self.regular if pid != cid
            ]
            maker = (
                self.pyramid_candidates if child.kind == KIND_PYRAMID
                else self.box_candidates)
            for pid in self.regular:
                if pid == cid:
                    continue
                cands = maker(
                    child, pid, self.prims[pid].intervals,
                    self.originals[pid].id, third_sources, 1)
                for c in cands:
                    self._by_id[c.id] = c
                level1.extend(cands)

        level2 = self.restore_relations(level1)
        for c in level2:
            self._by_id[c.id] = c

        # settle the per-part pools before fanning out to adjusted parents;
        # everything kept here depends only on originals, so nothing can be
        # orphaned by the cap
        base = self.cap(self.dedup(originals + level1 + level2))
        limit = self.config.max_candidates_per_part
        room: dict[int, int] = {pid: limit for pid in self.parts}
        for c in base:
            room[c.part_id] -= 1

        parents3 = sorted(
            (c for c in base
             if c.level == 1
             and c.geometry != self.prims[c.part_id].intervals),
            key=lambda c: (c.cost, c.id))[:STAGE3_PARENT_CAP]

        level2b: list[Candidate] = []
        for cid in self.regular:
            child = self.prims[cid]
            if child.kind == KIND_PYRAMID or room[cid] <= 0:
                continue
            for p in parents3:
                if p.part_id == cid:
                    continue
                third_sources = [
                    (pid, self.prims[pid].intervals, self.originals[pid].id)
                    for pid in self.regular if pid not in (cid, p.part_id)
                ]
                third_sources.append((p.part_id, p.geometry, p.id))
                cands = self.box_candidates(
                    child, p.part_id, p.geometry, p.id, third_sources, 2)
                for c in cands:
                    self._by_id[c.id] = c
                level2b.extend(cands)

        # stage-iii candidates only fill leftover room, never evict a parent
        seen = {(c.part_id,) + c.dedup_key() for c in base}
        extras: dict[int, list[Candidate]] = {}
        for c in self.dedup(level2b):
            key = (c.part_id,) + c.dedup_key()
            if key not in seen:
                extras.setdefault(c.part_id, []).append(c)
        final = list(base)
        for pid, group in sorted(extras.items()):
            group.sort(key=lambda c: (c.cost, c.id))
            final.extend(group[: max(0, room[pid])])

        kept_ids = {c.id for c in final}
        for c in final:
            assert all(p in kept_ids for p in c.parent_candidates), \
                f"candidate {c.id} lost parent"
        return self.renumber(final)

    def dedup(self, cands: list[Candidate]) -> list[Candidate]:
        chosen: dict[tuple, Candidate] = {}
        for c in cands:
            key = (c.part_id,) + c.dedup_key()
            old = chosen.get(key)
            if old is None:
                chosen[key] = c
            elif old.level == 0:
                continue
            elif (c.cost, c.e_e, c.id) < (old.cost, old.e_e, old.id):
                chosen[key] = c
        return list(chosen.values())

    def cap(self, cands: list[Candidate]) -> list[Candidate]:
        by_part: dict[int, list[Candidate]] = {}
        for c in cands:
            by_part.setdefault(c.part_id, []).append(c)
        capped: list[Candidate] = []
        limit = self.config.max_candidates_per_part
        for pid in sorted(by_part):
            group = by_part[pid]
            keep = [c for c in group if c.level == 0]
            rest = sorted(
                (c for c in group if c.level != 0),
                key=lambda c: (c.cost, c.id))
            capped.extend(keep + rest[: max(0, limit - len(keep))])
        return capped

    def renumber(self, cands: list[Candidate]) -> list[Candidate]:
        remap: dict[int, int] = {}
        final: list[Candidate] = []
        next_id = 0

        def content_key(c: Candidate) -> tuple:
            d = c.to_dict()
            d["id"] = 0
            d["parents"] = [remap[p] for p in c.parent_candidates]
            return (c.part_id, docio.canonical_dumps(d))

        for level in (0, 1, 2):
            tier = [c for c in cands if c.level == level]
            if level == 0:
                tier.sort(key=lambda c: c.part_id)
            else:
                tier.sort(key=content_key)
            for c in tier:
                remap[c.id] = next_id
                c.id = next_id
                next_id += 1
            final.extend(tier)
        for c in final:
            c.parent_candidates = tuple(
                sorted(remap[p] for p in c.parent_candidates))
        return final


def generate_all(
    model: SegmentedModel,
    primitives: dict[int, Primitive],
    relations: list[Relation],
    config: EngineConfig | None = None,
) -> list[Candidate]:
    config = config or EngineConfig()
    gen = _Gen(model, primitives, relations, config)
    return gen.run()
