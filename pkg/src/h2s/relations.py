"""Detect geometric relations between fitted primitives.

Exactly one relation is reported per part pair, chosen by how many axes
have coinciding interval midpoints (within tolerance):

  two axes   -> Coaxial along the remaining axis
  one or all -> CommonBisectorPlane perpendicular to the tightest axis
  none       -> Coplanar when a pair of faces is flush, else nothing
"""

from __future__ import annotations

from dataclasses import dataclass

from . import geom
from .model_io import EngineConfig, SegmentedModel
from .primitives import KIND_CUSTOM, Primitive

COAXIAL = "Coaxial"
BISECTOR = "CommonBisectorPlane"
COPLANAR = "Coplanar"


@dataclass(frozen=True)
class Relation:
    kind: str
    part_a: int          # always part_a < part_b
    part_b: int
    axis: int            # Coaxial: shared axis; Bisector: plane normal; Coplanar: face normal
    side_a: int | None = None   # Coplanar only: 0 = lo face, 1 = hi face
    side_b: int | None = None
    deviation: float = 0.0

    def other(self, part_id: int) -> int:
        return self.part_b if part_id == self.part_a else self.part_a

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "part_a": self.part_a,
            "part_b": self.part_b,
            "axis": self.axis,
            "deviation": self.deviation,
        }
        if self.side_a is not None:
            d["side_a"] = self.side_a
            d["side_b"] = self.side_b
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Relation":
        return cls(
            kind=str(d["kind"]),
            part_a=int(d["part_a"]),
            part_b=int(d["part_b"]),
            axis=int(d["axis"]),
            side_a=d.get("side_a"),
            side_b=d.get("side_b"),
            deviation=float(d.get("deviation", 0.0)),
        )


def _pair_relation(
    a: Primitive, b: Primitive, tol: float,
) -> Relation | None:
    mids_a = geom.center(a.intervals)
    mids_b = geom.center(b.intervals)
    devs = [abs(mids_a[ax] - mids_b[ax]) for ax in range(3)]
    matched = [ax for ax in range(3) if devs[ax] <= tol]

    if len(matched) == 2:
        axis = next(ax for ax in range(3) if ax not in matched)
        return Relation(
            COAXIAL, a.part_id, b.part_id, axis,
            deviation=max(devs[ax] for ax in matched))
    if len(matched) in (1, 3):
        axis = min(matched, key=lambda ax: (devs[ax], ax))
        return Relation(
            BISECTOR, a.part_id, b.part_id, axis, deviation=devs[axis])

    # no midpoint coincidence: look for a flush face pair
    best: Relation | None = None
    for axis in range(3):
        for side_a in range(2):
            for side_b in range(2):
                dev = abs(a.intervals[axis][side_a] - b.intervals[axis][side_b])
                if dev > tol:
                    continue
                cand = Relation(
                    COPLANAR, a.part_id, b.part_id, axis,
                    side_a=side_a, side_b=side_b, deviation=dev)
                if best is None or (dev, axis, side_a, side_b) < (
                    best.deviation, best.axis, best.side_a, best.side_b
                ):
                    best = cand
    return best


def detect_relations(
    model: SegmentedModel,
    primitives: dict[int, Primitive],
    config: EngineConfig | None = None,
) -> list[Relation]:
    config = config or EngineConfig()
    tol = config.relation_distance_tol * model.bbox_diagonal()
    ids = sorted(pid for pid, p in primitives.items() if p.kind != KIND_CUSTOM)
    out: list[Relation] = []
    for i, pa in enumerate(ids):
        for pb in ids[i + 1:]:
            rel = _pair_relation(primitives[pa], primitives[pb], tol)
            if rel is not None:
                out.append(rel)
    return out


def relation_satisfied(
    rel: Relation,
    intervals_a: geom.Intervals,
    intervals_b: geom.Intervals,
    tol: float,
) -> bool:
    """Does the relation still hold for (possibly adjusted) geometries?"""
    mids_a = geom.center(intervals_a)
    mids_b = geom.center(intervals_b)
    if rel.kind == COAXIAL:
        t1, t2 = [ax for ax in range(3) if ax != rel.axis]
        return (
            abs(mids_a[t1] - mids_b[t1]) <= tol
            and abs(mids_a[t2] - mids_b[t2]) <= tol
        )
    if rel.kind == BISECTOR:
        return abs(mids_a[rel.axis] - mids_b[rel.axis]) <= tol
    if rel.kind == COPLANAR:
        assert rel.side_a is not None and rel.side_b is not None
        return abs(
            intervals_a[rel.axis][rel.side_a] - intervals_b[rel.axis][rel.side_b]
        ) <= tol
    raise ValueError(f"unknown relation kind {rel.kind}")


def relations_for(relations: list[Relation], part_id: int) -> list[Relation]:
    return [r for r in relations if part_id in (r.part_a, r.part_b)]


def relation_between(
    relations: list[Relation], pid_a: int, pid_b: int,
) -> Relation | None:
    lo, hi = min(pid_a, pid_b), max(pid_a, pid_b)
    for r in relations:
        if r.part_a == lo and r.part_b == hi:
            return r
    return None
