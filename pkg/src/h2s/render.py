"""Per-step SVG sheets and the canonical tutorial document.

Each sheet layers the drawing the way a teacher would: surviving prior
work in gray, this step's fresh guides in orange, reused guides in blue,
new scaffold edges in black, with green paper corners and vanishing rays.
Output bytes are deterministic for a fixed tutorial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .docio import canonical_dumps, loads, round9
from .projective import BehindCameraError, Camera, project
from .tutorial import Tutorial, TutorialGuide, TutorialStep

COLOR_PRIOR = "#BBBBBB"
COLOR_FRESH = "#E8860C"
COLOR_RETAINED = "#2B6CB0"
COLOR_EDGE = "#000000"
COLOR_VANISH = "#2F855A"

LAYER_ORDER = (
    "vanishing", "prior_art", "retained_guides",
    "fresh_guides", "new_edges", "labels",
)

INSET_FRACTION = 0.24
AXIS_PARALLEL_TOL = 1e-9
DOC_KIND = "tutorial"


class TutorialDocumentError(ValueError):
    pass


@dataclass
class StepSheet:
    step_index: int
    svg_text: str
    layers: dict[str, list[str]]
    warnings: list[str]


def _fmt(x: float) -> str:
    v = round9(float(x))
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return f"{v:.9g}"


def _line(x0, y0, x1, y1, color, width, dash=None, opacity=None) -> str:
    bits = [
        f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}"',
        f'x2="{_fmt(x1)}" y2="{_fmt(y1)}"',
        f'stroke="{color}" stroke-width="{_fmt(width)}"',
    ]
    if dash:
        bits.append(f'stroke-dasharray="{dash}"')
    if opacity is not None:
        bits.append(f'stroke-opacity="{_fmt(opacity)}"')
    return " ".join(bits) + " />"


def _polyline(pts, color, width, fill="none") -> str:
    coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
    return (f'<polyline points="{coords}" fill="{fill}" '
            f'stroke="{color}" stroke-width="{_fmt(width)}" />')


def _circle(x, y, r, color, fill="none") -> str:
    return (f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" '
            f'fill="{fill}" stroke="{color}" stroke-width="1" />')


def _text(x, y, s, size=13, color="#333333", anchor="start") -> str:
    return (f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{_fmt(size)}" '
            f'font-family="sans-serif" fill="{color}" '
            f'text-anchor="{anchor}">{escape(s)}</text>')


# ---------------------------------------------------------------------------
# geometry helpers


def _project_seg(camera: Camera, p0, p1):
    """Both endpoints in pixels, or None when either leaves the view."""
    try:
        return project(camera, tuple(p0)), project(camera, tuple(p1))
    except (BehindCameraError, ValueError):
        return None


def _clip_ray(x0, y0, dx, dy, w, h):
    """Farthest point along the ray still inside the canvas rectangle."""
    best = None
    for t_num, t_den in (
        (-x0, dx), (w - x0, dx), (-y0, dy), (h - y0, dy),
    ):
        if abs(t_den) < 1e-12:
            continue
        t = t_num / t_den
        if t <= 0.0:
            continue
        x, y = x0 + t * dx, y0 + t * dy
        if -1e-9 <= x <= w + 1e-9 and -1e-9 <= y <= h + 1e-9:
            if best is None or t > best[0]:
                best = (t, x, y)
    if best is None:
        return None
    return best[1], best[2]


def _axis_of_segment(p0, p1) -> int | None:
    d = [abs(p1[k] - p0[k]) for k in range(3)]
    order = sorted(range(3), key=lambda k: -d[k])
    if d[order[0]] <= AXIS_PARALLEL_TOL:
        return None
    if d[order[1]] > AXIS_PARALLEL_TOL:
        return None
    return order[0]


def _corner_marks(w: int, h: int, arm: float = 18.0) -> list[str]:
    out = []
    m = 6.0
    for cx, sx in ((m, 1.0), (w - m, -1.0)):
        for cy, sy in ((m, 1.0), (h - m, -1.0)):
            out.append(_line(cx, cy, cx + sx * arm, cy, COLOR_VANISH, 2.5))
            out.append(_line(cx, cy, cx, cy + sy * arm, COLOR_VANISH, 2.5))
    return out


def _up_axis(camera: Camera) -> int:
    return max(range(3), key=lambda k: abs(camera.up[k]))


# ---------------------------------------------------------------------------
# per-step state reconstruction


def _alive_guides(tut: Tutorial, index: int) -> list[TutorialGuide]:
    """Guides on the sheet at a step: drawn already, not yet past last use."""
    return [
        g for g in tut.guides
        if g.first_step <= index <= g.last_step
    ]


def _step_elements(step: TutorialStep) -> list[tuple[str, list]]:
    """(element kind, 3D payload) pairs for everything a step lays down."""
    out = []
    for e in step.payload.get("edges", []):
        out.append(("edge", e))
    poly = step.payload.get("polyline")
    if poly:
        out.append(("polyline", poly))
    for p in step.payload.get("polylines", []):
        out.append(("polyline", p))
    return out


def render_step(tut: Tutorial, step_index: int) -> StepSheet:
    if not 0 <= step_index < len(tut.steps):
        raise IndexError(f"step {step_index} out of range")
    step = tut.steps[step_index]
    cam = tut.camera
    w, h = cam.width, cam.height
    layers: dict[str, list[str]] = {name: [] for name in LAYER_ORDER}
    warnings: list[str] = []

    def seg_or_warn(p0, p1, what: str):
        pts = _project_seg(cam, p0, p1)
        if pts is None:
            warnings.append(f"{what} skipped: endpoint behind camera")
        return pts

    # paper corners on every sheet
    layers["vanishing"].extend(_corner_marks(w, h))

    # vanishing points and the horizon, most prominent on the setup sheet
    vps = tut.vanishing_points
    up = _up_axis(cam)
    if step.kind == "DrawVanishingSetup":
        ground = [vps[a] for a in range(3) if a != up and vps[a] is not None]
        if len(ground) == 2:
            (x0, y0), (x1, y1) = ground
            dx, dy = x1 - x0, y1 - y0
            n = math.hypot(dx, dy)
            if n > 1e-12:
                dx, dy = dx / n, dy / n
                ha = _clip_ray(x0, y0, -dx, -dy, w, h)
                hb = _clip_ray(x0, y0, dx, dy, w, h)
                if ha and hb:
                    layers["vanishing"].append(
                        _line(*ha, *hb, COLOR_VANISH, 1.0, dash="6 4"))
        for a in range(3):
            vp = vps[a]
            if vp is None:
                continue
            x, y = vp
            if 0 <= x <= w and 0 <= y <= h:
                layers["vanishing"].append(_circle(x, y, 4, COLOR_VANISH))
                layers["vanishing"].append(
                    _text(x + 7, y - 7, f"VP{a}", 11, COLOR_VANISH))

    guide_xy: dict[int, tuple] = {}
    for g in tut.guides:
        pts = _project_seg(cam, g.p0, g.p1)
        if pts is not None:
            guide_xy[g.id] = pts

    draws = set(step.payload.get("draw", []))
    reuses = set(step.payload.get("reuse", []))

    # prior art: surviving earlier strokes, erased guides already absent
    for g in _alive_guides(tut, step_index):
        if g.id in draws or g.id in reuses:
            continue
        if g.first_step == step_index:
            continue
        pts = guide_xy.get(g.id)
        if pts is None:
            continue
        (x0, y0), (x1, y1) = pts
        if (x0, y0) == (x1, y1):
            layers["prior_art"].append(_circle(x0, y0, 2.5, COLOR_PRIOR))
        else:
            layers["prior_art"].append(_line(x0, y0, x1, y1, COLOR_PRIOR, 1.0))
    for old in tut.steps[:step_index]:
        for kind, payload in _step_elements(old):
            if kind == "edge":
                pts = _project_seg(cam, payload[0], payload[1])
                if pts is None:
                    continue
                layers["prior_art"].append(
                    _line(*pts[0], *pts[1], COLOR_PRIOR, 1.2))
            else:
                proj = []
                ok = True
                for p in payload:
                    try:
                        proj.append(project(cam, tuple(p)))
                    except (BehindCameraError, ValueError):
                        ok = False
                        break
                if ok and len(proj) >= 2:
                    layers["prior_art"].append(
                        _polyline(proj, COLOR_PRIOR, 1.2))

    def guide_stroke(gid: int, color: str, layer: str, width: float):
        pts = guide_xy.get(gid)
        if pts is None:
            warnings.append(f"guide {gid} skipped: endpoint behind camera")
            return
        (x0, y0), (x1, y1) = pts
        if (x0, y0) == (x1, y1):
            layers[layer].append(_circle(x0, y0, 3, color, fill=color))
        else:
            layers[layer].append(_line(x0, y0, x1, y1, color, width))

    for gid in sorted(reuses):
        guide_stroke(gid, COLOR_RETAINED, "retained_guides", 1.6)
    for gid in sorted(draws):
        guide_stroke(gid, COLOR_FRESH, "fresh_guides", 1.8)

    new_pts_3d: list[tuple] = []
    for kind, payload in _step_elements(step):
        if kind == "edge":
            pts = seg_or_warn(payload[0], payload[1], "edge")
            if pts is None:
                continue
            layers["new_edges"].append(_line(*pts[0], *pts[1], COLOR_EDGE, 2.0))
            new_pts_3d.append((tuple(payload[0]), tuple(payload[1])))
        else:
            proj = []
            ok = True
            for p in payload:
                try:
                    proj.append(project(cam, tuple(p)))
                except (BehindCameraError, ValueError):
                    ok = False
                    break
            if not ok:
                warnings.append("polyline skipped: point behind camera")
                continue
            if len(proj) >= 2:
                layers["new_edges"].append(_polyline(proj, COLOR_EDGE, 2.0))

    # rays from this step's new axis-parallel strokes toward their VP
    ray_sources: list[tuple[float, float, int]] = []
    for p0, p1 in new_pts_3d:
        a = _axis_of_segment(p0, p1)
        if a is None or vps[a] is None:
            continue
        pts = _project_seg(cam, p0, p1)
        if pts is None:
            continue
        mx = 0.5 * (pts[0][0] + pts[1][0])
        my = 0.5 * (pts[0][1] + pts[1][1])
        ray_sources.append((mx, my, a))
    for gid in sorted(draws):
        g = tut.guides[gid]
        a = _axis_of_segment(g.p0, g.p1)
        if a is None or vps[a] is None:
            continue
        pts = guide_xy.get(gid)
        if pts is None:
            continue
        mx = 0.5 * (pts[0][0] + pts[1][0])
        my = 0.5 * (pts[0][1] + pts[1][1])
        ray_sources.append((mx, my, a))
    seen_rays: set[tuple] = set()
    for mx, my, a in ray_sources:
        vx, vy = vps[a]
        key = (round(mx, 3), round(my, 3), a)
        if key in seen_rays:
            continue
        seen_rays.add(key)
        dx, dy = vx - mx, vy - my
        n = math.hypot(dx, dy)
        if n < 1e-9:
            continue
        if 0 <= vx <= w and 0 <= vy <= h:
            end = (vx, vy)
        else:
            end = _clip_ray(mx, my, dx / n, dy / n, w, h)
            if end is None:
                continue
        layers["vanishing"].append(
            _line(mx, my, end[0], end[1], COLOR_VANISH, 0.7,
                  dash="3 5", opacity=0.7))

    # labels: step caption plus any skip warnings
    layers["labels"].append(_text(
        12, h - 14,
        f"Step {step_index}: {step.instruction_text}", 13))
    for k, msg in enumerate(warnings):
        layers["labels"].append(_text(
            12, 20 + 15 * k, f"warning: {msg}", 11, "#AA3333"))

    inset = _inset(tut, step, w, h)

    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="#FFFFFF" />',
    ]
    for name in LAYER_ORDER:
        body.append(f'<g id="{name}">')
        body.extend(layers[name])
        body.append("</g>")
    body.extend(inset)
    body.append("</svg>")
    return StepSheet(
        step_index=step_index,
        svg_text="\n".join(body) + "\n",
        layers=layers,
        warnings=warnings,
    )


def _inset(tut: Tutorial, step: TutorialStep, w: int, h: int) -> list[str]:
    """Thumbnail of the whole scaffold with the active part highlighted."""
    cam = tut.camera
    segs: list[tuple[tuple, tuple, bool]] = []
    pts2: list[tuple[float, float]] = []
    for s in tut.steps:
        if s.kind != "DrawPrimitiveEdge":
            continue
        active = step.part_id is not None and s.part_id == step.part_id
        for e in s.payload.get("edges", []):
            pts = _project_seg(cam, e[0], e[1])
            if pts is None:
                continue
            segs.append((pts[0], pts[1], active))
            pts2.extend(pts)
    if not segs:
        return []
    iw = w * INSET_FRACTION
    ih = h * INSET_FRACTION
    x0 = w - iw - 10
    y0 = 10
    xs = [p[0] for p in pts2]
    ys = [p[1] for p in pts2]
    span_x = max(xs) - min(xs) or 1.0
    span_y = max(ys) - min(ys) or 1.0
    pad = 8.0
    scale = min((iw - 2 * pad) / span_x, (ih - 2 * pad) / span_y)
    ox = x0 + (iw - scale * span_x) / 2 - scale * min(xs)
    oy = y0 + (ih - scale * span_y) / 2 - scale * min(ys)

    out = [
        '<g id="inset">',
        f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(iw)}" '
        f'height="{_fmt(ih)}" fill="#FFFFFF" stroke="#888888" '
        'stroke-width="1" />',
    ]
    # draw gray first so the highlighted part stays on top
    for (ax, ay), (bx, by), active in segs:
        if not active:
            out.append(_line(
                ox + scale * ax, oy + scale * ay,
                ox + scale * bx, oy + scale * by, COLOR_PRIOR, 0.8))
    for (ax, ay), (bx, by), active in segs:
        if active:
            out.append(_line(
                ox + scale * ax, oy + scale * ay,
                ox + scale * bx, oy + scale * by, COLOR_FRESH, 1.4))
    out.append("</g>")
    return out


# ---------------------------------------------------------------------------
# contact sheet


def contact_sheet(tut: Tutorial, sheets: list[StepSheet] | None = None) -> str:
    """All step sheets on one page, four to a row."""
    if sheets is None:
        sheets = [render_step(tut, i) for i in range(len(tut.steps))]
    cols = 4
    rows = (len(sheets) + cols - 1) // cols
    cw, caption = 360, 18
    ch = int(cw * tut.camera.height / tut.camera.width)
    gap = 12
    total_w = cols * cw + (cols + 1) * gap
    total_h = rows * (ch + caption + gap) + gap
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" '
        f'height="{total_h}" viewBox="0 0 {total_w} {total_h}">',
        f'<rect x="0" y="0" width="{total_w}" height="{total_h}" '
        'fill="#F2F2F2" />',
    ]
    for k, sheet in enumerate(sheets):
        r, c = divmod(k, cols)
        x = gap + c * (cw + gap)
        y = gap + r * (ch + caption + gap)
        inner = sheet.svg_text.strip()
        out.append(
            f'<svg x="{_fmt(x)}" y="{_fmt(y)}" width="{cw}" height="{ch}" '
            f'viewBox="0 0 {tut.camera.width} {tut.camera.height}" '
            'preserveAspectRatio="xMidYMid meet">')
        # strip the outer svg element, keep its content
        first = inner.index(">") + 1
        last = inner.rindex("</svg>")
        out.append(inner[first:last])
        out.append("</svg>")
        out.append(_text(
            x + cw / 2, y + ch + 14, f"Step {sheet.step_index}",
            12, "#333333", anchor="middle"))
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# tutorial document


def export_tutorial(tut: Tutorial) -> str:
    doc = {
        "kind": DOC_KIND,
        "header": {
            "camera": tut.camera.to_dict(),
            "ability": tut.ability,
            "vanishing_points": [
                list(vp) if vp is not None else None
                for vp in tut.vanishing_points
            ],
            "config_hash": tut.config_hash,
        },
        "guides": [g.to_dict() for g in tut.guides],
        "steps": [s.to_dict() for s in tut.steps],
        "part_order": list(tut.part_order),
        "skipped_parts": list(tut.skipped_parts),
        "chosen": {str(p): c for p, c in sorted(tut.chosen.items())},
    }
    return canonical_dumps(doc)


def import_tutorial(text: str) -> Tutorial:
    try:
        doc = loads(text)
    except ValueError as e:
        raise TutorialDocumentError(f"not a valid document: {e}") from e
    if not isinstance(doc, dict) or doc.get("kind") != DOC_KIND:
        raise TutorialDocumentError("document kind is not 'tutorial'")
    try:
        header = doc["header"]
        camera = Camera.from_dict(header["camera"])
        vps = [
            tuple(vp) if vp is not None else None
            for vp in header["vanishing_points"]
        ]
        guides = [TutorialGuide.from_dict(g) for g in doc["guides"]]
        steps = [TutorialStep.from_dict(s) for s in doc["steps"]]
        return Tutorial(
            steps=steps,
            camera=camera,
            ability=header["ability"],
            vanishing_points=vps,
            guides=guides,
            skipped_parts=[int(p) for p in doc["skipped_parts"]],
            part_order=[int(p) for p in doc["part_order"]],
            chosen={int(p): int(c) for p, c in doc["chosen"].items()},
            config_hash=str(header["config_hash"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise TutorialDocumentError(f"malformed tutorial document: {e}") from e


def render_all(tut: Tutorial, outdir: str) -> list[str]:
    """Write step_000.svg ... plus contact_sheet.svg; returns the paths."""
    import os

    os.makedirs(outdir, exist_ok=True)
    paths = []
    sheets = []
    for i in range(len(tut.steps)):
        sheet = render_step(tut, i)
        sheets.append(sheet)
        p = os.path.join(outdir, f"step_{i:03d}.svg")
        with open(p, "w", encoding="utf-8") as f:
            f.write(sheet.svg_text)
        paths.append(p)
    cs = os.path.join(outdir, "contact_sheet.svg")
    with open(cs, "w", encoding="utf-8") as f:
        f.write(contact_sheet(tut, sheets))
    paths.append(cs)
    return paths
