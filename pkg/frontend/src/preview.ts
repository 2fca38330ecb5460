// Wireframe for the orbit widget. This is the one place the client does
// its own projection, and it only ever draws 3D segments the service
// already put in the tutorial document; the tutorial sheet itself is
// always the service's SVG, untouched.

import type { CameraDoc, TutorialDoc, Vec3 } from "./types.js";
import { STEP_EDGE } from "./types.js";

export interface Seg2 {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  partId: number | null;
}

function norm(v: Vec3): Vec3 {
  const n = Math.hypot(...v) || 1;
  return [v[0] / n, v[1] / n, v[2] / n];
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

const NEAR = 1e-6;

/** All 3D primitive-edge segments the tutorial carries, per part. */
export function edgeSegments(doc: TutorialDoc): { a: Vec3; b: Vec3; partId: number | null }[] {
  const out: { a: Vec3; b: Vec3; partId: number | null }[] = [];
  for (const step of doc.steps) {
    if (step.kind !== STEP_EDGE) continue;
    for (const [a, b] of step.payload.edges ?? []) {
      out.push({ a, b, partId: step.part_id });
    }
  }
  return out;
}

/** Diagonal of the box spanned by every edge endpoint; the client's
 * stand-in for the model size when quantizing cameras. */
export function sceneDiagonal(doc: TutorialDoc): number {
  const lo: Vec3 = [Infinity, Infinity, Infinity];
  const hi: Vec3 = [-Infinity, -Infinity, -Infinity];
  for (const { a, b } of edgeSegments(doc)) {
    for (const p of [a, b]) {
      for (let i = 0; i < 3; i++) {
        lo[i] = Math.min(lo[i]!, p[i]!);
        hi[i] = Math.max(hi[i]!, p[i]!);
      }
    }
  }
  if (!Number.isFinite(lo[0])) return 1.0;
  return Math.hypot(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]) || 1.0;
}

/** Perspective-project the tutorial's edges for the given camera,
 * clipping at the near plane. Good enough for a preview; never used
 * for the sheet. */
export function projectEdges(doc: TutorialDoc, cam: CameraDoc): Seg2[] {
  const fwd = norm(sub(cam.target, cam.eye));
  const right = norm(cross(fwd, norm(cam.up)));
  const up = cross(right, fwd);
  const focal = (0.5 * cam.width) / Math.tan(((cam.fov_deg / 2) * Math.PI) / 180);
  const cx = cam.width / 2;
  const cy = cam.height / 2;

  const toCam = (p: Vec3): Vec3 => {
    const d = sub(p, cam.eye);
    return [dot(d, right), dot(d, up), dot(d, fwd)];
  };
  const toScreen = (c: Vec3): [number, number] => [
    cx + (focal * c[0]) / c[2],
    cy - (focal * c[1]) / c[2],
  ];

  const out: Seg2[] = [];
  for (const { a, b, partId } of edgeSegments(doc)) {
    let ca = toCam(a);
    let cb = toCam(b);
    if (ca[2] <= NEAR && cb[2] <= NEAR) continue;
    if (ca[2] <= NEAR || cb[2] <= NEAR) {
      // slide the hidden endpoint up to the near plane
      const t = (NEAR - ca[2]) / (cb[2] - ca[2]);
      const cut: Vec3 = [
        ca[0] + t * (cb[0] - ca[0]),
        ca[1] + t * (cb[1] - ca[1]),
        NEAR,
      ];
      if (ca[2] <= NEAR) ca = cut;
      else cb = cut;
    }
    const [x0, y0] = toScreen(ca);
    const [x1, y1] = toScreen(cb);
    out.push({ x0, y0, x1, y1, partId });
  }
  return out;
}
