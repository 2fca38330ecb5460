// Orbit camera and the service's quantization, reproduced client-side so
// a no-op drag can be recognized without a round trip.

import type { CameraDoc, Vec3 } from "./types.js";

const QUANT_REL = 1e-4;

/** Same rounding grid the service hashes into session keys. Two cameras
 * with equal keys compile to the same tutorial, so equal keys mean a
 * recompile request would be pure waste. */
export function quantKey(cam: CameraDoc, diag: number): string {
  const posStep = QUANT_REL * (diag > 0 ? diag : 1.0);
  const key: number[] = [];
  for (const v of [...cam.eye, ...cam.target]) key.push(Math.round(v / posStep));
  const n = Math.hypot(...cam.up);
  if (n <= 0) throw new Error("camera up vector is zero");
  for (const u of cam.up) key.push(Math.round(u / n / QUANT_REL));
  key.push(Math.round(cam.fov_deg / (180 * QUANT_REL)), cam.width, cam.height);
  return key.join(",");
}

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

const EPS_PITCH = 1e-3; // stay off the poles; up is the fixed world y

/**
 * Spherical coordinates around a fixed target. Pointer deltas adjust
 * yaw/pitch, wheel adjusts radius; `camera()` emits the wire document.
 */
export class OrbitCamera {
  yaw: number;
  pitch: number;
  radius: number;

  constructor(private readonly base: CameraDoc) {
    const off = sub(base.eye, base.target);
    this.radius = Math.hypot(...off);
    this.yaw = Math.atan2(off[0], off[2]);
    this.pitch = Math.asin(off[1] / this.radius);
  }

  orbit(dxPx: number, dyPx: number): void {
    this.yaw += dxPx * 0.01;
    this.pitch += dyPx * 0.01;
    const lim = Math.PI / 2 - EPS_PITCH;
    this.pitch = Math.min(lim, Math.max(-lim, this.pitch));
  }

  zoom(factor: number): void {
    this.radius = Math.max(1e-6, this.radius * factor);
  }

  camera(): CameraDoc {
    const t = this.base.target;
    const cp = Math.cos(this.pitch);
    const eye: Vec3 = [
      t[0] + this.radius * cp * Math.sin(this.yaw),
      t[1] + this.radius * Math.sin(this.pitch),
      t[2] + this.radius * cp * Math.cos(this.yaw),
    ];
    return { ...this.base, eye, target: [...t] };
  }
}
