import { describe, expect, it } from "vitest";

import { OrbitCamera, quantKey } from "../src/camera.js";
import type { CameraDoc, Vec3 } from "../src/types.js";

const CAM: CameraDoc = {
  eye: [2.3, 1.4, 2.0],
  target: [0.5, 0.4, 0.25],
  up: [0, 1, 0],
  fov_deg: 40,
  width: 800,
  height: 600,
};

function dist(a: Vec3, b: Vec3): number {
  return Math.hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

describe("quantKey", () => {
  it("absorbs sub-step jitter", () => {
    const moved: CameraDoc = {
      ...CAM,
      eye: [2.3 + 1e-9, 1.4, 2.0 - 1e-9],
    };
    expect(quantKey(moved, 2.5)).toBe(quantKey(CAM, 2.5));
  });

  it("separates a real move", () => {
    const moved: CameraDoc = { ...CAM, eye: [2.4, 1.4, 2.0] };
    expect(quantKey(moved, 2.5)).not.toBe(quantKey(CAM, 2.5));
  });

  it("scales its grid with the scene diagonal", () => {
    expect(quantKey(CAM, 1.0)).not.toBe(quantKey(CAM, 100.0));
  });

  it("separates abilities of the sheet size", () => {
    expect(quantKey({ ...CAM, width: 801 }, 2.5)).not.toBe(quantKey(CAM, 2.5));
  });

  it("rejects a zero up vector", () => {
    expect(() => quantKey({ ...CAM, up: [0, 0, 0] }, 2.5)).toThrow(/up/);
  });
});

describe("OrbitCamera", () => {
  it("reproduces the base camera before any input", () => {
    const orbit = new OrbitCamera(CAM);
    const cam = orbit.camera();
    expect(dist(cam.eye, CAM.eye)).toBeLessThan(1e-9);
    expect(cam.target).toEqual(CAM.target);
    expect(cam.fov_deg).toBe(CAM.fov_deg);
  });

  it("orbiting preserves the distance to the target", () => {
    const orbit = new OrbitCamera(CAM);
    const r0 = dist(CAM.eye, CAM.target);
    orbit.orbit(37, -12);
    expect(dist(orbit.camera().eye, CAM.target)).toBeCloseTo(r0, 9);
  });

  it("zoom scales the distance", () => {
    const orbit = new OrbitCamera(CAM);
    const r0 = dist(CAM.eye, CAM.target);
    orbit.zoom(1.25);
    expect(dist(orbit.camera().eye, CAM.target)).toBeCloseTo(1.25 * r0, 9);
  });

  it("a half turn lands on the opposite side", () => {
    const orbit = new OrbitCamera(CAM);
    orbit.orbit(Math.PI / 0.01, 0); // yaw gain is 0.01 per pixel
    const eye = orbit.camera().eye;
    const t = CAM.target;
    // horizontal offset negated, height unchanged
    expect(eye[0] - t[0]).toBeCloseTo(-(CAM.eye[0] - t[0]), 6);
    expect(eye[2] - t[2]).toBeCloseTo(-(CAM.eye[2] - t[2]), 6);
    expect(eye[1]).toBeCloseTo(CAM.eye[1], 9);
  });

  it("pitch never reaches the pole", () => {
    const orbit = new OrbitCamera(CAM);
    orbit.orbit(0, 100000);
    expect(Math.abs(orbit.pitch)).toBeLessThan(Math.PI / 2);
    const cam = orbit.camera();
    expect(Number.isFinite(cam.eye[0])).toBe(true);
  });
});
