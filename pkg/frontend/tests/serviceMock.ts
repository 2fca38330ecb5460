// Replays the committed service fixtures as a fetch implementation, so
// tests exercise genuine wire bytes without a live server.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { CameraDoc } from "../src/types.js";

const DATA = join(
  dirname(fileURLToPath(import.meta.url)),
  "..",
  "fixtures",
  "data",
);

export const BASE = "http://svc.test";

export interface ManifestCompile {
  camera: string;
  ability: string;
  session: string;
  file: string;
}

export interface Manifest {
  meta: string;
  cameras: Record<string, CameraDoc>;
  compiles: ManifestCompile[];
  steps: Record<string, { count: number; prefix: string }>;
}

export function readFixture(name: string): string {
  return readFileSync(join(DATA, name), "utf-8");
}

export const manifest: Manifest = JSON.parse(readFixture("manifest.json"));

export interface LoggedRequest {
  method: string;
  url: string;
}

function jsonError(status: number, message: string): Response {
  return new Response(JSON.stringify({ error: { status, message } }), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function near(a: number[], b: number[]): boolean {
  return a.length === b.length && a.every((v, i) => Math.abs(v - b[i]!) < 1e-9);
}

/** Fetch over the fixture set. Mirrors the service's routing and error
 * document shape; camera/ability pairs outside the fixture set are a
 * test bug and throw. */
export function makeFetch(log?: LoggedRequest[]): typeof fetch {
  return async (input, init) => {
    const url = String(input);
    const method = init?.method ?? "GET";
    log?.push({ method, url });
    if (!url.startsWith(BASE + "/")) throw new Error(`unexpected host: ${url}`);
    const path = url.slice(BASE.length);

    if (method === "GET" && path === "/meta") {
      return new Response(readFixture(manifest.meta), {
        status: 200,
        headers: { "Content-Type": "application/json" },
      });
    }

    if (method === "POST" && path === "/compile") {
      const body = JSON.parse(String(init?.body)) as {
        camera: CameraDoc;
        ability: string;
      };
      if (near(body.camera.eye, body.camera.target)) {
        return jsonError(422, "degenerate camera: eye equals target");
      }
      const camName = Object.entries(manifest.cameras).find(
        ([, c]) =>
          near(c.eye, body.camera.eye) && near(c.target, body.camera.target),
      )?.[0];
      const entry = manifest.compiles.find(
        (c) => c.camera === camName && c.ability === body.ability.toLowerCase(),
      );
      if (!entry) throw new Error(`no fixture for ${body.ability} @ ${camName}`);
      return new Response(readFixture(entry.file), {
        status: 200,
        headers: {
          "Content-Type": "application/json",
          "X-H2S-Session": entry.session,
        },
      });
    }

    const step = path.match(/^\/step\/(\d+)\.svg\?session=([0-9a-f]{16})$/);
    if (method === "GET" && step) {
      const index = Number(step[1]);
      const info = manifest.steps[step[2]!];
      if (!info) {
        return jsonError(404, `unknown session '${step[2]}'; POST /compile first`);
      }
      if (index >= info.count) {
        return jsonError(404, `step ${index} out of range`);
      }
      return new Response(
        readFixture(`${info.prefix}${String(index).padStart(3, "0")}.svg`),
        { status: 200, headers: { "Content-Type": "image/svg+xml" } },
      );
    }

    return jsonError(404, `no route for ${method} ${path}`);
  };
}
