// The only three endpoints the viewer is allowed to touch.

import type { Ability, CameraDoc, MetaDoc, TutorialDoc } from "./types.js";

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function fail(resp: Response): Promise<never> {
  let message = `HTTP ${resp.status}`;
  try {
    const body = (await resp.json()) as { error?: { message?: string } };
    if (body.error?.message) message = body.error.message;
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ServiceError(resp.status, message);
}

export interface CompileResult {
  session: string;
  doc: TutorialDoc;
}

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  async meta(): Promise<MetaDoc> {
    const resp = await this.fetchFn(`${this.baseUrl}/meta`);
    if (!resp.ok) await fail(resp);
    return (await resp.json()) as MetaDoc;
  }

  async compile(camera: CameraDoc, ability: Ability): Promise<CompileResult> {
    const resp = await this.fetchFn(`${this.baseUrl}/compile`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ camera, ability }),
    });
    if (!resp.ok) await fail(resp);
    const session = resp.headers.get("X-H2S-Session");
    if (!session) throw new ServiceError(502, "compile response lacks session header");
    return { session, doc: (await resp.json()) as TutorialDoc };
  }

  /** Raw SVG text; the caller must not edit it (thin-client contract). */
  async stepSvg(session: string, index: number): Promise<string> {
    const resp = await this.fetchFn(
      `${this.baseUrl}/step/${index}.svg?session=${session}`,
    );
    if (!resp.ok) await fail(resp);
    return await resp.text();
  }
}
