// Client-side state machine. Holds exactly what the thin-client
// contract allows: the camera, the current step index, and the latest
// service documents verbatim.

import { ServiceClient, ServiceError } from "./api.js";
import { quantKey } from "./camera.js";
import { sceneDiagonal } from "./preview.js";
import type { Ability, CameraDoc, MetaDoc, StepDoc, TutorialDoc } from "./types.js";

export class SessionController {
  meta: MetaDoc | null = null;
  doc: TutorialDoc | null = null;
  session: string | null = null;
  ability: Ability = "novice";
  stepIndex = 0;
  banner: string | null = null;

  private camera: CameraDoc;
  private lastKey: string | null = null;
  private diag = 1.0;
  private token = 0;
  private svgCache = new Map<string, string>();

  constructor(
    private readonly client: ServiceClient,
    initialCamera: CameraDoc,
  ) {
    this.camera = initialCamera;
  }

  async load(): Promise<void> {
    this.meta = await this.client.meta();
    await this.recompile(this.camera, this.ability, null);
  }

  /** Returns false when the camera quantizes to the same key as the
   * current tutorial, in which case no request is made at all. */
  async orbitEnd(camera: CameraDoc): Promise<boolean> {
    if (this.doc && quantKey(camera, this.diag) === this.lastKey) {
      return false;
    }
    await this.recompile(camera, this.ability, null);
    return true;
  }

  async setAbility(ability: Ability): Promise<void> {
    if (ability === this.ability && this.doc) return;
    await this.recompile(this.camera, ability, this.anchorPart());
  }

  /** The part the user is currently working on: this step's part, or
   * the nearest earlier step that has one. */
  private anchorPart(): number | null {
    if (!this.doc) return null;
    for (let i = this.stepIndex; i >= 0; i--) {
      const part = this.doc.steps[i]?.part_id;
      if (part !== null && part !== undefined) return part;
    }
    return null;
  }

  private async recompile(
    camera: CameraDoc,
    ability: Ability,
    keepPart: number | null,
  ): Promise<void> {
    const token = ++this.token;
    let result;
    try {
      result = await this.client.compile(camera, ability);
    } catch (err) {
      if (token !== this.token) return; // a newer compile superseded this one
      this.banner =
        err instanceof ServiceError ? err.message : String(err);
      return; // previous tutorial stays up
    }
    if (token !== this.token) return;

    this.doc = result.doc;
    this.session = result.session;
    this.camera = camera;
    this.ability = ability;
    this.banner = null;
    this.diag = sceneDiagonal(result.doc);
    this.lastKey = quantKey(camera, this.diag);

    const steps = result.doc.steps;
    let index = Math.min(this.stepIndex, steps.length - 1);
    if (keepPart !== null) {
      const hit = steps.findIndex((s) => s.part_id === keepPart);
      if (hit >= 0) index = hit;
    }
    this.stepIndex = Math.max(0, index);
  }

  // -- step navigation ----------------------------------------------------

  get canPrev(): boolean {
    return this.doc !== null && this.stepIndex > 0;
  }

  get canNext(): boolean {
    return this.doc !== null && this.stepIndex < this.doc.steps.length - 1;
  }

  next(): void {
    if (this.canNext) this.stepIndex += 1;
  }

  prev(): void {
    if (this.canPrev) this.stepIndex -= 1;
  }

  jump(index: number): void {
    if (!this.doc) return;
    this.stepIndex = Math.min(Math.max(0, index), this.doc.steps.length - 1);
  }

  currentStep(): StepDoc | null {
    return this.doc?.steps[this.stepIndex] ?? null;
  }

  skippedParts(): number[] {
    return this.doc?.skipped_parts ?? [];
  }

  /** The service's sheet for the current step, byte for byte. */
  async currentSvg(): Promise<string> {
    if (!this.doc || !this.session) throw new Error("no tutorial loaded");
    const key = `${this.session}/${this.stepIndex}`;
    const hit = this.svgCache.get(key);
    if (hit !== undefined) return hit;
    const svg = await this.client.stepSvg(this.session, this.stepIndex);
    this.svgCache.set(key, svg);
    return svg;
  }
}
