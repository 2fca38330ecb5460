// Wire types, mirroring the service's JSON documents field for field.

export type Vec3 = [number, number, number];

export interface CameraDoc {
  eye: Vec3;
  target: Vec3;
  up: Vec3;
  fov_deg: number;
  width: number;
  height: number;
}

export interface MetaPart {
  id: number;
  name: string;
  kind: string;
  chosen_candidate: number | null;
}

export interface MetaDoc {
  kind: "meta";
  stats: {
    segments: number;
    triangles: number;
    candidates: number;
    objective: number;
    optimal: boolean;
    method: string;
  };
  parts: MetaPart[];
  relations: Record<string, unknown>[];
  order: number[];
}

export interface GuideDoc {
  id: number;
  kind: string;
  role: string;
  p0: Vec3;
  p1: Vec3;
  host_part: number;
  ability_min: string;
  recipe_step: number;
  first_step: number;
  last_step: number;
}

export interface StepDoc {
  index: number;
  kind: string;
  part_id: number | null;
  payload: {
    draw?: number[];
    reuse?: number[];
    erase?: number[];
    edges?: [Vec3, Vec3][];
    polylines?: Vec3[][];
    vanishing_points?: [number, number][];
    candidate?: number;
  };
  instruction_text: string;
  inset_hint: number | null;
}

export interface TutorialDoc {
  kind: "tutorial";
  header: {
    ability: string;
    camera: CameraDoc;
    config_hash: string;
    vanishing_points: [number, number][];
  };
  guides: GuideDoc[];
  steps: StepDoc[];
  part_order: number[];
  skipped_parts: number[];
  chosen: Record<string, number>;
}

export const STEP_GUIDE = "DrawGuide";
export const STEP_EDGE = "DrawPrimitiveEdge";
export const STEP_ERASE = "EraseGuides";

export type Ability = "novice" | "apprentice" | "master";
export const ABILITIES: readonly Ability[] = ["novice", "apprentice", "master"];
