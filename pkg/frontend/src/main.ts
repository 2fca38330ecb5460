// DOM shell. Everything interesting lives in session.ts; this file only
// wires pointer events and pushes strings into elements.

import { ServiceClient } from "./api.js";
import { OrbitCamera } from "./camera.js";
import { projectEdges } from "./preview.js";
import { SessionController } from "./session.js";
import type { Ability, CameraDoc } from "./types.js";
import { ABILITIES } from "./types.js";

const DEFAULT_CAMERA: CameraDoc = {
  eye: [2.3, 1.4, 2.0],
  target: [0.5, 0.4, 0.25],
  up: [0, 1, 0],
  fov_deg: 40,
  width: 800,
  height: 600,
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  parent: HTMLElement,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (text) node.textContent = text;
  parent.appendChild(node);
  return node;
}

export function mount(root: HTMLElement, baseUrl: string): void {
  const controller = new SessionController(
    new ServiceClient(baseUrl),
    DEFAULT_CAMERA,
  );
  const orbit = new OrbitCamera(DEFAULT_CAMERA);

  const banner = el("div", root);
  banner.className = "banner";
  const bar = el("div", root);
  const prevBtn = el("button", bar, "prev");
  const nextBtn = el("button", bar, "next");
  const abilitySel = el("select", bar);
  for (const a of ABILITIES) {
    const opt = document.createElement("option");
    opt.value = a;
    opt.textContent = a;
    abilitySel.appendChild(opt);
  }
  const caption = el("div", bar);
  const skipped = el("div", root);
  const sheet = el("div", root);
  sheet.className = "sheet";
  const preview = el("canvas", root);
  preview.width = 320;
  preview.height = 240;

  function drawPreview(): void {
    const ctx = preview.getContext("2d");
    if (!ctx || !controller.doc) return;
    ctx.clearRect(0, 0, preview.width, preview.height);
    const cam = orbit.camera();
    const sx = preview.width / cam.width;
    const sy = preview.height / cam.height;
    ctx.strokeStyle = "#555";
    ctx.beginPath();
    for (const seg of projectEdges(controller.doc, cam)) {
      ctx.moveTo(seg.x0 * sx, seg.y0 * sy);
      ctx.lineTo(seg.x1 * sx, seg.y1 * sy);
    }
    ctx.stroke();
  }

  async function refresh(): Promise<void> {
    banner.textContent = controller.banner ?? "";
    prevBtn.disabled = !controller.canPrev;
    nextBtn.disabled = !controller.canNext;
    const step = controller.currentStep();
    if (!step || !controller.doc) return;
    caption.textContent =
      `Step ${step.index + 1}/${controller.doc.steps.length}: ` +
      step.instruction_text;
    skipped.textContent = controller.skippedParts().length
      ? `skipped parts: ${controller.skippedParts().join(", ")}`
      : "";
    // the sheet is the service's SVG, injected untouched
    sheet.innerHTML = await controller.currentSvg();
    drawPreview();
  }

  prevBtn.addEventListener("click", () => {
    controller.prev();
    void refresh();
  });
  nextBtn.addEventListener("click", () => {
    controller.next();
    void refresh();
  });
  abilitySel.addEventListener("change", () => {
    void controller
      .setAbility(abilitySel.value as Ability)
      .then(refresh);
  });

  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  preview.addEventListener("pointerdown", (e) => {
    dragging = true;
    lastX = e.clientX;
    lastY = e.clientY;
    preview.setPointerCapture(e.pointerId);
  });
  preview.addEventListener("pointermove", (e) => {
    if (!dragging) return;
    orbit.orbit(e.clientX - lastX, e.clientY - lastY);
    lastX = e.clientX;
    lastY = e.clientY;
    drawPreview();
  });
  preview.addEventListener("pointerup", () => {
    dragging = false;
    void controller.orbitEnd(orbit.camera()).then(refresh);
  });
  preview.addEventListener("wheel", (e) => {
    e.preventDefault();
    orbit.zoom(e.deltaY > 0 ? 1.1 : 1 / 1.1);
    drawPreview();
  });

  void controller.load().then(refresh);
}

const rootEl = document.getElementById("app");
if (rootEl) {
  mount(rootEl, rootEl.dataset["serviceUrl"] ?? "http://127.0.0.1:8042");
}
